use alloc::vec::Vec;

use num_traits::Float;

use crate::error::{Error, Result};

/// Runs independent jobs `0..n` and returns their results in index order.
/// Implementations may run jobs concurrently; results must not depend on
/// the schedule.
pub trait Executor: Sync {
    fn map_collect<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs every job on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map_collect<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}

/// Running count, mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MeanVar {
    pub n: u64,
    pub mean: f64,
    pub m2: f64,
}

impl MeanVar {
    pub fn single(x: f64) -> Self {
        Self { n: 1, mean: x, m2: 0.0 }
    }

    /// Pairwise (Chan et al.) combination of two partial aggregates.
    pub fn merge(self, other: Self) -> Self {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * (other.n as f64 / n as f64);
        let m2 = self.m2 + other.m2 + delta * delta * (self.n as f64 * other.n as f64 / n as f64);
        Self { n, mean, m2 }
    }

    /// Balanced merge tree over the samples in order.
    pub fn from_samples(samples: &[f64]) -> Self {
        match samples.len() {
            0 => Self::default(),
            1 => Self::single(samples[0]),
            len => {
                let (a, b) = samples.split_at(len / 2);
                Self::from_samples(a).merge(Self::from_samples(b))
            }
        }
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 { 0.0 } else { self.m2 / (self.n - 1) as f64 }
    }
}

/// Monte-Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MCEstimate {
    pub mean: f64,
    /// `sample std / sqrt(n)`.
    pub stderr: f64,
    /// Samples entering the mean.
    pub n: u64,
    pub seed: u64,
    /// Path indices `0..paths` were drawn under `seed`.
    pub paths: u64,
    /// Paths left out (explosion).
    pub excluded: u64,
}

impl MCEstimate {
    pub fn from_samples(samples: &[f64], seed: u64, paths: u64) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::TooFewSamples { n: samples.len(), min: 2 });
        }
        let mv = MeanVar::from_samples(samples);
        Ok(Self {
            mean: mv.mean,
            stderr: (mv.variance() / mv.n as f64).sqrt(),
            n: mv.n,
            seed,
            paths,
            excluded: paths - mv.n,
        })
    }

    /// `|mean - target| <= k * stderr`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.stderr
    }
}
