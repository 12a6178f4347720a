use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::rng;

pub const MAX_LEVEL: u32 = 30;

/// Node values live on the lattice `2^-40 Z`, so increments and their
/// partial sums are exact in floating point for `|W| < 2^12`.
const LATTICE: f64 = (1u64 << 40) as f64;

fn snap(v: f64) -> f64 {
    (v * LATTICE).round() / LATTICE
}

/// Brownian path on the dyadic nodes `k 2^{-level} T`, built by bridge
/// refinement from `W(T)`. Every node value is a pure function of
/// `(seed, index, node)`, so the values at a node do not depend on the level
/// at which the path was sampled.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianPath {
    seed: u64,
    index: u64,
    dim: usize,
    horizon: f64,
    level: u32,
    /// Node-major: `values[k * dim + i]`.
    values: Vec<f64>,
}

fn check_level(level: u32) -> Result<()> {
    if level > MAX_LEVEL {
        return Err(Error::LevelOverflow(level));
    }
    Ok(())
}

impl BrownianPath {
    /// `index` selects one of many independent paths under one seed.
    pub fn sample(seed: u64, index: u64, dim: usize, horizon: f64, level: u32) -> Result<Self> {
        check_level(level)?;
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidHorizon(horizon));
        }
        if dim == 0 {
            return Err(Error::InvalidParameter("Brownian dimension must be positive"));
        }
        let mut values = vec![0.0; 2 * dim];
        let top = horizon.sqrt();
        for i in 0..dim {
            values[dim + i] = snap(top * rng::normal(seed, index, 0, i as u64));
        }
        let mut path = Self { seed, index, dim, horizon, level: 0, values };
        for _ in 0..level {
            path = path.refine()?;
        }
        Ok(path)
    }

    /// Insert bridge midpoints; existing nodes are kept bit for bit.
    pub fn refine(&self) -> Result<Self> {
        let level = self.level + 1;
        check_level(level)?;
        let d = self.dim;
        let coarse = self.nodes();
        let fine = 2 * (coarse - 1) + 1;
        let std = (self.horizon / (1u64 << level) as f64).sqrt() * 0.5f64.sqrt();
        let mut values = vec![0.0; fine * d];
        for k in 0..coarse {
            values[2 * k * d..2 * k * d + d].copy_from_slice(&self.values[k * d..k * d + d]);
        }
        for k in 0..coarse - 1 {
            let j = 2 * k + 1;
            let key = ((level as u64) << 40) | j as u64;
            for i in 0..d {
                let mid = 0.5 * (self.values[k * d + i] + self.values[(k + 1) * d + i]);
                values[j * d + i] = snap(mid + std * rng::normal(self.seed, self.index, key, i as u64));
            }
        }
        Ok(Self { values, level, ..*self })
    }

    /// The same path on a coarser level (subsampled nodes).
    pub fn restrict(&self, level: u32) -> Result<Self> {
        if level > self.level {
            return Err(Error::InvalidParameter("restriction level exceeds path level"));
        }
        let stride = 1usize << (self.level - level);
        let d = self.dim;
        let nodes = (1usize << level) + 1;
        let mut values = Vec::with_capacity(nodes * d);
        for k in 0..nodes {
            values.extend_from_slice(&self.values[k * stride * d..k * stride * d + d]);
        }
        Ok(Self { values, level, ..*self })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn steps(&self) -> usize {
        1usize << self.level
    }

    pub fn nodes(&self) -> usize {
        self.steps() + 1
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps() as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        self.dt() * k as f64
    }

    pub fn value(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    /// `W(t_{k+1}) - W(t_k)` written into `out`.
    pub fn increment(&self, k: usize, out: &mut [f64]) {
        let d = self.dim;
        for i in 0..d {
            out[i] = self.values[(k + 1) * d + i] - self.values[k * d + i];
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}
