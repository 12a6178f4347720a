use alloc::vec::Vec;

use num_traits::Float;

use super::brownian::BrownianPath;
use super::coefficient::Coefficient;
use super::estimate::{Executor, MeanVar};
use super::euler::{euler_maruyama, EulerOptions, Trajectory};
use crate::error::{Error, Result};

/// Sup-distance between consecutive levels `l` and `l + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingRow {
    pub level: u32,
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
    /// Seeds where either level exploded.
    pub excluded: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingTable {
    pub rows: Vec<CouplingRow>,
    /// `-slope` of `log2(mean)` against the level (least squares); `None`
    /// when some mean is zero.
    pub rate: Option<f64>,
}

impl CouplingTable {
    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].mean < w[0].mean)
    }
}

/// `max_n |X^{coarse}(t_n) - X^{fine}(t_n)|` over the coarse nodes.
pub fn sup_distance(coarse: &Trajectory, fine: &Trajectory) -> f64 {
    let mut worst: f64 = 0.0;
    for k in 0..coarse.len() {
        let (a, b) = (coarse.state(k), fine.state(2 * k));
        let dist = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        worst = worst.max(dist);
    }
    worst
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// For every seed, drive Euler-Maruyama at levels `min..=max` with the
/// restrictions of one Brownian path (sampled at `max`), and compare
/// consecutive levels on the coarse nodes.
#[allow(clippy::too_many_arguments)]
pub fn coupling_experiment<B, S, E>(
    b: &B,
    sigma: &S,
    x0: &[f64],
    horizon: f64,
    seeds: &[u64],
    levels: (u32, u32),
    opts: EulerOptions,
    exec: &E,
) -> Result<CouplingTable>
where
    B: Coefficient + ?Sized,
    S: Coefficient + ?Sized,
    E: Executor,
{
    let (lo, hi) = levels;
    if lo >= hi {
        return Err(Error::InvalidParameter("coupling needs at least two levels"));
    }
    if seeds.len() < 2 {
        return Err(Error::TooFewSamples { n: seeds.len(), min: 2 });
    }
    let d = x0.len();
    let per_seed = exec.map_collect(seeds.len(), |i| -> Result<Vec<Option<f64>>> {
        let finest = BrownianPath::sample(seeds[i], 0, d, horizon, hi)?;
        let mut trajectories = Vec::with_capacity((hi - lo + 1) as usize);
        for level in lo..=hi {
            let path = finest.restrict(level)?;
            trajectories.push(euler_maruyama(b, sigma, x0, &path, opts)?);
        }
        Ok(trajectories
            .windows(2)
            .map(|w| if w[0].exploded() || w[1].exploded() { None } else { Some(sup_distance(&w[0], &w[1])) })
            .collect())
    });
    let per_seed: Vec<Vec<Option<f64>>> = per_seed.into_iter().collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (j, level) in (lo..hi).enumerate() {
        let samples: Vec<f64> = per_seed.iter().filter_map(|s| s[j]).collect();
        let mv = MeanVar::from_samples(&samples);
        rows.push(CouplingRow {
            level,
            mean: mv.mean,
            stderr: if mv.n > 0 { (mv.variance() / mv.n as f64).sqrt() } else { f64::NAN },
            n: mv.n,
            excluded: (seeds.len() as u64) - mv.n,
        });
    }
    let rate = if rows.iter().all(|r| r.mean > 0.0) && rows.len() >= 2 {
        let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.level as f64, r.mean.log2())).collect();
        Some(-slope(&points))
    } else {
        None
    };
    Ok(CouplingTable { rows, rate })
}
