use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use super::brownian::BrownianPath;
use super::coefficient::Coefficient;
use super::estimate::{Executor, MCEstimate};
use super::euler::{cap_vector, check_dims, euler_maruyama, EulerOptions};
use crate::error::{Error, Result};
use crate::linalg;

/// Sample size, horizon and path resolution of a Monte-Carlo probe. Path
/// `i` is `BrownianPath::sample(seed, i, ..)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub horizon: f64,
    pub n: usize,
    pub level: u32,
    pub seed: u64,
}

pub const MIN_SAMPLES: usize = 100;

fn check_size(cfg: &McConfig) -> Result<()> {
    if cfg.n < MIN_SAMPLES {
        return Err(Error::TooFewSamples { n: cfg.n, min: MIN_SAMPLES });
    }
    Ok(())
}

fn collect<E: Executor>(
    cfg: &McConfig,
    exec: &E,
    sample: impl Fn(&BrownianPath) -> Result<Option<f64>> + Sync + Send,
    dim: usize,
) -> Result<Vec<f64>> {
    let out = exec.map_collect(cfg.n, |i| {
        let path = BrownianPath::sample(cfg.seed, i as u64, dim, cfg.horizon, cfg.level)?;
        sample(&path)
    });
    let mut samples = Vec::with_capacity(cfg.n);
    for s in out {
        if let Some(v) = s? {
            samples.push(v);
        }
    }
    Ok(samples)
}

/// Trapezoid rule on the path nodes: `dt (g_0/2 + g_1 + ... + g_N/2)`.
fn trapezoid(values: impl Iterator<Item = f64>, steps: usize, dt: f64) -> f64 {
    let mut s = 0.0;
    for (k, v) in values.enumerate() {
        s += if k == 0 || k == steps { 0.5 * v } else { v };
    }
    dt * s
}

/// `E int_0^T |f(s, X_s)| ds` along Euler-Maruyama paths of
/// `dX = b dt + sigma dW`. Non-finite values of `f` (singular points,
/// reached with probability zero) contribute 0; exploded paths are excluded.
pub fn krylov_mc<F, B, S, E>(
    f: &F,
    b: &B,
    sigma: &S,
    x0: &[f64],
    cfg: McConfig,
    opts: EulerOptions,
    exec: &E,
) -> Result<MCEstimate>
where
    F: Coefficient + ?Sized,
    B: Coefficient + ?Sized,
    S: Coefficient + ?Sized,
    E: Executor,
{
    check_size(&cfg)?;
    if f.len() != 1 {
        return Err(Error::Dimension { expected: 1, actual: f.len() });
    }
    let samples = collect(
        &cfg,
        exec,
        |path| {
            let tr = euler_maruyama(b, sigma, x0, path, opts)?;
            if tr.exploded() {
                return Ok(None);
            }
            let mut v = [0.0];
            let values = (0..tr.len()).map(|k| {
                f.eval(tr.time(k), tr.state(k), &mut v);
                if v[0].is_finite() { v[0].abs() } else { 0.0 }
            });
            Ok(Some(trapezoid(values, path.steps(), path.dt())))
        },
        x0.len(),
    )?;
    MCEstimate::from_samples(&samples, cfg.seed, cfg.n as u64)
}

/// Left-point Girsanov density
/// `rho_T = exp(-sum theta.dW - 1/2 sum |theta|^2 dt)`, `theta = sigma^{-1} b`,
/// along driftless paths `dY = sigma dW`. The drift is capped as in
/// Euler-Maruyama.
pub fn girsanov_weight<B, S, E>(
    b: &B,
    sigma: &S,
    x0: &[f64],
    cfg: McConfig,
    opts: EulerOptions,
    exec: &E,
) -> Result<MCEstimate>
where
    B: Coefficient + ?Sized,
    S: Coefficient + ?Sized,
    E: Executor,
{
    check_size(&cfg)?;
    let d = x0.len();
    let samples = collect(
        &cfg,
        exec,
        |path| {
            check_dims(b, sigma, x0, path)?;
            let dt = path.dt();
            let mut y = x0.to_vec();
            let (mut drift, mut sig, mut dw) = (vec![0.0; d], vec![0.0; d * d], vec![0.0; d]);
            let mut log_rho = 0.0;
            for k in 0..path.steps() {
                let t = path.time(k);
                b.eval(t, &y, &mut drift);
                cap_vector(&mut drift, opts.cap);
                sigma.eval(t, &y, &mut sig);
                path.increment(k, &mut dw);
                if drift.iter().any(|v| *v != 0.0) {
                    let theta = linalg::solve(&sig, d, &drift)
                        .filter(|th| th.iter().all(|v| v.is_finite()))
                        .ok_or(Error::SingularDiffusion { t })?;
                    let dot: f64 = theta.iter().zip(&dw).map(|(a, w)| a * w).sum();
                    let sq: f64 = theta.iter().map(|a| a * a).sum();
                    log_rho -= dot + 0.5 * sq * dt;
                }
                for i in 0..d {
                    y[i] += (0..d).map(|j| sig[i * d + j] * dw[j]).sum::<f64>();
                }
                if y.iter().map(|v| v * v).sum::<f64>().sqrt() > opts.r_max {
                    return Ok(None);
                }
            }
            Ok(Some(log_rho.exp()))
        },
        d,
    )?;
    MCEstimate::from_samples(&samples, cfg.seed, cfg.n as u64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KhasminskiiEstimate {
    pub estimate: MCEstimate,
    /// Samples whose exponential overflowed; when non-zero the mean is
    /// reported as infinite.
    pub overflow: u64,
}

/// `E exp(kappa int_0^T |b(s, Y_s)|^2 ds)` along driftless paths
/// `dY = sigma dW`, with the drift capped as in Euler-Maruyama.
pub fn khasminskii_functional<B, S, E>(
    b: &B,
    sigma: &S,
    x0: &[f64],
    kappa: f64,
    cfg: McConfig,
    opts: EulerOptions,
    exec: &E,
) -> Result<KhasminskiiEstimate>
where
    B: Coefficient + ?Sized,
    S: Coefficient + ?Sized,
    E: Executor,
{
    check_size(&cfg)?;
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::InvalidParameter("kappa must be positive"));
    }
    let d = x0.len();
    let zero = super::coefficient::Constant::zero(d);
    let samples = collect(
        &cfg,
        exec,
        |path| {
            check_dims(b, sigma, x0, path)?;
            let tr = euler_maruyama(&zero, sigma, x0, path, opts)?;
            if tr.exploded() {
                return Ok(None);
            }
            let mut v = vec![0.0; d];
            let values = (0..tr.len()).map(|k| {
                b.eval(tr.time(k), tr.state(k), &mut v);
                cap_vector(&mut v, opts.cap);
                v.iter().map(|x| x * x).sum::<f64>()
            });
            Ok(Some((kappa * trapezoid(values, path.steps(), path.dt())).exp()))
        },
        d,
    )?;
    let overflow = samples.iter().filter(|v| v.is_infinite()).count() as u64;
    let mut estimate = MCEstimate::from_samples(&samples, cfg.seed, cfg.n as u64)?;
    if overflow > 0 {
        estimate.mean = f64::INFINITY;
        estimate.stderr = f64::INFINITY;
    }
    Ok(KhasminskiiEstimate { estimate, overflow })
}
