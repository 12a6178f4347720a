use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use super::brownian::BrownianPath;
use super::coefficient::Coefficient;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerOptions {
    /// Drift evaluations are capped at this Euclidean norm.
    pub cap: f64,
    /// The path is stopped once `|X|` exceeds this radius.
    pub r_max: f64,
}

impl Default for EulerOptions {
    fn default() -> Self {
        Self { cap: 1e3, r_max: 1e2 }
    }
}

/// Apply the drift cap in place: infinite components become `+-cap`, NaNs
/// become 0, and the vector is then scaled onto the ball of radius `cap`.
pub fn cap_vector(v: &mut [f64], cap: f64) {
    for x in v.iter_mut() {
        if x.is_nan() {
            *x = 0.0;
        } else if x.is_infinite() {
            *x = cap.copysign(*x);
        }
    }
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > cap {
        let s = cap / n;
        for x in v.iter_mut() {
            *x *= s;
        }
    }
}

/// Simulated states on the path's time nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    dim: usize,
    dt: f64,
    /// Node-major states up to and including the exit node.
    states: Vec<f64>,
    /// First node with `|X| > R_max`.
    exit: Option<usize>,
}

impl Trajectory {
    pub(crate) fn new(dim: usize, dt: f64, states: Vec<f64>, exit: Option<usize>) -> Self {
        Self { dim, dt, states, exit }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn exploded(&self) -> bool {
        self.exit.is_some()
    }

    pub fn exit(&self) -> Option<usize> {
        self.exit
    }

    /// Stored nodes (all of them unless the path exploded).
    pub fn len(&self) -> usize {
        self.states.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.dt * k as f64
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.states[k * self.dim..(k + 1) * self.dim]
    }

    pub fn states(&self) -> &[f64] {
        &self.states
    }
}

pub(crate) fn check_dims<B: Coefficient + ?Sized, S: Coefficient + ?Sized>(
    b: &B,
    sigma: &S,
    x0: &[f64],
    path: &BrownianPath,
) -> Result<()> {
    let d = x0.len();
    if b.len() != d {
        return Err(Error::Dimension { expected: d, actual: b.len() });
    }
    if sigma.len() != d * d {
        return Err(Error::Dimension { expected: d * d, actual: sigma.len() });
    }
    if path.dim() != d {
        return Err(Error::Dimension { expected: d, actual: path.dim() });
    }
    Ok(())
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Explicit Euler-Maruyama for `dX = b dt + sigma dW` on the path's nodes.
pub fn euler_maruyama<B, S>(b: &B, sigma: &S, x0: &[f64], path: &BrownianPath, opts: EulerOptions) -> Result<Trajectory>
where
    B: Coefficient + ?Sized,
    S: Coefficient + ?Sized,
{
    check_dims(b, sigma, x0, path)?;
    let d = x0.len();
    let dt = path.dt();
    let steps = path.steps();
    let mut states = Vec::with_capacity((steps + 1) * d);
    states.extend_from_slice(x0);
    let mut x = x0.to_vec();
    let mut drift = vec![0.0; d];
    let mut sig = vec![0.0; d * d];
    let mut dw = vec![0.0; d];
    if norm(&x) > opts.r_max {
        return Ok(Trajectory::new(d, dt, states, Some(0)));
    }
    for k in 0..steps {
        let t = path.time(k);
        b.eval(t, &x, &mut drift);
        cap_vector(&mut drift, opts.cap);
        sigma.eval(t, &x, &mut sig);
        path.increment(k, &mut dw);
        for i in 0..d {
            let noise: f64 = (0..d).map(|j| sig[i * d + j] * dw[j]).sum();
            x[i] += drift[i] * dt + noise;
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { step: k + 1 });
        }
        states.extend_from_slice(&x);
        if norm(&x) > opts.r_max {
            return Ok(Trajectory::new(d, dt, states, Some(k + 1)));
        }
    }
    Ok(Trajectory::new(d, dt, states, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sde::coefficient::Constant;

    #[test]
    fn cap_handles_infinities() {
        let mut v = [f64::INFINITY, 0.0];
        cap_vector(&mut v, 10.0);
        assert_eq!(v, [10.0, 0.0]);
        let mut v = [3.0, 4.0];
        cap_vector(&mut v, 1.0);
        assert!((v[0] - 0.6).abs() < 1e-15 && (v[1] - 0.8).abs() < 1e-15);
        let mut v = [f64::NAN];
        cap_vector(&mut v, 1.0);
        assert_eq!(v, [0.0]);
    }

    #[test]
    fn pure_noise_is_exact() {
        let p = BrownianPath::sample(1, 0, 2, 1.0, 8).unwrap();
        let x0 = [0.5, -0.25];
        let tr = euler_maruyama(&Constant::zero(2), &Constant::identity(2), &x0, &p, EulerOptions::default()).unwrap();
        for k in 0..p.nodes() {
            for i in 0..2 {
                assert_eq!(tr.state(k)[i], x0[i] + p.value(k)[i]);
            }
        }
    }

    #[test]
    fn explosion_truncates() {
        let p = BrownianPath::sample(1, 0, 1, 1.0, 6).unwrap();
        let opts = EulerOptions { cap: 1e3, r_max: 5.0 };
        let tr = euler_maruyama(&Constant(vec![500.0]), &Constant::identity(1), &[0.0], &p, opts).unwrap();
        assert!(tr.exploded());
        assert_eq!(tr.len(), tr.exit().unwrap() + 1);
        assert!(tr.state(tr.len() - 1)[0].abs() > 5.0);
    }
}
