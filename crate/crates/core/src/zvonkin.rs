//! Zvonkin change of variables `Phi(t, x) = x + u(t, x)`, where each
//! component of `u` solves the backward problem
//!
//! ```text
//! d_t u + 1/2 a:D^2 u + b.grad u + b = 0,   u(T) = 0,   a = sigma sigma^T.
//! ```
//!
//! When `||grad u||_inf <= eta = 1/2`, `grad Phi = 1 + grad u` is invertible
//! with `||(grad Phi)^{-1}|| <= 2` (Neumann series), and `Y = Phi(t, X)`
//! solves the driftless equation `dY = Psi(t, X) dW` with
//! `Psi = (grad Phi) sigma`.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::grid::{Codomain, GridFunction, SpaceTimeField};
use crate::linalg;
use crate::parabolic::{solve_backward, step_defect, DiffusionCoefficient, ProblemKind, SolverOptions};
use crate::spectral::{self, Spectral};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZvonkinOptions {
    /// Time steps of the backward solve.
    pub steps: usize,
    /// Certification threshold for `||grad u||_inf`.
    pub eta: f64,
    pub solver: SolverOptions,
    /// Mollify the drift with index `n` before solving.
    pub mollify: Option<u32>,
}

impl Default for ZvonkinOptions {
    fn default() -> Self {
        Self { steps: 64, eta: 0.5, solver: SolverOptions::default(), mollify: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZvonkinMap {
    u: SpaceTimeField,
    grad_u: SpaceTimeField,
    grad_phi: SpaceTimeField,
    horizon: f64,
    grad_sup: f64,
    eta: f64,
    residual: f64,
}

/// Node-wise check that `1/2 < ||(grad Phi)^{-1}||_2 <= 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseBound {
    pub min: f64,
    pub max: f64,
    pub nodes: usize,
    pub pass: bool,
}

fn matrix_slices(parts: Vec<Vec<GridFunction>>) -> Result<Vec<GridFunction>> {
    parts.into_iter().map(|p| GridFunction::from_components(Codomain::Matrix, &p)).collect()
}

impl ZvonkinMap {
    /// Solve for `u` on `[0, horizon]`. `sigma` and `b` must be defined on
    /// at least that horizon; they are resampled onto the solver's time grid.
    pub fn build(
        sigma: &SpaceTimeField,
        b: &SpaceTimeField,
        horizon: f64,
        opts: ZvonkinOptions,
    ) -> Result<Self> {
        b.slice(0).require(Codomain::Vector)?;
        sigma.slice(0).require(Codomain::Matrix)?;
        if sigma.grid() != b.grid() {
            return Err(Error::IncompatibleFields);
        }
        if !(opts.eta > 0.0) {
            return Err(Error::InvalidParameter("certification threshold must be positive"));
        }
        let steps = opts.steps;
        let sigma = sigma.resample(horizon, steps)?;
        let mut b = b.resample(horizon, steps)?;
        if let Some(n) = opts.mollify {
            // resolvability depends only on the grid
            spectral::mollify(b.slice(0), n)?;
            b = b.map_slices(|s| spectral::mollify(s, n).expect("resolvable width"));
        }
        let a = DiffusionCoefficient::from_sigma(&sigma)?;
        let grid = b.grid().clone();
        let d = grid.dim();
        let sp = Spectral::new(&grid);

        let mut components = Vec::with_capacity(d);
        let mut residual: f64 = 0.0;
        for k in 0..d {
            let source = b.map_slices(|s| s.component(k));
            let report = solve_backward(&a, Some(&b), &source, opts.solver)?;
            residual = residual.max(step_defect(ProblemKind::Backward, &a, Some(&b), &source, &report.field)?);
            components.push(report.field);
        }

        let mut u_slices = Vec::with_capacity(steps + 1);
        let mut grad_u = Vec::with_capacity(steps + 1);
        let mut grad_phi = Vec::with_capacity(steps + 1);
        let mut grad_sup: f64 = 0.0;
        let mut m = vec![0.0; d * d];
        for n in 0..=steps {
            let parts: Vec<GridFunction> = components.iter().map(|c| c.slice(n).clone()).collect();
            u_slices.push(GridFunction::from_components(Codomain::Vector, &parts)?);
            // (grad u)_{kj} = d_j u_k, row-major
            let mut entries = Vec::with_capacity(d * d);
            let mut shifted = Vec::with_capacity(d * d);
            for part in &parts {
                let g = spectral::gradient_with(&sp, part);
                for j in 0..d {
                    entries.push(g.component(j));
                }
            }
            for (c, e) in entries.iter().enumerate() {
                shifted.push(if c / d == c % d { e.map(|v| v + 1.0) } else { e.clone() });
            }
            let gu = matrix_slices(vec![entries])?.remove(0);
            for k in 0..grid.len() {
                gu.node_values(k, &mut m);
                grad_sup = grad_sup.max(linalg::spectral_norm(&m, d));
            }
            grad_u.push(gu);
            grad_phi.push(matrix_slices(vec![shifted])?.remove(0));
        }
        Ok(Self {
            u: SpaceTimeField::new(horizon, u_slices)?,
            grad_u: SpaceTimeField::new(horizon, grad_u)?,
            grad_phi: SpaceTimeField::new(horizon, grad_phi)?,
            horizon,
            grad_sup,
            eta: opts.eta,
            residual,
        })
    }

    /// Halve the horizon from `t0` until the map is certified, then try one
    /// bisection step `1.5 T` towards the last failing horizon. A backward
    /// solve whose fixed-point iteration diverges counts as a failure at
    /// that horizon (shorter horizons mean shorter steps).
    pub fn shrink_horizon(sigma: &SpaceTimeField, b: &SpaceTimeField, t0: f64, opts: ZvonkinOptions) -> Result<Self> {
        let t_min = t0 * (0.5f64).powi(10);
        let attempt = |t: f64| match Self::build(sigma, b, t, opts) {
            Ok(map) => Ok(Some(map)),
            Err(Error::NonConvergence { .. }) => Ok(None),
            Err(e) => Err(e),
        };
        let mut t = t0;
        let mut last_sup = f64::INFINITY;
        loop {
            match attempt(t)? {
                Some(map) if map.certified() => {
                    if t == t0 {
                        return Ok(map);
                    }
                    return Ok(match attempt(1.5 * t)? {
                        Some(refined) if refined.certified() => refined,
                        _ => map,
                    });
                }
                Some(map) => last_sup = map.grad_sup,
                None => {}
            }
            t *= 0.5;
            if t < t_min {
                return Err(Error::HorizonExhausted { t_min, grad_sup: last_sup });
            }
        }
    }

    pub fn u(&self) -> &SpaceTimeField {
        &self.u
    }

    /// `grad u` as a matrix field, `(grad u)_{kj} = d_j u_k`.
    pub fn grad_u(&self) -> &SpaceTimeField {
        &self.grad_u
    }

    pub fn grad_phi(&self) -> &SpaceTimeField {
        &self.grad_phi
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.u.steps()
    }

    pub fn dim(&self) -> usize {
        self.u.grid().dim()
    }

    /// `||grad u||` in the spectral norm, maximized over nodes and times.
    pub fn grad_sup(&self) -> f64 {
        self.grad_sup
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn certified(&self) -> bool {
        self.grad_sup <= self.eta
    }

    /// Largest Crank-Nicolson step defect over the components of `u`.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// `Phi` sampled at the grid nodes (`x + u`, not wrapped).
    pub fn phi_field(&self) -> SpaceTimeField {
        self.u.map_slices(|s| {
            let grid = s.grid();
            let d = grid.dim();
            let n = grid.len();
            let mut data = s.data().to_vec();
            let mut x = vec![0.0; d];
            for k in 0..n {
                grid.node(k, &mut x);
                for i in 0..d {
                    data[i * n + k] += x[i];
                }
            }
            GridFunction::new(grid.clone(), Codomain::Vector, data).expect("vector layout")
        })
    }

    pub fn phi_into(&self, t: f64, x: &[f64], out: &mut [f64]) {
        self.u.evaluate_into(t, x, out);
        for (o, xi) in out.iter_mut().zip(x) {
            *o += xi;
        }
    }

    pub fn phi(&self, t: f64, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.phi_into(t, x, &mut out);
        out
    }

    /// Damped Newton solve of `Phi(t, x) = y` starting from `x = y`.
    pub fn phi_inv_into(&self, t: f64, y: &[f64], out: &mut [f64]) -> Result<()> {
        if !self.certified() {
            return Err(Error::NotCertified { grad_sup: self.grad_sup, eta: self.eta });
        }
        let d = self.dim();
        let tol = 1e-12 * (1.0 + norm(y));
        out.copy_from_slice(y);
        let mut value = vec![0.0; d];
        let mut jac = vec![0.0; d * d];
        let mut trial = vec![0.0; d];
        let residual = |x: &[f64], value: &mut [f64]| {
            self.phi_into(t, x, value);
            for (v, yi) in value.iter_mut().zip(y) {
                *v -= yi;
            }
            norm(value)
        };
        let mut r = residual(out, &mut value);
        for _ in 0..50 {
            if r <= tol {
                return Ok(());
            }
            self.grad_phi.evaluate_into(t, out, &mut jac);
            let step = linalg::solve(&jac, d, &value).ok_or(Error::InversionFailed { residual: r })?;
            let mut damping = 1.0;
            loop {
                for i in 0..d {
                    trial[i] = out[i] - damping * step[i];
                }
                let rt = residual(&trial, &mut value);
                if rt < r || damping < 1e-3 {
                    out.copy_from_slice(&trial);
                    r = rt;
                    break;
                }
                damping *= 0.5;
            }
        }
        if r <= tol {
            Ok(())
        } else {
            Err(Error::InversionFailed { residual: r })
        }
    }

    pub fn phi_inv(&self, t: f64, y: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim()];
        self.phi_inv_into(t, y, &mut out)?;
        Ok(out)
    }

    /// `Psi = (grad Phi) sigma` on the map's time grid.
    pub fn transformed_diffusion(&self, sigma: &SpaceTimeField) -> Result<SpaceTimeField> {
        if !self.certified() {
            return Err(Error::NotCertified { grad_sup: self.grad_sup, eta: self.eta });
        }
        sigma.slice(0).require(Codomain::Matrix)?;
        if sigma.grid() != self.u.grid() {
            return Err(Error::IncompatibleFields);
        }
        let sigma = sigma.resample(self.horizon, self.steps())?;
        let d = self.dim();
        let slices = (0..=self.steps())
            .map(|n| {
                let (g, s) = (self.grad_phi.slice(n), sigma.slice(n));
                let len = g.grid().len();
                let mut data = vec![0.0; len * d * d];
                let (mut gm, mut sm, mut pm) = (vec![0.0; d * d], vec![0.0; d * d], vec![0.0; d * d]);
                for k in 0..len {
                    g.node_values(k, &mut gm);
                    s.node_values(k, &mut sm);
                    linalg::mat_mul(&gm, &sm, d, &mut pm);
                    for (c, &v) in pm.iter().enumerate() {
                        data[c * len + k] = v;
                    }
                }
                GridFunction::new(g.grid().clone(), Codomain::Matrix, data)
            })
            .collect::<Result<Vec<_>>>()?;
        SpaceTimeField::new(self.horizon, slices)
    }

    /// Compute `||(grad Phi)^{-1}||_2` at every node and time.
    pub fn inverse_bound(&self) -> InverseBound {
        let d = self.dim();
        let mut m = vec![0.0; d * d];
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        let mut nodes = 0;
        for slice in self.grad_phi.slices() {
            for k in 0..slice.grid().len() {
                slice.node_values(k, &mut m);
                let v = linalg::inverse(&m, d).map_or(f64::INFINITY, |inv| linalg::spectral_norm(&inv, d));
                lo = lo.min(v);
                hi = hi.max(v);
                nodes += 1;
            }
        }
        InverseBound { min: lo, max: hi, nodes, pass: lo > 0.5 && hi <= 2.0 }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TensorGrid;

    fn unit_sigma(grid: &TensorGrid, horizon: f64) -> SpaceTimeField {
        SpaceTimeField::constant(GridFunction::identity(grid), horizon, 1).unwrap()
    }

    #[test]
    fn zero_drift_is_identity() {
        let g = TensorGrid::cube(2, 1.0, 8).unwrap();
        let b = SpaceTimeField::constant(GridFunction::zeros(&g, Codomain::Vector), 1.0, 1).unwrap();
        let sigma = unit_sigma(&g, 1.0);
        let map = ZvonkinMap::shrink_horizon(&sigma, &b, 1.0, ZvonkinOptions::default()).unwrap();
        assert_eq!(map.horizon(), 1.0);
        assert_eq!(map.grad_sup(), 0.0);
        assert!(map.certified());
        assert_eq!(map.phi(0.3, &[0.2, 0.7]), vec![0.2, 0.7]);
        assert_eq!(map.phi_inv(0.3, &[0.2, 0.7]).unwrap(), vec![0.2, 0.7]);
        let psi = map.transformed_diffusion(&sigma).unwrap();
        assert_eq!(psi.slice(3).data(), GridFunction::identity(&g).data());
    }

    #[test]
    fn constant_drift_closed_form() {
        let g = TensorGrid::cube(1, 2.0, 16).unwrap();
        let c = 0.7;
        let b = SpaceTimeField::constant(GridFunction::constant(&g, Codomain::Vector, &[c]).unwrap(), 1.0, 1).unwrap();
        let sigma = unit_sigma(&g, 1.0);
        let opts = ZvonkinOptions { steps: 10, ..Default::default() };
        let map = ZvonkinMap::build(&sigma, &b, 1.0, opts).unwrap();
        for n in 0..=10 {
            let t = map.u().time(n);
            assert!(map.u().slice(n).data().iter().all(|v| (v - c * (1.0 - t)).abs() < 1e-10));
        }
        assert!(map.grad_sup() < 1e-12);
        let y = map.phi(0.25, &[0.4]);
        assert!((y[0] - (0.4 + c * 0.75)).abs() < 1e-10);
        let x = map.phi_inv(0.25, &[1.3]).unwrap();
        assert!((x[0] - (1.3 - c * 0.75)).abs() < 1e-10);
        let psi = map.transformed_diffusion(&sigma).unwrap();
        assert!(psi.slices().all(|s| s.data().iter().all(|v| (v - 1.0).abs() < 1e-10)));
    }

    #[test]
    fn uncertified_map_refuses_inversion() {
        let g = TensorGrid::cube(1, 1.0, 32).unwrap();
        let b = SpaceTimeField::constant(
            GridFunction::from_fn(&g, Codomain::Vector, |x, o| o[0] = 5.0 * (core::f64::consts::TAU * x[0]).sin()),
            1.0,
            1,
        )
        .unwrap();
        let map = ZvonkinMap::build(&unit_sigma(&g, 1.0), &b, 1.0, ZvonkinOptions::default()).unwrap();
        assert!(!map.certified());
        assert!(matches!(map.phi_inv(0.0, &[0.1]), Err(Error::NotCertified { .. })));
    }
}
