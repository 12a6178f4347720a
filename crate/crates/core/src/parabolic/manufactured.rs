//! Manufactured-solution convergence studies for the forward solver on the
//! unit torus in two dimensions.
//!
//! Coefficients are fixed smooth fields:
//!
//! ```text
//! a11 = 1 + 0.3 sin(2 pi x1) cos(2 pi x2)   a22 = 1 + 0.3 cos(2 pi x1)
//! a12 = 0.1 sin(2 pi (x1 + x2))             b   = (0.5 cos(2 pi x2), 0.5 sin(2 pi x1))
//! ```
//!
//! The spatial study uses `u* = t phi(x)` with the analytic but not
//! band-limited `phi = (1 + 0.5 sin(2 pi x2)) / (1.3 + cos(2 pi x1))`; the
//! scheme is exact in time for this `u*`, so only the spatial error remains.
//! The temporal study uses `u* = sin(3t) psi(x)` with a band-limited `psi`,
//! which the spectral derivatives resolve exactly.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;

use super::coefficient::DiffusionCoefficient;
use super::solver::{solve_forward, SolverOptions};
use crate::error::Result;
use crate::grid::{Codomain, GridFunction, SpaceTimeField, TensorGrid};

const TAU: f64 = 2.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    /// Points per axis (spatial study) or time steps (temporal study).
    pub resolution: usize,
    /// Grid L² error at the final time.
    pub error: f64,
    /// `log2` of the error ratio to the previous row.
    pub rate: Option<f64>,
}

fn coefficient_matrix(x: &[f64], out: &mut [f64]) {
    let a11 = 1.0 + 0.3 * (TAU * x[0]).sin() * (TAU * x[1]).cos();
    let a22 = 1.0 + 0.3 * (TAU * x[0]).cos();
    let a12 = 0.1 * (TAU * (x[0] + x[1])).sin();
    out.copy_from_slice(&[a11, a12, a12, a22]);
}

fn drift(x: &[f64], out: &mut [f64]) {
    out[0] = 0.5 * (TAU * x[1]).cos();
    out[1] = 0.5 * (TAU * x[0]).sin();
}

/// Value, gradient and Hessian entries `(v, [d1, d2], [d11, d12, d22])`.
type Jet = (f64, [f64; 2], [f64; 3]);

fn phi_jet(x: &[f64]) -> Jet {
    let (s, c) = ((TAU * x[0]).sin(), (TAU * x[0]).cos());
    let den = 1.3 + c;
    let g = 1.0 / den;
    let g1 = TAU * s / (den * den);
    let g2 = TAU * TAU * (c / (den * den) + 2.0 * s * s / (den * den * den));
    let (s2, c2) = ((TAU * x[1]).sin(), (TAU * x[1]).cos());
    let k = 1.0 + 0.5 * s2;
    let k1 = 0.5 * TAU * c2;
    let k2 = -0.5 * TAU * TAU * s2;
    (g * k, [g1 * k, g * k1], [g2 * k, g1 * k1, g * k2])
}

fn psi_jet(x: &[f64]) -> Jet {
    let (s1, c1) = ((TAU * x[0]).sin(), (TAU * x[0]).cos());
    let (s2, c2) = ((TAU * x[1]).sin(), (TAU * x[1]).cos());
    let c4 = (2.0 * TAU * x[0]).cos();
    let s4 = (2.0 * TAU * x[0]).sin();
    let v = s1 * c2 + 0.5 * c4;
    let d1 = TAU * c1 * c2 - TAU * s4;
    let d2 = -TAU * s1 * s2;
    let d11 = -TAU * TAU * s1 * c2 - 2.0 * TAU * TAU * c4;
    let d12 = -TAU * TAU * c1 * s2;
    let d22 = -TAU * TAU * s1 * c2;
    (v, [d1, d2], [d11, d12, d22])
}

/// `1/2 a:D^2 + b.grad` applied to a jet.
fn operator(x: &[f64], jet: &Jet) -> f64 {
    let mut a = [0.0; 4];
    let mut b = [0.0; 2];
    coefficient_matrix(x, &mut a);
    drift(x, &mut b);
    let (_, g, h) = jet;
    0.5 * (a[0] * h[0] + 2.0 * a[1] * h[1] + a[3] * h[2]) + b[0] * g[0] + b[1] * g[1]
}

fn coefficients(grid: &TensorGrid, horizon: f64, steps: usize) -> Result<(DiffusionCoefficient, SpaceTimeField)> {
    let a = GridFunction::from_fn(grid, Codomain::Matrix, coefficient_matrix);
    let a = DiffusionCoefficient::with_computed_delta(SpaceTimeField::constant(a, horizon, steps)?)?;
    let b = SpaceTimeField::constant(GridFunction::from_fn(grid, Codomain::Vector, drift), horizon, steps)?;
    Ok((a, b))
}

fn l2_error(u: &GridFunction, exact: impl Fn(&[f64]) -> f64) -> f64 {
    let grid = u.grid();
    let mut x = [0.0; 2];
    let mut s = 0.0;
    for k in 0..grid.len() {
        grid.node(k, &mut x);
        let e = u.data()[k] - exact(&x);
        s += e * e;
    }
    (s * grid.cell_volume()).sqrt()
}

fn with_rates(rows: Vec<(usize, f64)>) -> Vec<ConvergenceRow> {
    let mut out: Vec<ConvergenceRow> = Vec::with_capacity(rows.len());
    for (i, &(resolution, error)) in rows.iter().enumerate() {
        let rate = if i == 0 { None } else { Some((rows[i - 1].1 / error).log2()) };
        out.push(ConvergenceRow { resolution, error, rate });
    }
    out
}

/// Spatial refinement with `counts` points per axis on `[0, 1]` in time.
pub fn spatial_study(counts: &[usize], steps: usize, opts: SolverOptions) -> Result<Vec<ConvergenceRow>> {
    let horizon = 1.0;
    let mut rows = Vec::with_capacity(counts.len());
    for &n in counts {
        let grid = TensorGrid::cube(2, 1.0, n)?;
        let (a, b) = coefficients(&grid, horizon, steps)?;
        let f = SpaceTimeField::scalar_from_fn(&grid, horizon, steps, |t, x| {
            let jet = phi_jet(x);
            jet.0 - t * operator(x, &jet)
        })?;
        let r = solve_forward(&a, Some(&b), &f, opts)?;
        let err = l2_error(r.field.slice(steps), |x| horizon * phi_jet(x).0);
        rows.push((n, err));
    }
    Ok(with_rates(rows))
}

/// Temporal refinement on an `n x n` grid.
pub fn temporal_study(count: usize, steps: &[usize], opts: SolverOptions) -> Result<Vec<ConvergenceRow>> {
    let horizon = 1.0;
    let grid = TensorGrid::cube(2, 1.0, count)?;
    let mut rows = Vec::with_capacity(steps.len());
    for &m in steps {
        let (a, b) = coefficients(&grid, horizon, m)?;
        let f = SpaceTimeField::scalar_from_fn(&grid, horizon, m, |t, x| {
            let jet = psi_jet(x);
            3.0 * (3.0 * t).cos() * jet.0 - (3.0 * t).sin() * operator(x, &jet)
        })?;
        let r = solve_forward(&a, Some(&b), &f, opts)?;
        let err = l2_error(r.field.slice(m), |x| (3.0 * horizon).sin() * psi_jet(x).0);
        rows.push((m, err));
    }
    Ok(with_rates(rows))
}
