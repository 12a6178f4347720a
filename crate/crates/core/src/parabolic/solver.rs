//! Crank-Nicolson stepping with a frozen isotropic implicit part.
//!
//! Each step solves
//!
//! ```text
//! (u+ - u)/dt = 1/2 [L0 u+ + L0 u] + 1/2 [V+ u+ + V u] + 1/2 [f+ + f]
//! ```
//!
//! where `L0 = (c/2) Delta` with `c` the mean of `tr(a)/d` is inverted
//! exactly in Fourier space and the variable remainder `V` (the part
//! `1/2 (a - c 1) : D^2` plus any drift `b . grad`) is handled by
//! fixed-point iteration on `u+`. Iteration stops once the discrete step
//! equation defect, measured in grid L², falls below the tolerance.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Float;

use super::coefficient::DiffusionCoefficient;
use crate::error::{Error, Result};
use crate::grid::{Codomain, GridFunction, SpaceTimeField};
use crate::spectral::Spectral;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Per-step defect tolerance (scaled by `max(1, ||u||)`).
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-9, max_iterations: 50 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    /// `d_t u = 1/2 a:D^2 u + b.grad u + f`, `u(0) = u0`.
    Forward,
    /// `d_t w + 1/2 d_ij (a^ij w) + f = 0`, `w(T) = g`.
    Dual,
    /// `d_t u + 1/2 a:D^2 u + b.grad u + f = 0`, `u(T) = g`.
    Backward,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub kind: ProblemKind,
    /// Solution on the time nodes `t_n = n T / M` (always in forward time).
    pub field: SpaceTimeField,
    pub horizon: f64,
    pub steps: usize,
    /// Largest accepted per-step defect (grid L²).
    pub residual: f64,
    pub max_iterations: usize,
    /// Frozen isotropic coefficient `c`.
    pub frozen: f64,
    /// Named diagnostic ratios attached after the solve.
    pub ratios: Vec<(String, f64)>,
}

impl SolveReport {
    pub fn attach(&mut self, name: &str, value: f64) {
        self.ratios.push((String::from(name), value));
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Form {
    NonDivergence,
    Divergence,
}

struct Evolution<'a> {
    sp: Spectral,
    form: Form,
    a: &'a DiffusionCoefficient,
    drift: Option<&'a SpaceTimeField>,
    /// Step `n` reads coefficients at time node `M - n`.
    reverse: bool,
    steps: usize,
    dt: f64,
    frozen: f64,
    skip_diffusion: bool,
    opts: SolverOptions,
}

impl Evolution<'_> {
    fn node(&self, n: usize) -> usize {
        if self.reverse { self.steps - n } else { n }
    }

    fn has_variable_part(&self) -> bool {
        !self.skip_diffusion || self.drift.is_some()
    }

    /// Spectrum of `V u` at solver step `n`.
    fn variable(&self, n: usize, hat: &[Complex64]) -> Vec<Complex64> {
        let grid = self.sp.grid();
        let d = grid.dim();
        let len = grid.len();
        let idx = self.node(n);
        let a = self.a.field().slice(idx);
        match self.form {
            Form::NonDivergence => {
                let mut acc = vec![0.0; len];
                if !self.skip_diffusion {
                    for i in 0..d {
                        for j in i..d {
                            let dij = self.sp.second_derivative(hat, i, j);
                            let aij = a.component_data(i * d + j);
                            let w = if i == j { 0.5 } else { 1.0 };
                            let shift = if i == j { self.frozen } else { 0.0 };
                            for k in 0..len {
                                acc[k] += w * (aij[k] - shift) * dij[k];
                            }
                        }
                    }
                }
                if let Some(b) = self.drift {
                    let b = b.slice(idx);
                    for i in 0..d {
                        let di = self.sp.derivative(hat, i);
                        let bi = b.component_data(i);
                        for k in 0..len {
                            acc[k] += bi[k] * di[k];
                        }
                    }
                }
                self.sp.forward(&acc)
            }
            Form::Divergence => {
                let mut out = vec![Complex64::new(0.0, 0.0); len];
                if self.skip_diffusion {
                    return out;
                }
                let w = self.sp.inverse(hat);
                for i in 0..d {
                    for j in i..d {
                        let aij = a.component_data(i * d + j);
                        let shift = if i == j { self.frozen } else { 0.0 };
                        let prod: Vec<f64> =
                            w.iter().zip(aij).map(|(wk, ak)| (ak - shift) * wk).collect();
                        let ps = self.sp.forward(&prod);
                        let weight = if i == j { 0.5 } else { 1.0 };
                        for (k, (o, z)) in out.iter_mut().zip(&ps).enumerate() {
                            *o += z * (weight * self.sp.waves().second(i, j, k));
                        }
                    }
                }
                out
            }
        }
    }

    fn run(
        &self,
        source: Option<&SpaceTimeField>,
        initial: Option<&GridFunction>,
    ) -> Result<(Vec<GridFunction>, f64, usize)> {
        let grid = self.sp.grid();
        let len = grid.len();
        let half = 0.5 * self.dt;
        let xi2 = self.sp.waves().norm2();
        let explicit: Vec<f64> = xi2.iter().map(|&s| 1.0 - half * 0.5 * self.frozen * s).collect();
        let implicit: Vec<f64> = xi2.iter().map(|&s| 1.0 + half * 0.5 * self.frozen * s).collect();
        let zero_spec = vec![Complex64::new(0.0, 0.0); len];
        let source_spec = |n: usize| match source {
            Some(f) => self.sp.forward(f.slice(self.node(n)).data()),
            None => zero_spec.clone(),
        };

        let u0 = match initial {
            Some(g) => g.data().to_vec(),
            None => vec![0.0; len],
        };
        let mut current = self.sp.forward(&u0);
        let mut out = Vec::with_capacity(self.steps + 1);
        out.push(GridFunction::new(grid.clone(), Codomain::Scalar, u0)?);
        let mut f_prev = source_spec(0);
        let mut v_prev =
            if self.has_variable_part() { self.variable(0, &current) } else { zero_spec.clone() };
        let mut residual: f64 = 0.0;
        let mut max_iter = 0usize;

        for n in 0..self.steps {
            let f_next = source_spec(n + 1);
            let base: Vec<Complex64> = (0..len)
                .map(|k| explicit[k] * current[k] + half * (v_prev[k] + f_prev[k] + f_next[k]))
                .collect();
            let mut iterate = current.clone();
            let mut last_defect = f64::INFINITY;
            let mut iterations = 0;
            let accepted = loop {
                iterations += 1;
                let next: Vec<Complex64> = if self.has_variable_part() {
                    let v = self.variable(n + 1, &iterate);
                    (0..len).map(|k| (base[k] + half * v[k]) / implicit[k]).collect()
                } else {
                    (0..len).map(|k| base[k] / implicit[k]).collect()
                };
                if !self.has_variable_part() {
                    break next;
                }
                let diff: Vec<Complex64> =
                    (0..len).map(|k| (next[k] - iterate[k]) * implicit[k]).collect();
                let defect = self.sp.l2_from_spectrum(&diff);
                let scale = self.sp.l2_from_spectrum(&next).max(1.0);
                if !defect.is_finite() {
                    return Err(Error::NonConvergence {
                        step: n,
                        iterations,
                        defect,
                        contraction: f64::INFINITY,
                    });
                }
                if defect <= self.opts.tol * scale {
                    residual = residual.max(defect);
                    break next;
                }
                if iterations >= self.opts.max_iterations {
                    return Err(Error::NonConvergence {
                        step: n,
                        iterations,
                        defect,
                        contraction: defect / last_defect,
                    });
                }
                last_defect = defect;
                iterate = next;
            };
            max_iter = max_iter.max(iterations);
            current = accepted;
            if self.has_variable_part() {
                v_prev = self.variable(n + 1, &current);
            }
            f_prev = f_next;
            out.push(GridFunction::new(grid.clone(), Codomain::Scalar, self.sp.inverse(&current))?);
        }
        Ok((out, residual, max_iter))
    }
}

fn check_setup(
    a: &DiffusionCoefficient,
    drift: Option<&SpaceTimeField>,
    source: &SpaceTimeField,
    data: Option<&GridFunction>,
) -> Result<()> {
    source.slice(0).require(Codomain::Scalar)?;
    if !source.time_compatible(a.field()) {
        return Err(Error::IncompatibleFields);
    }
    if let Some(b) = drift {
        b.slice(0).require(Codomain::Vector)?;
        if !source.time_compatible(b) {
            return Err(Error::IncompatibleFields);
        }
        for s in b.slices() {
            s.check_finite()?;
        }
    }
    if let Some(g) = data {
        g.require(Codomain::Scalar)?;
        if g.grid() != source.grid() {
            return Err(Error::IncompatibleFields);
        }
    }
    for s in source.slices() {
        s.check_finite()?;
    }
    Ok(())
}

fn evolution<'a>(
    a: &'a DiffusionCoefficient,
    drift: Option<&'a SpaceTimeField>,
    source: &SpaceTimeField,
    form: Form,
    reverse: bool,
    opts: SolverOptions,
) -> Evolution<'a> {
    let frozen = a.mean_trace();
    Evolution {
        sp: Spectral::new(source.grid()),
        form,
        a,
        drift,
        reverse,
        steps: source.steps(),
        dt: source.dt(),
        frozen,
        skip_diffusion: a.is_scalar_multiple(frozen),
        opts,
    }
}

fn report(
    kind: ProblemKind,
    source: &SpaceTimeField,
    mut slices: Vec<GridFunction>,
    residual: f64,
    max_iterations: usize,
    frozen: f64,
    reverse: bool,
) -> Result<SolveReport> {
    if reverse {
        slices.reverse();
    }
    Ok(SolveReport {
        kind,
        field: SpaceTimeField::new(source.horizon(), slices)?,
        horizon: source.horizon(),
        steps: source.steps(),
        residual,
        max_iterations,
        frozen,
        ratios: Vec::new(),
    })
}

/// Forward Cauchy problem with `u(0) = 0`; the time grid is that of `f`.
pub fn solve_forward(
    a: &DiffusionCoefficient,
    b: Option<&SpaceTimeField>,
    f: &SpaceTimeField,
    opts: SolverOptions,
) -> Result<SolveReport> {
    solve_forward_from(a, b, f, None, opts)
}

/// Forward problem with optional initial data.
pub fn solve_forward_from(
    a: &DiffusionCoefficient,
    b: Option<&SpaceTimeField>,
    f: &SpaceTimeField,
    initial: Option<&GridFunction>,
    opts: SolverOptions,
) -> Result<SolveReport> {
    check_setup(a, b, f, initial)?;
    let ev = evolution(a, b, f, Form::NonDivergence, false, opts);
    let (slices, residual, iters) = ev.run(Some(f), initial)?;
    report(ProblemKind::Forward, f, slices, residual, iters, ev.frozen, false)
}

/// Dual (divergence-form) backward problem with `w(T) = 0`.
pub fn solve_dual(a: &DiffusionCoefficient, f: &SpaceTimeField, opts: SolverOptions) -> Result<SolveReport> {
    solve_dual_from(a, f, None, opts)
}

/// Dual problem with optional terminal data `w(T) = g`.
pub fn solve_dual_from(
    a: &DiffusionCoefficient,
    f: &SpaceTimeField,
    terminal: Option<&GridFunction>,
    opts: SolverOptions,
) -> Result<SolveReport> {
    check_setup(a, None, f, terminal)?;
    let ev = evolution(a, None, f, Form::Divergence, true, opts);
    let (slices, residual, iters) = ev.run(Some(f), terminal)?;
    report(ProblemKind::Dual, f, slices, residual, iters, ev.frozen, true)
}

/// Backward non-divergence problem `d_t u + 1/2 a:D^2 u + b.grad u + f = 0`
/// with `u(T) = 0`, solved forward in `s = T - t`.
pub fn solve_backward(
    a: &DiffusionCoefficient,
    b: Option<&SpaceTimeField>,
    f: &SpaceTimeField,
    opts: SolverOptions,
) -> Result<SolveReport> {
    check_setup(a, b, f, None)?;
    let ev = evolution(a, b, f, Form::NonDivergence, true, opts);
    let (slices, residual, iters) = ev.run(Some(f), None)?;
    report(ProblemKind::Backward, f, slices, residual, iters, ev.frozen, true)
}

/// Largest per-step defect of the Crank-Nicolson step equation for a
/// computed field `u`, evaluated directly with spectral derivatives.
///
/// For the forward problem this is
/// `|| u_{n+1} - u_n - dt/2 (L_{n+1} u_{n+1} + L_n u_n + f_{n+1} + f_n) ||`;
/// the backward and dual problems flip the sign of the bracket (and the
/// dual one uses the divergence-form operator).
pub fn step_defect(
    kind: ProblemKind,
    a: &DiffusionCoefficient,
    b: Option<&SpaceTimeField>,
    f: &SpaceTimeField,
    u: &SpaceTimeField,
) -> Result<f64> {
    check_setup(a, b, f, None)?;
    if !u.time_compatible(f) || u.steps() != f.steps() {
        return Err(Error::IncompatibleFields);
    }
    let form = if kind == ProblemKind::Dual { Form::Divergence } else { Form::NonDivergence };
    let mut ev = evolution(a, b, f, form, false, SolverOptions::default());
    // apply the full operator: nothing is frozen here
    ev.frozen = 0.0;
    ev.skip_diffusion = false;
    let sign = if kind == ProblemKind::Forward { 1.0 } else { -1.0 };
    let apply = |n: usize| -> Vec<f64> {
        let hat = ev.sp.forward(u.slice(n).data());
        let lu = ev.sp.inverse(&ev.variable(n, &hat));
        lu.iter().zip(f.slice(n).data()).map(|(l, s)| l + s).collect()
    };
    let mut worst: f64 = 0.0;
    let mut prev = apply(0);
    for n in 0..u.steps() {
        let next = apply(n + 1);
        let (u0, u1) = (u.slice(n).data(), u.slice(n + 1).data());
        let mut s = 0.0;
        for k in 0..u0.len() {
            let r = u1[k] - u0[k] - sign * 0.5 * ev.dt * (next[k] + prev[k]);
            s += r * r;
        }
        worst = worst.max((s * u.grid().cell_volume()).sqrt());
        prev = next;
    }
    Ok(worst)
}
