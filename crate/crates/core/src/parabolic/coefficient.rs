use alloc::vec;
use alloc::vec::Vec;


use crate::error::{Error, Result};
use crate::grid::{Codomain, GridFunction, SpaceTimeField};
use crate::linalg;

/// Symmetric, uniformly elliptic diffusion matrix `a = sigma sigma^T`
/// with `delta^{-1} |xi|^2 <= xi^T a xi <= delta |xi|^2` on every node.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionCoefficient {
    a: SpaceTimeField,
    delta: f64,
}

fn symmetry_defect(m: &[f64], d: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in i + 1..d {
            worst = worst.max((m[i * d + j] - m[j * d + i]).abs());
        }
    }
    worst
}

fn eigen_range(a: &SpaceTimeField) -> Result<(f64, f64)> {
    let d = a.grid().dim();
    let mut m = vec![0.0; d * d];
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (n, slice) in a.slices().enumerate() {
        for k in 0..slice.grid().len() {
            slice.node_values(k, &mut m);
            let scale = m.iter().fold(1.0f64, |s, v| s.max(v.abs()));
            if symmetry_defect(&m, d) > 1e-12 * scale {
                return Err(Error::Asymmetric { node: n * slice.grid().len() + k });
            }
            let ev = linalg::symmetric_eigenvalues(&m, d);
            lo = lo.min(ev[0]);
            hi = hi.max(ev[d - 1]);
        }
        if a.is_time_invariant() {
            break;
        }
    }
    Ok((lo, hi))
}

impl DiffusionCoefficient {
    /// Validate symmetry and ellipticity with the given `delta > 1`.
    pub fn new(a: SpaceTimeField, delta: f64) -> Result<Self> {
        a.slice(0).require(Codomain::Matrix)?;
        if !(delta > 1.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter("ellipticity constant must exceed 1"));
        }
        let d = a.grid().dim();
        let mut m = vec![0.0; d * d];
        for (n, slice) in a.slices().enumerate() {
            let len = slice.grid().len();
            for k in 0..len {
                slice.node_values(k, &mut m);
                if m.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFiniteSample { index: n * len + k });
                }
                let scale = m.iter().fold(1.0f64, |s, v| s.max(v.abs()));
                if symmetry_defect(&m, d) > 1e-12 * scale {
                    return Err(Error::Asymmetric { node: n * len + k });
                }
                let ev = linalg::symmetric_eigenvalues(&m, d);
                for &e in [ev[0], ev[d - 1]].iter() {
                    if e < 1.0 / delta || e > delta {
                        return Err(Error::Ellipticity { node: n * len + k, eigenvalue: e, delta });
                    }
                }
            }
            if a.is_time_invariant() {
                break;
            }
        }
        Ok(Self { a, delta })
    }

    /// Accept `a` with the smallest admissible ellipticity constant.
    pub fn with_computed_delta(a: SpaceTimeField) -> Result<Self> {
        a.slice(0).require(Codomain::Matrix)?;
        let (lo, hi) = eigen_range(&a)?;
        if !(lo > 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        let delta = hi.max(1.0 / lo).max(1.0) * (1.0 + 1e-9);
        Self::new(a, delta)
    }

    /// `a = sigma sigma^T` from a matrix-valued `sigma`.
    pub fn from_sigma(sigma: &SpaceTimeField) -> Result<Self> {
        sigma.slice(0).require(Codomain::Matrix)?;
        let d = sigma.grid().dim();
        let a = sigma.map_slices(|s| {
            let n = s.grid().len();
            let mut data = vec![0.0; n * d * d];
            let mut m = vec![0.0; d * d];
            let mut g = vec![0.0; d * d];
            for k in 0..n {
                s.node_values(k, &mut m);
                linalg::gram(&m, d, &mut g);
                for (c, &v) in g.iter().enumerate() {
                    data[c * n + k] = v;
                }
            }
            GridFunction::new(s.grid().clone(), Codomain::Matrix, data).expect("d*d components")
        });
        Self::with_computed_delta(a)
    }

    /// The identity matrix on every node.
    pub fn identity(grid: &crate::grid::TensorGrid, horizon: f64, steps: usize) -> Result<Self> {
        let a = SpaceTimeField::constant(GridFunction::identity(grid), horizon, steps)?;
        Ok(Self { a, delta: 1.0 + 1e-9 })
    }

    pub fn field(&self) -> &SpaceTimeField {
        &self.a
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn dim(&self) -> usize {
        self.a.grid().dim()
    }

    /// Grid mean of `tr(a) / d` over all time nodes: the frozen isotropic
    /// coefficient of the implicit part of the solvers.
    pub fn mean_trace(&self) -> f64 {
        let d = self.dim();
        let mut total = 0.0;
        let mut count = 0usize;
        for slice in self.a.slices() {
            for i in 0..d {
                total += slice.component_data(i * d + i).iter().sum::<f64>();
            }
            count += slice.grid().len();
            if self.a.is_time_invariant() {
                break;
            }
        }
        total / (count as f64 * d as f64)
    }

    /// Same coefficient on a shorter horizon / different step count.
    pub fn resample(&self, horizon: f64, steps: usize) -> Result<Self> {
        // Eigenvalue bounds survive convex combinations in time.
        Ok(Self { a: self.a.resample(horizon, steps)?, delta: self.delta })
    }

    /// Empirical continuity modulus: for dyadic shifts `2^k h_i` along each
    /// axis, the largest node-wise change of any entry of `a`.
    pub fn continuity_modulus(&self) -> Vec<(f64, f64)> {
        let grid = self.a.grid();
        let d = grid.dim();
        let mut out = Vec::new();
        let mut multi = vec![0usize; d];
        let mut shift = 1usize;
        let min_count = grid.counts().iter().copied().min().unwrap_or(1);
        while shift <= min_count / 2 {
            let mut worst: f64 = 0.0;
            let mut dist: f64 = 0.0;
            for axis in 0..d {
                dist = dist.max(shift as f64 * grid.spacing(axis));
                for slice in self.a.slices() {
                    for k in 0..grid.len() {
                        grid.multi_index(k, &mut multi);
                        multi[axis] = (multi[axis] + shift) % grid.counts()[axis];
                        let k2 = grid.index(&multi);
                        for c in 0..d * d {
                            let data = slice.component_data(c);
                            worst = worst.max((data[k] - data[k2]).abs());
                        }
                    }
                    if self.a.is_time_invariant() {
                        break;
                    }
                }
            }
            out.push((dist, worst));
            shift *= 2;
        }
        out
    }

    /// Whether `a - c 1` vanishes identically.
    pub(crate) fn is_scalar_multiple(&self, c: f64) -> bool {
        let d = self.dim();
        self.a.slices().all(|s| {
            (0..d * d).all(|comp| {
                let target = if comp / d == comp % d { c } else { 0.0 };
                s.component_data(comp).iter().all(|&v| v == target)
            })
        })
    }
}
