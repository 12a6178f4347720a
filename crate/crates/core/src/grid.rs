//! Periodic tensor grids and the sampled fields that live on them.
//!
//! Flat node indices put axis 0 fastest: node `(i_1, ..., i_d)` sits at
//! `i_1 + N_1 (i_2 + N_2 (i_3 + ...))`. Multi-component fields store one
//! contiguous block per component, so component `c` of node `k` is at
//! `c * grid.len() + k`. Matrix components are row-major.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::error::{Error, Result};

/// A periodic tensor grid (a torus) with power-of-two point counts.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorGrid {
    extents: Vec<f64>,
    counts: Vec<usize>,
}

impl TensorGrid {
    pub fn new(extents: &[f64], counts: &[usize]) -> Result<Self> {
        if extents.is_empty() {
            return Err(Error::EmptyGrid);
        }
        if extents.len() != counts.len() {
            return Err(Error::Dimension { expected: extents.len(), actual: counts.len() });
        }
        for (axis, (&extent, &count)) in extents.iter().zip(counts).enumerate() {
            if !(extent.is_finite() && extent > 0.0) {
                return Err(Error::GridExtent { axis, extent });
            }
            if count == 0 || !count.is_power_of_two() {
                return Err(Error::GridPoints { axis, count });
            }
        }
        Ok(Self { extents: extents.to_vec(), counts: counts.to_vec() })
    }

    /// `d`-dimensional cube with side `extent` and `count` points per axis.
    pub fn cube(dim: usize, extent: f64, count: usize) -> Result<Self> {
        Self::new(&vec![extent; dim], &vec![count; dim])
    }

    pub fn dim(&self) -> usize {
        self.extents.len()
    }

    pub fn extents(&self) -> &[f64] {
        &self.extents
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.extents[axis] / self.counts[axis] as f64
    }

    pub fn max_spacing(&self) -> f64 {
        (0..self.dim()).map(|i| self.spacing(i)).fold(0.0, f64::max)
    }

    /// Number of grid nodes.
    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn volume(&self) -> f64 {
        self.extents.iter().product()
    }

    /// Quadrature weight of one node (product of spacings).
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|i| self.spacing(i)).product()
    }

    /// Same extents, every point count multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        let counts: Vec<usize> = self.counts.iter().map(|&n| n * factor).collect();
        Self::new(&self.extents, &counts)
    }

    pub fn index(&self, multi: &[usize]) -> usize {
        let mut idx = 0;
        for axis in (0..self.dim()).rev() {
            idx = idx * self.counts[axis] + multi[axis];
        }
        idx
    }

    pub fn multi_index(&self, mut flat: usize, out: &mut [usize]) {
        for (axis, slot) in out.iter_mut().enumerate().take(self.dim()) {
            *slot = flat % self.counts[axis];
            flat /= self.counts[axis];
        }
    }

    /// Coordinates of node `flat`, written into `out`.
    pub fn node(&self, flat: usize, out: &mut [f64]) {
        let mut rest = flat;
        for axis in 0..self.dim() {
            let i = rest % self.counts[axis];
            rest /= self.counts[axis];
            out[axis] = i as f64 * self.spacing(axis);
        }
    }

    pub fn node_vec(&self, flat: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        self.node(flat, &mut x);
        x
    }
}

/// What a field returns at each node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Codomain {
    Scalar,
    Vector,
    Matrix,
}

impl Codomain {
    pub fn components(self, dim: usize) -> usize {
        match self {
            Codomain::Scalar => 1,
            Codomain::Vector => dim,
            Codomain::Matrix => dim * dim,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Codomain::Scalar => "scalar",
            Codomain::Vector => "vector",
            Codomain::Matrix => "matrix",
        }
    }
}

/// Samples of a scalar, vector or matrix field at the nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: TensorGrid,
    codomain: Codomain,
    data: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: TensorGrid, codomain: Codomain, data: Vec<f64>) -> Result<Self> {
        let expected = grid.len() * codomain.components(grid.dim());
        if data.len() != expected {
            return Err(Error::SampleCount { expected, actual: data.len() });
        }
        Ok(Self { grid, codomain, data })
    }

    pub fn zeros(grid: &TensorGrid, codomain: Codomain) -> Self {
        let n = grid.len() * codomain.components(grid.dim());
        Self { grid: grid.clone(), codomain, data: vec![0.0; n] }
    }

    pub fn constant_scalar(grid: &TensorGrid, value: f64) -> Self {
        Self { grid: grid.clone(), codomain: Codomain::Scalar, data: vec![value; grid.len()] }
    }

    /// Constant field; `value` holds one entry per component.
    pub fn constant(grid: &TensorGrid, codomain: Codomain, value: &[f64]) -> Result<Self> {
        let comps = codomain.components(grid.dim());
        if value.len() != comps {
            return Err(Error::Dimension { expected: comps, actual: value.len() });
        }
        let n = grid.len();
        let mut data = Vec::with_capacity(n * comps);
        for &v in value {
            data.extend(core::iter::repeat_n(v, n));
        }
        Ok(Self { grid: grid.clone(), codomain, data })
    }

    /// Identity matrix field.
    pub fn identity(grid: &TensorGrid) -> Self {
        let d = grid.dim();
        let id: Vec<f64> = (0..d * d).map(|k| if k / d == k % d { 1.0 } else { 0.0 }).collect();
        Self::constant(grid, Codomain::Matrix, &id).expect("identity has d*d entries")
    }

    pub fn scalar_from_fn(grid: &TensorGrid, f: impl Fn(&[f64]) -> f64) -> Self {
        let mut x = vec![0.0; grid.dim()];
        let data = (0..grid.len())
            .map(|k| {
                grid.node(k, &mut x);
                f(&x)
            })
            .collect();
        Self { grid: grid.clone(), codomain: Codomain::Scalar, data }
    }

    /// Sample `f(x, out)` at every node; `out` has one slot per component.
    pub fn from_fn(grid: &TensorGrid, codomain: Codomain, f: impl Fn(&[f64], &mut [f64])) -> Self {
        let n = grid.len();
        let comps = codomain.components(grid.dim());
        let mut data = vec![0.0; n * comps];
        let mut x = vec![0.0; grid.dim()];
        let mut out = vec![0.0; comps];
        for k in 0..n {
            grid.node(k, &mut x);
            f(&x, &mut out);
            for (c, &v) in out.iter().enumerate() {
                data[c * n + k] = v;
            }
        }
        Self { grid: grid.clone(), codomain, data }
    }

    /// Stack scalar fields into a vector (`d` parts) or matrix (`d*d` parts) field.
    pub fn from_components(codomain: Codomain, parts: &[GridFunction]) -> Result<Self> {
        let first = parts.first().ok_or(Error::InvalidParameter("no components"))?;
        let grid = first.grid.clone();
        let comps = codomain.components(grid.dim());
        if parts.len() != comps {
            return Err(Error::Dimension { expected: comps, actual: parts.len() });
        }
        let mut data = Vec::with_capacity(comps * grid.len());
        for p in parts {
            if p.grid != grid {
                return Err(Error::IncompatibleFields);
            }
            if p.codomain != Codomain::Scalar {
                return Err(Error::Codomain { expected: "scalar" });
            }
            data.extend_from_slice(&p.data);
        }
        Ok(Self { grid, codomain, data })
    }

    pub fn grid(&self) -> &TensorGrid {
        &self.grid
    }

    pub fn codomain(&self) -> Codomain {
        self.codomain
    }

    pub fn components(&self) -> usize {
        self.codomain.components(self.grid.dim())
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Samples of component `c`.
    pub fn component_data(&self, c: usize) -> &[f64] {
        let n = self.grid.len();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn component(&self, c: usize) -> GridFunction {
        GridFunction {
            grid: self.grid.clone(),
            codomain: Codomain::Scalar,
            data: self.component_data(c).to_vec(),
        }
    }

    pub fn require(&self, codomain: Codomain) -> Result<()> {
        if self.codomain == codomain {
            Ok(())
        } else {
            Err(Error::Codomain { expected: codomain.name() })
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.data.iter().position(|v| !v.is_finite()) {
            Some(index) => Err(Error::NonFiniteSample { index }),
            None => Ok(()),
        }
    }

    /// Values of all components at node `k`.
    pub fn node_values(&self, k: usize, out: &mut [f64]) {
        let n = self.grid.len();
        for (c, slot) in out.iter_mut().enumerate().take(self.components()) {
            *slot = self.data[c * n + k];
        }
    }

    /// Node-wise Euclidean (vector) or Frobenius (matrix) magnitude.
    pub fn pointwise_norm(&self) -> GridFunction {
        let n = self.grid.len();
        let comps = self.components();
        let data = (0..n)
            .map(|k| {
                if comps == 1 {
                    self.data[k].abs()
                } else {
                    (0..comps).map(|c| self.data[c * n + k].powi(2)).sum::<f64>().sqrt()
                }
            })
            .collect();
        GridFunction { grid: self.grid.clone(), codomain: Codomain::Scalar, data }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction {
            grid: self.grid.clone(),
            codomain: self.codomain,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> GridFunction {
        self.map(|v| c * v)
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &GridFunction) -> Result<GridFunction> {
        if self.grid != other.grid || self.codomain != other.codomain {
            return Err(Error::IncompatibleFields);
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + c * b).collect();
        Ok(GridFunction { grid: self.grid.clone(), codomain: self.codomain, data })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Per-component grid mean.
    pub fn mean(&self, c: usize) -> f64 {
        let comp = self.component_data(c);
        comp.iter().sum::<f64>() / comp.len() as f64
    }

    /// Riemann-sum integral of component `c`.
    pub fn integral(&self, c: usize) -> f64 {
        self.component_data(c).iter().sum::<f64>() * self.grid.cell_volume()
    }

    /// Multilinear interpolation at `x`, wrapped periodically. Writes one
    /// value per component into `out`.
    pub fn evaluate_into(&self, x: &[f64], out: &mut [f64]) {
        let d = self.grid.dim();
        let n = self.grid.len();
        let comps = self.components();
        // d <= 8 keeps the corner bookkeeping on the stack.
        let mut base = [0usize; 8];
        let mut next = [0usize; 8];
        let mut frac = [0.0f64; 8];
        assert!(d <= 8, "interpolation supports up to 8 axes");
        for axis in 0..d {
            let count = self.grid.counts[axis];
            let mut s = x[axis] / self.grid.spacing(axis);
            let nearest = s.round();
            if (s - nearest).abs() < 1e-10 {
                s = nearest;
            }
            let cells = count as f64;
            s -= (s / cells).floor() * cells;
            let mut i0 = s.floor() as usize;
            let mut t = s - i0 as f64;
            if i0 >= count {
                i0 = 0;
                t = 0.0;
            }
            base[axis] = i0;
            next[axis] = (i0 + 1) % count;
            frac[axis] = t;
        }
        for slot in out.iter_mut().take(comps) {
            *slot = 0.0;
        }
        let mut multi = [0usize; 8];
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            for axis in 0..d {
                if corner >> axis & 1 == 1 {
                    w *= frac[axis];
                    multi[axis] = next[axis];
                } else {
                    w *= 1.0 - frac[axis];
                    multi[axis] = base[axis];
                }
            }
            if w == 0.0 {
                continue;
            }
            let k = self.grid.index(&multi[..d]);
            for (c, slot) in out.iter_mut().enumerate().take(comps) {
                *slot += w * self.data[c * n + k];
            }
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.components()];
        self.evaluate_into(x, &mut out);
        out
    }

    pub fn evaluate_scalar(&self, x: &[f64]) -> f64 {
        let mut out = [0.0];
        self.evaluate_into(x, &mut out);
        out[0]
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Slices {
    Constant(GridFunction),
    Nodes(Vec<GridFunction>),
}

/// A field sampled on a uniform time grid `t_n = n T / M`, `n = 0..=M`.
///
/// Time-invariant fields keep a single slice shared by every time node.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    horizon: f64,
    steps: usize,
    slices: Slices,
}

fn check_time_grid(horizon: f64, steps: usize) -> Result<()> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::InvalidHorizon(horizon));
    }
    if steps == 0 {
        return Err(Error::InvalidSteps);
    }
    Ok(())
}

impl SpaceTimeField {
    /// Field from `M + 1` slices on `[0, horizon]`.
    pub fn new(horizon: f64, slices: Vec<GridFunction>) -> Result<Self> {
        let steps = slices.len().saturating_sub(1);
        check_time_grid(horizon, steps)?;
        let first = &slices[0];
        if slices.iter().any(|s| s.grid != first.grid || s.codomain != first.codomain) {
            return Err(Error::IncompatibleFields);
        }
        Ok(Self { horizon, steps, slices: Slices::Nodes(slices) })
    }

    pub fn constant(slice: GridFunction, horizon: f64, steps: usize) -> Result<Self> {
        check_time_grid(horizon, steps)?;
        Ok(Self { horizon, steps, slices: Slices::Constant(slice) })
    }

    pub fn from_fn(
        grid: &TensorGrid,
        codomain: Codomain,
        horizon: f64,
        steps: usize,
        f: impl Fn(f64, &[f64], &mut [f64]),
    ) -> Result<Self> {
        check_time_grid(horizon, steps)?;
        let slices = (0..=steps)
            .map(|n| {
                let t = horizon * n as f64 / steps as f64;
                GridFunction::from_fn(grid, codomain, |x, out| f(t, x, out))
            })
            .collect();
        Self::new(horizon, slices)
    }

    pub fn scalar_from_fn(
        grid: &TensorGrid,
        horizon: f64,
        steps: usize,
        f: impl Fn(f64, &[f64]) -> f64,
    ) -> Result<Self> {
        Self::from_fn(grid, Codomain::Scalar, horizon, steps, |t, x, out| out[0] = f(t, x))
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn time(&self, n: usize) -> f64 {
        self.horizon * n as f64 / self.steps as f64
    }

    pub fn is_time_invariant(&self) -> bool {
        matches!(self.slices, Slices::Constant(_))
    }

    pub fn slice(&self, n: usize) -> &GridFunction {
        match &self.slices {
            Slices::Constant(g) => g,
            Slices::Nodes(v) => &v[n],
        }
    }

    pub fn slices(&self) -> impl Iterator<Item = &GridFunction> + '_ {
        (0..=self.steps).map(move |n| self.slice(n))
    }

    pub fn grid(&self) -> &TensorGrid {
        self.slice(0).grid()
    }

    pub fn codomain(&self) -> Codomain {
        self.slice(0).codomain()
    }

    pub fn components(&self) -> usize {
        self.slice(0).components()
    }

    pub fn max_abs(&self) -> f64 {
        self.slices().fold(0.0, |m, s| m.max(s.max_abs()))
    }

    /// Whether `other` can be paired node-for-node with `self` in time.
    pub fn time_compatible(&self, other: &SpaceTimeField) -> bool {
        if self.grid() != other.grid() {
            return false;
        }
        if other.is_time_invariant() {
            return true;
        }
        other.steps == self.steps && (other.horizon - self.horizon).abs() <= 1e-12 * self.horizon
    }

    pub fn map_slices(&self, f: impl Fn(&GridFunction) -> GridFunction) -> SpaceTimeField {
        let slices = match &self.slices {
            Slices::Constant(g) => Slices::Constant(f(g)),
            Slices::Nodes(v) => Slices::Nodes(v.iter().map(f).collect()),
        };
        SpaceTimeField { horizon: self.horizon, steps: self.steps, slices }
    }

    /// Piecewise-linear-in-time, multilinear-in-space evaluation. Times
    /// outside `[0, T]` are clamped.
    pub fn evaluate_into(&self, t: f64, x: &[f64], out: &mut [f64]) {
        match &self.slices {
            Slices::Constant(g) => g.evaluate_into(x, out),
            Slices::Nodes(v) => {
                let s = (t / self.dt()).clamp(0.0, self.steps as f64);
                let n0 = (s.floor() as usize).min(self.steps);
                let w = s - n0 as f64;
                v[n0].evaluate_into(x, out);
                if w > 0.0 && n0 < self.steps {
                    let comps = self.components();
                    let mut upper = [0.0f64; 64];
                    assert!(comps <= 64);
                    v[n0 + 1].evaluate_into(x, &mut upper[..comps]);
                    for (o, u) in out.iter_mut().zip(&upper[..comps]) {
                        *o = (1.0 - w) * *o + w * u;
                    }
                }
            }
        }
    }

    /// Linear-in-time resampling onto `[0, horizon]` with `steps` steps.
    /// The new horizon must not exceed the old one.
    pub fn resample(&self, horizon: f64, steps: usize) -> Result<SpaceTimeField> {
        check_time_grid(horizon, steps)?;
        if horizon > self.horizon * (1.0 + 1e-12) {
            return Err(Error::InvalidHorizon(horizon));
        }
        match &self.slices {
            Slices::Constant(g) => Self::constant(g.clone(), horizon, steps),
            Slices::Nodes(v) => {
                let slices = (0..=steps)
                    .map(|n| {
                        let t = horizon * n as f64 / steps as f64;
                        let s = (t / self.dt()).clamp(0.0, self.steps as f64);
                        let n0 = (s.floor() as usize).min(self.steps);
                        let w = s - n0 as f64;
                        if w == 0.0 || n0 == self.steps {
                            v[n0].clone()
                        } else {
                            v[n0].scale(1.0 - w).axpy(w, &v[n0 + 1]).expect("same layout")
                        }
                    })
                    .collect();
                Self::new(horizon, slices)
            }
        }
    }
}
