use alloc::vec::Vec;

use num_traits::Float;

use super::exponent::{Exponent, MixedExponent};
use crate::error::{Error, Result};
use crate::grid::{GridFunction, SpaceTimeField};
use crate::spectral;

/// A computed norm together with what produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct NormReport {
    pub value: f64,
    pub space: Vec<Exponent>,
    pub time: Option<Exponent>,
    /// Axes from innermost to outermost integration.
    pub order: Vec<usize>,
}

/// Scaled `l^p` reduction of one line with quadrature weight `h`.
fn reduce_line(values: impl Iterator<Item = f64> + Clone, p: Exponent, h: f64) -> f64 {
    let m = values.clone().fold(0.0, |m: f64, v| m.max(v));
    match p {
        Exponent::Infinite => m,
        Exponent::Finite(_) => {
            if m == 0.0 {
                return 0.0;
            }
            let pv = p.value();
            let s: f64 = values.map(|v| (v / m).powf(pv)).sum();
            m * (h * s).powf(1.0 / pv)
        }
    }
}

/// Reduce axis `k` of a tensor with shape `dims` (axis 0 fastest).
fn reduce_axis(data: &[f64], dims: &[usize], k: usize, p: Exponent, h: f64) -> Vec<f64> {
    let inner: usize = dims[..k].iter().product();
    let n = dims[k];
    let outer: usize = dims[k + 1..].iter().product();
    let mut out = Vec::with_capacity(inner * outer);
    for o in 0..outer {
        for i in 0..inner {
            let base = o * n * inner + i;
            out.push(reduce_line((0..n).map(|a| data[base + a * inner]), p, h));
        }
    }
    out
}

/// Mixed norm with an explicit integration order: `order[0]` is the
/// innermost axis. Each axis keeps its own exponent `p[axis]`.
pub fn mixed_space_norm_ordered(
    f: &GridFunction,
    p: &[Exponent],
    order: &[usize],
) -> Result<NormReport> {
    let grid = f.grid();
    let d = grid.dim();
    if p.len() != d {
        return Err(Error::Dimension { expected: d, actual: p.len() });
    }
    let mut seen = [false; 16];
    if order.len() != d || order.iter().any(|&a| a >= d || core::mem::replace(&mut seen[a], true)) {
        return Err(Error::InvalidParameter("integration order must be a permutation of the axes"));
    }
    let magnitude = f.pointwise_norm();
    let mut data = magnitude.into_data();
    // Track the remaining axes so the reduction index stays valid.
    let mut axes: Vec<usize> = (0..d).collect();
    let mut dims: Vec<usize> = grid.counts().to_vec();
    for &axis in order {
        let k = axes.iter().position(|&a| a == axis).expect("axis present");
        data = reduce_axis(&data, &dims, k, p[axis], grid.spacing(axis));
        axes.remove(k);
        dims.remove(k);
    }
    Ok(NormReport { value: data[0], space: p.to_vec(), time: None, order: order.to_vec() })
}

/// Iterated rectangle-rule mixed norm: innermost over `x_1` with `p_1`,
/// outermost over `x_d` with `p_d`. Vector and matrix fields are reduced to
/// their node-wise Euclidean/Frobenius magnitude first.
pub fn mixed_space_norm(f: &GridFunction, p: &[Exponent]) -> Result<f64> {
    let order: Vec<usize> = (0..f.grid().dim()).collect();
    Ok(mixed_space_norm_ordered(f, p, &order)?.value)
}

/// Axis order integrating the smallest exponents first (stable for ties).
pub fn ascending_order(p: &[Exponent]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| p[a].value().total_cmp(&p[b].value()));
    order
}

/// Trapezoid weights on `M + 1` uniform nodes.
pub(crate) fn trapezoid_weights(steps: usize, dt: f64) -> impl Iterator<Item = f64> {
    (0..=steps).map(move |n| if n == 0 || n == steps { 0.5 * dt } else { dt })
}

/// Combine per-slice values into the time norm with exponent `q`.
pub fn time_norm(values: &[f64], q: Exponent, dt: f64) -> f64 {
    let steps = values.len() - 1;
    let m = values.iter().fold(0.0, |m: f64, &v| m.max(v));
    match q {
        Exponent::Infinite => m,
        Exponent::Finite(_) => {
            if m == 0.0 {
                return 0.0;
            }
            let qv = q.value();
            let s: f64 =
                values.iter().zip(trapezoid_weights(steps, dt)).map(|(v, w)| w * (v / m).powf(qv)).sum();
            m * s.powf(1.0 / qv)
        }
    }
}

/// Space-time norm: [`mixed_space_norm`] per slice, then the trapezoid rule
/// in time with exponent `q` (`q = inf` takes the max over slices).
pub fn mixed_spacetime_norm(field: &SpaceTimeField, e: &MixedExponent) -> Result<f64> {
    spacetime_norm_with(field, e, |g| mixed_space_norm(g, e.space()))
}

pub(crate) fn spacetime_norm_with(
    field: &SpaceTimeField,
    e: &MixedExponent,
    slice_norm: impl Fn(&GridFunction) -> Result<f64>,
) -> Result<f64> {
    if e.dim() != field.grid().dim() {
        return Err(Error::Dimension { expected: field.grid().dim(), actual: e.dim() });
    }
    let values = if field.is_time_invariant() {
        let v = slice_norm(field.slice(0))?;
        alloc::vec![v; field.steps() + 1]
    } else {
        field.slices().map(&slice_norm).collect::<Result<Vec<_>>>()?
    };
    Ok(time_norm(&values, e.time(), field.dt()))
}

/// Bessel-potential norm `||(1 - Delta)^{alpha/2} f||_{L^p}`.
pub fn bessel_norm(f: &GridFunction, alpha: f64, p: &[Exponent]) -> Result<f64> {
    let g = spectral::bessel_apply(f, alpha, 1.0)?;
    mixed_space_norm(&g, p)
}
