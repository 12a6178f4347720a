//! Discrete anisotropic Hardy-Littlewood maximal operator over dyadic boxes
//! `{y : |y_i - x_i| < r_i}` with `r_i = 2^l h_i`, `r_i <= L_i / 2`.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::grid::{Codomain, GridFunction, TensorGrid};
use crate::spectral;

/// Which radius combinations enter the supremum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoxSearch {
    /// Every combination of per-axis dyadic radii.
    Full,
    /// One dyadic level shared by all axes (each axis clamped at `L_i/2`).
    CommonLevel,
}

impl BoxSearch {
    /// Full search up to two axes, common level beyond.
    pub fn default_for(dim: usize) -> Self {
        if dim <= 2 { BoxSearch::Full } else { BoxSearch::CommonLevel }
    }
}

/// Half-widths `m` (box covers offsets `|j| < m`) per dyadic level.
pub fn dyadic_half_widths(count: usize) -> Vec<usize> {
    let top = (count / 2).max(1);
    let mut out = Vec::new();
    let mut m = 1;
    while m <= top {
        out.push(m);
        m *= 2;
    }
    out
}

/// Periodic centered window sums of width `2m - 1` along `axis`.
fn window_sums(data: &[f64], grid: &TensorGrid, axis: usize, m: usize) -> Vec<f64> {
    let n = grid.counts()[axis];
    let inner: usize = grid.counts()[..axis].iter().product();
    let outer = data.len() / (inner * n);
    let w = 2 * m - 1;
    let mut out = vec![0.0; data.len()];
    let mut prefix = vec![0.0; n + 1];
    for o in 0..outer {
        for i in 0..inner {
            let base = o * n * inner + i;
            for a in 0..n {
                prefix[a + 1] = prefix[a] + data[base + a * inner];
            }
            for a in 0..n {
                let s = (a + n - (m - 1) % n) % n;
                let sum = if s + w <= n {
                    prefix[s + w] - prefix[s]
                } else {
                    (prefix[n] - prefix[s]) + prefix[s + w - n]
                };
                out[base + a * inner] = sum;
            }
        }
    }
    out
}

fn full_search(
    grid: &TensorGrid,
    axis: usize,
    data: &[f64],
    count: f64,
    widths: &[Vec<usize>],
    best: &mut [f64],
) {
    if axis == grid.dim() {
        for (b, &s) in best.iter_mut().zip(data) {
            *b = b.max(s / count);
        }
        return;
    }
    for &m in &widths[axis] {
        let next = window_sums(data, grid, axis, m);
        full_search(grid, axis + 1, &next, count * (2 * m - 1) as f64, widths, best);
    }
}

/// Maximal function of `|f|` with an explicit search strategy.
pub fn maximal_operator_with(f: &GridFunction, search: BoxSearch) -> Result<GridFunction> {
    f.require(Codomain::Scalar)?;
    let grid = f.grid();
    let abs: Vec<f64> = f.data().iter().map(|v| v.abs()).collect();
    let widths: Vec<Vec<usize>> = grid.counts().iter().map(|&n| dyadic_half_widths(n)).collect();
    let mut best = vec![0.0; grid.len()];
    match search {
        BoxSearch::Full => full_search(grid, 0, &abs, 1.0, &widths, &mut best),
        BoxSearch::CommonLevel => {
            let levels = widths.iter().map(Vec::len).max().unwrap_or(1);
            for l in 0..levels {
                let mut data = abs.clone();
                let mut count = 1.0;
                for (axis, w) in widths.iter().enumerate() {
                    let m = w[l.min(w.len() - 1)];
                    data = window_sums(&data, grid, axis, m);
                    count *= (2 * m - 1) as f64;
                }
                for (b, &s) in best.iter_mut().zip(&data) {
                    *b = b.max(s / count);
                }
            }
        }
    }
    GridFunction::new(grid.clone(), Codomain::Scalar, best)
}

/// Maximal function of `|f|` with [`BoxSearch::default_for`] the grid dimension.
pub fn maximal_operator(f: &GridFunction) -> Result<GridFunction> {
    maximal_operator_with(f, BoxSearch::default_for(f.grid().dim()))
}

/// Empirical constant of the pointwise difference bound
/// `|f(x) - f(y)| <= C |x - y| (M|grad f|(x) + M|grad f|(y))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointwiseBound {
    /// Smallest constant consistent with every evaluated pair.
    pub constant: f64,
    pub evaluated: usize,
    /// Pairs with `x == y`.
    pub skipped: usize,
}

pub fn check_pointwise_bound(f: &GridFunction, pairs: &[(Vec<f64>, Vec<f64>)]) -> Result<PointwiseBound> {
    f.require(Codomain::Scalar)?;
    let d = f.grid().dim();
    let grad = spectral::gradient(f)?.pointwise_norm();
    let max_grad = maximal_operator(&grad)?;
    let mut out = PointwiseBound { constant: 0.0, evaluated: 0, skipped: 0 };
    for (x, y) in pairs {
        if x.len() != d || y.len() != d {
            return Err(Error::Dimension { expected: d, actual: x.len().min(y.len()) });
        }
        let dist = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        if dist == 0.0 {
            out.skipped += 1;
            continue;
        }
        out.evaluated += 1;
        let diff = (f.evaluate_scalar(x) - f.evaluate_scalar(y)).abs();
        let denom = dist * (max_grad.evaluate_scalar(x) + max_grad.evaluate_scalar(y));
        let ratio = if denom > 0.0 {
            diff / denom
        } else if diff <= 1e-14 {
            0.0
        } else {
            f64::INFINITY
        };
        out.constant = out.constant.max(ratio);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;

    /// Direct box averages over every dyadic radius combination.
    fn brute_force(f: &GridFunction) -> Vec<f64> {
        let g = f.grid();
        let (n0, n1) = (g.counts()[0], g.counts()[1]);
        let w0 = dyadic_half_widths(n0);
        let w1 = dyadic_half_widths(n1);
        let mut out = vec![0.0; g.len()];
        for i in 0..n0 {
            for j in 0..n1 {
                let mut best: f64 = 0.0;
                for &m0 in &w0 {
                    for &m1 in &w1 {
                        let mut s = 0.0;
                        let mut c = 0.0;
                        for a in -(m0 as i64 - 1)..=(m0 as i64 - 1) {
                            for b in -(m1 as i64 - 1)..=(m1 as i64 - 1) {
                                let ii = (i as i64 + a).rem_euclid(n0 as i64) as usize;
                                let jj = (j as i64 + b).rem_euclid(n1 as i64) as usize;
                                s += f.data()[g.index(&[ii, jj])].abs();
                                c += 1.0;
                            }
                        }
                        best = best.max(s / c);
                    }
                }
                out[g.index(&[i, j])] = best;
            }
        }
        out
    }

    #[test]
    fn matches_brute_force_on_small_grid() {
        let g = TensorGrid::new(&[1.0, 2.0], &[8, 8]).unwrap();
        let mut rng = Stream::new(11, 0);
        for _ in 0..5 {
            let data: Vec<f64> = (0..g.len()).map(|_| rng.range(-1.0, 3.0)).collect();
            let f = GridFunction::new(g.clone(), Codomain::Scalar, data).unwrap();
            let fast = maximal_operator(&f).unwrap();
            let slow = brute_force(&f);
            for (a, b) in fast.data().iter().zip(&slow) {
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn constants_and_domination() {
        let g = TensorGrid::cube(3, 1.0, 8).unwrap();
        let c = GridFunction::constant_scalar(&g, 0.75);
        let m = maximal_operator(&c).unwrap();
        assert!(m.data().iter().all(|v| (v - 0.75).abs() < 1e-12));
        let mut rng = Stream::new(3, 3);
        let data: Vec<f64> = (0..g.len()).map(|_| rng.uniform()).collect();
        let f = GridFunction::new(g, Codomain::Scalar, data).unwrap();
        let m = maximal_operator(&f).unwrap();
        // smallest box is the node itself
        assert!(m.data().iter().zip(f.data()).all(|(mv, fv)| *mv >= *fv - 1e-15));
    }

    #[test]
    fn pointwise_bound_degenerate_cases() {
        let g = TensorGrid::cube(1, 1.0, 16).unwrap();
        let c = GridFunction::constant_scalar(&g, 2.0);
        let pairs = vec![(vec![0.1], vec![0.4]), (vec![0.3], vec![0.3])];
        let r = check_pointwise_bound(&c, &pairs).unwrap();
        assert_eq!(r.constant, 0.0);
        assert_eq!((r.evaluated, r.skipped), (1, 1));
        let only_equal = vec![(vec![0.2], vec![0.2])];
        let r = check_pointwise_bound(&c, &only_equal).unwrap();
        assert_eq!((r.constant, r.evaluated, r.skipped), (0.0, 0, 1));
    }
}
