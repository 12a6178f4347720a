use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg;

/// Gaussian transition density of `dX = sigma_z dW` with constant
/// `a_z = sigma_z sigma_z^T`: covariance `kappa = (t - s) a_z`, evaluated at
/// the displacement `x - y`.
pub fn heat_kernel_oracle(a_z: &[f64], s: f64, t: f64, displacement: &[f64]) -> Result<f64> {
    let d = displacement.len();
    if a_z.len() != d * d {
        return Err(Error::Dimension { expected: d * d, actual: a_z.len() });
    }
    if !(t > s) {
        return Err(Error::InvalidTimeOrder { s, t });
    }
    let kappa: Vec<f64> = a_z.iter().map(|v| v * (t - s)).collect();
    let factor = linalg::spd_factor(&kappa, d).ok_or(Error::NotPositiveDefinite)?;
    let mut quad = 0.0;
    for i in 0..d {
        for j in 0..d {
            quad += displacement[i] * factor.inverse[i * d + j] * displacement[j];
        }
    }
    let norm = ((2.0 * PI).powi(d as i32) * factor.determinant).sqrt();
    Ok((-0.5 * quad).exp() / norm)
}
