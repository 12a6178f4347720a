use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use super::brownian::BrownianPath;
use super::euler::{EulerOptions, Trajectory};
use crate::error::{Error, Result};
use crate::grid::SpaceTimeField;
use crate::zvonkin::ZvonkinMap;

/// Simulates `X = Phi^{-1}(t, Y)` where `dY = Psi(t, X) dW`,
/// `Y_0 = Phi(0, x0)`, with `Psi` precomputed once.
pub struct ZvonkinSimulator<'a> {
    map: &'a ZvonkinMap,
    psi: SpaceTimeField,
}

impl<'a> ZvonkinSimulator<'a> {
    pub fn new(map: &'a ZvonkinMap, sigma: &SpaceTimeField) -> Result<Self> {
        Ok(Self { map, psi: map.transformed_diffusion(sigma)? })
    }

    pub fn psi(&self) -> &SpaceTimeField {
        &self.psi
    }

    pub fn simulate(&self, x0: &[f64], path: &BrownianPath, opts: EulerOptions) -> Result<Trajectory> {
        let d = self.map.dim();
        if x0.len() != d || path.dim() != d {
            return Err(Error::Dimension { expected: d, actual: x0.len().min(path.dim()) });
        }
        if (path.horizon() - self.map.horizon()).abs() > 1e-12 * self.map.horizon() {
            return Err(Error::InvalidHorizon(path.horizon()));
        }
        let steps = path.steps();
        let dt = path.dt();
        let mut y = self.map.phi(0.0, x0);
        let mut x = x0.to_vec();
        let mut states: Vec<f64> = Vec::with_capacity((steps + 1) * d);
        states.extend_from_slice(x0);
        let (mut psi, mut dw) = (vec![0.0; d * d], vec![0.0; d]);
        for k in 0..steps {
            let t = path.time(k);
            self.psi.evaluate_into(t, &x, &mut psi);
            path.increment(k, &mut dw);
            for i in 0..d {
                y[i] += (0..d).map(|j| psi[i * d + j] * dw[j]).sum::<f64>();
            }
            self.map.phi_inv_into(path.time(k + 1), &y, &mut x)?;
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteState { step: k + 1 });
            }
            states.extend_from_slice(&x);
            if x.iter().map(|v| v * v).sum::<f64>().sqrt() > opts.r_max {
                return Ok(Trajectory::new(d, dt, states, Some(k + 1)));
            }
        }
        Ok(Trajectory::new(d, dt, states, None))
    }
}

/// One-shot form of [`ZvonkinSimulator::simulate`].
pub fn zvonkin_simulate(
    map: &ZvonkinMap,
    sigma: &SpaceTimeField,
    x0: &[f64],
    path: &BrownianPath,
    opts: EulerOptions,
) -> Result<Trajectory> {
    ZvonkinSimulator::new(map, sigma)?.simulate(x0, path, opts)
}
