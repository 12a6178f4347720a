//! Empirical constants of the maximal-regularity and small-time estimates.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::{format, vec};

use num_traits::Float;

use super::coefficient::DiffusionCoefficient;
use super::solver::{solve_forward, ProblemKind, SolveReport, SolverOptions};
use crate::error::{Error, Result};
use crate::grid::{Codomain, SpaceTimeField};
use crate::mixed_norm::{
    mixed_space_norm, mixed_spacetime_norm, spacetime_norm_with, time_norm, Exponent,
    MixedExponent,
};
use crate::spectral::{self, Spectral};

/// Norm ratios of a solution against its source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityRatios {
    pub source_norm: f64,
    /// `||D^2 u|| / ||f||` (forward and backward problems).
    pub hessian: Option<f64>,
    /// `||d_t u|| / ||f||` with backward differences in time.
    pub time_derivative: Option<f64>,
    /// `||w|| / ||f||_{H^-2}` (dual problem).
    pub dual: Option<f64>,
}

/// Backward differences `(u_n - u_{n-1}) / dt`; node 0 reuses node 1.
fn time_difference(u: &SpaceTimeField) -> Result<SpaceTimeField> {
    let dt = u.dt();
    let mut slices = Vec::with_capacity(u.steps() + 1);
    for n in 1..=u.steps() {
        slices.push(u.slice(n).axpy(-1.0, u.slice(n - 1))?.scale(1.0 / dt));
    }
    slices.insert(0, slices[0].clone());
    SpaceTimeField::new(u.horizon(), slices)
}

/// Ratios for a finished solve; `f` is the source that produced `report`.
pub fn regularity_ratio(report: &SolveReport, f: &SpaceTimeField, e: &MixedExponent) -> Result<RegularityRatios> {
    let u = &report.field;
    if !u.time_compatible(f) {
        return Err(Error::IncompatibleFields);
    }
    match report.kind {
        ProblemKind::Forward | ProblemKind::Backward => {
            let source_norm = mixed_spacetime_norm(f, e)?;
            if !(source_norm > 0.0) {
                return Err(Error::ZeroNorm);
            }
            let sp = Spectral::new(u.grid());
            let hess = spacetime_norm_with(u, e, |g| {
                mixed_space_norm(&spectral::hessian_with(&sp, g), e.space())
            })?;
            let dtu = mixed_spacetime_norm(&time_difference(u)?, e)?;
            Ok(RegularityRatios {
                source_norm,
                hessian: Some(hess / source_norm),
                time_derivative: Some(dtu / source_norm),
                dual: None,
            })
        }
        ProblemKind::Dual => {
            let sp = Spectral::new(u.grid());
            let source_norm = spacetime_norm_with(f, e, |g| {
                mixed_space_norm(&spectral::bessel_with(&sp, g, -2.0, 1.0), e.space())
            })?;
            if !(source_norm > 0.0) {
                return Err(Error::ZeroNorm);
            }
            let w = mixed_spacetime_norm(u, e)?;
            Ok(RegularityRatios { source_norm, hessian: None, time_derivative: None, dual: Some(w / source_norm) })
        }
    }
}

/// Norm of `u` measured by a small-time decay table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayVariant {
    /// `sup_t ||(1 - Delta)^{alpha/2} u(t)||_{L^p}`, `alpha in [0, 2 - 2/q)`.
    Bessel(f64),
    /// `sup_{t,x} |u|`; needs the threshold-2 condition.
    Sup,
    /// `sup_{t,x} |grad u|`; needs the threshold-1 condition.
    GradSup,
}

impl DecayVariant {
    pub fn name(&self) -> String {
        match self {
            DecayVariant::Bessel(a) => format!("bessel({a})"),
            DecayVariant::Sup => "sup".to_string(),
            DecayVariant::GradSup => "grad_sup".to_string(),
        }
    }

    fn validate(&self, e: &MixedExponent) -> Result<()> {
        let threshold = match self {
            DecayVariant::Bessel(alpha) => {
                let q = e.time();
                let upper = match q {
                    Exponent::Infinite => 2.0,
                    _ => 2.0 - 2.0 / q.value(),
                };
                if !(*alpha >= 0.0 && *alpha < upper) {
                    return Err(Error::AlphaOutOfRange { alpha: *alpha, upper });
                }
                return Ok(());
            }
            DecayVariant::Sup => 2,
            DecayVariant::GradSup => 1,
        };
        if !e.check_subcritical(threshold)?.pass {
            return Err(Error::NotSubcritical { exponents: e.to_string(), threshold });
        }
        Ok(())
    }

    fn measure(&self, u: &SpaceTimeField, e: &MixedExponent) -> Result<f64> {
        let mut best: f64 = 0.0;
        let sp = Spectral::new(u.grid());
        for slice in u.slices() {
            let v = match self {
                DecayVariant::Bessel(alpha) => {
                    mixed_space_norm(&spectral::bessel_with(&sp, slice, *alpha, 1.0), e.space())?
                }
                DecayVariant::Sup => slice.max_abs(),
                DecayVariant::GradSup => spectral::gradient_with(&sp, slice).pointwise_norm().max_abs(),
            };
            best = best.max(v);
        }
        Ok(best)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayRow {
    pub variant: DecayVariant,
    /// Max over the family, one entry per horizon.
    pub ratios: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayTable {
    pub horizons: Vec<f64>,
    pub rows: Vec<DecayRow>,
    /// Family members with zero source norm, left out of every row.
    pub excluded: usize,
}

/// Default horizons `1, 1/2, 1/4, 1/8`.
pub const DECAY_HORIZONS: [f64; 4] = [1.0, 0.5, 0.25, 0.125];

/// For every horizon `T`, solve the forward problem with the family's
/// sources restricted to `[0, T]` (same step count) and record the largest
/// ratio `||u|| / ||f||_{L^q_p(T)}` per variant.
pub fn small_time_decay(
    a: &DiffusionCoefficient,
    b: Option<&SpaceTimeField>,
    family: &[SpaceTimeField],
    e: &MixedExponent,
    variants: &[DecayVariant],
    horizons: &[f64],
    opts: SolverOptions,
) -> Result<DecayTable> {
    for v in variants {
        v.validate(e)?;
    }
    let base = a.field().horizon();
    for &t in horizons {
        if !(t > 0.0 && t <= base * (1.0 + 1e-12)) {
            return Err(Error::InvalidHorizon(t));
        }
    }
    let mut rows: Vec<DecayRow> =
        variants.iter().map(|&variant| DecayRow { variant, ratios: vec![0.0; horizons.len()] }).collect();
    let mut excluded = 0;
    for f in family {
        f.slice(0).require(Codomain::Scalar)?;
        if f.slices().all(|s| s.max_abs() == 0.0) {
            excluded += 1;
            continue;
        }
        for (h, &t) in horizons.iter().enumerate() {
            let t = t.min(f.horizon());
            let steps = f.steps();
            let fs = f.resample(t, steps)?;
            let norm = mixed_spacetime_norm(&fs, e)?;
            if !(norm > 0.0) {
                continue;
            }
            let a_t = a.resample(t, steps)?;
            let b_t = b.map(|b| b.resample(t, steps)).transpose()?;
            let report = solve_forward(&a_t, b_t.as_ref(), &fs, opts)?;
            for row in rows.iter_mut() {
                let r = row.variant.measure(&report.field, e)? / norm;
                row.ratios[h] = row.ratios[h].max(r);
            }
        }
    }
    Ok(DecayTable { horizons: horizons.to_vec(), rows, excluded })
}

/// `T^{1 - 1/q} / prod L_i^{1/p_i}`: the sup-variant ratio for `f = 1`, `a = 1`.
pub fn unit_source_sup_ratio(extents: &[f64], e: &MixedExponent, horizon: f64) -> f64 {
    let space: f64 = extents.iter().zip(e.space()).map(|(l, p)| l.powf(1.0 / p.value())).product();
    let time = time_norm(&[1.0, 1.0], e.time(), horizon);
    horizon / (space * time)
}
