//! Coefficient expressions resolved against a dimension.

use snl_core::parabolic::DiffusionCoefficient;
use snl_core::sde::Coefficient;
use snl_core::{Codomain, GridFunction, SpaceTimeField, TensorGrid};

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::expr::Expr;

/// A list of expressions evaluated component by component.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprField {
    exprs: Vec<Expr>,
}

impl ExprField {
    pub fn parse(sources: &[String], dim: usize, len: usize, field: &str) -> Result<Self> {
        if sources.len() != len {
            return Err(Error::field(field, format!("expected {len} expressions, got {}", sources.len())));
        }
        let exprs = sources
            .iter()
            .enumerate()
            .map(|(i, s)| Expr::parse(s, dim).map_err(|e| Error::field(format!("{field}[{i}]"), e.to_string())))
            .collect::<Result<_>>()?;
        Ok(Self { exprs })
    }

    pub fn constant_zero(len: usize, dim: usize) -> Self {
        Self { exprs: (0..len).map(|_| Expr::parse("0", dim).expect("literal")).collect() }
    }

    pub fn identity(dim: usize) -> Self {
        let exprs = (0..dim * dim)
            .map(|k| Expr::parse(if k % (dim + 1) == 0 { "1" } else { "0" }, dim).expect("literal"))
            .collect();
        Self { exprs }
    }

    fn depends_on_time(&self) -> bool {
        self.exprs.iter().any(Expr::depends_on_time)
    }

    /// Node samples on `[0, horizon]` with `steps` steps.
    pub fn sample(&self, grid: &TensorGrid, codomain: Codomain, horizon: f64, steps: usize) -> Result<SpaceTimeField> {
        if codomain.components(grid.dim()) != self.exprs.len() {
            return Err(Error::Config(format!("{} expressions cannot fill a {} field", self.exprs.len(), codomain.name())));
        }
        let fill = |t: f64, x: &[f64], out: &mut [f64]| {
            for (o, e) in out.iter_mut().zip(&self.exprs) {
                *o = e.eval(t, x);
            }
        };
        let field = if self.depends_on_time() {
            SpaceTimeField::from_fn(grid, codomain, horizon, steps, fill)?
        } else {
            SpaceTimeField::constant(GridFunction::from_fn(grid, codomain, |x, out| fill(0.0, x, out)), horizon, steps)?
        };
        Ok(field)
    }
}

impl Coefficient for ExprField {
    fn len(&self) -> usize {
        self.exprs.len()
    }

    fn eval(&self, t: f64, x: &[f64], out: &mut [f64]) {
        for (o, e) in out.iter_mut().zip(&self.exprs) {
            *o = e.eval(t, x);
        }
    }
}

/// All coefficients of a scenario, parsed for dimension `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub dim: usize,
    pub drift: Option<ExprField>,
    pub sigma: Option<ExprField>,
    pub diffusion: Option<ExprField>,
    pub source: Option<ExprField>,
    pub integrand: Option<ExprField>,
}

impl Resolved {
    pub fn new(cfg: &ExperimentConfig, dim: usize) -> Result<Self> {
        let c = &cfg.coefficients;
        let list = |v: &Option<Vec<String>>, len: usize, field: &str| {
            v.as_ref().map(|s| ExprField::parse(s, dim, len, field)).transpose()
        };
        let single = |v: &Option<String>, field: &str| {
            v.as_ref().map(|s| ExprField::parse(std::slice::from_ref(s), dim, 1, field)).transpose()
        };
        Ok(Self {
            dim,
            drift: list(&c.drift, dim, "coefficients.drift")?,
            sigma: list(&c.sigma, dim * dim, "coefficients.sigma")?,
            diffusion: list(&c.diffusion, dim * dim, "coefficients.diffusion")?,
            source: single(&c.source, "coefficients.source")?,
            integrand: single(&c.integrand, "coefficients.integrand")?,
        })
    }

    pub fn drift_or_zero(&self) -> ExprField {
        self.drift.clone().unwrap_or_else(|| ExprField::constant_zero(self.dim, self.dim))
    }

    pub fn sigma_or_identity(&self) -> ExprField {
        self.sigma.clone().unwrap_or_else(|| ExprField::identity(self.dim))
    }

    pub fn require_source(&self) -> Result<&ExprField> {
        self.source.as_ref().ok_or_else(|| Error::field("coefficients.source", "missing"))
    }

    /// `a` from `diffusion`, else `sigma sigma^T`, else the identity.
    pub fn diffusion_coefficient(&self, grid: &TensorGrid, horizon: f64, steps: usize) -> Result<DiffusionCoefficient> {
        let a = if let Some(a) = &self.diffusion {
            DiffusionCoefficient::with_computed_delta(a.sample(grid, Codomain::Matrix, horizon, steps)?)?
        } else if let Some(s) = &self.sigma {
            DiffusionCoefficient::from_sigma(&s.sample(grid, Codomain::Matrix, horizon, steps)?)?
        } else {
            DiffusionCoefficient::identity(grid, horizon, steps)?
        };
        Ok(a)
    }
}
