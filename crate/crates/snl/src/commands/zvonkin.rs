use snl_core::zvonkin::{InverseBound, ZvonkinMap, ZvonkinOptions};
use snl_core::{Codomain, SpaceTimeField};

use crate::coefficients::Resolved;
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::gfd;
use crate::output::{num, Outcome, Table};

pub struct ZvonkinOutcome {
    pub map: ZvonkinMap,
    pub sigma: SpaceTimeField,
    pub bound: InverseBound,
}

pub fn options(cfg: &ExperimentConfig) -> ZvonkinOptions {
    ZvonkinOptions {
        steps: cfg.zvonkin.steps,
        eta: cfg.zvonkin.eta,
        solver: super::pde::solver_options(cfg),
        mollify: cfg.zvonkin.mollify,
    }
}

/// Build the map at `time.horizon`, or shrink from there until certified.
pub fn build_map(cfg: &ExperimentConfig) -> Result<(ZvonkinMap, SpaceTimeField)> {
    let grid = cfg.tensor_grid()?;
    let coeffs = Resolved::new(cfg, grid.dim())?;
    let (t0, steps) = (cfg.time.horizon, cfg.time.steps);
    let sigma = coeffs.sigma_or_identity().sample(&grid, Codomain::Matrix, t0, steps)?;
    let b = coeffs.drift_or_zero().sample(&grid, Codomain::Vector, t0, steps)?;
    let opts = options(cfg);
    let map = if cfg.zvonkin.shrink {
        ZvonkinMap::shrink_horizon(&sigma, &b, t0, opts)?
    } else {
        ZvonkinMap::build(&sigma, &b, t0, opts)?
    };
    Ok((map, sigma))
}

pub fn zvonkin(cfg: &ExperimentConfig) -> Result<ZvonkinOutcome> {
    let (map, sigma) = build_map(cfg)?;
    let bound = map.inverse_bound();
    Ok(ZvonkinOutcome { map, sigma, bound })
}

impl ZvonkinOutcome {
    pub fn outcome(&self, cfg: &ExperimentConfig) -> Result<Outcome> {
        let m = &self.map;
        let mut t = Table::new(
            "",
            &["horizon", "steps", "eta", "grad_sup", "certified", "residual", "inverse_min", "inverse_max", "inverse_pass"],
        );
        t.push(vec![
            num(m.horizon()),
            m.steps().to_string(),
            num(m.eta()),
            num(m.grad_sup()),
            m.certified().to_string(),
            num(m.residual()),
            num(self.bound.min),
            num(self.bound.max),
            self.bound.pass.to_string(),
        ]);
        let mut out = Outcome { tables: vec![t], ..Default::default() };
        if cfg.zvonkin.export && m.certified() {
            out.files.push(("u.gfd".into(), gfd::encode(m.u())));
            out.files.push(("phi.gfd".into(), gfd::encode(&m.phi_field())));
            out.files.push(("grad_phi.gfd".into(), gfd::encode(m.grad_phi())));
            out.files.push(("psi.gfd".into(), gfd::encode(&m.transformed_diffusion(&self.sigma)?)));
        }
        out.summary.push(format!(
            "horizon {}: grad sup {:.6} (eta {}), {}; inverse gradient norms in [{:.4}, {:.4}]",
            m.horizon(),
            m.grad_sup(),
            m.eta(),
            if m.certified() { "certified" } else { "not certified" },
            self.bound.min,
            self.bound.max
        ));
        Ok(out)
    }
}
