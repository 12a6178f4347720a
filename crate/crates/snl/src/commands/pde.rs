use snl_core::parabolic::{
    manufactured, regularity_ratio, small_time_decay, solve_dual, solve_forward, DecayTable,
    DecayVariant, RegularityRatios, SolveReport, SolverOptions,
};
use snl_core::parabolic::manufactured::ConvergenceRow;
use snl_core::rng::Stream;
use snl_core::spectral::random_band_limited;
use snl_core::{Codomain, SpaceTimeField, TensorGrid};

use crate::coefficients::Resolved;
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::gfd;
use crate::output::{num, opt, Outcome, Table};

pub fn solver_options(cfg: &ExperimentConfig) -> SolverOptions {
    SolverOptions { tol: cfg.solver.tol, max_iterations: cfg.solver.max_iterations }
}

#[derive(Debug, Clone)]
pub struct Convergence {
    pub spatial: Vec<ConvergenceRow>,
    pub temporal: Vec<ConvergenceRow>,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub report: Option<SolveReport>,
    pub ratios: Option<RegularityRatios>,
    pub convergence: Option<Convergence>,
}

fn solve_setup(cfg: &ExperimentConfig) -> Result<(TensorGrid, Resolved, SpaceTimeField)> {
    let grid = cfg.tensor_grid()?;
    let coeffs = Resolved::new(cfg, grid.dim())?;
    let f = coeffs.require_source()?.sample(&grid, Codomain::Scalar, cfg.time.horizon, cfg.time.steps)?;
    Ok((grid, coeffs, f))
}

fn finish(cfg: &ExperimentConfig, mut report: SolveReport, f: &SpaceTimeField) -> Result<SolveOutcome> {
    let ratios = match &cfg.exponents {
        Some(e) => {
            let r = regularity_ratio(&report, f, &e.resolve("exponents")?)?;
            for (name, v) in [("hessian", r.hessian), ("time_derivative", r.time_derivative), ("dual", r.dual)] {
                if let Some(v) = v {
                    report.attach(name, v);
                }
            }
            Some(r)
        }
        None => None,
    };
    Ok(SolveOutcome { report: Some(report), ratios, convergence: None })
}

/// Forward problem `d_t u = 1/2 a:D^2 u + b.grad u + f`, `u(0) = 0`, or the
/// manufactured-solution study when `pde.manufactured` is set.
pub fn solve(cfg: &ExperimentConfig) -> Result<SolveOutcome> {
    let opts = solver_options(cfg);
    if cfg.pde.manufactured {
        let spatial = manufactured::spatial_study(&cfg.pde.spatial_counts, cfg.time.steps, opts)?;
        let temporal = manufactured::temporal_study(cfg.pde.temporal_count, &cfg.pde.temporal_steps, opts)?;
        return Ok(SolveOutcome { report: None, ratios: None, convergence: Some(Convergence { spatial, temporal }) });
    }
    let (grid, coeffs, f) = solve_setup(cfg)?;
    let a = coeffs.diffusion_coefficient(&grid, cfg.time.horizon, cfg.time.steps)?;
    let b = coeffs.drift.as_ref().map(|d| d.sample(&grid, Codomain::Vector, cfg.time.horizon, cfg.time.steps)).transpose()?;
    let report = solve_forward(&a, b.as_ref(), &f, opts)?;
    finish(cfg, report, &f)
}

/// Dual problem `d_t w + 1/2 d_ij(a^ij w) + f = 0`, `w(T) = 0`.
pub fn dual(cfg: &ExperimentConfig) -> Result<SolveOutcome> {
    let (grid, coeffs, f) = solve_setup(cfg)?;
    if coeffs.drift.is_some() {
        return Err(Error::field("coefficients.drift", "the dual problem takes no drift"));
    }
    let a = coeffs.diffusion_coefficient(&grid, cfg.time.horizon, cfg.time.steps)?;
    let report = solve_dual(&a, &f, solver_options(cfg))?;
    finish(cfg, report, &f)
}

fn convergence_table(name: &str, rows: &[ConvergenceRow]) -> Table {
    let mut t = Table::new(name, &["resolution", "error", "rate"]);
    for r in rows {
        t.push(vec![r.resolution.to_string(), num(r.error), opt(r.rate)]);
    }
    t
}

impl SolveOutcome {
    pub fn outcome(&self, cfg: &ExperimentConfig) -> Result<Outcome> {
        let mut out = Outcome::default();
        if let Some(c) = &self.convergence {
            out.tables.push(convergence_table("spatial", &c.spatial));
            out.tables.push(convergence_table("temporal", &c.temporal));
            for (label, rows) in [("h", &c.spatial), ("dt", &c.temporal)] {
                let rates: Vec<String> = rows.iter().filter_map(|r| r.rate).map(|r| format!("{r:.2}")).collect();
                out.summary.push(format!("manufactured solution: rates in {label}: {}", rates.join(", ")));
            }
        }
        let Some(report) = &self.report else { return Ok(out) };
        let mut s = Table::new(
            "",
            &["kind", "dim", "counts", "extents", "horizon", "steps", "residual", "max_iterations", "frozen"],
        );
        let grid = report.field.grid();
        let join = |v: Vec<String>| v.join(" ");
        s.push(vec![
            format!("{:?}", report.kind).to_lowercase(),
            grid.dim().to_string(),
            join(grid.counts().iter().map(|c| c.to_string()).collect()),
            join(grid.extents().iter().map(|&l| num(l)).collect()),
            num(report.horizon),
            report.steps.to_string(),
            num(report.residual),
            report.max_iterations.to_string(),
            num(report.frozen),
        ]);
        out.tables.push(s);
        let mut r = Table::new("ratios", &["name", "value"]);
        if let Some(rat) = &self.ratios {
            r.push(vec!["source_norm".into(), num(rat.source_norm)]);
        }
        for (name, v) in &report.ratios {
            r.push(vec![name.clone(), num(*v)]);
        }
        out.tables.push(r);
        let mut nodes = Table::new("nodes", &["n", "t", "min", "max", "l2"]);
        for (n, slice) in report.field.slices().enumerate() {
            let data = slice.data();
            let min = data.iter().copied().fold(f64::INFINITY, f64::min);
            let max = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let l2 = (data.iter().map(|v| v * v).sum::<f64>() * grid.cell_volume()).sqrt();
            nodes.push(vec![n.to_string(), num(report.field.time(n)), num(min), num(max), num(l2)]);
        }
        out.tables.push(nodes);
        if cfg.pde.dump {
            out.files.push(("field.gfd".into(), gfd::encode(&report.field)));
        }
        out.summary.push(format!(
            "{:?} solve on {:?} points, {} steps: residual {:e}, {} max inner iterations",
            report.kind,
            grid.counts(),
            report.steps,
            report.residual,
            report.max_iterations
        ));
        for (name, v) in &report.ratios {
            out.summary.push(format!("ratio {name}: {v:.6}"));
        }
        Ok(out)
    }
}

/// The random band-limited source family of a scenario on `grid`.
pub fn source_family(cfg: &ExperimentConfig, grid: &TensorGrid, horizon: f64, steps: usize) -> Result<Vec<SpaceTimeField>> {
    (0..cfg.pde.family)
        .map(|i| {
            let mut stream = Stream::new(cfg.pde.family_seed, i as u64);
            let g = random_band_limited(grid, cfg.pde.max_mode, cfg.pde.modes, &mut stream);
            Ok(SpaceTimeField::constant(g, horizon, steps)?)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityRow {
    pub refinement: usize,
    pub counts: Vec<usize>,
    pub steps: usize,
    /// Max over the family of `||D^2 u|| / ||f||`.
    pub hessian: f64,
    /// Max over the family of `||d_t u|| / ||f||`.
    pub time_derivative: f64,
}

/// Hessian and time-derivative ratios over the source family, repeated on
/// grids refined (in space and time) by each factor of `pde.refinements`.
pub fn regularity(cfg: &ExperimentConfig) -> Result<Vec<RegularityRow>> {
    let base = cfg.tensor_grid()?;
    let e = cfg.exponent()?;
    let opts = solver_options(cfg);
    let coeffs = Resolved::new(cfg, base.dim())?;
    if cfg.pde.family == 0 {
        return Err(Error::field("pde.family", "must be at least 1"));
    }
    let mut rows = Vec::new();
    for &factor in &cfg.pde.refinements {
        let grid = base.refined(factor).map_err(|e| Error::field("pde.refinements", e.to_string()))?;
        let steps = cfg.time.steps * factor;
        let horizon = cfg.time.horizon;
        let a = coeffs.diffusion_coefficient(&grid, horizon, steps)?;
        let b = coeffs.drift.as_ref().map(|d| d.sample(&grid, Codomain::Vector, horizon, steps)).transpose()?;
        let mut row =
            RegularityRow { refinement: factor, counts: grid.counts().to_vec(), steps, hessian: 0.0, time_derivative: 0.0 };
        for f in source_family(cfg, &grid, horizon, steps)? {
            let report = solve_forward(&a, b.as_ref(), &f, opts)?;
            let r = regularity_ratio(&report, &f, &e)?;
            row.hessian = row.hessian.max(r.hessian.unwrap_or(0.0));
            row.time_derivative = row.time_derivative.max(r.time_derivative.unwrap_or(0.0));
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Relative change of the Hessian ratio against the first row.
pub fn regularity_drift(rows: &[RegularityRow]) -> Vec<f64> {
    rows.iter().map(|r| (r.hessian - rows[0].hessian).abs() / rows[0].hessian).collect()
}

pub fn regularity_outcome(rows: &[RegularityRow]) -> Outcome {
    let mut t = Table::new("", &["refinement", "counts", "steps", "hessian_ratio", "time_derivative_ratio", "drift"]);
    let drift = regularity_drift(rows);
    let mut summary = Vec::new();
    for (r, d) in rows.iter().zip(&drift) {
        let counts: Vec<String> = r.counts.iter().map(|c| c.to_string()).collect();
        t.push(vec![
            r.refinement.to_string(),
            counts.join(" "),
            r.steps.to_string(),
            num(r.hessian),
            num(r.time_derivative),
            num(*d),
        ]);
        summary.push(format!(
            "refinement x{}: max hessian ratio {:.6}, max d_t ratio {:.6}, drift {:.2}%",
            r.refinement,
            r.hessian,
            r.time_derivative,
            100.0 * d
        ));
    }
    Outcome { tables: vec![t], summary, ..Default::default() }
}

/// Small-time decay table over `pde.horizons` for the source family plus
/// `coefficients.source` when given.
pub fn decay(cfg: &ExperimentConfig) -> Result<DecayTable> {
    let grid = cfg.tensor_grid()?;
    let e = cfg.exponent()?;
    let coeffs = Resolved::new(cfg, grid.dim())?;
    let (horizon, steps) = (cfg.time.horizon, cfg.time.steps);
    let a = coeffs.diffusion_coefficient(&grid, horizon, steps)?;
    let b = coeffs.drift.as_ref().map(|d| d.sample(&grid, Codomain::Vector, horizon, steps)).transpose()?;
    let mut family = source_family(cfg, &grid, horizon, steps)?;
    if let Some(src) = &coeffs.source {
        family.push(src.sample(&grid, Codomain::Scalar, horizon, steps)?);
    }
    let mut variants: Vec<DecayVariant> = cfg.pde.alphas.iter().map(|&a| DecayVariant::Bessel(a)).collect();
    if cfg.pde.sup {
        variants.push(DecayVariant::Sup);
    }
    if cfg.pde.grad_sup {
        variants.push(DecayVariant::GradSup);
    }
    let horizons: Vec<f64> = cfg.pde.horizons.iter().map(|t| t * horizon).collect();
    Ok(small_time_decay(&a, b.as_ref(), &family, &e, &variants, &horizons, solver_options(cfg))?)
}

/// Whether every entry is at most `slack` times the previous one.
pub fn decreasing_within(ratios: &[f64], slack: f64) -> bool {
    ratios.windows(2).all(|w| w[1] <= w[0] * slack)
}

pub fn decay_outcome(table: &DecayTable) -> Outcome {
    let mut t = Table::new("", &["variant", "horizon", "ratio"]);
    let mut summary = Vec::new();
    for row in &table.rows {
        for (h, r) in table.horizons.iter().zip(&row.ratios) {
            t.push(vec![row.variant.name(), num(*h), num(*r)]);
        }
        let cells: Vec<String> = row.ratios.iter().map(|r| format!("{r:.4e}")).collect();
        summary.push(format!(
            "{}: {} ({})",
            row.variant.name(),
            cells.join(", "),
            if decreasing_within(&row.ratios, 1.1) { "decreasing" } else { "not decreasing" }
        ));
    }
    if table.excluded > 0 {
        summary.push(format!("{} zero family member(s) excluded", table.excluded));
    }
    Outcome { tables: vec![t], summary, ..Default::default() }
}
