use snl_core::mixed_norm::mixed_spacetime_norm;
use snl_core::sde::{
    coupling_experiment, euler_maruyama, girsanov_weight, khasminskii_functional, krylov_mc, BrownianPath,
    CouplingTable, EulerOptions, KhasminskiiEstimate, MCEstimate, McConfig, Trajectory, ZvonkinSimulator,
};
use snl_core::{GridFunction, SpaceTimeField};

use crate::coefficients::Resolved;
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::output::{num, opt, Outcome, Table};

use super::Context;

fn euler_options(cfg: &ExperimentConfig, cap: f64) -> EulerOptions {
    EulerOptions { cap, r_max: cfg.sde.r_max }
}

fn mc_config(cfg: &ExperimentConfig) -> McConfig {
    McConfig { horizon: cfg.time.horizon, n: cfg.sde.paths, level: cfg.sde.level, seed: cfg.sde.seed }
}

fn setup(cfg: &ExperimentConfig) -> Result<(Resolved, Vec<f64>)> {
    let x0 = cfg.x0()?;
    Ok((Resolved::new(cfg, x0.len())?, x0))
}

pub struct Simulation {
    pub method: String,
    pub horizon: f64,
    /// `(seed, trajectory)`; path `seed` is `BrownianPath::sample(seed, 0, ..)`.
    pub paths: Vec<(u64, Trajectory)>,
}

/// Trajectories for every seed of `sde.seeds`, by direct Euler-Maruyama or
/// through the Zvonkin map (on the map's certified horizon).
pub fn simulate(cfg: &ExperimentConfig) -> Result<Simulation> {
    let (coeffs, x0) = setup(cfg)?;
    let d = x0.len();
    let opts = euler_options(cfg, cfg.sde.cap);
    let seeds = cfg.sde.seeds.seeds();
    let sample = |s: u64, horizon: f64| BrownianPath::sample(s, 0, d, horizon, cfg.sde.level);
    if cfg.sde.method == "zvonkin" {
        let (map, sigma) = super::zvonkin::build_map(cfg)?;
        let sim = ZvonkinSimulator::new(&map, &sigma)?;
        let horizon = map.horizon();
        let paths = seeds
            .iter()
            .map(|&s| Ok((s, sim.simulate(&x0, &sample(s, horizon)?, opts)?)))
            .collect::<Result<_>>()?;
        return Ok(Simulation { method: cfg.sde.method.clone(), horizon, paths });
    }
    let (b, sigma) = (coeffs.drift_or_zero(), coeffs.sigma_or_identity());
    let horizon = cfg.time.horizon;
    let paths = seeds
        .iter()
        .map(|&s| Ok((s, euler_maruyama(&b, &sigma, &x0, &sample(s, horizon)?, opts)?)))
        .collect::<Result<_>>()?;
    Ok(Simulation { method: cfg.sde.method.clone(), horizon, paths })
}

pub fn simulate_outcome(sim: &Simulation) -> Outcome {
    let d = sim.paths.first().map_or(0, |p| p.1.dim());
    let mut headers = vec!["seed".to_string(), "k".into(), "t".into()];
    headers.extend((1..=d).map(|i| format!("x{i}")));
    let mut traj = Table { name: "paths".into(), headers, rows: Vec::new() };
    let mut summary = Table::new("", &["seed", "method", "horizon", "nodes", "exploded", "exit"]);
    for (seed, tr) in &sim.paths {
        for k in 0..tr.len() {
            let mut row = vec![seed.to_string(), k.to_string(), num(tr.time(k))];
            row.extend(tr.state(k).iter().map(|&v| num(v)));
            traj.push(row);
        }
        summary.push(vec![
            seed.to_string(),
            sim.method.clone(),
            num(sim.horizon),
            tr.len().to_string(),
            tr.exploded().to_string(),
            tr.exit().map(|e| e.to_string()).unwrap_or_default(),
        ]);
    }
    let exploded = sim.paths.iter().filter(|p| p.1.exploded()).count();
    Outcome {
        summary: vec![format!("{} path(s) by {}, {exploded} exploded", sim.paths.len(), sim.method)],
        tables: vec![summary, traj],
        ..Default::default()
    }
}

pub fn couple(cfg: &ExperimentConfig, ctx: &Context) -> Result<CouplingTable> {
    let (coeffs, x0) = setup(cfg)?;
    let levels = (cfg.sde.levels[0], cfg.sde.levels[1]);
    Ok(coupling_experiment(
        &coeffs.drift_or_zero(),
        &coeffs.sigma_or_identity(),
        &x0,
        cfg.time.horizon,
        &cfg.sde.seeds.seeds(),
        levels,
        euler_options(cfg, cfg.sde.cap),
        &ctx.exec,
    )?)
}

pub fn couple_outcome(table: &CouplingTable) -> Outcome {
    let mut t = Table::new("", &["level", "next_level", "mean", "stderr", "n", "excluded"]);
    for r in &table.rows {
        t.push(vec![
            r.level.to_string(),
            (r.level + 1).to_string(),
            num(r.mean),
            num(r.stderr),
            r.n.to_string(),
            r.excluded.to_string(),
        ]);
    }
    let mut rate = Table::new("rate", &["rate", "strictly_decreasing"]);
    rate.push(vec![opt(table.rate), table.strictly_decreasing().to_string()]);
    let means: Vec<String> = table.rows.iter().map(|r| format!("{:.3e}", r.mean)).collect();
    Outcome {
        tables: vec![t, rate],
        summary: vec![
            format!("mean inter-level sup error: {}", means.join(", ")),
            match table.rate {
                Some(r) => format!("fitted rate {r:.3}"),
                None => "no rate (some level has zero error)".into(),
            },
        ],
        ..Default::default()
    }
}

pub struct KrylovOutcome {
    pub estimate: MCEstimate,
    /// `||f||` in the scenario's mixed norm, when a grid and exponents are given.
    pub norm: Option<f64>,
}

impl KrylovOutcome {
    pub fn ratio(&self) -> Option<f64> {
        self.norm.map(|n| self.estimate.mean / n)
    }
}

/// `||f||_{L^q_p}` with `f` sampled at cell midpoints of the grid shifted so
/// that it is centred at the origin.
fn centred_norm(cfg: &ExperimentConfig, f: &crate::coefficients::ExprField) -> Result<f64> {
    use snl_core::sde::Coefficient;
    let grid = cfg.tensor_grid()?;
    let e = cfg.exponent()?;
    let shift: Vec<f64> = (0..grid.dim()).map(|i| 0.5 * grid.spacing(i) - 0.5 * grid.extents()[i]).collect();
    let (horizon, steps) = (cfg.time.horizon, cfg.time.steps);
    let slices = (0..=steps)
        .map(|n| {
            let t = horizon * n as f64 / steps as f64;
            GridFunction::scalar_from_fn(&grid, |x| {
                let y: Vec<f64> = x.iter().zip(&shift).map(|(a, b)| a + b).collect();
                let mut v = [0.0];
                f.eval(t, &y, &mut v);
                v[0].abs()
            })
        })
        .collect();
    Ok(mixed_spacetime_norm(&SpaceTimeField::new(horizon, slices)?, &e)?)
}

pub fn krylov(cfg: &ExperimentConfig, ctx: &Context) -> Result<KrylovOutcome> {
    let (coeffs, x0) = setup(cfg)?;
    let f = coeffs.integrand.as_ref().ok_or_else(|| Error::field("coefficients.integrand", "missing"))?;
    if let Some(section) = &cfg.exponents {
        let e = section.resolve("exponents")?;
        if !e.check_subcritical(2)?.pass {
            return Err(Error::field("exponents", format!("{e} is not subcritical at threshold 2")));
        }
    }
    let estimate = krylov_mc(
        f,
        &coeffs.drift_or_zero(),
        &coeffs.sigma_or_identity(),
        &x0,
        mc_config(cfg),
        euler_options(cfg, cfg.sde.cap),
        &ctx.exec,
    )?;
    let norm = if cfg.grid.is_some() && cfg.exponents.is_some() { Some(centred_norm(cfg, f)?) } else { None };
    Ok(KrylovOutcome { estimate, norm })
}

fn estimate_cells(e: &MCEstimate) -> Vec<String> {
    vec![num(e.mean), num(e.stderr), e.n.to_string(), e.excluded.to_string(), e.seed.to_string(), e.paths.to_string()]
}

pub fn krylov_outcome(k: &KrylovOutcome) -> Outcome {
    let mut t = Table::new("", &["mean", "stderr", "n", "excluded", "seed", "paths", "norm", "ratio"]);
    let mut row = estimate_cells(&k.estimate);
    row.extend([opt(k.norm), opt(k.ratio())]);
    t.push(row);
    let mut summary = vec![format!("E int |f(s, X_s)| ds = {:.6} +- {:.6}", k.estimate.mean, k.estimate.stderr)];
    if let (Some(n), Some(r)) = (k.norm, k.ratio()) {
        summary.push(format!("mixed norm {n:.6}, ratio {r:.6}"));
    }
    Outcome { tables: vec![t], summary, ..Default::default() }
}

pub fn girsanov(cfg: &ExperimentConfig, ctx: &Context) -> Result<Vec<(f64, MCEstimate)>> {
    let (coeffs, x0) = setup(cfg)?;
    let (b, sigma) = (coeffs.drift_or_zero(), coeffs.sigma_or_identity());
    cfg.sde
        .caps()
        .into_iter()
        .map(|cap| Ok((cap, girsanov_weight(&b, &sigma, &x0, mc_config(cfg), euler_options(cfg, cap), &ctx.exec)?)))
        .collect()
}

pub fn girsanov_outcome(rows: &[(f64, MCEstimate)]) -> Outcome {
    let mut t = Table::new("", &["cap", "mean", "stderr", "n", "excluded", "seed", "paths", "within_3_stderr"]);
    let mut summary = Vec::new();
    for (cap, e) in rows {
        let mut row = vec![num(*cap)];
        row.extend(estimate_cells(e));
        row.push(e.within(1.0, 3.0).to_string());
        t.push(row);
        summary.push(format!("cap {cap:e}: E rho_T = {:.6} +- {:.6}", e.mean, e.stderr));
    }
    Outcome { tables: vec![t], summary, ..Default::default() }
}

pub fn khasminskii(cfg: &ExperimentConfig, ctx: &Context) -> Result<Vec<(f64, KhasminskiiEstimate)>> {
    let (coeffs, x0) = setup(cfg)?;
    let (b, sigma) = (coeffs.drift_or_zero(), coeffs.sigma_or_identity());
    cfg.sde
        .caps()
        .into_iter()
        .map(|cap| {
            let e = khasminskii_functional(
                &b,
                &sigma,
                &x0,
                cfg.sde.kappa,
                mc_config(cfg),
                euler_options(cfg, cap),
                &ctx.exec,
            )?;
            Ok((cap, e))
        })
        .collect()
}

pub fn khasminskii_outcome(rows: &[(f64, KhasminskiiEstimate)]) -> Outcome {
    let mut t = Table::new("", &["cap", "mean", "stderr", "n", "excluded", "seed", "paths", "overflow", "drift"]);
    let mut summary = Vec::new();
    let first = rows.first().map(|r| r.1.estimate.mean);
    for (cap, k) in rows {
        let mut row = vec![num(*cap)];
        row.extend(estimate_cells(&k.estimate));
        row.push(k.overflow.to_string());
        row.push(opt(first.map(|f| (k.estimate.mean - f).abs() / f)));
        t.push(row);
        summary.push(if k.overflow > 0 {
            format!("cap {cap:e}: {} sample(s) overflowed; the functional is infinite at this cap", k.overflow)
        } else {
            format!("cap {cap:e}: E exp(kappa int |b|^2) = {:.6} +- {:.6}", k.estimate.mean, k.estimate.stderr)
        });
    }
    Outcome { tables: vec![t], summary, ..Default::default() }
}
