//! One function per CLI command. Each returns typed results together with
//! the tables that get written to disk.

pub mod check;
pub mod pde;
pub mod report;
pub mod sde;
pub mod zvonkin;

use clap::ValueEnum;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::exec::RayonExecutor;
use crate::output::Outcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Check,
    Solve,
    Dual,
    Regularity,
    Decay,
    Zvonkin,
    Simulate,
    Couple,
    Krylov,
    Girsanov,
    Khasminskii,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Solve => "solve",
            Command::Dual => "dual",
            Command::Regularity => "regularity",
            Command::Decay => "decay",
            Command::Zvonkin => "zvonkin",
            Command::Simulate => "simulate",
            Command::Couple => "couple",
            Command::Krylov => "krylov",
            Command::Girsanov => "girsanov",
            Command::Khasminskii => "khasminskii",
        }
    }
}

pub struct Context {
    pub exec: RayonExecutor,
}

impl Context {
    pub fn new(threads: usize) -> Self {
        Self { exec: RayonExecutor::new(threads) }
    }
}

pub fn run(command: Command, cfg: &ExperimentConfig, ctx: &Context) -> Result<Outcome> {
    let scenario = || format!("scenario '{}', command {}", cfg.scenario, command.name());
    let out = match command {
        Command::Check => check::check(cfg).map(|r| check::outcome(&r)),
        Command::Solve => pde::solve(cfg).and_then(|r| r.outcome(cfg)),
        Command::Dual => pde::dual(cfg).and_then(|r| r.outcome(cfg)),
        Command::Regularity => pde::regularity(cfg).map(|r| pde::regularity_outcome(&r)),
        Command::Decay => pde::decay(cfg).map(|r| pde::decay_outcome(&r)),
        Command::Zvonkin => zvonkin::zvonkin(cfg).and_then(|r| r.outcome(cfg)),
        Command::Simulate => sde::simulate(cfg).map(|r| sde::simulate_outcome(&r)),
        Command::Couple => sde::couple(cfg, ctx).map(|r| sde::couple_outcome(&r)),
        Command::Krylov => sde::krylov(cfg, ctx).map(|r| sde::krylov_outcome(&r)),
        Command::Girsanov => sde::girsanov(cfg, ctx).map(|r| sde::girsanov_outcome(&r)),
        Command::Khasminskii => sde::khasminskii(cfg, ctx).map(|r| sde::khasminskii_outcome(&r)),
    };
    out.map_err(|e| e.context(scenario()))
}
