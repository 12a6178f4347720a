use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use snl::commands::{self, report, Command, Context};
use snl::config::SeedSpec;
use snl::output::write_outcome;
use snl::{Error, ExperimentConfig};

#[derive(Parser)]
#[command(name = "snl", version, about = "Experiments for SDEs with singular drift and mixed-norm coefficients")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (TOML). A run manifest is accepted as well.
    #[arg(long)]
    config: PathBuf,
    /// Base seed; overrides `sde.seed` and the start of a seed range.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to `output` from the config, else `out/<scenario>`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for Monte-Carlo loops (0 = all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand)]
enum Cmd {
    /// Subcriticality of exponent views (exact rationals).
    Check(RunArgs),
    /// Forward parabolic solve or the manufactured-solution study.
    Solve(RunArgs),
    /// Dual (divergence-form) parabolic solve.
    Dual(RunArgs),
    /// Maximal-regularity ratios under grid refinement.
    Regularity(RunArgs),
    /// Small-time decay tables.
    Decay(RunArgs),
    /// Build and certify the Zvonkin map.
    Zvonkin(RunArgs),
    /// Simulate trajectories.
    Simulate(RunArgs),
    /// Coupling between dyadic levels on shared Brownian paths.
    Couple(RunArgs),
    /// Monte-Carlo Krylov functional.
    Krylov(RunArgs),
    /// Monte-Carlo Girsanov weight.
    Girsanov(RunArgs),
    /// Monte-Carlo Khasminskii functional.
    Khasminskii(RunArgs),
    /// Merge the outputs of finished runs.
    Report {
        /// Directory containing run manifests (searched recursively).
        dir: PathBuf,
        /// Where to write the merged tables; defaults to `dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(args: &RunArgs) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.sde.seed = seed;
        if let SeedSpec::Range { start, .. } = &mut cfg.sde.seeds {
            *start = seed;
        }
        cfg.pde.family_seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.output = Some(out.display().to_string());
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<(), Error> {
    let (command, args) = match cli.command {
        Cmd::Report { dir, out } => {
            let outcome = report::report(&dir)?;
            let target = out.unwrap_or_else(|| dir.clone());
            write_outcome(&target, "report", None, &outcome)?;
            for line in &outcome.summary {
                println!("{line}");
            }
            return Ok(());
        }
        Cmd::Check(a) => (Command::Check, a),
        Cmd::Solve(a) => (Command::Solve, a),
        Cmd::Dual(a) => (Command::Dual, a),
        Cmd::Regularity(a) => (Command::Regularity, a),
        Cmd::Decay(a) => (Command::Decay, a),
        Cmd::Zvonkin(a) => (Command::Zvonkin, a),
        Cmd::Simulate(a) => (Command::Simulate, a),
        Cmd::Couple(a) => (Command::Couple, a),
        Cmd::Krylov(a) => (Command::Krylov, a),
        Cmd::Girsanov(a) => (Command::Girsanov, a),
        Cmd::Khasminskii(a) => (Command::Khasminskii, a),
    };
    let cfg = load(&args)?;
    let ctx = Context::new(args.threads);
    let outcome = commands::run(command, &cfg, &ctx)?;
    let dir = cfg.output.clone().map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out").join(&cfg.scenario));
    let files = write_outcome(&dir, command.name(), Some(&cfg), &outcome)?;
    for line in &outcome.summary {
        println!("{line}");
    }
    println!("wrote {} file(s) to {}", files.len() + 1, dir.display());
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
