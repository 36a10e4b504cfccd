//! `motion-lds`: generate low-discrepancy point sets on rigid-motion groups,
//! measure their discrepancy and run integration checks.

mod commands;
mod config;
mod error;
mod spaces;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{CommandKind, Format, Mode, RunConfig};
use error::CliError;

#[derive(Parser)]
#[command(
    name = "motion-lds",
    version,
    about = "Deterministic low-discrepancy sampling of rigid-motion groups"
)]
struct Cli {
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// JSON run configuration; command-line flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a point set.
    Gen(RunArgs),
    /// Measure discrepancy against a region family.
    Disc(RunArgs),
    /// Integrate a built-in test function.
    Integrate(RunArgs),
}

fn parse_range(s: &str) -> Result<[f64; 2], String> {
    let (a, b) = s.split_once(',').ok_or("expected 'start,end'")?;
    let a = a.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let b = b.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok([a, b])
}

#[derive(Args)]
struct RunArgs {
    /// t1, t2, t3, s1, s2, so3, se2, se3, product:so3, product:se3,
    /// product:mixed, product:so3-bounded
    #[arg(long)]
    space: Option<String>,
    /// Requested number of points.
    #[arg(long)]
    n: Option<usize>,
    /// Number of product factors.
    #[arg(long)]
    factors: Option<usize>,
    /// Requested factor size for product spaces.
    #[arg(long)]
    m: Option<usize>,
    /// Rectangle discrepancy of the index generator.
    #[arg(long)]
    eps_r: Option<f64>,
    /// kwise or verified-random.
    #[arg(long)]
    backend: Option<String>,
    /// Field size for the kwise backend.
    #[arg(long)]
    prime: Option<u64>,
    /// Fiber (or circle) angle range `start,end` in radians.
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    psi: Option<[f64; 2]>,
    /// Polar angle range `start,end`.
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    theta: Option<[f64; 2]>,
    /// Azimuth range `start,end`.
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    phi: Option<[f64; 2]>,
    /// Region family for `disc`.
    #[arg(long)]
    family: Option<String>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Points per random convex polygon.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Test function for `integrate`.
    #[arg(long = "fn")]
    function: Option<String>,
    /// Point file written by `gen`, for `disc`.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output file; relative paths go under $MOTION_LDS_OUT_DIR when set.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn into_config(self, command: CommandKind) -> RunConfig {
        RunConfig {
            command: Some(command),
            space: self.space,
            n: self.n,
            factors: self.factors,
            m: self.m,
            eps_r: self.eps_r,
            backend: self.backend,
            prime: self.prime,
            psi: self.psi,
            theta: self.theta,
            phi: self.phi,
            family: self.family,
            mode: self.mode,
            k: self.k,
            trials: self.trials,
            seed: self.seed,
            format: self.format,
            function: self.function,
            input: self.input,
            out: self.out,
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Usage("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    let (kind, args) = match cli.command {
        Command::Gen(a) => (CommandKind::Gen, a),
        Command::Disc(a) => (CommandKind::Disc, a),
        Command::Integrate(a) => (CommandKind::Integrate, a),
    };
    let base = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if base.command.is_some_and(|c| c != kind) {
        return Err(CliError::Usage(
            "config file is for a different command".into(),
        ));
    }
    let cfg = base.overlay(args.into_config(kind));
    let text = match kind {
        CommandKind::Gen => commands::cmd_gen(&cfg)?,
        CommandKind::Disc => commands::cmd_disc(&cfg)?,
        CommandKind::Integrate => commands::cmd_integrate(&cfg)?,
    };
    commands::emit(&cfg, &text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("motion-lds: {e}");
            if let CliError::Core(motion_lds::Error::Budget { .. }) = e {
                eprintln!("motion-lds: rerun with --mode estimate for a Monte Carlo lower bound");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
