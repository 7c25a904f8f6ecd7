//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime or convergence failure,
//! 3 validation failure.

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use qamrx_core::constellation::build_qam16;
use qamrx_core::optimizer::{default_bracket, optimize_beta};
use qamrx_core::sweep::{
    render_bounds_csv, render_csv, render_simulate_csv, run_bounds_sweep, run_simulate_sweep,
    run_sweep, write_atomic, Spacing, SweepError, SweepSpec,
};
use std::path::PathBuf;
use std::process::ExitCode;

mod settings;
mod validate;

use settings::ConfigFile;

#[derive(Parser)]
#[command(name = "qamrx", version, about = "Hybrid 16-QAM receiver laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep photon number: receiver curves, optimal displacement, bounds,
    /// optional Monte Carlo columns.
    Sweep(GridArgs),
    /// Benchmark curves only (SQL and the minimum-error bound).
    Bounds(GridArgs),
    /// Monte Carlo error estimates over the grid at a fixed displacement.
    Simulate(SimulateArgs),
    /// Optimal displacement at one photon number.
    Optimize(OptimizeArgs),
    /// Run the built-in oracle suite and report each check.
    Validate,
}

#[derive(Args, Debug, Default)]
struct GridArgs {
    /// Smallest mean photon number of the grid.
    #[arg(long)]
    nbar_min: Option<f64>,
    /// Largest mean photon number of the grid.
    #[arg(long)]
    nbar_max: Option<f64>,
    /// Number of grid points.
    #[arg(long)]
    points: Option<usize>,
    /// Grid spacing: linear or log.
    #[arg(long)]
    spacing: Option<String>,
    /// Monte Carlo trials per grid point and mode (0 = analytic only).
    #[arg(long)]
    trials: Option<u64>,
    /// Master seed for all Monte Carlo streams.
    #[arg(long)]
    seed: Option<u64>,
    /// Width tolerance of the displacement search.
    #[arg(long)]
    beta_tol: Option<f64>,
    /// Optimality-residual tolerance of the bound solver.
    #[arg(long)]
    helstrom_tol: Option<f64>,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// key=value defaults file; command-line flags win on conflict.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// Displacement offset applied during the simulation.
    #[arg(long)]
    beta: Option<f64>,
}

#[derive(Args, Debug)]
struct OptimizeArgs {
    /// Mean photon number to optimize at.
    #[arg(long)]
    nbar: f64,
    /// Width tolerance of the displacement search.
    #[arg(long)]
    beta_tol: Option<f64>,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// key=value defaults file; command-line flags win on conflict.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(String),
    Validation(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Runtime(_) => 2,
            CliError::Validation(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) | CliError::Validation(m) => m,
        }
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::InvalidSpec(msg) => CliError::Usage(msg),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Sweep(args) => {
            let (spec, out) = resolve_grid(&args, 0)?;
            let records = run_sweep(&spec)?;
            emit(out.as_deref(), &render_csv(&records, spec.trials > 0))
        }
        Command::Bounds(args) => {
            let (spec, out) = resolve_grid(&args, 0)?;
            let records = run_bounds_sweep(&spec)?;
            emit(out.as_deref(), &render_bounds_csv(&records))
        }
        Command::Simulate(args) => {
            // Unlike sweep, a simulation without trials is meaningless, so
            // the default is a useful sample size and an explicit 0 is an
            // error.
            let (spec, out) = resolve_grid(&args.grid, 100_000)?;
            let config = ConfigFile::load_opt(args.grid.config.as_deref())?;
            let beta = settings::resolve(args.beta, &config, "beta", 0.0)?;
            let records = run_simulate_sweep(&spec, beta)?;
            emit(out.as_deref(), &render_simulate_csv(&records, beta))
        }
        Command::Optimize(args) => {
            let config = ConfigFile::load_opt(args.config.as_deref())?;
            let beta_tol = settings::resolve(args.beta_tol, &config, "beta-tol", 1e-6)?;
            if !args.nbar.is_finite() || args.nbar < 0.0 {
                return Err(CliError::Usage(format!(
                    "nbar must be finite and >= 0, got {}",
                    args.nbar
                )));
            }
            let scale = build_qam16(args.nbar)
                .map_err(|e| CliError::Usage(e.to_string()))?
                .scale();
            let result = optimize_beta(args.nbar, default_bracket(scale), beta_tol)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            let mut csv = String::from("nbar,beta_star,beta_star_sq,error_at_beta,error_at_zero\n");
            csv.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                args.nbar,
                result.beta_star,
                result.beta_star_sq,
                result.error_at_beta,
                result.error_at_zero
            ));
            emit(args.out.as_deref(), &csv)
        }
        Command::Validate => {
            let mut stdout = std::io::stdout().lock();
            let all_passed = validate::run_checks(&validate::checks(), &mut stdout)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            if all_passed {
                Ok(())
            } else {
                Err(CliError::Validation("one or more checks failed".into()))
            }
        }
    }
}

/// Merges flags, the optional config file, and built-in defaults (flags win,
/// then the file) into a sweep spec.
fn resolve_grid(
    args: &GridArgs,
    default_trials: u64,
) -> Result<(SweepSpec, Option<PathBuf>), CliError> {
    let config = ConfigFile::load_opt(args.config.as_deref())?;
    let spacing_name = settings::resolve(args.spacing.clone(), &config, "spacing", "log".into())?;
    let spacing: Spacing = spacing_name
        .parse()
        .map_err(|e: String| CliError::Usage(e))?;
    let spec = SweepSpec {
        nbar_min: settings::resolve(args.nbar_min, &config, "nbar-min", 0.1)?,
        nbar_max: settings::resolve(args.nbar_max, &config, "nbar-max", 30.0)?,
        points: settings::resolve(args.points, &config, "points", 40)?,
        spacing,
        trials: settings::resolve(args.trials, &config, "trials", default_trials)?,
        seed: settings::resolve(args.seed, &config, "seed", 0)?,
        beta_tol: settings::resolve(args.beta_tol, &config, "beta-tol", 1e-6)?,
        helstrom_tol: settings::resolve(args.helstrom_tol, &config, "helstrom-tol", 1e-8)?,
    };
    let out = match &args.out {
        Some(path) => Some(path.clone()),
        None => config.get("out").map(PathBuf::from),
    };
    Ok((spec, out))
}

fn emit(out: Option<&std::path::Path>, contents: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_atomic(path, contents).map_err(|e| {
            CliError::Runtime(format!("cannot write {}: {e}", path.display()))
        }),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_contract() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 1);
        assert_eq!(CliError::Runtime("x".into()).exit_code(), 2);
        assert_eq!(CliError::Validation("x".into()).exit_code(), 3);
        let usage: CliError = SweepError::InvalidSpec("bad".into()).into();
        assert_eq!(usage.exit_code(), 1);
    }
}
