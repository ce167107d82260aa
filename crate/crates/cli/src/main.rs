//! `rare-gt`: experiment driver binary.
//!
//! Exit codes: 0 success, 1 config error (unreadable/malformed inputs or
//! flags), 2 validation error (inputs that parse but break an invariant),
//! 3 runtime error (sampling/estimation/report-writing failures).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use rare_gt_cli::{emit_profile_library, write_report, CliError, ExperimentSpec};
use rare_gt_core::oracle::{select_params, sufficiency_bound};
use rare_gt_core::RegimeBounds64;

#[derive(Parser)]
#[command(name = "rare-gt", version, about = "Seeded estimator experiments over scaled profile families")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON spec file and write its CSV report.
    Run {
        /// Path to the spec: {profile_path, experiment, n_values, seeds, epsilon, output}.
        #[arg(long)]
        spec: PathBuf,
    },
    /// Write the built-in profile library (counterexample, uniform, skew) as JSON.
    Profiles {
        /// Output directory, created if missing.
        #[arg(long)]
        out: PathBuf,
    },
    /// Select (K, M) for a probability band and print the certified accuracy bound.
    Bounds {
        /// Lower band endpoint č (normalized symbol probability).
        #[arg(long)]
        c_lo: f64,
        /// Upper band endpoint ĉ.
        #[arg(long)]
        c_hi: f64,
        /// Target accuracy ε.
        #[arg(long)]
        epsilon: f64,
    },
}

fn init_thread_pool() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("RARE_GT_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .parse()
        .ok()
        .filter(|&t| t >= 1)
        .ok_or_else(|| {
            CliError::Config(format!("RARE_GT_THREADS must be a positive integer, got {raw:?}"))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { spec } => {
            init_thread_pool()?;
            let spec = ExperimentSpec::from_file(&spec)?;
            let rows = write_report(&spec)?;
            println!("wrote {} ({rows} data rows)", spec.output.display());
            Ok(())
        }
        Command::Profiles { out } => {
            for path in emit_profile_library(&out)? {
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Bounds { c_lo, c_hi, epsilon } => {
            let bounds = RegimeBounds64::new(c_lo, c_hi)
                .map_err(|e| CliError::Validation(format!("band: {e}")))?;
            let params = select_params(bounds, epsilon)
                .map_err(|e| CliError::Validation(format!("parameter selection: {e}")))?;
            let bound: f64 =
                sufficiency_bound(params.bounds(), params.truncation(), params.series_order());
            println!("(K, M) = ({}, {})", params.truncation(), params.series_order());
            println!("theorem_bound = {bound}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
