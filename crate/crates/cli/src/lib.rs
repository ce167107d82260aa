//! Experiment driver around `rare-gt-core`: loads a profile, runs seeded
//! trials across lengths, compares every estimate against its oracle
//! value, and writes a deterministic CSV report.
//!
//! Reports are byte-identical across re-runs of the same spec: trials are
//! seeded, rows are sorted before writing, and the `runtime_ms` column is
//! 0 unless `RARE_GT_TIMING=1` opts into wall-clock timings (which are
//! inherently unstable). `RARE_GT_THREADS` caps the rayon pool; the
//! output does not depend on thread count.

pub mod runner;
pub mod spec;

use std::path::Path;

use rare_gt_core::profiles;
use thiserror::Error;

pub use runner::{run_to_string, write_report};
pub use spec::{Experiment, ExperimentSpec};

/// Failure classes, each mapped to a process exit code: unreadable or
/// unparsable inputs (1), inputs that parse but violate an invariant (2),
/// and failures while running or writing an otherwise valid spec (3).
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("validation: {0}")]
    Validation(String),
    #[error("runtime: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

/// Writes the built-in profiles as pretty-printed JSON into `dir`
/// (created if missing). Returns the file paths in emission order.
pub fn emit_profile_library(dir: &Path) -> Result<Vec<std::path::PathBuf>, CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
    let mut written = Vec::new();
    for name in profiles::BUILTIN_NAMES {
        let profile = profiles::by_name(name).expect("built-in names resolve");
        let path = dir.join(format!("{name}.json"));
        let mut body = profile.to_json_string();
        body.push('\n');
        std::fs::write(&path, body)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
        written.push(path);
    }
    Ok(written)
}
