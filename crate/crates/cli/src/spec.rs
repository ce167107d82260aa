//! Experiment spec: the JSON contract consumed by `rare-gt run --spec`.

use std::fmt;
use std::path::{Path, PathBuf};

use rare_gt_core::{ScaledProfile, ValidProfile};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// The experiment families the driver knows how to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    /// True normalized log-likelihood of seeded p-strings vs the AEP limit.
    Aep,
    /// Classical sequence Good-Turing (K = 30) and the corrected
    /// estimator side by side, both against the AEP limit.
    GtVsBetter,
    /// Two-sequence estimate on (x ~ p, y ~ q) vs the limit over Q.
    Cross,
    /// Classifier trials with z ~ q: margins and decisions.
    Classify,
    /// Parameter selection and the certified bound; no sampling.
    Bounds,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Aep => "aep",
            Experiment::GtVsBetter => "gt-vs-better",
            Experiment::Cross => "cross",
            Experiment::Classify => "classify",
            Experiment::Bounds => "bounds",
        }
    }

    /// Whether the experiment draws strings (and therefore needs lengths).
    pub fn samples(self) -> bool {
        !matches!(self, Experiment::Bounds)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One experiment request. `epsilon` is the target accuracy handed to
/// parameter selection; `seeds` is the number of trials per length.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub profile_path: PathBuf,
    pub experiment: Experiment,
    pub n_values: Vec<u64>,
    pub seeds: u64,
    pub epsilon: f64,
    pub output: PathBuf,
}

impl ExperimentSpec {
    /// Parses a spec file. Unreadable or malformed files are config
    /// errors; field values are checked later by [`load_profile`].
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read spec {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("malformed spec {}: {e}", path.display())))
    }

    /// Loads and validates the referenced profile, then checks the spec
    /// invariants against it: seeds ≥ 1, epsilon positive and finite,
    /// and every length a positive multiple of the profile granularity
    /// (sampling experiments must list at least one length).
    pub fn load_profile(&self) -> Result<ValidProfile, CliError> {
        let text = std::fs::read_to_string(&self.profile_path).map_err(|e| {
            CliError::Config(format!(
                "cannot read profile {}: {e}",
                self.profile_path.display()
            ))
        })?;
        let profile = ScaledProfile::from_json_str(&text).map_err(|e| {
            CliError::Config(format!(
                "malformed profile {}: {e}",
                self.profile_path.display()
            ))
        })?;
        let valid = profile
            .validate()
            .map_err(|e| CliError::Validation(format!("invalid profile: {e}")))?;

        if self.seeds == 0 {
            return Err(CliError::Validation("seeds must be ≥ 1".into()));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(CliError::Validation(format!(
                "epsilon must be positive and finite, got {}",
                self.epsilon
            )));
        }
        if self.experiment.samples() && self.n_values.is_empty() {
            return Err(CliError::Validation(format!(
                "experiment {} needs at least one length in n_values",
                self.experiment
            )));
        }
        let g = valid.granularity();
        for &n in &self.n_values {
            if n == 0 || n % g != 0 {
                return Err(CliError::Validation(format!(
                    "length {n} is not a positive multiple of the profile granularity {g}"
                )));
            }
        }
        Ok(valid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_profile(dir: &Path) -> PathBuf {
        let path = dir.join("counterexample.json");
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(
            rare_gt_core::profiles::counterexample()
                .to_json_string()
                .as_bytes(),
        )
        .unwrap();
        path
    }

    fn base_spec(dir: &Path) -> ExperimentSpec {
        ExperimentSpec {
            profile_path: write_profile(dir),
            experiment: Experiment::Aep,
            n_values: vec![999],
            seeds: 2,
            epsilon: 0.1,
            output: dir.join("out.csv"),
        }
    }

    #[test]
    fn experiment_names_round_trip_through_json() {
        for (exp, name) in [
            (Experiment::Aep, "\"aep\""),
            (Experiment::GtVsBetter, "\"gt-vs-better\""),
            (Experiment::Cross, "\"cross\""),
            (Experiment::Classify, "\"classify\""),
            (Experiment::Bounds, "\"bounds\""),
        ] {
            assert_eq!(serde_json::to_string(&exp).unwrap(), name);
            let back: Experiment = serde_json::from_str(name).unwrap();
            assert_eq!(back, exp);
            assert_eq!(format!("\"{exp}\""), name);
        }
    }

    #[test]
    fn spec_json_round_trips() {
        let json = r#"{
            "profile_path": "profiles/counterexample.json",
            "experiment": "gt-vs-better",
            "n_values": [9999, 99999],
            "seeds": 5,
            "epsilon": 0.1,
            "output": "report.csv"
        }"#;
        let spec: ExperimentSpec = serde_json::from_str(json).unwrap();
        assert_eq!(spec.experiment, Experiment::GtVsBetter);
        assert_eq!(spec.n_values, vec![9999, 99999]);
        assert_eq!(spec.seeds, 5);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let json = r#"{
            "profile_path": "p.json", "experiment": "aep", "n_values": [3],
            "seeds": 1, "epsilon": 0.1, "output": "o.csv", "extra": true
        }"#;
        assert!(serde_json::from_str::<ExperimentSpec>(json).is_err());
    }

    #[test]
    fn invariants_are_enforced() {
        let dir = tempfile::tempdir().unwrap();

        let mut spec = base_spec(dir.path());
        spec.seeds = 0;
        assert_eq!(spec.load_profile().unwrap_err().exit_code(), 2);

        let mut spec = base_spec(dir.path());
        spec.epsilon = -0.5;
        assert_eq!(spec.load_profile().unwrap_err().exit_code(), 2);

        // 1000 is not a multiple of the counterexample granularity 3.
        let mut spec = base_spec(dir.path());
        spec.n_values = vec![1000];
        assert_eq!(spec.load_profile().unwrap_err().exit_code(), 2);

        let mut spec = base_spec(dir.path());
        spec.n_values = vec![];
        assert_eq!(spec.load_profile().unwrap_err().exit_code(), 2);

        // The bounds experiment draws nothing, so no lengths are fine.
        let mut spec = base_spec(dir.path());
        spec.experiment = Experiment::Bounds;
        spec.n_values = vec![];
        assert!(spec.load_profile().is_ok());

        let mut spec = base_spec(dir.path());
        spec.profile_path = dir.path().join("missing.json");
        assert_eq!(spec.load_profile().unwrap_err().exit_code(), 1);

        assert!(base_spec(dir.path()).load_profile().is_ok());
    }
}
