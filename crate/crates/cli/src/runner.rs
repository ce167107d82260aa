//! Experiment execution and CSV report assembly.
//!
//! Trials parallelize across (length, seed) pairs with rayon; the report
//! is assembled single-threaded from rows sorted by (n, seed, estimator),
//! so output bytes never depend on scheduling. Seeding follows the
//! sampling convention: single-string trial t uses seed t, multi-string
//! trial t uses seeds 3t, 3t+1, 3t+2.
//!
//! CSV columns: experiment,n,seed,estimator,value,oracle_value,abs_error,
//! K,M,epsilon,runtime_ms. `abs_error` is always |value − oracle_value|
//! of the same row. Lines starting with `#` form the summary footer:
//! per-(n, estimator) mean/max absolute error, plus per-n decision
//! accuracy for classify runs. `runtime_ms` is per-trial wall time when
//! `RARE_GT_TIMING=1`, otherwise 0 to keep reports byte-stable.

use std::fmt::Write as _;
use std::time::Instant;

use rare_gt_core::estimators::{
    better_gt_estimate, classify, cross_sequence_estimate, gt_sequence_estimate, EstimatorParams,
    Source,
};
use rare_gt_core::measures::Which;
use rare_gt_core::oracle::{aep_limit, divergence_rate, select_params, sufficiency_bound};
use rare_gt_core::sampling::{draw_string, joint_occupancy, occupancy, true_normalized_loglik};
use rare_gt_core::{ConcreteDistributionPair, SymbolString, ValidProfile};
use rayon::prelude::*;

use crate::spec::{Experiment, ExperimentSpec};
use crate::CliError;

/// Fixed truncation for the classical sequence Good-Turing estimator in
/// the gt-vs-better contrast.
pub const GT_TRUNCATION: u32 = 30;

pub const CSV_HEADER: &str =
    "experiment,n,seed,estimator,value,oracle_value,abs_error,K,M,epsilon,runtime_ms";

struct Row {
    n: u64,
    seed: u64,
    estimator: &'static str,
    value: f64,
    oracle_value: f64,
    truncation: u32,
    series_order: u32,
    runtime_ms: u128,
}

impl Row {
    fn abs_error(&self) -> f64 {
        (self.value - self.oracle_value).abs()
    }
}

fn timing_enabled() -> bool {
    std::env::var("RARE_GT_TIMING").map(|v| v == "1").unwrap_or(false)
}

fn draw(
    dist: &ConcreteDistributionPair,
    which: Which,
    n: u64,
    seed: u64,
) -> Result<SymbolString, CliError> {
    draw_string(dist, which, n, seed)
        .map_err(|e| CliError::Runtime(format!("sampling n={n} seed={seed}: {e}")))
}

fn instantiate(valid: &ValidProfile, n: u64) -> Result<ConcreteDistributionPair, CliError> {
    valid
        .instantiate(n)
        .map_err(|e| CliError::Runtime(format!("instantiating n={n}: {e}")))
}

fn selected_params(valid: &ValidProfile, epsilon: f64) -> Result<EstimatorParams<f64>, CliError> {
    select_params::<f64>(valid.bounds(), epsilon)
        .map_err(|e| CliError::Validation(format!("parameter selection: {e}")))
}

/// Runs every (n, seed) trial of a sampling experiment in parallel and
/// returns the flattened rows.
fn run_trials(
    spec: &ExperimentSpec,
    trial: impl Fn(u64, u64, bool) -> Result<Vec<Row>, CliError> + Sync,
) -> Result<Vec<Row>, CliError> {
    let timing = timing_enabled();
    let tasks: Vec<(u64, u64)> = spec
        .n_values
        .iter()
        .flat_map(|&n| (0..spec.seeds).map(move |t| (n, t)))
        .collect();
    let nested: Vec<Vec<Row>> = tasks
        .par_iter()
        .map(|&(n, t)| trial(n, t, timing))
        .collect::<Result<_, _>>()?;
    Ok(nested.into_iter().flatten().collect())
}

fn aep_rows(spec: &ExperimentSpec, valid: &ValidProfile) -> Result<Vec<Row>, CliError> {
    let oracle: f64 = aep_limit(&valid.mixing_measure(Which::P));
    run_trials(spec, |n, t, timing| {
        let start = Instant::now();
        let dist = instantiate(valid, n)?;
        let s = draw(&dist, Which::P, n, t)?;
        let value: f64 = true_normalized_loglik(&dist, Which::P, &s);
        Ok(vec![Row {
            n,
            seed: t,
            estimator: "true_loglik",
            value,
            oracle_value: oracle,
            truncation: 0,
            series_order: 0,
            runtime_ms: elapsed_ms(start, timing),
        }])
    })
}

fn gt_vs_better_rows(spec: &ExperimentSpec, valid: &ValidProfile) -> Result<Vec<Row>, CliError> {
    let oracle: f64 = aep_limit(&valid.mixing_measure(Which::P));
    let params = selected_params(valid, spec.epsilon)?;
    run_trials(spec, |n, t, timing| {
        let start = Instant::now();
        let dist = instantiate(valid, n)?;
        let occ = occupancy(&draw(&dist, Which::P, n, t)?);
        let gt = gt_sequence_estimate::<f64>(&occ, GT_TRUNCATION);
        let better: f64 = better_gt_estimate(&occ, &params)
            .map_err(|e| CliError::Runtime(format!("better_gt n={n} seed={t}: {e}")))?;
        let runtime_ms = elapsed_ms(start, timing);
        Ok(vec![
            Row {
                n,
                seed: t,
                estimator: "gt_sequence",
                value: gt.value,
                oracle_value: oracle,
                truncation: GT_TRUNCATION,
                series_order: 0,
                runtime_ms,
            },
            Row {
                n,
                seed: t,
                estimator: "better_gt",
                value: better,
                oracle_value: oracle,
                truncation: params.truncation(),
                series_order: params.series_order(),
                runtime_ms,
            },
        ])
    })
}

fn cross_rows(spec: &ExperimentSpec, valid: &ValidProfile) -> Result<Vec<Row>, CliError> {
    let oracle: f64 = aep_limit(&valid.mixing_measure(Which::Q));
    let params = selected_params(valid, spec.epsilon)?;
    run_trials(spec, |n, t, timing| {
        let start = Instant::now();
        let dist = instantiate(valid, n)?;
        let x = draw(&dist, Which::P, n, 3 * t)?;
        let y = draw(&dist, Which::Q, n, 3 * t + 1)?;
        let joint = joint_occupancy(&x, &y)
            .map_err(|e| CliError::Runtime(format!("joint occupancy n={n} seed={t}: {e}")))?;
        let value: f64 = cross_sequence_estimate(&joint, &params);
        Ok(vec![Row {
            n,
            seed: t,
            estimator: "cross_sequence",
            value,
            oracle_value: oracle,
            truncation: params.truncation(),
            series_order: params.series_order(),
            runtime_ms: elapsed_ms(start, timing),
        }])
    })
}

fn classify_rows(spec: &ExperimentSpec, valid: &ValidProfile) -> Result<Vec<Row>, CliError> {
    // z is drawn from q, so the trial is correct when it answers Q and
    // the margin tends to −∫log(y/x) dQ.
    let margin_oracle: f64 = -divergence_rate(&valid.mixing_measure(Which::Q));
    let params = selected_params(valid, spec.epsilon)?;
    run_trials(spec, |n, t, timing| {
        let start = Instant::now();
        let dist = instantiate(valid, n)?;
        let x = draw(&dist, Which::P, n, 3 * t)?;
        let y = draw(&dist, Which::Q, n, 3 * t + 1)?;
        let z = draw(&dist, Which::Q, n, 3 * t + 2)?;
        let c = classify(&x, &y, &z, &params)
            .map_err(|e| CliError::Runtime(format!("classify n={n} seed={t}: {e}")))?;
        let runtime_ms = elapsed_ms(start, timing);
        Ok(vec![
            Row {
                n,
                seed: t,
                estimator: "classifier_margin",
                value: c.margin,
                oracle_value: margin_oracle,
                truncation: params.truncation(),
                series_order: params.series_order(),
                runtime_ms,
            },
            Row {
                n,
                seed: t,
                estimator: "classifier_decision",
                value: if c.decision == Source::Q { 1.0 } else { 0.0 },
                oracle_value: 1.0,
                truncation: params.truncation(),
                series_order: params.series_order(),
                runtime_ms,
            },
        ])
    })
}

fn bounds_rows(spec: &ExperimentSpec, valid: &ValidProfile) -> Result<Vec<Row>, CliError> {
    let start = Instant::now();
    let params = selected_params(valid, spec.epsilon)?;
    let bound: f64 =
        sufficiency_bound(params.bounds(), params.truncation(), params.series_order());
    Ok(vec![Row {
        n: 0,
        seed: 0,
        estimator: "theorem_bound",
        value: bound,
        oracle_value: spec.epsilon,
        truncation: params.truncation(),
        series_order: params.series_order(),
        runtime_ms: elapsed_ms(start, timing_enabled()),
    }])
}

fn elapsed_ms(start: Instant, timing: bool) -> u128 {
    if timing {
        start.elapsed().as_millis()
    } else {
        0
    }
}

/// Runs the experiment and renders the full report text.
pub fn run_to_string(spec: &ExperimentSpec) -> Result<String, CliError> {
    let valid = spec.load_profile()?;
    let mut rows = match spec.experiment {
        Experiment::Aep => aep_rows(spec, &valid)?,
        Experiment::GtVsBetter => gt_vs_better_rows(spec, &valid)?,
        Experiment::Cross => cross_rows(spec, &valid)?,
        Experiment::Classify => classify_rows(spec, &valid)?,
        Experiment::Bounds => bounds_rows(spec, &valid)?,
    };
    rows.sort_by(|a, b| (a.n, a.seed, a.estimator).cmp(&(b.n, b.seed, b.estimator)));
    Ok(render(spec, &rows))
}

/// Runs the experiment and writes the report to `spec.output`. Returns
/// the number of data rows written.
pub fn write_report(spec: &ExperimentSpec) -> Result<usize, CliError> {
    let text = run_to_string(spec)?;
    std::fs::write(&spec.output, &text).map_err(|e| {
        CliError::Runtime(format!("cannot write report {}: {e}", spec.output.display()))
    })?;
    Ok(text.lines().filter(|l| !l.starts_with('#')).count() - 1)
}

fn render(spec: &ExperimentSpec, rows: &[Row]) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            spec.experiment,
            r.n,
            r.seed,
            r.estimator,
            r.value,
            r.oracle_value,
            r.abs_error(),
            r.truncation,
            r.series_order,
            spec.epsilon,
            r.runtime_ms,
        )
        .expect("writing to a String cannot fail");
    }

    // Per-(n, estimator) error summary, one line per group.
    let mut groups: Vec<(u64, &'static str)> = rows.iter().map(|r| (r.n, r.estimator)).collect();
    groups.sort();
    groups.dedup();
    for (n, estimator) in groups {
        let errs: Vec<f64> = rows
            .iter()
            .filter(|r| r.n == n && r.estimator == estimator)
            .map(Row::abs_error)
            .collect();
        let mean = errs.iter().sum::<f64>() / errs.len() as f64;
        let max = errs.iter().cloned().fold(0.0f64, f64::max);
        writeln!(
            out,
            "# summary experiment={} n={} estimator={} rows={} mean_abs_error={} max_abs_error={}",
            spec.experiment,
            n,
            estimator,
            errs.len(),
            mean,
            max,
        )
        .expect("writing to a String cannot fail");
    }

    if spec.experiment == Experiment::Classify {
        let mut lengths: Vec<u64> = rows.iter().map(|r| r.n).collect();
        lengths.dedup();
        for n in lengths {
            let decisions: Vec<&Row> = rows
                .iter()
                .filter(|r| r.n == n && r.estimator == "classifier_decision")
                .collect();
            let correct = decisions.iter().filter(|r| r.value == 1.0).count();
            writeln!(
                out,
                "# summary experiment=classify n={} accuracy={}/{}",
                n,
                correct,
                decisions.len(),
            )
            .expect("writing to a String cannot fail");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::{Path, PathBuf};

    fn write_profile(dir: &Path, name: &str) -> PathBuf {
        let path = dir.join(format!("{name}.json"));
        let profile = rare_gt_core::profiles::by_name(name).unwrap();
        std::fs::write(&path, profile.to_json_string()).unwrap();
        path
    }

    fn spec_for(dir: &Path, name: &str, experiment: Experiment) -> ExperimentSpec {
        ExperimentSpec {
            profile_path: write_profile(dir, name),
            experiment,
            n_values: vec![999],
            seeds: 2,
            epsilon: 0.1,
            output: dir.join("out.csv"),
        }
    }

    fn data_rows(report: &str) -> Vec<&str> {
        report
            .lines()
            .skip(1)
            .filter(|l| !l.starts_with('#'))
            .collect()
    }

    fn summary_lines<'a>(report: &'a str, prefix: &str) -> Vec<&'a str> {
        report.lines().filter(|l| l.starts_with(prefix)).collect()
    }

    #[test]
    fn aep_report_has_one_row_per_trial_and_is_self_consistent() {
        let dir = tempfile::tempdir().unwrap();
        let mut spec = spec_for(dir.path(), "counterexample", Experiment::Aep);
        spec.n_values = vec![999, 9_999];
        spec.seeds = 3;
        let report = run_to_string(&spec).unwrap();

        assert!(report.starts_with(CSV_HEADER));
        let rows = data_rows(&report);
        assert_eq!(rows.len(), 6);
        for row in rows {
            let f: Vec<&str> = row.split(',').collect();
            assert_eq!(f.len(), 11);
            assert_eq!(f[0], "aep");
            assert_eq!(f[3], "true_loglik");
            let value: f64 = f[4].parse().unwrap();
            let oracle: f64 = f[5].parse().unwrap();
            let abs: f64 = f[6].parse().unwrap();
            assert_eq!(abs, (value - oracle).abs());
            assert!(f[5].starts_with("-1.03972077"));
            assert_eq!((f[7], f[8]), ("0", "0"));
            assert_eq!(f[10], "0");
        }
        assert!(report.contains("# summary experiment=aep n=999 estimator=true_loglik rows=3"));
    }

    #[test]
    fn reports_are_byte_identical_across_runs() {
        let dir = tempfile::tempdir().unwrap();
        let spec = spec_for(dir.path(), "counterexample", Experiment::Aep);
        assert_eq!(run_to_string(&spec).unwrap(), run_to_string(&spec).unwrap());
    }

    #[test]
    fn gt_vs_better_emits_both_estimators_per_trial() {
        let dir = tempfile::tempdir().unwrap();
        let mut spec = spec_for(dir.path(), "uniform", Experiment::GtVsBetter);
        spec.n_values = vec![500];
        spec.seeds = 2;
        let report = run_to_string(&spec).unwrap();
        let rows = data_rows(&report);
        assert_eq!(rows.len(), 4);
        // Sorted by estimator inside each seed: better_gt before gt_sequence.
        let better: Vec<&&str> = rows.iter().filter(|r| r.contains(",better_gt,")).collect();
        let gt: Vec<&&str> = rows.iter().filter(|r| r.contains(",gt_sequence,")).collect();
        assert_eq!(better.len(), 2);
        assert_eq!(gt.len(), 2);
        for row in gt {
            let f: Vec<&str> = row.split(',').collect();
            assert_eq!((f[7], f[8]), ("30", "0"));
            assert_eq!(f[5], "0"); // uniform limit
        }
        for row in better {
            let f: Vec<&str> = row.split(',').collect();
            // select_params on the degenerate uniform band gives (0, 1).
            assert_eq!((f[7], f[8]), ("0", "1"));
        }
        // Exactly one summary line per (n, estimator) group, regardless of
        // how many seeds interleave the two estimators.
        for est in ["better_gt", "gt_sequence"] {
            let prefix = format!("# summary experiment=gt-vs-better n=500 estimator={est} ");
            assert_eq!(summary_lines(&report, &prefix).len(), 1, "{est}");
        }
    }

    #[test]
    fn cross_rows_target_the_q_limit() {
        let dir = tempfile::tempdir().unwrap();
        let mut spec = spec_for(dir.path(), "skew", Experiment::Cross);
        spec.n_values = vec![1_000];
        spec.seeds = 2;
        let report = run_to_string(&spec).unwrap();
        let rows = data_rows(&report);
        assert_eq!(rows.len(), 2);
        for row in rows {
            let f: Vec<&str> = row.split(',').collect();
            assert_eq!(f[3], "cross_sequence");
            assert!(f[5].starts_with("-1.11164128"));
            assert_eq!((f[7], f[8]), ("3", "6"));
        }
    }

    #[test]
    fn classify_reports_margins_decisions_and_accuracy() {
        let dir = tempfile::tempdir().unwrap();
        let mut spec = spec_for(dir.path(), "skew", Experiment::Classify);
        spec.n_values = vec![2_000];
        spec.seeds = 3;
        let report = run_to_string(&spec).unwrap();
        let rows = data_rows(&report);
        assert_eq!(rows.len(), 6);
        let decisions: Vec<&&str> = rows
            .iter()
            .filter(|r| r.contains(",classifier_decision,"))
            .collect();
        assert_eq!(decisions.len(), 3);
        for row in decisions {
            let f: Vec<&str> = row.split(',').collect();
            assert!(f[4] == "0" || f[4] == "1");
            assert_eq!(f[5], "1");
        }
        for prefix in [
            "# summary experiment=classify n=2000 estimator=classifier_margin ",
            "# summary experiment=classify n=2000 estimator=classifier_decision ",
            "# summary experiment=classify n=2000 accuracy=",
        ] {
            assert_eq!(summary_lines(&report, prefix).len(), 1, "{prefix}");
        }
    }

    #[test]
    fn bounds_reports_the_certified_bound_without_sampling() {
        let dir = tempfile::tempdir().unwrap();
        let mut spec = spec_for(dir.path(), "counterexample", Experiment::Bounds);
        spec.n_values = vec![];
        let report = run_to_string(&spec).unwrap();
        let rows = data_rows(&report);
        assert_eq!(rows.len(), 1);
        let f: Vec<&str> = rows[0].split(',').collect();
        assert_eq!(f[3], "theorem_bound");
        // Certified bound for (K, M) = (2, 3) on the quarter-half band.
        assert!(f[4].starts_with("0.030531875"));
        assert_eq!((f[7], f[8]), ("2", "3"));
        assert_eq!(f[5], "0.1");
    }

    #[test]
    fn unreachable_epsilon_is_a_validation_error() {
        let dir = tempfile::tempdir().unwrap();
        let mut spec = spec_for(dir.path(), "counterexample", Experiment::Bounds);
        spec.epsilon = 1e-300;
        // The series-order search cannot push the band term below 5e-301
        // within the search cap, which surfaces as a validation failure.
        let err = run_to_string(&spec).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
