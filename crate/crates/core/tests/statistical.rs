//! Monte-Carlo behaviour of the samplers and estimators at scale:
//! concentration of the true log-likelihood, convergence of the class
//! estimates to their oracle limits, and classifier symmetry.
//!
//! Seeding convention: trial t of a single-string experiment uses seed
//! `base + t`; a trial needing several independent strings uses seeds
//! `base + 3t`, `base + 3t + 1`, `base + 3t + 2`.

use rare_gt_core::estimators::{
    classify, cross_sequence_estimate, gamma_k, gt_sequence_estimate, gt_total_prob,
    EstimatorParams,
};
use rare_gt_core::measures::Which;
use rare_gt_core::oracle::{
    aep_limit, gamma_k_limit, gt_sequence_limit, lambda_k, select_params,
};
use rare_gt_core::profiles;
use rare_gt_core::sampling::{
    draw_string, joint_occupancy, occupancy, true_normalized_loglik,
};
use rare_gt_core::ValidProfile;

fn counterexample() -> ValidProfile {
    profiles::counterexample().validate().unwrap()
}

/// Root-mean-square deviation of the normalized log-likelihood from its
/// limit, over `seeds` trials at length `n`.
fn loglik_rms(valid: &ValidProfile, n: u64, seeds: u64) -> f64 {
    let dist = valid.instantiate(n).unwrap();
    let limit: f64 = aep_limit(&valid.mixing_measure(Which::P));
    let mut sq = 0.0;
    for seed in 0..seeds {
        let s = draw_string(&dist, Which::P, n, seed).unwrap();
        let v: f64 = true_normalized_loglik(&dist, Which::P, &s);
        sq += (v - limit) * (v - limit);
    }
    (sq / seeds as f64).sqrt()
}

#[test]
fn loglik_concentrates_with_growing_length() {
    let valid = counterexample();
    let rms: Vec<f64> = [999, 9_999, 99_999]
        .iter()
        .map(|&n| loglik_rms(&valid, n, 30))
        .collect();
    // Each decade of n should at least halve the RMS (CLT rate is ~√10).
    assert!(rms[1] <= 0.5 * rms[0], "rms {rms:?}");
    assert!(rms[2] <= 0.5 * rms[1], "rms {rms:?}");
}

#[test]
fn class_totals_track_their_poisson_moments() {
    // At the largest admissible length near 10^6 the Good-Turing class
    // total sits on top of λ_0, and the corrected class estimate on top
    // of its own limit. γ_0 carries series coefficients that amplify the
    // per-class noise (single-seed spread ≈ 0.015), so the 0.01 window
    // is checked on a 10-seed average.
    let valid = counterexample();
    let n = 999_999;
    let dist = valid.instantiate(n).unwrap();
    let measure = valid.mixing_measure::<f64>(Which::P);
    let params = EstimatorParams::<f64>::new(2, 3, valid.bounds()).unwrap();
    let limit = gamma_k_limit(&measure, 0, 3, valid.bounds::<f64>().c_bar).unwrap();

    let occ0 = occupancy(&draw_string(&dist, Which::P, n, 0).unwrap());
    let g0: f64 = gt_total_prob(&occ0, 0);
    assert!((g0 - lambda_k(&measure, 0)).abs() < 0.005, "{g0}");

    let mut mean = 0.0;
    let seeds = 10u64;
    for t in 0..seeds {
        let occ = occupancy(&draw_string(&dist, Which::P, n, t).unwrap());
        mean += gamma_k(&occ, 0, &params).unwrap();
    }
    mean /= seeds as f64;
    assert!((mean - limit).abs() < 0.01, "{mean} vs {limit}");
}

#[test]
fn gt_sequence_estimate_lands_on_its_biased_limit() {
    let valid = counterexample();
    let n = 999_999;
    let dist = valid.instantiate(n).unwrap();
    let measure = valid.mixing_measure::<f64>(Which::P);
    let occ = occupancy(&draw_string(&dist, Which::P, n, 1).unwrap());

    let est = gt_sequence_estimate::<f64>(&occ, 30);
    let limit = gt_sequence_limit(&measure, 30);
    assert!((est.value - limit).abs() < 0.02, "{} vs {limit}", est.value);
    // The bias is the point: the estimate stays well above the AEP limit.
    assert!(est.value - aep_limit(&measure) > 0.03);
}

#[test]
fn cross_sequence_reduces_to_single_sequence_target_when_q_equals_p() {
    // The counterexample has b = a, so a second independent string is
    // just another p-string and the two-sequence estimate shares the
    // single-sequence limit.
    let valid = counterexample();
    let n = 999_999;
    let dist = valid.instantiate(n).unwrap();
    let x = draw_string(&dist, Which::P, n, 0).unwrap();
    let y = draw_string(&dist, Which::Q, n, 1).unwrap();
    let params = EstimatorParams::new(2, 3, valid.bounds()).unwrap();
    let est: f64 = cross_sequence_estimate(&joint_occupancy(&x, &y).unwrap(), &params);
    let target = -0.5 * 8.0f64.ln();
    assert!((est - target).abs() < 0.15, "{est} vs {target}");
}

#[test]
fn classifier_margin_is_centered_when_sources_coincide() {
    // p = q: by symmetry the margin distribution is centered at zero.
    let valid = counterexample();
    let n = 9_999;
    let dist = valid.instantiate(n).unwrap();
    let params = EstimatorParams::<f64>::new(2, 3, valid.bounds()).unwrap();
    let mut mean = 0.0f64;
    let trials = 100u64;
    for t in 0..trials {
        let x = draw_string(&dist, Which::P, n, 3 * t).unwrap();
        let y = draw_string(&dist, Which::Q, n, 3 * t + 1).unwrap();
        let z = draw_string(&dist, Which::P, n, 3 * t + 2).unwrap();
        let c = classify(&x, &y, &z, &params).unwrap();
        mean += c.margin;
    }
    mean /= trials as f64;
    assert!(mean.abs() <= 0.05, "mean margin {mean}");
}

#[test]
fn classifier_attributes_p_strings_to_p() {
    // Mirror of the headline z ~ q direction: with z drawn from p on the
    // skew profile the decision should go to P nearly always.
    let valid = profiles::skew().validate().unwrap();
    let n = 100_000;
    let dist = valid.instantiate(n).unwrap();
    let params = select_params(valid.bounds::<f64>(), 0.1).unwrap();
    let trials = 50u64;
    let mut correct = 0;
    for t in 0..trials {
        let x = draw_string(&dist, Which::P, n, 3 * t).unwrap();
        let y = draw_string(&dist, Which::Q, n, 3 * t + 1).unwrap();
        let z = draw_string(&dist, Which::P, n, 3 * t + 2).unwrap();
        let c = classify(&x, &y, &z, &params).unwrap();
        if c.decision == rare_gt_core::estimators::Source::P {
            correct += 1;
        }
    }
    assert!(correct >= 48, "{correct}/{trials}");
}
