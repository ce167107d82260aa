//! Closed-form limits of the estimators, the accuracy sufficiency bound,
//! and parameter selection against a target accuracy.
//!
//! Every quantity here is a finite sum over the atoms of a
//! [`MixingMeasure`] — no quadrature, no sampling — so these values serve
//! as exact references for the Monte-Carlo side of the crate.

use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use thiserror::Error;

use crate::coeff::{ln_factorial, CoeffTable};
use crate::estimators::EstimatorParams;
use crate::measures::{MixingMeasure, RegimeBounds};
use crate::scalar::{agreement_tol, from_f64, from_u64, normalization_tol, Real};

/// Upper limit of the K and M searches in [`select_params`].
pub const PARAM_SEARCH_CAP: u32 = 200;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error(
        "dual evaluation mismatch: coefficient form {coefficient_form} vs collapsed form {collapsed_form}"
    )]
    InternalMismatch {
        coefficient_form: f64,
        collapsed_form: f64,
    },
    #[error("measures place atoms at different points; density ratio undefined")]
    SupportMismatch,
    #[error("no parameters within the search cap {cap} reach target accuracy {epsilon}")]
    ParamSearchExceeded { cap: u32, epsilon: f64 },
    #[error("target accuracy must be positive and finite, got {epsilon}")]
    InvalidEpsilon { epsilon: f64 },
}

/// Poisson point probability e^{−x}·x^k/k!, accumulated multiplicatively
/// so no factorial is ever materialized.
pub fn poisson_pmf<T: Real>(x: T, k: u32) -> T {
    let mut term = (-x).exp();
    for i in 1..=k {
        term = term * x / from_u64::<T>(i as u64);
    }
    term
}

/// The k-th Poisson moment λ_k = ∫ e^{−x}·x^k/k! dP of a mixing measure:
/// the limit of the Good-Turing class total (k+1)·φ_{k+1}/n.
pub fn lambda_k<T: Real>(measure: &MixingMeasure<T>, k: u32) -> T {
    measure.integrate(|x, _| poisson_pmf(x, k))
}

/// λ_0 … λ_{k_max} in one pass over the atoms.
pub fn poisson_moments<T: Real>(measure: &MixingMeasure<T>, k_max: u32) -> Vec<T> {
    let mut out = vec![T::zero(); k_max as usize + 1];
    for atom in measure.atoms() {
        let mut term = (-atom.x).exp();
        out[0] += atom.mass * term;
        for k in 1..=k_max {
            term = term * atom.x / from_u64::<T>(k as u64);
            out[k as usize] += atom.mass * term;
        }
    }
    out
}

/// Almost-sure limit of the normalized log-likelihood (1/n)·log μ(s):
/// ∫ log x dP. Feed it the q-marginal measure to get the q-string limit.
pub fn aep_limit<T: Real>(measure: &MixingMeasure<T>) -> T {
    measure.integrate(|x, _| x.ln())
}

/// Limit of the truncated Good-Turing sequence estimate:
/// Σ_{k=1}^{K} λ_{k−1}·log(k·λ_k/λ_{k−1}).
///
/// At any point mass this converges to the AEP limit as K grows; for
/// genuinely mixed measures it converges to a strictly larger value —
/// the Good-Turing sequence estimator is asymptotically biased.
pub fn gt_sequence_limit<T: Real>(measure: &MixingMeasure<T>, truncation: u32) -> T {
    if truncation == 0 {
        return T::zero();
    }
    let lambdas = poisson_moments(measure, truncation);
    let mut total = T::zero();
    for k in 1..=truncation as usize {
        let prev = lambdas[k - 1];
        let ratio = from_u64::<T>(k as u64) * lambdas[k] / prev;
        total += prev * ratio.ln();
    }
    total
}

/// Limit γ̄_k of the corrected class estimator, evaluated two ways:
///
/// 1. coefficient form −Σ_{ℓ} coef[ℓ]·λ_{k+ℓ} + log(c̄)·λ_k, with the
///    shared coefficient table built over exact rationals and the atom
///    sum exchanged so the enormous intermediate terms cancel exactly;
/// 2. collapsed form −∫ Σ_{m=1}^{M} (1 − x/c̄)^m·e^{−x}·x^k/(m·k!) dP
///    + log(c̄)·λ_k, numerically stable at any order.
///
/// The two must agree to within the scalar's agreement tolerance; a
/// mismatch means the shared coefficient algebra regressed and is
/// reported as an error rather than silently returned.
pub fn gamma_k_limit<T: Real>(
    measure: &MixingMeasure<T>,
    k: u32,
    series_order: u32,
    c_bar: T,
) -> Result<T, OracleError> {
    assert!(series_order >= 1, "series order M must be at least 1");
    let log_term = c_bar.ln() * lambda_k(measure, k);

    let collapsed = log_term
        - measure.integrate(|x, _| {
            let z = T::one() - x / c_bar;
            let mut zpow = T::one();
            let mut s = T::zero();
            for m in 1..=series_order {
                zpow = zpow * z;
                s += zpow / from_u64::<T>(m as u64);
            }
            s * poisson_pmf(x, k)
        });

    let exact = |v: T| -> BigRational {
        BigRational::from_float(v.to_f64().expect("scalar widens to f64"))
            .expect("measure atoms and band midpoints are finite")
    };
    let table = CoeffTable::<BigRational>::new(k, series_order, exact(c_bar));
    let mut coefficient = log_term;
    for atom in measure.atoms() {
        let x = exact(atom.x);
        // x^{k+ℓ}/(k+ℓ)! for ℓ = 0..=M, exactly; the e^{−x} factor joins
        // in floating point after the cancellation-prone sum is done.
        let mut powers = Vec::with_capacity(series_order as usize + 1);
        let mut value = BigRational::one();
        for i in 1..=k {
            value = value * &x / BigRational::from_integer(i.into());
        }
        powers.push(value.clone());
        for ell in 1..=series_order {
            value = value * &x / BigRational::from_integer((k + ell).into());
            powers.push(value.clone());
        }
        let series = table.series_sum(|r| powers[(r - k) as usize].clone());
        let series_f = from_f64::<T>(series.to_f64().expect("finite series value"));
        coefficient = coefficient - atom.mass * (-atom.x).exp() * series_f;
    }

    if (coefficient - collapsed).abs() > agreement_tol::<T>() {
        return Err(OracleError::InternalMismatch {
            coefficient_form: coefficient.to_f64().unwrap_or(f64::NAN),
            collapsed_form: collapsed.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(coefficient)
}

/// The accuracy sufficiency bound for parameters (K, M) on a band:
///
/// max( e^{ĉ}·(c̄/č)·((ĉ−č)/(ĉ+č))^{M+1},  ĉ^{K+1}·c/(K+1)! )
///
/// with c = max(|log č|, |log ĉ|). Estimation error is within ε once this
/// quantity is ≤ ε/2. The factorial term is evaluated in log space so
/// large K cannot overflow.
pub fn sufficiency_bound<T: Real>(
    bounds: &RegimeBounds<T>,
    truncation: u32,
    series_order: u32,
) -> T {
    let term1 = bounds.c_hi.exp()
        * (bounds.c_bar / bounds.c_lo)
        * bounds.contraction_ratio().powi(series_order as i32 + 1);
    let term2 = ln_bound_term2(bounds, truncation).exp();
    term1.max(term2)
}

/// log of the truncation term ĉ^{K+1}·c/(K+1)!; −∞ when c = 0.
fn ln_bound_term2<T: Real>(bounds: &RegimeBounds<T>, truncation: u32) -> T {
    from_u64::<T>(truncation as u64 + 1) * bounds.c_hi.ln() + bounds.c_log.ln()
        - ln_factorial::<T>(truncation + 1)
}

/// Smallest parameters whose sufficiency bound meets a target accuracy:
/// the minimal M with the series term ≤ ε/2, then the minimal K with the
/// truncation term ≤ ε/2 (the two terms depend on disjoint parameters,
/// so the lexicographic minimum decomposes into independent searches).
/// Comparisons run in log space, immune to factorial overflow.
pub fn select_params<T: Real>(
    bounds: RegimeBounds<T>,
    epsilon: T,
) -> Result<EstimatorParams<T>, OracleError> {
    if !(epsilon > T::zero()) || !epsilon.is_finite() {
        return Err(OracleError::InvalidEpsilon {
            epsilon: epsilon.to_f64().unwrap_or(f64::NAN),
        });
    }
    let target = (epsilon / from_u64::<T>(2)).ln();

    let ln_ratio = bounds.contraction_ratio().ln();
    let base1 = bounds.c_hi + (bounds.c_bar / bounds.c_lo).ln();
    let mut series_order = None;
    for m in 1..=PARAM_SEARCH_CAP {
        if base1 + from_u64::<T>(m as u64 + 1) * ln_ratio <= target {
            series_order = Some(m);
            break;
        }
    }

    let mut truncation = None;
    for k in 0..=PARAM_SEARCH_CAP {
        if ln_bound_term2(&bounds, k) <= target {
            truncation = Some(k);
            break;
        }
    }

    match (truncation, series_order) {
        (Some(k), Some(m)) => {
            Ok(EstimatorParams::new(k, m, bounds).expect("searched orders start at 1"))
        }
        _ => Err(OracleError::ParamSearchExceeded {
            cap: PARAM_SEARCH_CAP,
            epsilon: epsilon.to_f64().unwrap_or(f64::NAN),
        }),
    }
}

/// Verifies the defining relation between the two marginal measures of
/// one profile: dQ/dP = y/x, i.e. Q.mass = P.mass·(y/x) at every atom.
/// Atom supports must match exactly; masses are compared within the
/// scalar's normalization tolerance.
pub fn density_ratio_check<T: Real>(
    p: &MixingMeasure<T>,
    q: &MixingMeasure<T>,
) -> Result<bool, OracleError> {
    let pa = p.atoms();
    let qa = q.atoms();
    if pa.len() != qa.len() {
        return Err(OracleError::SupportMismatch);
    }
    let tol = normalization_tol::<T>();
    for (a, b) in pa.iter().zip(qa) {
        if a.x != b.x || a.y != b.y {
            return Err(OracleError::SupportMismatch);
        }
        if (b.mass - a.mass * (a.y / a.x)).abs() > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Diagnostic: the constant by which the entropy of the scaled family
/// exceeds log n, H(p_n) − log n → −∫ log x dP.
pub fn entropy_offset<T: Real>(measure: &MixingMeasure<T>) -> T {
    -aep_limit(measure)
}

/// Diagnostic: the relative-entropy constant lim D(q_n ‖ p_n) =
/// ∫ log(y/x) dQ, evaluated on the q-marginal measure.
pub fn divergence_rate<T: Real>(q_measure: &MixingMeasure<T>) -> T {
    q_measure.integrate(|x, y| (y / x).ln())
}
