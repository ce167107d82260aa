//! Good-Turing estimators, the corrected class estimator, and the
//! two-sequence classifier built on it.
//!
//! All estimators read occupancy counts only — never symbol identities —
//! so two strings with the same profile of multiplicities get identical
//! estimates. Class k refers to the set of symbols appearing exactly k
//! times.

use thiserror::Error;

use crate::coeff::CoeffTable;
use crate::measures::RegimeBounds;
use crate::sampling::{joint_occupancy, JointOccupancy, OccupancyCounts, SymbolString};
use crate::scalar::{from_u64, Real};

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error("class k = {k} is empty (phi_k = 0), per-symbol estimate undefined")]
    EmptyClass { k: u32 },
    #[error("per-symbol Good-Turing estimate unsupported for k = {k} with n = {n}")]
    Unsupported { k: u32, n: u64 },
    #[error("series order overflow: k + M + 1 = {needed} exceeds n = {n}")]
    OrderOverflow { needed: u64, n: u64 },
    #[error("series order M must be at least 1")]
    InvalidOrder,
    #[error(transparent)]
    Sampling(#[from] crate::sampling::SamplingError),
}

/// Parameters of the corrected estimator: class truncation K ≥ 0, series
/// order M ≥ 1, and the probability band the scaled family lives in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorParams<T> {
    truncation: u32,
    series_order: u32,
    bounds: RegimeBounds<T>,
}

impl<T: Real> EstimatorParams<T> {
    pub fn new(
        truncation: u32,
        series_order: u32,
        bounds: RegimeBounds<T>,
    ) -> Result<Self, EstimatorError> {
        if series_order == 0 {
            return Err(EstimatorError::InvalidOrder);
        }
        Ok(EstimatorParams {
            truncation,
            series_order,
            bounds,
        })
    }

    /// Largest class index K included in sequence estimates.
    pub fn truncation(&self) -> u32 {
        self.truncation
    }

    /// Series order M of the logarithm correction.
    pub fn series_order(&self) -> u32 {
        self.series_order
    }

    pub fn bounds(&self) -> &RegimeBounds<T> {
        &self.bounds
    }
}

/// Classical Good-Turing estimate of the probability of one particular
/// symbol that appeared exactly k times: (k+1)·φ_{k+1} / (n·φ_k).
///
/// Defined for 1 ≤ k < n with φ_k > 0; k = 0 has no per-symbol version
/// (the class average would divide mass among unseen symbols) and k = n
/// leaves no room for a (k+1)-class.
pub fn gt_symbol_prob<T: Real>(occ: &OccupancyCounts, k: u32) -> Result<T, EstimatorError> {
    let n = occ.n();
    if k == 0 || k as u64 >= n {
        return Err(EstimatorError::Unsupported { k, n });
    }
    let phi_k = occ.phi(k);
    if phi_k == 0 {
        return Err(EstimatorError::EmptyClass { k });
    }
    let num = from_u64::<T>((k as u64 + 1) * occ.phi(k + 1));
    Ok(num / (from_u64::<T>(n) * from_u64::<T>(phi_k)))
}

/// Good-Turing estimate of the total probability of class k (all symbols
/// appearing exactly k times): (k+1)·φ_{k+1} / n. For k = 0 this is the
/// missing-mass estimate φ_1/n.
pub fn gt_total_prob<T: Real>(occ: &OccupancyCounts, k: u32) -> T {
    from_u64::<T>((k as u64 + 1) * occ.phi(k + 1)) / from_u64::<T>(occ.n())
}

/// A truncated Good-Turing sequence estimate together with how many terms
/// had to be skipped because φ_{k+1} = 0 while φ_k > 0 (where the
/// naive log would be −∞).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GtSequenceEstimate<T> {
    pub value: T,
    pub degenerate_terms: u32,
}

impl<T> GtSequenceEstimate<T> {
    /// True when at least one term was skipped; the value is then a
    /// partial sum rather than the full truncated estimator.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate_terms > 0
    }
}

/// Truncated Good-Turing estimate of the normalized sequence
/// log-probability:
/// Σ_{k=1}^{K} (k·φ_k/n)·log((k+1)·φ_{k+1}/φ_k).
///
/// Terms with φ_k = 0 contribute nothing; terms with φ_k > 0 but
/// φ_{k+1} = 0 are skipped and counted as degenerate.
pub fn gt_sequence_estimate<T: Real>(occ: &OccupancyCounts, truncation: u32) -> GtSequenceEstimate<T> {
    let n = from_u64::<T>(occ.n());
    let mut value = T::zero();
    let mut degenerate_terms = 0;
    for k in 1..=truncation {
        let phi_k = occ.phi(k);
        if phi_k == 0 {
            continue;
        }
        let phi_k1 = occ.phi(k + 1);
        if phi_k1 == 0 {
            degenerate_terms += 1;
            continue;
        }
        let weight = from_u64::<T>(k as u64 * phi_k) / n;
        let ratio = from_u64::<T>((k as u64 + 1) * phi_k1) / from_u64::<T>(phi_k);
        value += weight * ratio.ln();
    }
    GtSequenceEstimate {
        value,
        degenerate_terms,
    }
}

/// Corrected estimate of the class-k contribution to the normalized
/// sequence log-probability:
///
/// γ_k = −Σ_{m=1}^{M} Σ_{ℓ=0}^{m} (−c̄)^{−ℓ}·C(m,ℓ)·((k+ℓ)!/(m·k!))·G_{k+ℓ}
///       + log(c̄)·G_k,
///
/// where G_r = (r+1)·φ_{r+1}/n is the Good-Turing class total. The inner
/// sums are collapsed into one coefficient per offset ℓ, so each class
/// total is read exactly once.
pub fn gamma_k<T: Real>(
    occ: &OccupancyCounts,
    k: u32,
    params: &EstimatorParams<T>,
) -> Result<T, EstimatorError> {
    let needed = k as u64 + params.series_order as u64 + 1;
    if needed > occ.n() {
        return Err(EstimatorError::OrderOverflow {
            needed,
            n: occ.n(),
        });
    }
    let table = CoeffTable::new(k, params.series_order, params.bounds.c_bar);
    Ok(table.contract(|r| gt_total_prob(occ, r)))
}

/// Corrected estimate of the full normalized sequence log-probability:
/// Σ_{k=0}^{K} γ_k, summed in ascending k so the result is deterministic.
pub fn better_gt_estimate<T: Real>(
    occ: &OccupancyCounts,
    params: &EstimatorParams<T>,
) -> Result<T, EstimatorError> {
    let mut total = T::zero();
    for k in 0..=params.truncation {
        total += gamma_k(occ, k, params)?;
    }
    Ok(total)
}

/// Rows of the joint table contracted by the two-sequence estimator:
/// S_r = Σ_{j≥1} j·φ_{r,j}/n, the fraction of y-positions holding a
/// symbol seen exactly r times in x. Computed once per row and reused
/// across every class index.
fn row_fractions<T: Real>(joint: &JointOccupancy, max_row: u32) -> Vec<T> {
    let n = from_u64::<T>(joint.n());
    (0..=max_row)
        .map(|r| from_u64::<T>(joint.row_weight(r)) / n)
        .collect()
}

/// Two-sequence analogue of [`gamma_k`]: estimates the class-k
/// contribution to the normalized log-probability of an independent
/// second string y under the first string's source, replacing each
/// Good-Turing class total with the joint-occupancy row fraction S_{k+ℓ}.
pub fn gamma_tilde_k<T: Real>(
    joint: &JointOccupancy,
    k: u32,
    params: &EstimatorParams<T>,
) -> T {
    let rows = row_fractions::<T>(joint, k + params.series_order);
    let table = CoeffTable::new(k, params.series_order, params.bounds.c_bar);
    table.contract(|r| rows[r as usize])
}

/// Two-sequence estimate of the normalized log-probability of y under
/// x's source: Σ_{k=0}^{K} γ̃_k with the row fractions shared across
/// classes.
pub fn cross_sequence_estimate<T: Real>(joint: &JointOccupancy, params: &EstimatorParams<T>) -> T {
    let rows = row_fractions::<T>(joint, params.truncation + params.series_order);
    let mut total = T::zero();
    for k in 0..=params.truncation {
        let table = CoeffTable::new(k, params.series_order, params.bounds.c_bar);
        total += table.contract(|r| rows[r as usize]);
    }
    total
}

/// Which training string a test string was attributed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    P,
    Q,
}

/// Outcome of the two-sequence classifier: the attributed source, the
/// margin score_p − score_q, and both cross-sequence scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification<T> {
    pub decision: Source,
    pub margin: T,
    pub score_p: T,
    pub score_q: T,
}

/// Attributes the test string `z` to the source of `x` or of `y` by
/// comparing the two-sequence estimates of z's log-probability under
/// each: P wins ties.
pub fn classify<T: Real>(
    x: &SymbolString,
    y: &SymbolString,
    z: &SymbolString,
    params: &EstimatorParams<T>,
) -> Result<Classification<T>, EstimatorError> {
    let score_p = cross_sequence_estimate(&joint_occupancy(x, z)?, params);
    let score_q = cross_sequence_estimate(&joint_occupancy(y, z)?, params);
    let margin = score_p - score_q;
    let decision = if score_p >= score_q {
        Source::P
    } else {
        Source::Q
    };
    Ok(Classification {
        decision,
        margin,
        score_p,
        score_q,
    })
}
