//! Sequence-probability estimation in the rare-events regime.
//!
//! Everything here lives in the scaling where each symbol of an alphabet
//! Ω_n carries probability Θ(1/n) for a length-n sample: probabilities are
//! written `a/n` with the normalized value `a` confined to a band
//! `[c_lo, c_hi]`, and the alphabet grows linearly with `n`. In that regime
//! the normalized log-likelihood of a sample converges to an integral of
//! `log x` against a *mixing measure* on the band, and classical
//! Good-Turing class estimates `(k+1)·φ_{k+1}/n` converge to Poisson
//! moments `λ_k` of the same measure.
//!
//! The crate provides:
//!
//! - [`measures`]: exact rational descriptions of scaled distribution
//!   families (profiles), their induced mixing measures, and concrete
//!   finite distributions for any admissible `n`;
//! - [`sampling`]: seeded string sampling, occupancy and joint-occupancy
//!   counts, and exact ground-truth quantities for a drawn string;
//! - [`estimators`]: the Good-Turing estimators, the corrected class
//!   estimator `gamma_k` and its total `better_gt_estimate`, the
//!   two-sequence variant, and a likelihood-ratio classifier built on it;
//! - [`oracle`]: closed-form limits (`aep_limit`, `lambda_k`,
//!   `gt_sequence_limit`, `gamma_k_limit`), the accuracy sufficiency
//!   bound, and parameter selection for a target accuracy.
//!
//! Numeric code is generic over the scalar type via [`scalar::Real`]
//! (implemented for `f32` and `f64`); exact arithmetic on profiles uses
//! `num_rational::Rational64`. Concrete `f64`/`f32` aliases for the
//! parameterized types sit at the crate root.

#![forbid(unsafe_code)]

pub mod coeff;
pub mod estimators;
pub mod measures;
pub mod oracle;
pub mod profiles;
pub mod rational;
pub mod sampling;
pub mod scalar;

pub use measures::{
    ConcreteDistributionPair, MeasureError, MixingMeasure, ProfileAtom, RegimeBounds,
    ScaledProfile, ValidProfile, Which,
};
pub use sampling::{JointOccupancy, OccupancyCounts, SamplingError, SymbolString};
pub use scalar::Real;

/// `f64` instantiations — the defaults used by the CLI and the tests.
pub type RegimeBounds64 = measures::RegimeBounds<f64>;
pub type MixingMeasure64 = measures::MixingMeasure<f64>;
pub type EstimatorParams64 = estimators::EstimatorParams<f64>;
pub type Classification64 = estimators::Classification<f64>;

/// `f32` instantiations, for callers that trade precision for footprint.
pub type RegimeBounds32 = measures::RegimeBounds<f32>;
pub type MixingMeasure32 = measures::MixingMeasure<f32>;
pub type EstimatorParams32 = estimators::EstimatorParams<f32>;
pub type Classification32 = estimators::Classification<f32>;
