//! Built-in profile library.
//!
//! Three reference families exercised throughout the tests and shipped by
//! the CLI's `profiles` subcommand:
//!
//! - [`counterexample`]: the two-level family on which the classical
//!   Good-Turing sequence estimator converges to a strictly larger value
//!   than the log-likelihood limit;
//! - [`uniform`]: the degenerate single-atom family (every estimator limit
//!   is 0, a useful null case);
//! - [`skew`]: a pair with p ≠ q and mirrored bands, used for the
//!   two-sequence estimator and the classifier.

use num_rational::Rational64;

use crate::measures::{ProfileAtom, ScaledProfile};

fn r(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

/// Two-thirds of a 3n-symbol alphabet at normalized probability 1/4, one
/// third at 1/2, identically under p and q.
pub fn counterexample() -> ScaledProfile {
    ScaledProfile::new(
        vec![
            ProfileAtom::new(r(1, 4), r(1, 4), r(2, 3)),
            ProfileAtom::new(r(1, 2), r(1, 2), r(1, 3)),
        ],
        r(3, 1),
        3,
    )
}

/// All n symbols equiprobable at 1/n under both marginals.
pub fn uniform() -> ScaledProfile {
    ScaledProfile::new(
        vec![ProfileAtom::new(r(1, 1), r(1, 1), r(1, 1))],
        r(1, 1),
        1,
    )
}

/// Mirrored two-group pair on 2n symbols: half the alphabet at (1/4, 3/4),
/// half at (3/4, 1/4), so p and q are distinguishable but share the band.
pub fn skew() -> ScaledProfile {
    ScaledProfile::new(
        vec![
            ProfileAtom::new(r(1, 4), r(3, 4), r(1, 2)),
            ProfileAtom::new(r(3, 4), r(1, 4), r(1, 2)),
        ],
        r(2, 1),
        2,
    )
}

/// Names accepted by [`by_name`], in emission order.
pub const BUILTIN_NAMES: [&str; 3] = ["counterexample", "uniform", "skew"];

/// Looks a built-in profile up by name.
pub fn by_name(name: &str) -> Option<ScaledProfile> {
    match name {
        "counterexample" => Some(counterexample()),
        "uniform" => Some(uniform()),
        "skew" => Some(skew()),
        _ => None,
    }
}
