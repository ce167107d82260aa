//! Scalar abstraction for the floating-point parts of the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::AddAssign;

use num_rational::Rational64;
use num_traits::{Float, FromPrimitive};

/// Floating-point scalar the estimators and oracles are generic over.
///
/// Implemented for `f32` and `f64`. The blanket impl means any type with
/// the listed capabilities qualifies automatically.
pub trait Real:
    Float + FromPrimitive + AddAssign + Sum<Self> + Debug + Display + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: Float + FromPrimitive + AddAssign + Sum<T> + Debug + Display + Send + Sync + 'static
{
}

/// Converts an `f64` constant into the working scalar.
///
/// Panics only if `T` cannot represent any `f64` at all, which no `Real`
/// implementor does (overflow saturates to infinity instead).
pub fn from_f64<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("scalar type must convert from f64")
}

/// Converts a count into the working scalar (rounding beyond the mantissa).
pub fn from_u64<T: Real>(x: u64) -> T {
    T::from_u64(x).expect("scalar type must convert from u64")
}

/// Converts an exact rational into the working scalar with one rounding:
/// numerator and denominator convert exactly (they fit the mantissa for
/// every profile this crate builds), then a single correctly-rounded
/// division.
pub fn from_rational<T: Real>(r: Rational64) -> T {
    let n = T::from_i64(*r.numer()).expect("scalar type must convert from i64");
    let d = T::from_i64(*r.denom()).expect("scalar type must convert from i64");
    n / d
}

/// Tolerance for identities specified at 1e-12 in `f64` (mass
/// normalization, density-ratio agreement, collapse checks). Wider scalars
/// keep the specified constant; narrower ones scale with their epsilon so
/// the checks stay meaningful rather than vacuously failing.
pub fn normalization_tol<T: Real>() -> T {
    from_f64::<T>(1e-12).max(T::epsilon() * from_f64(64.0))
}

/// Tolerance for the dual-evaluation agreement check inside the oracle's
/// `gamma_k_limit`, specified at 1e-10 in `f64`.
pub fn agreement_tol<T: Real>() -> T {
    from_f64::<T>(1e-10).max(T::epsilon() * from_f64(1024.0))
}
