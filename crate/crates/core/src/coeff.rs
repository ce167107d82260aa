//! Coefficient algebra shared by the corrected class estimators and the
//! oracle's limiting values.
//!
//! Both `estimators::gamma_k` and `oracle::gamma_k_limit` contract the
//! same per-ℓ coefficient table against different class values (empirical
//! Good-Turing masses vs. Poisson moments). Keeping the table in one place
//! makes the oracle's dual-evaluation agreement check a regression test
//! for this algebra.
//!
//! The table is generic over its scalar: estimators instantiate it at a
//! floating [`Real`] type, while the oracle also instantiates it at
//! `BigRational` — the expanded coefficient form suffers catastrophic
//! cancellation in floating point once the series order M grows past
//! ~15 (individual ℓ-terms reach ~10^12 while the sum is O(1)), and
//! exact construction keeps the oracle's agreement sentinel about
//! algebra, not rounding.

use num_traits::{FromPrimitive, Num};
use std::ops::Neg;

use crate::scalar::{from_f64, from_u64, Real};

/// Scalars a [`CoeffTable`] can be built over: the floating types behind
/// [`Real`] and exact rationals.
pub trait CoeffScalar: Clone + Num + Neg<Output = Self> + FromPrimitive {}

impl<S> CoeffScalar for S where S: Clone + Num + Neg<Output = S> + FromPrimitive {}

/// Largest factorial argument handled by exact integer arithmetic;
/// products with larger arguments accumulate in floating point.
const EXACT_FACTORIAL_LIMIT: u32 = 20;

/// Binomial coefficient C(m, l).
///
/// Exact 128-bit integer arithmetic while it fits (every prefix of the
/// incremental product is itself a binomial coefficient, so intermediate
/// divisions stay exact), falling back to a floating multiplicative form
/// for arguments beyond any use in this crate.
pub fn binomial<T: Real>(m: u32, l: u32) -> T {
    if l > m {
        return T::zero();
    }
    let l = l.min(m - l);
    let mut exact: u128 = 1;
    for i in 1..=l {
        match exact.checked_mul((m - l + i) as u128) {
            Some(v) => exact = v / i as u128,
            None => return binomial_float(m, l),
        }
    }
    from_f64(exact as f64)
}

fn binomial_float<T: Real>(m: u32, l: u32) -> T {
    let mut acc = 1.0f64;
    for i in 1..=l {
        acc *= (m - l + i) as f64 / i as f64;
    }
    from_f64(acc)
}

/// Rising factorial (k+l)!/k! = (k+1)(k+2)⋯(k+l).
pub fn rising_factorial<T: Real>(k: u32, l: u32) -> T {
    if l == 0 {
        return T::one();
    }
    if k + l <= EXACT_FACTORIAL_LIMIT {
        let mut exact: u64 = 1;
        for i in (k + 1)..=(k + l) {
            exact *= i as u64;
        }
        from_f64(exact as f64)
    } else {
        let mut acc = 1.0f64;
        for i in (k + 1)..=(k + l) {
            acc *= i as f64;
        }
        from_f64(acc)
    }
}

/// log(n!) as Σ_{i=2}^{n} log i, for log-space bound arithmetic where n!
/// itself would overflow.
pub fn ln_factorial<T: Real>(n: u32) -> T {
    (2..=n).map(|i| from_u64::<T>(i as u64).ln()).sum()
}

/// Per-ℓ coefficient table for the order-(k, M) corrected class estimator:
/// bucket ℓ holds Σ_{m = max(ℓ,1)}^{M} (−c̄)^{−ℓ}·C(m, ℓ)·(k+ℓ)!/(m·k!).
#[derive(Debug, Clone)]
pub struct CoeffTable<S> {
    k: u32,
    c_bar: S,
    per_ell: Vec<S>,
}

impl<S: CoeffScalar> CoeffTable<S> {
    /// Builds the table for class index `k`, series order `M ≥ 1`, and
    /// band midpoint `c̄`.
    ///
    /// Each (m, ℓ) term follows from its ℓ−1 neighbour by the ratio
    /// (−1/c̄)·((m−ℓ+1)/ℓ)·(k+ℓ), so construction needs only ring
    /// operations and stays exact for exact scalar types.
    pub fn new(k: u32, series_order: u32, c_bar: S) -> Self {
        assert!(series_order >= 1, "series order M must be at least 1");
        let mut per_ell = vec![S::zero(); series_order as usize + 1];
        let neg_inv_c_bar = -(S::one() / c_bar.clone());
        let s = |v: u32| S::from_u32(v).expect("small integer fits any scalar");
        for m in 1..=series_order {
            // term(m, 0) = C(m,0)·(k!/k!)/m = 1/m.
            let mut term = S::one() / s(m);
            per_ell[0] = per_ell[0].clone() + term.clone();
            for ell in 1..=m {
                term = term * neg_inv_c_bar.clone() * s(m - ell + 1) * s(k + ell) / s(ell);
                per_ell[ell as usize] = per_ell[ell as usize].clone() + term.clone();
            }
        }
        CoeffTable { k, c_bar, per_ell }
    }

    /// Class index the table was built for.
    pub fn k(&self) -> u32 {
        self.k
    }

    /// Series order M the table was built for: the largest offset ℓ with
    /// a stored coefficient.
    pub fn series_order(&self) -> u32 {
        self.per_ell.len() as u32 - 1
    }

    /// The series part Σ_{ℓ=0}^{M} coef[ℓ]·g(k+ℓ) of the contraction,
    /// without the logarithmic term (which needs a floating scalar).
    pub fn series_sum(&self, mut g: impl FnMut(u32) -> S) -> S {
        let mut acc = S::zero();
        for (ell, c) in self.per_ell.iter().enumerate() {
            acc = acc + c.clone() * g(self.k + ell as u32);
        }
        acc
    }
}

impl<T: Real> CoeffTable<T> {
    /// Contracts the table against per-class values `g`:
    /// −Σ_{ℓ=0}^{M} coef[ℓ]·g(k+ℓ) + log(c̄)·g(k).
    pub fn contract(&self, mut g: impl FnMut(u32) -> T) -> T {
        let series = self.series_sum(&mut g);
        self.c_bar.ln() * g(self.k) - series
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::ToPrimitive;

    #[test]
    fn ln_factorial_matches_exact_values() {
        assert_eq!(ln_factorial::<f64>(0), 0.0);
        assert_eq!(ln_factorial::<f64>(1), 0.0);
        let got: f64 = ln_factorial(10);
        assert!((got - 3628800.0f64.ln()).abs() < 1e-12);
        let big: f64 = ln_factorial(170);
        assert!((big - 7.257415615307999e306f64.ln()).abs() < 1e-9 * big);
    }

    #[test]
    fn binomial_small_values() {
        assert_eq!(binomial::<f64>(0, 0), 1.0);
        assert_eq!(binomial::<f64>(5, 2), 10.0);
        assert_eq!(binomial::<f64>(6, 3), 20.0);
        assert_eq!(binomial::<f64>(6, 7), 0.0);
        assert_eq!(binomial::<f64>(40, 20), 137846528820.0);
    }

    #[test]
    fn rising_factorial_matches_factorial_ratio() {
        assert_eq!(rising_factorial::<f64>(0, 0), 1.0);
        assert_eq!(rising_factorial::<f64>(0, 5), 120.0);
        assert_eq!(rising_factorial::<f64>(2, 3), 60.0); // 5!/2!
        // Above the exact-integer switchover the float path takes over.
        let f = rising_factorial::<f64>(20, 10); // 30!/20!
        let expect = (21..=30).map(|i| i as f64).product::<f64>();
        assert!((f / expect - 1.0).abs() < 1e-12);
    }

    #[test]
    fn binomial_sums_collapse_to_power() {
        // Σ_ℓ C(m,ℓ)·(−c̄)^{m−ℓ}·x^ℓ = (x − c̄)^m
        let c_bar = 0.375f64;
        for m in 1..=10u32 {
            for i in 0..=20 {
                let x = 0.25 + 0.25 * i as f64 / 20.0;
                let mut sum = 0.0;
                for ell in 0..=m {
                    sum += binomial::<f64>(m, ell)
                        * (-c_bar).powi((m - ell) as i32)
                        * x.powi(ell as i32);
                }
                assert!(
                    (sum - (x - c_bar).powi(m as i32)).abs() < 1e-12,
                    "m={m} x={x}: {sum}"
                );
            }
        }
    }

    #[test]
    fn table_matches_direct_double_loop() {
        let k = 2u32;
        let m_ord = 4u32;
        let c_bar = 0.375f64;
        let g = |r: u32| 1.0 / (1.0 + r as f64);
        let table = CoeffTable::new(k, m_ord, c_bar);
        let got = table.contract(g);

        let mut direct = 0.0;
        for m in 1..=m_ord {
            for ell in 0..=m {
                direct -= (-c_bar).powi(-(ell as i32))
                    * binomial::<f64>(m, ell)
                    * rising_factorial::<f64>(k, ell)
                    / m as f64
                    * g(k + ell);
            }
        }
        direct += c_bar.ln() * g(k);
        assert!((got - direct).abs() < 1e-12, "{got} vs {direct}");
    }

    #[test]
    fn exact_and_floating_tables_agree_at_small_order() {
        let c_bar = 0.375f64;
        let exact_c = BigRational::from_float(c_bar).unwrap();
        for k in 0..=4u32 {
            let tf = CoeffTable::<f64>::new(k, 6, c_bar);
            let te = CoeffTable::<BigRational>::new(k, 6, exact_c.clone());
            for ell in 0..=6usize {
                let f = tf.per_ell[ell];
                let e = te.per_ell[ell].to_f64().unwrap();
                assert!(
                    (f - e).abs() <= 1e-9 * e.abs().max(1.0),
                    "k={k} ell={ell}: {f} vs {e}"
                );
            }
        }
    }
}
