//! Scaled distribution families, their regime bounds, and mixing measures.
//!
//! A [`ScaledProfile`] describes an n-indexed family of distribution pairs
//! (p_n, q_n) in the rare-events scaling: at sample length `n` the
//! alphabet has `β·n` symbols, and the fraction `f_i` of them assigned to
//! atom i carries per-symbol probabilities `a_i/n` under p and `b_i/n`
//! under q. All profile arithmetic is exact rational so the normalization
//! identities `Σf_i = 1`, `β·Σf_i·a_i = 1`, `β·Σf_i·b_i = 1` can be
//! checked without tolerance games; decimal JSON inputs that are merely
//! 1e-12-close are still admitted.
//!
//! Validation produces a [`ValidProfile`] (duplicate `(a, b)` atoms
//! merged, atoms canonically ordered), from which callers obtain
//! [`RegimeBounds`], the induced [`MixingMeasure`] for either marginal,
//! and concrete finite distributions via [`ValidProfile::instantiate`].

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{from_f64, from_rational, normalization_tol, Real};

/// Residual admitted on the exact normalization identities, to accept
/// profiles written with decimal (rather than `"num/den"`) fields.
const NORMALIZATION_TOL: f64 = 1e-12;

/// Selects the p- or q-marginal of a paired family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Which {
    P,
    Q,
}

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("profile has no atoms")]
    EmptyProfile,
    #[error("atom {index}: alphabet fraction {value} outside (0, 1]")]
    InvalidFraction { index: usize, value: String },
    #[error("atom {index}: normalized probability {value} must be positive")]
    InvalidProbability { index: usize, value: String },
    #[error("beta must be positive, got {value}")]
    InvalidBeta { value: String },
    #[error("granularity must be positive")]
    ZeroGranularity,
    #[error("{identity} sums to {sum} (residual exceeds {NORMALIZATION_TOL:e})")]
    NormalizationError { identity: &'static str, sum: f64 },
    #[error("granularity {granularity} leaves atom {index} with a fractional symbol count")]
    FractionalGroup { granularity: u64, index: usize },
    #[error("n = {n} is not a positive multiple of granularity {granularity}")]
    GranularityError { n: u64, granularity: u64 },
    #[error("alphabet size {alphabet_size} exceeds the supported symbol range")]
    AlphabetTooLarge { alphabet_size: u64 },
    #[error("regime band [{c_lo}, {c_hi}] is not 0 < c_lo <= c_hi < inf")]
    InvalidBand { c_lo: String, c_hi: String },
    #[error("mixing measure masses sum to {sum}, expected 1")]
    MassNotNormalized { sum: f64 },
    #[error("mixing measure atom ({x}, {y}, mass {mass}) is not positive and finite")]
    InvalidAtom { x: String, y: String, mass: String },
}

/// One atom of a profile: alphabet fraction `f` of symbols carrying
/// normalized probabilities `a` (under p) and `b` (under q).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileAtom {
    #[serde(with = "crate::rational::serde_impl")]
    pub a: Rational64,
    #[serde(with = "crate::rational::serde_impl")]
    pub b: Rational64,
    #[serde(with = "crate::rational::serde_impl")]
    pub f: Rational64,
}

impl ProfileAtom {
    pub fn new(a: Rational64, b: Rational64, f: Rational64) -> Self {
        ProfileAtom { a, b, f }
    }
}

/// A finitely-atomic scaled family, independent of n. See module docs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaledProfile {
    pub atoms: Vec<ProfileAtom>,
    #[serde(with = "crate::rational::serde_impl")]
    pub beta: Rational64,
    pub granularity: u64,
}

impl ScaledProfile {
    pub fn new(atoms: Vec<ProfileAtom>, beta: Rational64, granularity: u64) -> Self {
        ScaledProfile {
            atoms,
            beta,
            granularity,
        }
    }

    pub fn from_json_str(json: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(json)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("profile serialization cannot fail")
    }

    /// Checks every profile invariant and returns the canonical form:
    /// duplicate `(a, b)` atoms merged, atoms sorted by `(a, b)`.
    pub fn validate(&self) -> Result<ValidProfile, MeasureError> {
        if self.atoms.is_empty() {
            return Err(MeasureError::EmptyProfile);
        }
        if !self.beta.is_positive() {
            return Err(MeasureError::InvalidBeta {
                value: crate::rational::format_rational(self.beta),
            });
        }
        if self.granularity == 0 {
            return Err(MeasureError::ZeroGranularity);
        }
        for (index, atom) in self.atoms.iter().enumerate() {
            if !atom.f.is_positive() || atom.f > Rational64::one() {
                return Err(MeasureError::InvalidFraction {
                    index,
                    value: crate::rational::format_rational(atom.f),
                });
            }
            if !atom.a.is_positive() {
                return Err(MeasureError::InvalidProbability {
                    index,
                    value: crate::rational::format_rational(atom.a),
                });
            }
            if !atom.b.is_positive() {
                return Err(MeasureError::InvalidProbability {
                    index,
                    value: crate::rational::format_rational(atom.b),
                });
            }
        }

        let mut atoms = self.atoms.clone();
        atoms.sort_by_key(|t| (t.a, t.b));
        let mut merged: Vec<ProfileAtom> = Vec::with_capacity(atoms.len());
        for atom in atoms {
            match merged.last_mut() {
                Some(last) if last.a == atom.a && last.b == atom.b => last.f = last.f + atom.f,
                _ => merged.push(atom),
            }
        }

        let f_sum: BigRational = merged.iter().map(|t| big(t.f)).sum();
        check_normalized("sum of alphabet fractions", &f_sum)?;
        let beta = big(self.beta);
        let p_sum: BigRational = merged.iter().map(|t| big(t.f) * big(t.a)).sum::<BigRational>() * &beta;
        check_normalized("beta * sum(f_i * a_i)", &p_sum)?;
        let q_sum: BigRational = merged.iter().map(|t| big(t.f) * big(t.b)).sum::<BigRational>() * &beta;
        check_normalized("beta * sum(f_i * b_i)", &q_sum)?;

        // Integrality at n = g implies integrality at every multiple of g.
        for (index, atom) in merged.iter().enumerate() {
            let count = &beta * big(atom.f) * BigRational::from_integer(BigInt::from(self.granularity));
            if !count.is_integer() {
                return Err(MeasureError::FractionalGroup {
                    granularity: self.granularity,
                    index,
                });
            }
        }

        Ok(ValidProfile {
            atoms: merged,
            beta: self.beta,
            granularity: self.granularity,
        })
    }
}

/// Validates a profile and reports the regime band its probabilities live
/// in; convenience wrapper over [`ScaledProfile::validate`].
pub fn validate_profile<T: Real>(profile: &ScaledProfile) -> Result<RegimeBounds<T>, MeasureError> {
    Ok(profile.validate()?.bounds())
}

fn big(r: Rational64) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

fn big_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn check_normalized(identity: &'static str, sum: &BigRational) -> Result<(), MeasureError> {
    if sum.is_one() {
        return Ok(());
    }
    let s = big_to_f64(sum);
    if (s - 1.0).abs() <= NORMALIZATION_TOL {
        return Ok(());
    }
    Err(MeasureError::NormalizationError { identity, sum: s })
}

/// A checked profile in canonical form. Obtained from
/// [`ScaledProfile::validate`]; every downstream constructor takes this
/// type so invalid profiles cannot reach the samplers or oracles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidProfile {
    atoms: Vec<ProfileAtom>,
    beta: Rational64,
    granularity: u64,
}

impl ValidProfile {
    pub fn atoms(&self) -> &[ProfileAtom] {
        &self.atoms
    }

    pub fn beta(&self) -> Rational64 {
        self.beta
    }

    pub fn granularity(&self) -> u64 {
        self.granularity
    }

    /// The band `[c_lo, c_hi]` spanned by the normalized probabilities of
    /// both marginals, with its derived midpoint and log-magnitude.
    pub fn bounds<T: Real>(&self) -> RegimeBounds<T> {
        let mut lo = self.atoms[0].a.min(self.atoms[0].b);
        let mut hi = lo;
        for atom in &self.atoms {
            lo = lo.min(atom.a).min(atom.b);
            hi = hi.max(atom.a).max(atom.b);
        }
        RegimeBounds::new(from_rational(lo), from_rational(hi))
            .expect("validated profile yields a positive band")
    }

    /// The mixing measure of the chosen marginal: atom `(a_i, b_i)` gets
    /// mass `β·f_i·a_i` under P (size-biased by p) or `β·f_i·b_i` under Q.
    pub fn mixing_measure<T: Real>(&self, which: Which) -> MixingMeasure<T> {
        let beta = big(self.beta);
        let atoms = self
            .atoms
            .iter()
            .map(|t| {
                let weight = match which {
                    Which::P => t.a,
                    Which::Q => t.b,
                };
                let mass = &beta * big(t.f) * big(weight);
                MeasureAtom {
                    x: from_rational(t.a),
                    y: from_rational(t.b),
                    mass: from_f64(big_to_f64(&mass)),
                }
            })
            .collect();
        MixingMeasure::new(atoms).expect("validated profile yields a normalized measure")
    }

    /// The concrete distribution pair at sample length `n`, which must be
    /// a positive multiple of the granularity.
    pub fn instantiate(&self, n: u64) -> Result<ConcreteDistributionPair, MeasureError> {
        if n == 0 || n % self.granularity != 0 {
            return Err(MeasureError::GranularityError {
                n,
                granularity: self.granularity,
            });
        }
        let beta = big(self.beta);
        let big_n = BigRational::from_integer(BigInt::from(n));
        let mut groups = Vec::with_capacity(self.atoms.len());
        let mut offset: u64 = 0;
        for (index, atom) in self.atoms.iter().enumerate() {
            let count = &beta * big(atom.f) * &big_n;
            if !count.is_integer() {
                return Err(MeasureError::FractionalGroup {
                    granularity: self.granularity,
                    index,
                });
            }
            let count = count
                .to_integer()
                .to_u64()
                .ok_or(MeasureError::AlphabetTooLarge { alphabet_size: u64::MAX })?;
            groups.push(SymbolGroup {
                offset,
                count,
                a: atom.a,
                b: atom.b,
            });
            offset = offset
                .checked_add(count)
                .ok_or(MeasureError::AlphabetTooLarge { alphabet_size: u64::MAX })?;
        }
        if offset > u32::MAX as u64 {
            return Err(MeasureError::AlphabetTooLarge { alphabet_size: offset });
        }
        let dist = ConcreteDistributionPair {
            n,
            alphabet_size: offset,
            groups,
        };
        debug_assert!(dist.total_probability(Which::P).is_one());
        debug_assert!(dist.total_probability(Which::Q).is_one());
        Ok(dist)
    }
}

/// The band `[c_lo, c_hi]` that normalized probabilities `n·p_n(ω)` are
/// confined to, with the derived midpoint `c_bar = (c_lo + c_hi)/2` and
/// `c_log = max(|log c_lo|, |log c_hi|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeBounds<T> {
    pub c_lo: T,
    pub c_hi: T,
    pub c_bar: T,
    pub c_log: T,
}

impl<T: Real> RegimeBounds<T> {
    pub fn new(c_lo: T, c_hi: T) -> Result<Self, MeasureError> {
        if !(c_lo > T::zero() && c_lo <= c_hi && c_hi.is_finite()) {
            return Err(MeasureError::InvalidBand {
                c_lo: format!("{c_lo}"),
                c_hi: format!("{c_hi}"),
            });
        }
        let two = from_f64::<T>(2.0);
        Ok(RegimeBounds {
            c_lo,
            c_hi,
            c_bar: (c_lo + c_hi) / two,
            c_log: c_lo.ln().abs().max(c_hi.ln().abs()),
        })
    }

    /// The series contraction ratio (c_hi − c_lo)/(c_hi + c_lo) ∈ [0, 1).
    pub fn contraction_ratio(&self) -> T {
        (self.c_hi - self.c_lo) / (self.c_hi + self.c_lo)
    }
}

/// One atom of a mixing measure: mass at the point `(x, y)` of the band
/// square, `x` the normalized p-probability and `y` the q-probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureAtom<T> {
    pub x: T,
    pub y: T,
    pub mass: T,
}

/// A finitely-atomic probability measure on the band square, canonically
/// ordered by `(x, y)` with masses summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingMeasure<T> {
    atoms: Vec<MeasureAtom<T>>,
}

impl<T: Real> MixingMeasure<T> {
    pub fn new(mut atoms: Vec<MeasureAtom<T>>) -> Result<Self, MeasureError> {
        if atoms.is_empty() {
            return Err(MeasureError::EmptyProfile);
        }
        for atom in &atoms {
            let ok = atom.x > T::zero()
                && atom.y > T::zero()
                && atom.mass > T::zero()
                && atom.x.is_finite()
                && atom.y.is_finite()
                && atom.mass.is_finite();
            if !ok {
                return Err(MeasureError::InvalidAtom {
                    x: format!("{}", atom.x),
                    y: format!("{}", atom.y),
                    mass: format!("{}", atom.mass),
                });
            }
        }
        let total: T = atoms.iter().map(|a| a.mass).sum();
        if (total - T::one()).abs() > normalization_tol::<T>() {
            return Err(MeasureError::MassNotNormalized {
                sum: total.to_f64().unwrap_or(f64::NAN),
            });
        }
        atoms.sort_by(|s, t| {
            (s.x, s.y)
                .partial_cmp(&(t.x, t.y))
                .expect("measure atoms are finite")
        });
        Ok(MixingMeasure { atoms })
    }

    /// Convenience constructor for a single point mass at `(x, y)`.
    pub fn point_mass(x: T, y: T) -> Result<Self, MeasureError> {
        MixingMeasure::new(vec![MeasureAtom {
            x,
            y,
            mass: T::one(),
        }])
    }

    pub fn atoms(&self) -> &[MeasureAtom<T>] {
        &self.atoms
    }

    /// Integrates a function of the atom coordinates against the measure.
    pub fn integrate(&self, mut f: impl FnMut(T, T) -> T) -> T {
        self.atoms
            .iter()
            .map(|a| a.mass * f(a.x, a.y))
            .fold(T::zero(), |acc, v| acc + v)
    }
}

/// A contiguous block of equiprobable symbols of a concrete distribution:
/// symbols `offset..offset+count` carry probabilities `a/n` (p) and `b/n` (q).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymbolGroup {
    pub offset: u64,
    pub count: u64,
    pub a: Rational64,
    pub b: Rational64,
}

/// The pair (p_n, q_n) at a specific sample length `n`: a grouped
/// description of `alphabet_size = β·n` symbols. Probabilities are stored
/// as normalized values with multiplicities, never per-symbol arrays.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcreteDistributionPair {
    n: u64,
    alphabet_size: u64,
    groups: Vec<SymbolGroup>,
}

impl ConcreteDistributionPair {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn alphabet_size(&self) -> u64 {
        self.alphabet_size
    }

    pub fn groups(&self) -> &[SymbolGroup] {
        &self.groups
    }

    /// Index of the group a symbol belongs to. Panics on an
    /// out-of-alphabet index, which would mean the string was drawn from
    /// a different distribution.
    pub fn group_index_of(&self, symbol: u32) -> usize {
        let s = symbol as u64;
        assert!(s < self.alphabet_size, "symbol {symbol} outside alphabet");
        self.groups.partition_point(|g| g.offset + g.count <= s)
    }

    /// The group a symbol index belongs to.
    pub fn group_of(&self, symbol: u32) -> &SymbolGroup {
        &self.groups[self.group_index_of(symbol)]
    }

    /// Normalized probability of one symbol: the actual probability is
    /// this value divided by n.
    pub fn normalized_weight(&self, which: Which, symbol: u32) -> Rational64 {
        let g = self.group_of(symbol);
        match which {
            Which::P => g.a,
            Which::Q => g.b,
        }
    }

    /// Exact total probability of the chosen marginal; equals 1 for every
    /// instantiation of a validated profile.
    pub fn total_probability(&self, which: Which) -> BigRational {
        let n = BigRational::from_integer(BigInt::from(self.n));
        self.groups
            .iter()
            .map(|g| {
                let w = match which {
                    Which::P => g.a,
                    Which::Q => g.b,
                };
                BigRational::from_integer(BigInt::from(g.count)) * big(w) / &n
            })
            .sum()
    }

    /// Per-group total probabilities (count·a/n), used by the sampler.
    pub fn group_masses<T: Real>(&self, which: Which) -> Vec<T> {
        let n = from_f64::<T>(self.n as f64);
        self.groups
            .iter()
            .map(|g| {
                let w = match which {
                    Which::P => g.a,
                    Which::Q => g.b,
                };
                from_f64::<T>(g.count as f64) * from_rational::<T>(w) / n
            })
            .collect()
    }
}
