//! Seeded string sampling, occupancy statistics, and exact ground truth.
//!
//! Strings are drawn with a ChaCha8 generator seeded from a caller
//! `u64`, so every draw is reproducible across platforms and runs. The
//! documented stream-splitting rule for experiments: trial `t` uses seed
//! `base_seed + t`; when a trial needs several independent strings they
//! use `base_seed + 3t`, `+3t+1`, `+3t+2` so streams never collide.
//!
//! Sampling is grouped inverse-CDF: pick the symbol group by one uniform
//! against the (tiny) cumulative group-mass table, then pick a symbol
//! uniformly inside the group — O(#atoms) work and memory regardless of
//! alphabet size.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::measures::{ConcreteDistributionPair, Which};
use crate::scalar::{from_rational, from_u64, Real};

#[derive(Debug, Error)]
pub enum SamplingError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: u64, right: u64 },
    #[error("alphabet mismatch: {left} vs {right}")]
    AlphabetMismatch { left: u64, right: u64 },
    #[error("symbol {symbol} outside alphabet of size {alphabet_size}")]
    SymbolOutOfRange { symbol: u32, alphabet_size: u64 },
    #[error("malformed dump: {0}")]
    MalformedDump(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// An i.i.d. sample as symbol indices, tagged with the alphabet it was
/// drawn over and the seed that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolString {
    symbols: Vec<u32>,
    alphabet_size: u64,
    source_seed: u64,
}

impl SymbolString {
    /// Wraps an explicit symbol sequence (tests, dumps). Every index must
    /// lie inside the alphabet.
    pub fn new(
        symbols: Vec<u32>,
        alphabet_size: u64,
        source_seed: u64,
    ) -> Result<Self, SamplingError> {
        if let Some(&bad) = symbols.iter().find(|&&s| s as u64 >= alphabet_size) {
            return Err(SamplingError::SymbolOutOfRange {
                symbol: bad,
                alphabet_size,
            });
        }
        Ok(SymbolString {
            symbols,
            alphabet_size,
            source_seed,
        })
    }

    pub fn symbols(&self) -> &[u32] {
        &self.symbols
    }

    pub fn alphabet_size(&self) -> u64 {
        self.alphabet_size
    }

    pub fn source_seed(&self) -> u64 {
        self.source_seed
    }

    pub fn len(&self) -> u64 {
        self.symbols.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Occupancy counts of this string; see [`occupancy`].
    pub fn occupancy(&self) -> OccupancyCounts {
        occupancy(self)
    }

    /// Writes the plain-text dump: a `n=<n> alphabet=<m> seed=<s>` header
    /// line, then one decimal symbol index per line.
    pub fn write_dump<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(
            w,
            "n={} alphabet={} seed={}",
            self.len(),
            self.alphabet_size,
            self.source_seed
        )?;
        for s in &self.symbols {
            writeln!(w, "{s}")?;
        }
        Ok(())
    }

    /// Reads a dump written by [`SymbolString::write_dump`].
    pub fn read_dump<R: BufRead>(r: R) -> Result<Self, SamplingError> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| SamplingError::MalformedDump("empty input".into()))??;
        let mut n = None;
        let mut alphabet = None;
        let mut seed = None;
        for field in header.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| SamplingError::MalformedDump(format!("bad header field {field:?}")))?;
            let parsed: u64 = value
                .parse()
                .map_err(|_| SamplingError::MalformedDump(format!("bad header value {field:?}")))?;
            match key {
                "n" => n = Some(parsed),
                "alphabet" => alphabet = Some(parsed),
                "seed" => seed = Some(parsed),
                _ => return Err(SamplingError::MalformedDump(format!("unknown header key {key:?}"))),
            }
        }
        let (n, alphabet, seed) = match (n, alphabet, seed) {
            (Some(n), Some(a), Some(s)) => (n, a, s),
            _ => return Err(SamplingError::MalformedDump("header missing n/alphabet/seed".into())),
        };
        let mut symbols = Vec::with_capacity(n as usize);
        for line in lines {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let sym: u32 = line
                .parse()
                .map_err(|_| SamplingError::MalformedDump(format!("bad symbol line {line:?}")))?;
            symbols.push(sym);
        }
        if symbols.len() as u64 != n {
            return Err(SamplingError::MalformedDump(format!(
                "header says n={n} but found {} symbols",
                symbols.len()
            )));
        }
        SymbolString::new(symbols, alphabet, seed)
    }
}

/// Draws an i.i.d. length-n string from the chosen marginal. `n` must
/// match the length the distribution was instantiated for.
pub fn draw_string(
    dist: &ConcreteDistributionPair,
    which: Which,
    n: u64,
    seed: u64,
) -> Result<SymbolString, SamplingError> {
    if n != dist.n() {
        return Err(SamplingError::LengthMismatch {
            left: n,
            right: dist.n(),
        });
    }
    let masses: Vec<f64> = dist.group_masses(which);
    let mut cdf = Vec::with_capacity(masses.len());
    let mut acc = 0.0f64;
    for m in &masses {
        acc += m;
        cdf.push(acc);
    }
    // Rounding in the partial sums is ~1e-16 per group; the final entry is
    // forced to 1 so the search cannot fall past the last group.
    *cdf.last_mut().expect("validated distributions have groups") = 1.0;

    let groups = dist.groups();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut symbols = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let u: f64 = rng.gen();
        let gi = cdf.partition_point(|&c| c <= u);
        let g = &groups[gi];
        let within = if g.count == 1 { 0 } else { rng.gen_range(0..g.count) };
        symbols.push((g.offset + within) as u32);
    }
    Ok(SymbolString {
        symbols,
        alphabet_size: dist.alphabet_size(),
        source_seed: seed,
    })
}

/// Occupancy statistics of one string: φ_k = number of alphabet symbols
/// appearing exactly k times. Identities of the seen symbols are retained
/// internally so exact class probabilities can be computed against the
/// generating distribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupancyCounts {
    phi: BTreeMap<u32, u64>,
    /// (symbol, multiplicity) for every symbol that appears, ascending.
    seen: Vec<(u32, u32)>,
    n: u64,
    alphabet_size: u64,
}

/// Counts occupancies of a string.
pub fn occupancy(s: &SymbolString) -> OccupancyCounts {
    let mut counts = vec![0u32; s.alphabet_size as usize];
    for &sym in &s.symbols {
        counts[sym as usize] += 1;
    }
    let mut seen = Vec::new();
    let mut phi = BTreeMap::new();
    for (sym, &c) in counts.iter().enumerate() {
        if c > 0 {
            seen.push((sym as u32, c));
            *phi.entry(c).or_insert(0u64) += 1;
        }
    }
    OccupancyCounts {
        phi,
        seen,
        n: s.len(),
        alphabet_size: s.alphabet_size,
    }
}

impl OccupancyCounts {
    /// φ_k for k ≥ 1; for k = 0 the number of symbols never observed.
    pub fn phi(&self, k: u32) -> u64 {
        if k == 0 {
            self.alphabet_size - self.distinct()
        } else {
            self.phi.get(&k).copied().unwrap_or(0)
        }
    }

    /// Number of distinct symbols observed.
    pub fn distinct(&self) -> u64 {
        self.seen.len() as u64
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn alphabet_size(&self) -> u64 {
        self.alphabet_size
    }

    /// Largest multiplicity present (0 for an empty string).
    pub fn max_multiplicity(&self) -> u32 {
        self.phi.keys().next_back().copied().unwrap_or(0)
    }

    /// Non-zero (k, φ_k) pairs, ascending in k.
    pub fn entries(&self) -> impl Iterator<Item = (u32, u64)> + '_ {
        self.phi.iter().map(|(&k, &v)| (k, v))
    }

    /// Exact probability mass the generating distribution puts on the
    /// class of symbols observed exactly `k` times in this string.
    pub fn true_group_probability<T: Real>(
        &self,
        dist: &ConcreteDistributionPair,
        which: Which,
        k: u32,
    ) -> T {
        assert_eq!(
            self.alphabet_size,
            dist.alphabet_size(),
            "occupancy and distribution describe different alphabets"
        );
        let n = from_u64::<T>(dist.n());
        let groups = dist.groups();
        let weight = |gi: usize| match which {
            Which::P => groups[gi].a,
            Which::Q => groups[gi].b,
        };
        if k == 0 {
            // Unseen symbols per group = group size − seen in group.
            let mut seen_per_group = vec![0u64; groups.len()];
            for &(sym, _) in &self.seen {
                seen_per_group[dist.group_index_of(sym)] += 1;
            }
            let mut total = T::zero();
            for (gi, g) in groups.iter().enumerate() {
                let unseen = from_u64::<T>(g.count - seen_per_group[gi]);
                total += unseen * from_rational::<T>(weight(gi)) / n;
            }
            total
        } else {
            let mut per_group = vec![0u64; groups.len()];
            for &(sym, c) in &self.seen {
                if c == k {
                    per_group[dist.group_index_of(sym)] += 1;
                }
            }
            let mut total = T::zero();
            for (gi, &cnt) in per_group.iter().enumerate() {
                if cnt > 0 {
                    total += from_u64::<T>(cnt) * from_rational::<T>(weight(gi)) / n;
                }
            }
            total
        }
    }
}

#[cfg(test)]
impl OccupancyCounts {
    /// Test-only: occupancy built from bare (k, φ_k) pairs, so formula
    /// checks can use textbook values without a realizing string.
    pub(crate) fn synthetic(pairs: &[(u32, u64)], n: u64, alphabet_size: u64) -> Self {
        let mut phi = BTreeMap::new();
        let mut seen = Vec::new();
        let mut sym = 0u32;
        for &(k, count) in pairs {
            assert!(k > 0 && count > 0);
            phi.insert(k, count);
            for _ in 0..count {
                seen.push((sym, k));
                sym += 1;
            }
        }
        OccupancyCounts {
            phi,
            seen,
            n,
            alphabet_size,
        }
    }
}

/// Exact probability of the class A_k (symbols appearing exactly k times
/// in `s`) under the generating distribution's chosen marginal.
pub fn true_group_probability<T: Real>(
    dist: &ConcreteDistributionPair,
    which: Which,
    s: &SymbolString,
    k: u32,
) -> T {
    occupancy(s).true_group_probability(dist, which, k)
}

/// Exact normalized log-likelihood (1/n)·Σ_i log(n·μ(s_i)) of a string
/// under the chosen marginal μ ∈ {p, q}; the quantity whose almost-sure
/// limit the oracle's `aep_limit` reports.
pub fn true_normalized_loglik<T: Real>(
    dist: &ConcreteDistributionPair,
    which: Which,
    s: &SymbolString,
) -> T {
    assert_eq!(
        s.alphabet_size,
        dist.alphabet_size(),
        "string and distribution describe different alphabets"
    );
    let groups = dist.groups();
    let mut per_group = vec![0u64; groups.len()];
    for &sym in &s.symbols {
        per_group[dist.group_index_of(sym)] += 1;
    }
    let mut total = T::zero();
    for (gi, &cnt) in per_group.iter().enumerate() {
        if cnt > 0 {
            let w = match which {
                Which::P => groups[gi].a,
                Which::Q => groups[gi].b,
            };
            total += from_u64::<T>(cnt) * from_rational::<T>(w).ln();
        }
    }
    total / from_u64::<T>(s.len())
}

/// Joint occupancy of two same-alphabet, same-length strings:
/// φ_{k,ℓ} = number of symbols appearing k times in `x` and ℓ times in `y`.
/// Rows with k = 0 exist for symbols seen only in `y`; symbols absent from
/// both strings are never materialized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointOccupancy {
    table: BTreeMap<(u32, u32), u64>,
    n: u64,
    alphabet_size: u64,
}

/// Builds the joint occupancy table of two strings.
pub fn joint_occupancy(
    x: &SymbolString,
    y: &SymbolString,
) -> Result<JointOccupancy, SamplingError> {
    if x.alphabet_size != y.alphabet_size {
        return Err(SamplingError::AlphabetMismatch {
            left: x.alphabet_size,
            right: y.alphabet_size,
        });
    }
    if x.len() != y.len() {
        return Err(SamplingError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let m = x.alphabet_size as usize;
    let mut cx = vec![0u32; m];
    let mut cy = vec![0u32; m];
    for &sym in &x.symbols {
        cx[sym as usize] += 1;
    }
    for &sym in &y.symbols {
        cy[sym as usize] += 1;
    }
    let mut table = BTreeMap::new();
    for sym in 0..m {
        let cell = (cx[sym], cy[sym]);
        if cell != (0, 0) {
            *table.entry(cell).or_insert(0u64) += 1;
        }
    }
    Ok(JointOccupancy {
        table,
        n: x.len(),
        alphabet_size: x.alphabet_size,
    })
}

impl JointOccupancy {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn alphabet_size(&self) -> u64 {
        self.alphabet_size
    }

    /// φ_{k,ℓ}; zero for cells not present.
    pub fn count(&self, k: u32, l: u32) -> u64 {
        self.table.get(&(k, l)).copied().unwrap_or(0)
    }

    /// Non-zero ((k, ℓ), φ_{k,ℓ}) cells in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = ((u32, u32), u64)> + '_ {
        self.table.iter().map(|(&c, &v)| (c, v))
    }

    /// Row weight Σ_j j·φ_{k,j}: the number of y-positions holding a
    /// symbol that appears exactly k times in x.
    pub fn row_weight(&self, k: u32) -> u64 {
        self.table
            .range((k, 0)..=(k, u32::MAX))
            .map(|(&(_, j), &cnt)| j as u64 * cnt)
            .sum()
    }

    /// Largest x-multiplicity present in the table.
    pub fn max_x_multiplicity(&self) -> u32 {
        self.table.keys().map(|&(k, _)| k).max().unwrap_or(0)
    }

    /// Marginal over ℓ: the x-string's occupancy counts, extended with an
    /// explicit k = 0 entry for symbols seen only in y.
    pub fn marginal_x(&self) -> BTreeMap<u32, u64> {
        let mut out = BTreeMap::new();
        for (&(k, _), &v) in &self.table {
            *out.entry(k).or_insert(0u64) += v;
        }
        out
    }

    /// Marginal over k: the y-string's occupancy counts with an explicit
    /// ℓ = 0 entry for symbols seen only in x.
    pub fn marginal_y(&self) -> BTreeMap<u32, u64> {
        let mut out = BTreeMap::new();
        for (&(_, l), &v) in &self.table {
            *out.entry(l).or_insert(0u64) += v;
        }
        out
    }
}
