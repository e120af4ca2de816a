//! Multi-indices, truncated index sets, and eigenvalue weights.
//!
//! A [`MultiIndex`] is a finitely supported sequence of non-negative
//! integers `(α_1, α_2, ...)` with 1-based positions. Only non-zero counts
//! are stored. The canonical total order sorts by the order `|α|` first and
//! then lexicographically with the larger leading count first, so that for
//! two positions the degree-2 block reads `(2,0), (1,1), (0,2)`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MultiIndexError {
    #[error("cannot parse multi-index {0:?}")]
    Parse(String),
    #[error("weight power overflows f64 (log-magnitude {0})")]
    Overflow(f64),
    #[error("invalid weight specification: {0}")]
    InvalidWeights(String),
}

/// Finitely supported multi-index. Positions are 1-based.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct MultiIndex {
    // sorted by position, every count >= 1
    entries: Vec<(usize, u32)>,
}

impl MultiIndex {
    /// The zero multi-index `(0)`.
    pub fn zero() -> Self {
        Self::default()
    }

    /// `ε_k`: one at position `k`, zero elsewhere.
    pub fn unit(k: usize) -> Self {
        assert!(k >= 1, "multi-index positions are 1-based");
        Self { entries: vec![(k, 1)] }
    }

    /// Builds from a dense prefix: `dense[0]` is the count at position 1.
    pub fn from_dense(dense: &[u32]) -> Self {
        let entries = dense
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (i + 1, c))
            .collect();
        Self { entries }
    }

    /// Builds from `(position, count)` pairs in any order; zero counts are dropped.
    pub fn from_pairs<I: IntoIterator<Item = (usize, u32)>>(pairs: I) -> Self {
        let mut dense: Vec<(usize, u32)> = Vec::new();
        for (k, c) in pairs {
            assert!(k >= 1, "multi-index positions are 1-based");
            if c == 0 {
                continue;
            }
            match dense.binary_search_by_key(&k, |&(p, _)| p) {
                Ok(i) => dense[i].1 += c,
                Err(i) => dense.insert(i, (k, c)),
            }
        }
        Self { entries: dense }
    }

    /// Non-zero `(position, count)` pairs in ascending position.
    pub fn entries(&self) -> &[(usize, u32)] {
        &self.entries
    }

    pub fn get(&self, k: usize) -> u32 {
        self.entries
            .binary_search_by_key(&k, |&(p, _)| p)
            .map(|i| self.entries[i].1)
            .unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// `|α| = Σ α_k`.
    pub fn order(&self) -> u32 {
        self.entries.iter().map(|&(_, c)| c).sum()
    }

    /// Largest position with a non-zero count (0 for the zero index).
    pub fn max_position(&self) -> usize {
        self.entries.last().map(|&(p, _)| p).unwrap_or(0)
    }

    /// Dense counts over positions `1..=len`.
    pub fn to_dense(&self, len: usize) -> Vec<u32> {
        let mut out = vec![0; len];
        for &(p, c) in &self.entries {
            if p <= len {
                out[p - 1] = c;
            }
        }
        out
    }

    /// `α! = Π α_k!`, exact.
    pub fn factorial(&self) -> BigUint {
        self.entries
            .iter()
            .fold(BigUint::one(), |acc, &(_, c)| acc * factorial(c))
    }

    /// `α!` in floating point via log-gamma-free accumulation.
    pub fn factorial_f64(&self) -> f64 {
        self.ln_factorial().exp()
    }

    pub fn ln_factorial(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(_, c)| (2..=c).map(|i| (i as f64).ln()).sum::<f64>())
            .sum()
    }

    pub fn order_factorial(&self) -> (u32, BigUint) {
        (self.order(), self.factorial())
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex::from_pairs(self.entries.iter().chain(other.entries.iter()).copied())
    }

    /// `α − β` when `β ≤ α` componentwise, `None` otherwise.
    pub fn sub_checked(&self, other: &MultiIndex) -> Option<MultiIndex> {
        let mut out = Vec::with_capacity(self.entries.len());
        let mut j = 0;
        for &(p, c) in &self.entries {
            if j < other.entries.len() && other.entries[j].0 < p {
                // other has a position that self lacks
                return None;
            }
            if j < other.entries.len() && other.entries[j].0 == p {
                let b = other.entries[j].1;
                if b > c {
                    return None;
                }
                if c > b {
                    out.push((p, c - b));
                }
                j += 1;
            } else {
                out.push((p, c));
            }
        }
        if j < other.entries.len() {
            return None;
        }
        Some(MultiIndex { entries: out })
    }

    /// Componentwise `self ≤ other`.
    pub fn le(&self, other: &MultiIndex) -> bool {
        self.entries.iter().all(|&(p, c)| other.get(p) >= c)
    }

    /// Every `β` with `(0) < β < α`, in canonical order.
    pub fn strict_interior(&self) -> Vec<MultiIndex> {
        let mut all = self.lower_box();
        all.retain(|b| !b.is_zero() && b != self);
        all
    }

    /// Every `β ≤ α` (including `(0)` and `α`), in canonical order.
    pub fn lower_box(&self) -> Vec<MultiIndex> {
        let mut out = vec![Vec::<(usize, u32)>::new()];
        for &(p, c) in &self.entries {
            let mut next = Vec::with_capacity(out.len() * (c as usize + 1));
            for prefix in &out {
                for v in 0..=c {
                    let mut e = prefix.clone();
                    if v > 0 {
                        e.push((p, v));
                    }
                    next.push(e);
                }
            }
            out = next;
        }
        let mut v: Vec<MultiIndex> = out.into_iter().map(|entries| MultiIndex { entries }).collect();
        v.sort();
        v
    }

    /// `z^α` for a dense sequence `z` (position `k` maps to `z[k-1]`).
    /// Returns `None` if `z` is too short to cover the support.
    pub fn monomial<T>(&self, z: &[T]) -> Option<T>
    where
        T: Copy + One + std::ops::Mul<Output = T>,
    {
        if self.max_position() > z.len() {
            return None;
        }
        let mut acc = T::one();
        for &(p, c) in &self.entries {
            for _ in 0..c {
                acc = acc * z[p - 1];
            }
        }
        Some(acc)
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order().cmp(&other.order()).then_with(|| {
            let (mut i, mut j) = (0, 0);
            loop {
                match (self.entries.get(i), other.entries.get(j)) {
                    (None, None) => return Ordering::Equal,
                    (Some(_), None) => return Ordering::Less,
                    (None, Some(_)) => return Ordering::Greater,
                    (Some(&(pa, ca)), Some(&(pb, cb))) => {
                        if pa != pb {
                            // the one with a count at the earlier position leads
                            return pa.cmp(&pb);
                        }
                        if ca != cb {
                            return cb.cmp(&ca);
                        }
                        i += 1;
                        j += 1;
                    }
                }
            }
        })
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let dense = self.to_dense(self.max_position());
        let parts: Vec<String> = dense.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join("."))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self)
    }
}

impl FromStr for MultiIndex {
    type Err = MultiIndexError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim();
        if trimmed.is_empty() {
            return Err(MultiIndexError::Parse(s.to_string()));
        }
        let dense = trimmed
            .split('.')
            .map(|part| part.parse::<u32>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| MultiIndexError::Parse(s.to_string()))?;
        Ok(MultiIndex::from_dense(&dense))
    }
}

impl Serialize for MultiIndex {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for MultiIndex {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn factorial(n: u32) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

/// All `α` with support in `{1..d}` and `|α| ≤ max_order`, canonically sorted.
///
/// The count is `C(d + max_order, d)`.
pub fn enumerate_truncated(d: usize, max_order: u32) -> Vec<MultiIndex> {
    assert!(d >= 1, "truncation dimension must be at least 1");
    let mut out = Vec::new();
    let mut dense = vec![0u32; d];
    fill(&mut dense, 0, max_order, &mut out);
    out.sort();
    out
}

fn fill(dense: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if pos == dense.len() {
        out.push(MultiIndex::from_dense(dense));
        return;
    }
    for c in 0..=remaining {
        dense[pos] = c;
        fill(dense, pos + 1, remaining - c, out);
    }
    dense[pos] = 0;
}

/// Rule generating the eigenvalues `q_1 ≤ q_2 ≤ ...` of the weight operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    /// `q_k = c·k^γ`.
    Polynomial { c: f64, gamma: f64 },
    /// `q_k = base^k`.
    Geometric { base: f64 },
}

impl Default for WeightSpec {
    fn default() -> Self {
        WeightSpec::Polynomial { c: 2.0, gamma: 2.0 }
    }
}

impl WeightSpec {
    pub fn polynomial(c: f64, gamma: f64) -> Result<Self, MultiIndexError> {
        let w = WeightSpec::Polynomial { c, gamma };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<(), MultiIndexError> {
        match *self {
            WeightSpec::Polynomial { c, gamma } => {
                if !(c.is_finite() && c > 0.0) {
                    return Err(MultiIndexError::InvalidWeights(format!("c must be > 0, got {c}")));
                }
                if !(gamma.is_finite() && gamma >= 1.0) {
                    return Err(MultiIndexError::InvalidWeights(format!(
                        "gamma must be >= 1, got {gamma}"
                    )));
                }
            }
            WeightSpec::Geometric { base } => {
                if !(base.is_finite() && base > 1.0) {
                    return Err(MultiIndexError::InvalidWeights(format!("base must be > 1, got {base}")));
                }
            }
        }
        Ok(())
    }

    /// `q_k` for a 1-based position.
    pub fn q(&self, k: usize) -> f64 {
        self.ln_q(k).exp()
    }

    pub fn ln_q(&self, k: usize) -> f64 {
        debug_assert!(k >= 1);
        match *self {
            WeightSpec::Polynomial { c, gamma } => c.ln() + gamma * (k as f64).ln(),
            WeightSpec::Geometric { base } => k as f64 * base.ln(),
        }
    }

    /// Whether `1 < q_1` and `Σ_k 1/q_k < 1`.
    ///
    /// For the polynomial rule the infinite sum is bracketed by a partial sum
    /// plus the integral tail bound `∫_K^∞ dx/(c x^γ)`; the flag is only set
    /// when the upper bracket is below one.
    pub fn satisfies_summability(&self) -> bool {
        if self.validate().is_err() || self.q(1) <= 1.0 {
            return false;
        }
        self.reciprocal_sum_upper_bound() < 1.0
    }

    /// Upper bound on `Σ_k 1/q_k` (`+∞` when the series diverges).
    pub fn reciprocal_sum_upper_bound(&self) -> f64 {
        match *self {
            WeightSpec::Polynomial { c, gamma } => {
                if gamma <= 1.0 {
                    return f64::INFINITY;
                }
                const K: usize = 10_000;
                let partial: f64 = (1..=K).map(|k| 1.0 / self.q(k)).sum();
                partial + (K as f64).powf(1.0 - gamma) / (c * (gamma - 1.0))
            }
            WeightSpec::Geometric { base } => 1.0 / (base - 1.0),
        }
    }

    /// `Σ_{k≤d} 1/q_k`.
    pub fn reciprocal_partial_sum(&self, d: usize) -> f64 {
        (1..=d).map(|k| 1.0 / self.q(k)).sum()
    }

    /// `𝔮^{rα} = Π_k q_k^{r α_k}` computed in log space.
    pub fn weight_pow(&self, alpha: &MultiIndex, r: f64) -> Result<f64, MultiIndexError> {
        let log = self.ln_weight_pow(alpha, r);
        if log > f64::MAX.ln() {
            return Err(MultiIndexError::Overflow(log));
        }
        Ok(log.exp())
    }

    pub fn ln_weight_pow(&self, alpha: &MultiIndex, r: f64) -> f64 {
        if r == 0.0 {
            return 0.0;
        }
        alpha.entries().iter().map(|&(p, c)| r * c as f64 * self.ln_q(p)).sum()
    }

    /// Exact `q_k` when the rule produces rationals (integer exponents).
    pub fn q_exact(&self, k: usize) -> Option<BigRational> {
        match *self {
            WeightSpec::Polynomial { c, gamma } => {
                if gamma.fract() != 0.0 || gamma > 64.0 {
                    return None;
                }
                let c = BigRational::from_float(c)?;
                let kk = BigRational::from_integer(BigInt::from(k));
                Some(c * num_traits::pow(kk, gamma as usize))
            }
            WeightSpec::Geometric { base } => {
                let b = BigRational::from_float(base)?;
                Some(num_traits::pow(b, k))
            }
        }
    }

    /// Exact `𝔮^{rα}` for integer `r`, when available.
    pub fn weight_pow_exact(&self, alpha: &MultiIndex, r: i32) -> Option<BigRational> {
        let mut acc = BigRational::one();
        for &(p, c) in alpha.entries() {
            let q = self.q_exact(p)?;
            if q.is_zero() {
                return None;
            }
            let e = r.unsigned_abs() as usize * c as usize;
            let term = num_traits::pow(q, e);
            acc = if r >= 0 { acc * term } else { acc / term };
        }
        Some(acc)
    }
}
