//! Finite chaos expansions and their algebra.
//!
//! Coefficients are stored against either the unnormalized Hermite basis
//! `H_α(ξ) = Π_k He_{α_k}(ξ_k)` or the orthonormal basis `ξ_α = H_α/√α!`.
//! The Wick product is a plain convolution in the `H` basis, which is the
//! working basis everywhere; the `XI` basis appears only in norms and I/O.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::multiindex::{enumerate_truncated, MultiIndex, WeightSpec};
use crate::pde::{Field1D, Grid1D};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChaosError {
    #[error("expected an expansion in the {expected:?} basis, found {found:?}")]
    BasisMismatch { expected: Basis, found: Basis },
    #[error("payloads cannot be multiplied or added (different grids)")]
    IncompatiblePayload,
    #[error("z has {got} entries but the expansion reaches position {needed}")]
    ShortSequence { needed: usize, got: usize },
    #[error("expansion has no coefficients")]
    Empty,
    #[error("malformed expansion JSON: {0}")]
    Json(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    /// Unnormalized Hermite products `H_α`.
    H,
    /// Orthonormal `ξ_α = H_α / √α!`.
    XI,
}

/// Coefficient values a chaos expansion can carry.
pub trait Payload: Clone {
    fn zero_like(&self) -> Self;
    fn try_add_assign(&mut self, other: &Self) -> Result<(), ChaosError>;
    fn try_mul(&self, other: &Self) -> Result<Self, ChaosError>;
    fn scale(&self, s: f64) -> Self;
    /// Squared norm used by the weighted chaos norms.
    fn norm_sq(&self) -> f64;
}

impl Payload for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn try_add_assign(&mut self, other: &Self) -> Result<(), ChaosError> {
        *self += other;
        Ok(())
    }
    fn try_mul(&self, other: &Self) -> Result<Self, ChaosError> {
        Ok(self * other)
    }
    fn scale(&self, s: f64) -> Self {
        self * s
    }
    fn norm_sq(&self) -> f64 {
        self * self
    }
}

impl Payload for Complex64 {
    fn zero_like(&self) -> Self {
        Complex64::zero()
    }
    fn try_add_assign(&mut self, other: &Self) -> Result<(), ChaosError> {
        *self += other;
        Ok(())
    }
    fn try_mul(&self, other: &Self) -> Result<Self, ChaosError> {
        Ok(self * other)
    }
    fn scale(&self, s: f64) -> Self {
        self * s
    }
    fn norm_sq(&self) -> f64 {
        self.norm_sqr()
    }
}

impl Payload for BigRational {
    fn zero_like(&self) -> Self {
        BigRational::zero()
    }
    fn try_add_assign(&mut self, other: &Self) -> Result<(), ChaosError> {
        *self += other;
        Ok(())
    }
    fn try_mul(&self, other: &Self) -> Result<Self, ChaosError> {
        Ok(self * other)
    }
    fn scale(&self, s: f64) -> Self {
        self * BigRational::from_float(s).expect("finite scale factor")
    }
    fn norm_sq(&self) -> f64 {
        let v = crate::combinatorics::ratio_to_f64(self);
        v * v
    }
}

impl Payload for Field1D {
    fn zero_like(&self) -> Self {
        Field1D::zeros(*self.grid())
    }
    fn try_add_assign(&mut self, other: &Self) -> Result<(), ChaosError> {
        self.axpy(1.0, other).map_err(|_| ChaosError::IncompatiblePayload)
    }
    fn try_mul(&self, other: &Self) -> Result<Self, ChaosError> {
        self.pointwise_mul(other).map_err(|_| ChaosError::IncompatiblePayload)
    }
    fn scale(&self, s: f64) -> Self {
        self.scaled(s)
    }
    fn norm_sq(&self) -> f64 {
        self.l2_norm().powi(2)
    }
}

/// Finite expansion `Σ_α Φ_α B_α` in a fixed basis, iterated in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct ChaosExpansion<P> {
    basis: Basis,
    coeffs: BTreeMap<MultiIndex, P>,
}

impl<P: Payload> ChaosExpansion<P> {
    pub fn new(basis: Basis) -> Self {
        Self {
            basis,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn from_entries<I: IntoIterator<Item = (MultiIndex, P)>>(basis: Basis, entries: I) -> Self {
        Self {
            basis,
            coeffs: entries.into_iter().collect(),
        }
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn insert(&mut self, alpha: MultiIndex, value: P) {
        self.coeffs.insert(alpha, value);
    }

    pub fn get(&self, alpha: &MultiIndex) -> Option<&P> {
        self.coeffs.get(alpha)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &P)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest position used by any index in the support.
    pub fn max_position(&self) -> usize {
        self.coeffs.keys().map(|a| a.max_position()).max().unwrap_or(0)
    }

    fn require(&self, basis: Basis) -> Result<(), ChaosError> {
        if self.basis != basis {
            return Err(ChaosError::BasisMismatch {
                expected: basis,
                found: self.basis,
            });
        }
        Ok(())
    }

    /// Re-express in `target`: `XI` coefficient = `H` coefficient · √α!.
    pub fn to_basis(&self, target: Basis) -> Self {
        if self.basis == target {
            return self.clone();
        }
        let sign = if target == Basis::XI { 0.5 } else { -0.5 };
        let coeffs = self
            .coeffs
            .iter()
            .map(|(a, v)| (a.clone(), v.scale((sign * a.ln_factorial()).exp())))
            .collect();
        Self { basis: target, coeffs }
    }

    /// `(Φ⋄Ψ)_γ = Σ_{α+β=γ} Φ_α Ψ_β` in the `H` basis.
    pub fn wick(&self, other: &Self) -> Result<Self, ChaosError> {
        self.require(Basis::H)?;
        other.require(Basis::H)?;
        self.convolve(other, |_, _, _| 1.0)
    }

    /// Wick product directly in the `XI` basis, with factor `√((α+β)!/(α!β!))`.
    pub fn wick_xi(&self, other: &Self) -> Result<Self, ChaosError> {
        self.require(Basis::XI)?;
        other.require(Basis::XI)?;
        let mut out = self.convolve(other, |a, b, g| {
            (0.5 * (g.ln_factorial() - a.ln_factorial() - b.ln_factorial())).exp()
        })?;
        out.basis = Basis::XI;
        Ok(out)
    }

    fn convolve(
        &self,
        other: &Self,
        factor: impl Fn(&MultiIndex, &MultiIndex, &MultiIndex) -> f64,
    ) -> Result<Self, ChaosError> {
        let mut coeffs: BTreeMap<MultiIndex, P> = BTreeMap::new();
        for (a, x) in &self.coeffs {
            for (b, y) in &other.coeffs {
                let g = a.add(b);
                let f = factor(a, b, &g);
                let mut term = x.try_mul(y)?;
                if f != 1.0 {
                    term = term.scale(f);
                }
                match coeffs.get_mut(&g) {
                    Some(acc) => acc.try_add_assign(&term)?,
                    None => {
                        coeffs.insert(g, term);
                    }
                }
            }
        }
        Ok(Self {
            basis: self.basis,
            coeffs,
        })
    }

    /// `S(Φ)(z) = Σ_α Φ_α z^α` for real `z` (`H` basis), summed in canonical order.
    pub fn s_transform(&self, z: &[f64]) -> Result<P, ChaosError> {
        self.require(Basis::H)?;
        self.check_length(z.len())?;
        let mut iter = self.coeffs.iter();
        let (a0, v0) = iter.next().ok_or(ChaosError::Empty)?;
        let mut acc = v0.scale(a0.monomial(z).expect("length checked"));
        for (a, v) in iter {
            acc.try_add_assign(&v.scale(a.monomial(z).expect("length checked")))?;
        }
        Ok(acc)
    }

    fn check_length(&self, got: usize) -> Result<(), ChaosError> {
        let needed = self.max_position();
        if needed > got {
            return Err(ChaosError::ShortSequence { needed, got });
        }
        Ok(())
    }

    /// `Σ_α (α!)^ρ 𝔮^{ℓα} ‖Φ_α‖²` with `Φ_α` the `XI` coefficients.
    pub fn weighted_norm_sq(&self, rho: f64, ell: f64, q: &WeightSpec) -> f64 {
        self.weighted_norm_sq_with(rho, ell, q, P::norm_sq)
    }

    /// As [`Self::weighted_norm_sq`] with a caller-chosen coefficient norm.
    pub fn weighted_norm_sq_with(&self, rho: f64, ell: f64, q: &WeightSpec, norm_sq: impl Fn(&P) -> f64) -> f64 {
        self.coeffs
            .iter()
            .map(|(a, v)| {
                let ln_fact = a.ln_factorial();
                // H coefficients carry an extra α! in their squared XI value
                let to_xi = if self.basis == Basis::H { ln_fact } else { 0.0 };
                let ln_w = rho * ln_fact + q.ln_weight_pow(a, ell) + to_xi;
                ln_w.exp() * norm_sq(v)
            })
            .sum()
    }
}

impl<P: Payload + Zero> ChaosExpansion<P> {
    /// Coefficient at the zero index (zero when absent).
    pub fn gen_expectation(&self) -> P {
        self.coeffs.get(&MultiIndex::zero()).cloned().unwrap_or_else(P::zero)
    }
}

impl<P: Payload + Copy + Into<Complex64>> ChaosExpansion<P> {
    /// `S(Φ)(z)` for complex `z`.
    pub fn s_transform_complex(&self, z: &[Complex64]) -> Result<Complex64, ChaosError> {
        self.require(Basis::H)?;
        self.check_length(z.len())?;
        Ok(self
            .coeffs
            .iter()
            .map(|(a, &v)| v.into() * a.monomial(z).expect("length checked"))
            .fold(Complex64::zero(), |acc, t| acc + t))
    }
}

/// Truncated stochastic exponential `E(z)` in the `XI` basis: coefficients `z^α/√α!`.
pub fn stochastic_exponential<T>(z: &[T], d: usize, max_order: u32) -> ChaosExpansion<T>
where
    T: Payload + Copy + Zero + One + std::ops::Mul<Output = T>,
{
    let mut padded: Vec<T> = z.iter().copied().take(d).collect();
    padded.resize(d, T::zero());
    let entries = enumerate_truncated(d, max_order).into_iter().map(|a| {
        let m = a.monomial(&padded).expect("padded to d");
        let v = m.scale((-0.5 * a.ln_factorial()).exp());
        (a, v)
    });
    ChaosExpansion::from_entries(Basis::XI, entries)
}

/// Probabilists' Hermite polynomial `He_n(x)` via `He_{n+1} = x He_n − n He_{n−1}`.
pub fn hermite_he(n: u32, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = x * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

impl ChaosExpansion<f64> {
    /// Value of the random variable at one sample of `(ξ_1, ξ_2, ...)`.
    pub fn sample(&self, xi: &[f64]) -> Result<f64, ChaosError> {
        self.check_length(xi.len())?;
        let h = self.to_basis(Basis::H);
        Ok(h.coeffs
            .iter()
            .map(|(a, v)| {
                v * a
                    .entries()
                    .iter()
                    .map(|&(p, c)| hermite_he(c, xi[p - 1]))
                    .product::<f64>()
            })
            .sum())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpansionDoc {
    basis: Basis,
    entries: Vec<EntryDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryDoc {
    alpha: MultiIndex,
    values: Vec<f64>,
}

fn to_doc<P>(e: &ChaosExpansion<P>, values: impl Fn(&P) -> Vec<f64>) -> ExpansionDoc {
    ExpansionDoc {
        basis: e.basis,
        entries: e
            .coeffs
            .iter()
            .map(|(a, v)| EntryDoc {
                alpha: a.clone(),
                values: values(v),
            })
            .collect(),
    }
}

impl ChaosExpansion<f64> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&to_doc(self, |v| vec![*v])).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self, ChaosError> {
        let doc: ExpansionDoc = serde_json::from_str(s).map_err(|e| ChaosError::Json(e.to_string()))?;
        let mut out = Self::new(doc.basis);
        for e in doc.entries {
            if e.values.len() != 1 {
                return Err(ChaosError::Json(format!("scalar entry {} needs one value", e.alpha)));
            }
            out.insert(e.alpha, e.values[0]);
        }
        Ok(out)
    }
}

impl ChaosExpansion<Field1D> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&to_doc(self, |v| v.values().to_vec())).expect("serializable")
    }

    /// Field expansions carry no grid in the file; it is supplied by the reader.
    pub fn from_json(s: &str, grid: Grid1D) -> Result<Self, ChaosError> {
        let doc: ExpansionDoc = serde_json::from_str(s).map_err(|e| ChaosError::Json(e.to_string()))?;
        let mut out = Self::new(doc.basis);
        for e in doc.entries {
            let alpha = e.alpha;
            let field =
                Field1D::new(grid, e.values).map_err(|err| ChaosError::Json(format!("entry {alpha}: {err}")))?;
            out.insert(alpha, field);
        }
        Ok(out)
    }
}
