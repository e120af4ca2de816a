//! Exact Catalan-number machinery for the coefficient norm recursion.
//!
//! The quadratic recursion `A_α = Σ_{(0)<β<α} A_β A_{α−β}` with prescribed
//! leaves `A_{ε_k}` has the closed form
//! `A_α = C_{|α|−1} · (|α| choose α) · Π_k A_{ε_k}^{α_k}`, where `C_n` is the
//! n-th Catalan number. Both sides are evaluated here in exact rational
//! arithmetic so that they can be compared for equality.

use std::collections::{BTreeMap, HashMap};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::multiindex::{enumerate_truncated, factorial, MultiIndex, WeightSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CombinatoricsError {
    #[error("no leaf value for position {0}")]
    MissingLeaf(usize),
    #[error("the recursion is defined for |α| ≥ 1")]
    ZeroIndex,
    #[error("weights rejected: {0}")]
    RejectedWeights(String),
    #[error("bound requires λ > 1, got {0}")]
    InvalidLambda(f64),
    #[error("bound overflows f64 (log-magnitude {0})")]
    Overflow(f64),
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// `C_n = binom(2n, n) / (n + 1)`.
pub fn catalan(n: u64) -> BigUint {
    let b = binomial(2 * n, n);
    let (q, r) = b.div_rem(&BigUint::from(n + 1));
    debug_assert!(r.is_zero());
    q
}

/// `|α|! / α!`.
pub fn multinomial(alpha: &MultiIndex) -> BigUint {
    factorial(alpha.order()) / alpha.factorial()
}

pub type Leaves = BTreeMap<usize, BigRational>;

/// Memoized evaluator of the quadratic recursion.
pub struct CatalanRecursion<'a> {
    leaves: &'a Leaves,
    memo: HashMap<MultiIndex, BigRational>,
}

impl<'a> CatalanRecursion<'a> {
    pub fn new(leaves: &'a Leaves) -> Self {
        Self {
            leaves,
            memo: HashMap::new(),
        }
    }

    pub fn value(&mut self, alpha: &MultiIndex) -> Result<BigRational, CombinatoricsError> {
        if alpha.is_zero() {
            return Err(CombinatoricsError::ZeroIndex);
        }
        if let Some(v) = self.memo.get(alpha) {
            return Ok(v.clone());
        }
        let value = if alpha.order() == 1 {
            let k = alpha.entries()[0].0;
            self.leaves.get(&k).cloned().ok_or(CombinatoricsError::MissingLeaf(k))?
        } else {
            let mut acc = BigRational::zero();
            for beta in alpha.strict_interior() {
                let rest = alpha.sub_checked(&beta).expect("β < α");
                let a = self.value(&beta)?;
                let b = self.value(&rest)?;
                acc += a * b;
            }
            acc
        };
        self.memo.insert(alpha.clone(), value.clone());
        Ok(value)
    }
}

/// `A_α` through the recursion.
pub fn a_recursive(alpha: &MultiIndex, leaves: &Leaves) -> Result<BigRational, CombinatoricsError> {
    CatalanRecursion::new(leaves).value(alpha)
}

/// `A_α` through the closed form.
pub fn a_closed(alpha: &MultiIndex, leaves: &Leaves) -> Result<BigRational, CombinatoricsError> {
    let n = alpha.order() as u64;
    if n == 0 {
        return Err(CombinatoricsError::ZeroIndex);
    }
    let mut acc = BigRational::new(
        BigInt::from(binomial(2 * n - 2, n - 1)) * BigInt::from(multinomial(alpha)),
        BigInt::from(n),
    );
    for &(k, c) in alpha.entries() {
        let leaf = leaves.get(&k).ok_or(CombinatoricsError::MissingLeaf(k))?;
        acc *= num_traits::pow(leaf.clone(), c as usize);
    }
    Ok(acc)
}

/// Truncated left-hand sums of the exponential and geometric identities,
/// together with their closed right-hand sides over positions `1..=d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropositionSums {
    /// `Σ 𝔮^{−α}/α!` over the truncated set.
    pub exp_sum: f64,
    /// `Σ 𝔮^{−α}` over the truncated set.
    pub geom_sum: f64,
    /// `exp(Σ_{k≤d} 1/q_k)`.
    pub rhs_exp: f64,
    /// `Π_{k≤d} q_k/(q_k − 1)`.
    pub rhs_prod: f64,
}

pub fn proposition_sums(q: &WeightSpec, d: usize, max_order: u32) -> Result<PropositionSums, CombinatoricsError> {
    if !q.satisfies_summability() {
        return Err(CombinatoricsError::RejectedWeights(
            "requires 1 < q_1 and Σ 1/q_k < 1".into(),
        ));
    }
    let mut exp_sum = 0.0;
    let mut geom_sum = 0.0;
    for alpha in enumerate_truncated(d, max_order) {
        let ln_w = q.ln_weight_pow(&alpha, -1.0);
        geom_sum += ln_w.exp();
        exp_sum += (ln_w - alpha.ln_factorial()).exp();
    }
    let rhs_exp = q.reciprocal_partial_sum(d).exp();
    let rhs_prod = (1..=d).map(|k| q.q(k) / (q.q(k) - 1.0)).product();
    Ok(PropositionSums {
        exp_sum,
        geom_sum,
        rhs_exp,
        rhs_prod,
    })
}

/// Final coefficient bound and its simplified majorant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundValue {
    /// `(2λ)^{2|α|} C_{|α|−1} (|α| choose α) 𝔮^{mα}`.
    pub full: f64,
    /// `(8λ)^{|α|} 𝔮^{(m+1)α}`. Only dominates `full` for small λ and |α|.
    pub simplified: f64,
    /// `(16λ²)^{|α|} 𝔮^{(m+1)α} / 4`, which does dominate `full` via
    /// `C_n ≤ 4^n` and `(|α| choose α) ≤ 𝔮^α`.
    pub majorant: f64,
}

pub fn bound_value(alpha: &MultiIndex, lambda: f64, m: f64, q: &WeightSpec) -> Result<BoundValue, CombinatoricsError> {
    let n = alpha.order() as u64;
    if n == 0 {
        return Err(CombinatoricsError::ZeroIndex);
    }
    if lambda.is_nan() || lambda <= 1.0 {
        return Err(CombinatoricsError::InvalidLambda(lambda));
    }
    let ln_full = 2.0 * n as f64 * (2.0 * lambda).ln()
        + ln_big(&catalan(n - 1))
        + ln_big(&multinomial(alpha))
        + q.ln_weight_pow(alpha, m);
    let ln_simple = n as f64 * (8.0 * lambda).ln() + q.ln_weight_pow(alpha, m + 1.0);
    let ln_major = n as f64 * (16.0 * lambda * lambda).ln() - 4f64.ln() + q.ln_weight_pow(alpha, m + 1.0);
    let limit = f64::MAX.ln();
    for v in [ln_full, ln_simple, ln_major] {
        if v > limit {
            return Err(CombinatoricsError::Overflow(v));
        }
    }
    Ok(BoundValue {
        full: ln_full.exp(),
        simplified: ln_simple.exp(),
        majorant: ln_major.exp(),
    })
}

/// Natural log of a big integer without overflowing through f64.
pub fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 900;
    let top = (x >> shift).to_f64().expect("900-bit value fits");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn ratio_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiindex::enumerate_truncated;
    use proptest::prelude::*;

    fn unit_leaves(d: usize) -> Leaves {
        (1..=d).map(|k| (k, BigRational::one())).collect()
    }

    fn int(v: i64) -> BigRational {
        BigRational::from_integer(v.into())
    }

    /// Catalan numbers from `C_{n+1} = Σ C_i C_{n−i}`.
    fn catalan_by_convolution(max: usize) -> Vec<BigUint> {
        let mut c = vec![BigUint::one()];
        for n in 0..max {
            let next = (0..=n).map(|i| &c[i] * &c[n - i]).sum();
            c.push(next);
        }
        c
    }

    #[test]
    fn catalan_examples() {
        assert_eq!(catalan(0), BigUint::one());
        assert_eq!(catalan(3), BigUint::from(5u32));
        let conv = catalan_by_convolution(20);
        assert_eq!(conv[20], BigUint::from(6_564_120_420u64));
        assert_eq!(catalan(20), conv[20]);
    }

    #[test]
    fn catalan_convolution_and_four_power() {
        let conv = catalan_by_convolution(64);
        for n in 0..=64u64 {
            assert_eq!(catalan(n), conv[n as usize]);
            assert!(catalan(n) <= BigUint::from(4u32).pow(n as u32));
        }
    }

    #[test]
    fn multinomial_examples() {
        assert_eq!(multinomial(&MultiIndex::from_dense(&[2, 1])), BigUint::from(3u32));
        assert_eq!(multinomial(&MultiIndex::zero()), BigUint::one());
        assert_eq!(
            multinomial(&MultiIndex::from_dense(&[1, 1, 1, 1])),
            BigUint::from(24u32)
        );
    }

    #[test]
    fn recursion_examples() {
        let leaves = unit_leaves(2);
        let a11 = MultiIndex::from_dense(&[1, 1]);
        let a20 = MultiIndex::from_dense(&[2, 0]);
        let a30 = MultiIndex::from_dense(&[3, 0]);
        assert_eq!(a_recursive(&a11, &leaves).unwrap(), int(2));
        assert_eq!(a_recursive(&a20, &leaves).unwrap(), int(1));
        assert_eq!(a_recursive(&a30, &leaves).unwrap(), int(2));
        assert_eq!(a_closed(&a11, &leaves).unwrap(), int(2));
        assert_eq!(a_closed(&a20, &leaves).unwrap(), int(1));
        let v = BigRational::new(7.into(), 3.into());
        let mut l = Leaves::new();
        l.insert(4, v.clone());
        assert_eq!(a_closed(&MultiIndex::unit(4), &l).unwrap(), v);
        assert_eq!(a_recursive(&MultiIndex::unit(4), &l).unwrap(), v);
    }

    #[test]
    fn missing_leaf_is_reported() {
        let leaves = unit_leaves(1);
        let a = MultiIndex::from_dense(&[1, 1]);
        assert_eq!(a_recursive(&a, &leaves), Err(CombinatoricsError::MissingLeaf(2)));
        assert_eq!(a_closed(&a, &leaves), Err(CombinatoricsError::MissingLeaf(2)));
        assert_eq!(
            a_recursive(&MultiIndex::zero(), &leaves),
            Err(CombinatoricsError::ZeroIndex)
        );
    }

    #[test]
    fn proposition_single_variable_limits() {
        let q = WeightSpec::default();
        let s = proposition_sums(&q, 1, 60).unwrap();
        assert!((s.exp_sum - 0.5f64.exp()).abs() < 1e-12);
        assert!((s.geom_sum - 2.0).abs() < 1e-12);
        assert!((s.rhs_prod - 2.0).abs() < 1e-15);
        let s6 = proposition_sums(&q, 6, 20).unwrap();
        assert!((s6.exp_sum - s6.rhs_exp).abs() < 1e-8);
    }

    #[test]
    fn proposition_sums_increase_towards_rhs() {
        let q = WeightSpec::default();
        let mut prev = proposition_sums(&q, 2, 0).unwrap();
        for n in 1..12 {
            let s = proposition_sums(&q, 2, n).unwrap();
            assert!(s.exp_sum >= prev.exp_sum && s.geom_sum >= prev.geom_sum);
            assert!(s.exp_sum <= s.rhs_exp + 1e-14 && s.geom_sum <= s.rhs_prod + 1e-14);
            prev = s;
        }
        let d3 = proposition_sums(&q, 3, 11).unwrap();
        assert!(d3.exp_sum >= prev.exp_sum && d3.rhs_exp >= prev.rhs_exp);
    }

    #[test]
    fn proposition_rejects_non_summable() {
        let q = WeightSpec::Geometric { base: 1.01 };
        assert!(matches!(
            proposition_sums(&q, 2, 3),
            Err(CombinatoricsError::RejectedWeights(_))
        ));
    }

    #[test]
    fn bound_examples() {
        let q = WeightSpec::default();
        let b = bound_value(&MultiIndex::unit(1), 2.0, 1.0, &q).unwrap();
        assert!((b.full - 32.0).abs() < 1e-10);
        let b = bound_value(&MultiIndex::from_dense(&[1, 1]), 2.0, 1.0, &q).unwrap();
        assert!((b.full - 8192.0).abs() < 1e-8);
        assert!(bound_value(&MultiIndex::unit(1), 1.0, 1.0, &q).is_err());
    }

    #[test]
    fn majorant_dominates() {
        let q = WeightSpec::default();
        for alpha in enumerate_truncated(4, 8).into_iter().skip(1) {
            for &lambda in &[1.5, 2.0, 10.0] {
                let b = bound_value(&alpha, lambda, 1.0, &q).unwrap();
                assert!(b.majorant >= b.full * (1.0 - 1e-12), "{alpha:?}");
            }
        }
    }

    #[test]
    fn eight_lambda_form_fails_for_large_lambda() {
        let q = WeightSpec::default();
        let b = bound_value(&MultiIndex::unit(1), 10.0, 1.0, &q).unwrap();
        assert!((b.full - 800.0).abs() < 1e-9);
        assert!((b.simplified - 320.0).abs() < 1e-9);
        let b = bound_value(&MultiIndex::unit(1), 1.5, 1.0, &q).unwrap();
        assert!(b.simplified >= b.full);
    }

    #[test]
    fn ln_big_matches_small_values() {
        let x = BigUint::from(123_456_789u64);
        assert!((ln_big(&x) - 123_456_789f64.ln()).abs() < 1e-12);
        let huge = BigUint::from(3u32).pow(2000);
        assert!((ln_big(&huge) - 2000.0 * 3f64.ln()).abs() < 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn closed_form_matches_recursion(
            dense in proptest::collection::vec(0u32..4, 1..5),
            nums in proptest::collection::vec(1i64..20, 4),
            dens in proptest::collection::vec(1i64..9, 4),
        ) {
            let alpha = MultiIndex::from_dense(&dense);
            prop_assume!(alpha.order() >= 1 && alpha.order() <= 8);
            let leaves: Leaves = (1..=4)
                .map(|k| (k, BigRational::new(nums[k - 1].into(), dens[k - 1].into())))
                .collect();
            prop_assert_eq!(a_recursive(&alpha, &leaves).unwrap(), a_closed(&alpha, &leaves).unwrap());
        }
    }
}
