//! Energy norms `L_α` and the bounds they are checked against.

use num_rational::BigRational;

use super::PropagatorSolution;
use crate::combinatorics::{ratio_to_f64, CatalanRecursion, CombinatoricsError, Leaves};
use crate::multiindex::{MultiIndex, WeightSpec};

/// `L_α = (∫‖u_α‖²_{H²} dt + sup_t ‖u_α‖²_{H¹})^{1/2}` in canonical order.
pub fn level_norms(sol: &PropagatorSolution) -> Vec<(MultiIndex, f64)> {
    sol.indices
        .iter()
        .zip(&sol.trajectories)
        .map(|(a, t)| (a.clone(), t.energy.l_squared().sqrt()))
        .collect()
}

fn weighted_term(alpha: &MultiIndex, l: f64, ell: f64, q: &WeightSpec) -> f64 {
    if l == 0.0 {
        return 0.0;
    }
    (2.0 * l.ln() - alpha.ln_factorial() - q.ln_weight_pow(alpha, ell)).exp()
}

/// `Σ_α (α!)^{-1} 𝔮^{-ℓα} L_α²`.
pub fn weighted_solution_norm(norms: &[(MultiIndex, f64)], ell: f64, q: &WeightSpec) -> f64 {
    norms.iter().map(|(a, l)| weighted_term(a, *l, ell, q)).sum()
}

/// Contribution of each order `n = 0..=N` to [`weighted_solution_norm`].
pub fn level_increments(norms: &[(MultiIndex, f64)], ell: f64, q: &WeightSpec) -> Vec<f64> {
    let top = norms.iter().map(|(a, _)| a.order()).max().unwrap_or(0) as usize;
    let mut out = vec![0.0; top + 1];
    for (a, l) in norms {
        out[a.order() as usize] += weighted_term(a, *l, ell, q);
    }
    out
}

/// Smallest integer `ℓ ≤ max_ell` whose level increments from order 1 on are
/// non-increasing.
pub fn empirical_ell(norms: &[(MultiIndex, f64)], q: &WeightSpec, max_ell: u32) -> Option<u32> {
    (0..=max_ell).find(|&ell| {
        let inc = level_increments(norms, ell as f64, q);
        inc.iter().skip(1).zip(inc.iter().skip(2)).all(|(a, b)| b <= a)
    })
}

/// Least-squares fit `log L_α ≈ |α| log C + p Σ_k α_k log q_k` over the
/// non-zero coefficients with `|α| ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormFit {
    pub ln_c: f64,
    pub p: f64,
    /// `log₁₀ L_α − log₁₀(fit)` per fitted index.
    pub residuals: Vec<(MultiIndex, f64)>,
    pub max_abs_residual: f64,
    /// Indices left out because `L_α = 0`.
    pub excluded: Vec<MultiIndex>,
}

impl NormFit {
    pub fn ln_bound(&self, alpha: &MultiIndex, q: &WeightSpec) -> f64 {
        alpha.order() as f64 * self.ln_c + q.ln_weight_pow(alpha, self.p)
    }

    pub fn bound(&self, alpha: &MultiIndex, q: &WeightSpec) -> f64 {
        self.ln_bound(alpha, q).exp()
    }
}

pub fn fit_norm_bound(norms: &[(MultiIndex, f64)], q: &WeightSpec) -> NormFit {
    let mut rows = Vec::new();
    let mut excluded = Vec::new();
    for (a, l) in norms.iter().filter(|(a, _)| !a.is_zero()) {
        if *l > 0.0 && l.is_finite() {
            rows.push((a.clone(), a.order() as f64, q.ln_weight_pow(a, 1.0), l.ln()));
        } else {
            excluded.push(a.clone());
        }
    }
    let (mut s11, mut s12, mut s22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (_, x1, x2, y) in &rows {
        s11 += x1 * x1;
        s12 += x1 * x2;
        s22 += x2 * x2;
        b1 += x1 * y;
        b2 += x2 * y;
    }
    let det = s11 * s22 - s12 * s12;
    let (ln_c, p) = if rows.is_empty() {
        (0.0, 0.0)
    } else if det.abs() <= 1e-12 * s11 * s22 {
        // the two regressors are collinear (one noise variable): fit C alone
        (b1 / s11, 0.0)
    } else {
        ((b1 * s22 - b2 * s12) / det, (s11 * b2 - s12 * b1) / det)
    };
    let residuals: Vec<(MultiIndex, f64)> = rows
        .into_iter()
        .map(|(a, x1, x2, y)| (a, (y - x1 * ln_c - x2 * p) / std::f64::consts::LN_10))
        .collect();
    let max_abs_residual = residuals.iter().map(|(_, r)| r.abs()).fold(0.0, f64::max);
    NormFit {
        ln_c,
        p,
        residuals,
        max_abs_residual,
        excluded,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalanRow {
    pub alpha: MultiIndex,
    /// `L̃_α = 2λ(L_α / 𝔮^{mα} + 1)`.
    pub normalized: f64,
    /// `A_α` from the leaves `A_{ε_k} = L̃_{ε_k}`.
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalanCheck {
    pub lambda: f64,
    pub m: f64,
    pub rows: Vec<CatalanRow>,
    pub pass: bool,
}

/// Compares the normalized norms with the quadratic recursion they satisfy.
/// `λ` is the smallest value `≥ 1` with `L_{ε_k} ≤ λ q_k^m` for every `k`.
pub fn catalan_check(norms: &[(MultiIndex, f64)], q: &WeightSpec, m: f64) -> Result<CatalanCheck, CombinatoricsError> {
    let lambda = norms
        .iter()
        .filter(|(a, _)| a.order() == 1)
        .map(|(a, l)| l / q.ln_weight_pow(a, m).exp())
        .fold(1.0, f64::max);
    let normalized = |a: &MultiIndex, l: f64| 2.0 * lambda * (l * (-q.ln_weight_pow(a, m)).exp() + 1.0);
    let mut leaves = Leaves::new();
    for (a, l) in norms.iter().filter(|(a, _)| a.order() == 1) {
        let v = normalized(a, *l);
        let value = BigRational::from_float(v).ok_or(CombinatoricsError::Overflow(v))?;
        leaves.insert(a.entries()[0].0, value);
    }
    let mut recursion = CatalanRecursion::new(&leaves);
    let mut rows = Vec::new();
    for (a, l) in norms.iter().filter(|(a, _)| a.order() >= 1) {
        let bound = ratio_to_f64(&recursion.value(a)?);
        let value = normalized(a, *l);
        rows.push(CatalanRow {
            alpha: a.clone(),
            normalized: value,
            bound,
            pass: value <= bound * (1.0 + 1e-12),
        });
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(CatalanCheck { lambda, m, rows, pass })
}
