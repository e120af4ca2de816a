//! Source term of the equation for `u_α`:
//! `F_α = −Σ_{0<β<α} u_β D u_{α−β} + Σ_{k: α_k>0} (a_k D²u_{α−ε_k} + b_k D u_{α−ε_k} + c_k u_{α−ε_k})`,
//! plus `g_k` when `α = ε_k`.

use std::collections::HashMap;

use super::{Fault, PropagatorError};
use crate::multiindex::MultiIndex;
use crate::noise::NoiseCoefficients;
use crate::pde::{Field1D, PdeError};

/// Positions of everything `F_α` reads, resolved once per run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreeTermPlan {
    pub alpha: MultiIndex,
    pub position: usize,
    /// `(β, α − β)` for each `0 < β < α`, in canonical order of `β`.
    pub convolution: Vec<(usize, usize)>,
    /// `(k, α − ε_k)` for each `k` with `α_k > 0`, ascending in `k`.
    pub noise: Vec<(usize, usize)>,
    /// `Some(k)` when `α = ε_k`.
    pub unit: Option<usize>,
}

impl FreeTermPlan {
    pub fn build(alpha: &MultiIndex, position: &HashMap<MultiIndex, usize>) -> Result<Self, PropagatorError> {
        let lookup = |needed: &MultiIndex| {
            position
                .get(needed)
                .copied()
                .ok_or_else(|| PropagatorError::MissingDependency {
                    alpha: alpha.clone(),
                    needed: needed.clone(),
                })
        };
        let own = lookup(alpha)?;
        let mut convolution = Vec::new();
        for beta in alpha.strict_interior() {
            let rest = alpha.sub_checked(&beta).expect("β < α");
            convolution.push((lookup(&beta)?, lookup(&rest)?));
        }
        let mut noise = Vec::new();
        for &(k, _) in alpha.entries() {
            let parent = alpha.sub_checked(&MultiIndex::unit(k)).expect("α_k > 0");
            noise.push((k, lookup(&parent)?));
        }
        let unit = match alpha.entries() {
            [(k, 1)] => Some(*k),
            _ => None,
        };
        Ok(Self {
            alpha: alpha.clone(),
            position: own,
            convolution,
            noise,
            unit,
        })
    }
}

/// Every coefficient at one time level with its first two derivatives.
#[derive(Debug, Clone, Copy)]
pub struct Slice<'a> {
    pub u: &'a [Field1D],
    pub du: &'a [Field1D],
    pub d2u: &'a [Field1D],
}

/// Noise coefficients sampled at one time, indexed by `k − 1`.
#[derive(Debug, Clone)]
pub struct NoiseFrame {
    pub a: Vec<Field1D>,
    pub b: Vec<Field1D>,
    pub c: Vec<Option<Field1D>>,
    pub g: Vec<Option<Field1D>>,
}

impl NoiseFrame {
    pub fn sample(coeffs: &NoiseCoefficients, t: f64) -> Self {
        let ks = 1..=coeffs.count();
        Self {
            a: ks.clone().map(|k| coeffs.a(k, t)).collect(),
            b: ks.clone().map(|k| coeffs.b(k, t)).collect(),
            c: ks.clone().map(|k| coeffs.c(k, t)).collect(),
            g: ks.map(|k| coeffs.g(k, t)).collect(),
        }
    }
}

/// `F_α` at the time level held by `slice`. Without a noise frame only the
/// convolution sum remains.
pub fn assemble_free_term(
    plan: &FreeTermPlan,
    slice: &Slice<'_>,
    noise: Option<&NoiseFrame>,
    fault: Option<Fault>,
) -> Result<Field1D, PdeError> {
    let grid = *slice.u[plan.position].grid();
    let sign = match fault {
        Some(Fault::FlipConvolutionSign) => 1.0,
        None => -1.0,
    };
    let mut out = Field1D::zeros(grid);
    for &(beta, rest) in &plan.convolution {
        let term = slice.u[beta].pointwise_mul(&slice.du[rest])?;
        out.axpy(sign, &term)?;
    }
    if let Some(frame) = noise {
        for &(k, parent) in &plan.noise {
            let Some(a) = frame.a.get(k - 1) else { continue };
            out.axpy(1.0, &a.pointwise_mul(&slice.d2u[parent])?)?;
            out.axpy(1.0, &frame.b[k - 1].pointwise_mul(&slice.du[parent])?)?;
            if let Some(c) = &frame.c[k - 1] {
                out.axpy(1.0, &c.pointwise_mul(&slice.u[parent])?)?;
            }
        }
        if let Some(k) = plan.unit {
            if let Some(Some(g)) = frame.g.get(k - 1) {
                out.axpy(1.0, g)?;
            }
        }
    }
    Ok(out)
}
