//! Noise coefficient families built from an orthonormal basis of
//! `L²((0,T) × G)`, and the boundedness check on them.
//!
//! Basis elements are products `h_k(t,x) = m_{k₁}(t) w_{k₂}(x)`, where `m_l`
//! are normalized sines and cosines in time and `w_l` are normalized sines
//! and cosines on the circle or Hermite functions on the line. The pairs
//! `(k₁,k₂)` are enumerated along anti-diagonals: `(1,1), (1,2), (2,1), (1,3), ...`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::config::{ConfigError, SeparableSpec};
use crate::multiindex::WeightSpec;
use crate::pde::{Domain, Field1D, Grid1D};

fn default_amplitude() -> f64 {
    0.25
}

fn default_r() -> f64 {
    1.0
}

fn default_bound_weights() -> WeightSpec {
    WeightSpec::Polynomial { c: 2.0, gamma: 1.0 }
}

/// Optional extra coefficients attached to `ξ_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseExtra {
    pub k: usize,
    /// Multiplies `u` (the `c_k` coefficient).
    #[serde(default)]
    pub c: Option<SeparableSpec>,
    /// Additive source (the `g_k` coefficient).
    #[serde(default)]
    pub g: Option<SeparableSpec>,
}

/// Random-viscosity noise `μ₀ + ε Ẇ` with optional extra terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub mu0: f64,
    /// Noise intensity `ε` multiplying every `h_k`.
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    /// Growth exponent in the boundedness check.
    #[serde(default = "default_r")]
    pub r: f64,
    /// Weights `q_l` used only for the boundedness check (default `2l`).
    #[serde(default = "default_bound_weights")]
    pub bound_weights: WeightSpec,
    #[serde(default)]
    pub extras: Vec<NoiseExtra>,
}

impl NoiseSpec {
    pub fn new(mu0: f64, amplitude: f64) -> Self {
        Self {
            mu0,
            amplitude,
            r: default_r(),
            bound_weights: default_bound_weights(),
            extras: Vec::new(),
        }
    }

    pub fn validate(&self, grid: Grid1D, d: usize) -> Result<(), ConfigError> {
        if !self.mu0.is_finite() {
            return Err(ConfigError::invalid("noise.mu0", "must be finite"));
        }
        if !self.amplitude.is_finite() {
            return Err(ConfigError::invalid("noise.amplitude", "must be finite"));
        }
        if !(self.r.is_finite() && self.r > 0.0) {
            return Err(ConfigError::invalid("noise.r", "must be positive"));
        }
        self.bound_weights
            .validate()
            .map_err(|e| ConfigError::invalid("noise.bound_weights", e.to_string()))?;
        for (i, e) in self.extras.iter().enumerate() {
            if e.k == 0 || e.k > d {
                return Err(ConfigError::invalid(
                    format!("noise.extras[{i}].k"),
                    format!("must lie in 1..={d}"),
                ));
            }
            if self.extras[..i].iter().any(|o| o.k == e.k) {
                return Err(ConfigError::invalid(format!("noise.extras[{i}].k"), "given twice"));
            }
            if grid.is_circle() {
                for (name, s) in [("c", &e.c), ("g", &e.g)] {
                    if let Some(s) = s {
                        crate::config::check_circle_field(&s.space, &format!("noise.extras[{i}].{name}.space"))?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// `(k₁, k₂)` of the `k`-th basis element (1-based) in anti-diagonal order.
pub fn diagonal_pair(k: usize) -> (usize, usize) {
    assert!(k >= 1);
    let mut s = 2;
    let mut start = 1;
    loop {
        let len = s - 1;
        if k < start + len {
            let k1 = k - start + 1;
            return (k1, s - k1);
        }
        start += len;
        s += 1;
    }
}

/// Normalized sine/cosine `m_l` on an interval of length `p` and its derivative.
/// Odd `l` are sines, even `l` cosines, both with frequency `⌈l/2⌉`.
pub fn trig_mode(l: usize, x: f64, p: f64) -> (f64, f64) {
    assert!(l >= 1);
    let j = l.div_ceil(2) as f64;
    let w = 2.0 * PI * j / p;
    let c = (2.0 / p).sqrt();
    if l % 2 == 1 {
        (c * (w * x).sin(), c * w * (w * x).cos())
    } else {
        (c * (w * x).cos(), -c * w * (w * x).sin())
    }
}

/// Hermite function `w_l = ψ_{l−1}` (orthonormal in `L²(ℝ)`) and its derivative.
pub fn hermite_function(l: usize, x: f64) -> (f64, f64) {
    assert!(l >= 1);
    let n = l - 1;
    // ψ_0..ψ_{n+1}
    let mut psi = Vec::with_capacity(n + 2);
    psi.push(PI.powf(-0.25) * (-0.5 * x * x).exp());
    psi.push(2f64.sqrt() * x * psi[0]);
    for m in 1..=n {
        let next = (2.0 / (m + 1) as f64).sqrt() * x * psi[m] - (m as f64 / (m + 1) as f64).sqrt() * psi[m - 1];
        psi.push(next);
    }
    let value = psi[n];
    let lower = if n == 0 {
        0.0
    } else {
        (n as f64 / 2.0).sqrt() * psi[n - 1]
    };
    let deriv = lower - ((n + 1) as f64 / 2.0).sqrt() * psi[n + 1];
    (value, deriv)
}

/// Spatial factor `w_l` on the given domain.
pub fn space_mode(domain: Domain, l: usize, x: f64) -> (f64, f64) {
    match domain {
        Domain::Circle => trig_mode(l, x, PI),
        Domain::Line { .. } => hermite_function(l, x),
    }
}

/// One basis element `h_k = m_{k₁}(t) w_{k₂}(x)` with its spatial samples.
#[derive(Debug, Clone)]
pub struct BasisElement {
    pub k: usize,
    pub pair: (usize, usize),
    pub space: Field1D,
    pub space_dx: Field1D,
}

/// The first `count` basis elements sampled on `grid`, for time horizon `t_final`.
#[derive(Debug, Clone)]
pub struct NoiseBasis {
    pub t_final: f64,
    pub elements: Vec<BasisElement>,
}

impl NoiseBasis {
    pub fn build(grid: Grid1D, t_final: f64, count: usize) -> Self {
        let elements = (1..=count)
            .map(|k| {
                let pair = diagonal_pair(k);
                let samples: Vec<(f64, f64)> = grid
                    .points()
                    .iter()
                    .map(|&x| space_mode(grid.domain(), pair.1, x))
                    .collect();
                BasisElement {
                    k,
                    pair,
                    space: Field1D::new(grid, samples.iter().map(|s| s.0).collect()).expect("grid length"),
                    space_dx: Field1D::new(grid, samples.iter().map(|s| s.1).collect()).expect("grid length"),
                }
            })
            .collect();
        Self { t_final, elements }
    }

    /// `m_{k₁}(t)`.
    pub fn time_factor(&self, k: usize, t: f64) -> f64 {
        trig_mode(self.elements[k - 1].pair.0, t, self.t_final).0
    }

    pub fn h(&self, k: usize, t: f64) -> Field1D {
        self.elements[k - 1].space.scaled(self.time_factor(k, t))
    }

    pub fn h_dx(&self, k: usize, t: f64) -> Field1D {
        self.elements[k - 1].space_dx.scaled(self.time_factor(k, t))
    }
}

/// The coefficient family `a_k = μ₀ + ε h_k`, `b_k = ε ∂_x h_k`, and optional `c_k`, `g_k`.
#[derive(Debug, Clone)]
pub struct NoiseCoefficients {
    pub mu0: f64,
    pub amplitude: f64,
    pub basis: NoiseBasis,
    extras: Vec<Option<NoiseExtra>>,
    grid: Grid1D,
}

impl NoiseCoefficients {
    pub fn assemble(spec: &NoiseSpec, grid: Grid1D, t_final: f64, count: usize) -> Self {
        let mut extras = vec![None; count];
        for e in &spec.extras {
            if e.k >= 1 && e.k <= count {
                extras[e.k - 1] = Some(e.clone());
            }
        }
        Self {
            mu0: spec.mu0,
            amplitude: spec.amplitude,
            basis: NoiseBasis::build(grid, t_final, count),
            extras,
            grid,
        }
    }

    pub fn count(&self) -> usize {
        self.basis.elements.len()
    }

    pub fn grid(&self) -> Grid1D {
        self.grid
    }

    pub fn a(&self, k: usize, t: f64) -> Field1D {
        let mut out = self.basis.h(k, t).scaled(self.amplitude);
        for v in out.values_mut() {
            *v += self.mu0;
        }
        out
    }

    pub fn b(&self, k: usize, t: f64) -> Field1D {
        self.basis.h_dx(k, t).scaled(self.amplitude)
    }

    pub fn c(&self, k: usize, t: f64) -> Option<Field1D> {
        self.extra(k)?.c.as_ref().map(|s| s.sample(self.grid, t))
    }

    pub fn g(&self, k: usize, t: f64) -> Option<Field1D> {
        self.extra(k)?.g.as_ref().map(|s| s.sample(self.grid, t))
    }

    fn extra(&self, k: usize) -> Option<&NoiseExtra> {
        self.extras.get(k - 1)?.as_ref()
    }

    /// Scale every `h_k` (used to construct counterexamples to the bound).
    pub fn with_basis_scaled(mut self, factor: impl Fn(usize) -> f64) -> Self {
        for e in &mut self.basis.elements {
            let s = factor(e.k);
            e.space = e.space.scaled(s);
            e.space_dx = e.space_dx.scaled(s);
        }
        self
    }
}

/// Per-index margin of the boundedness check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bound0Row {
    pub k: usize,
    pub k1: usize,
    pub k2: usize,
    /// `sup|a_k| + sup|b_k| + sup|c_k| + ‖g_k‖_{L²((0,T)×G)}`.
    pub lhs: f64,
    /// `q_k^r`.
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bound0Report {
    pub rows: Vec<Bound0Row>,
    pub pass: bool,
}

impl Bound0Report {
    pub fn violations(&self) -> impl Iterator<Item = &Bound0Row> {
        self.rows.iter().filter(|r| r.ratio > 1.0)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,k1,k2,lhs,rhs,ratio,pass\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{:.16e},{:.16e},{:.16e},{}\n",
                r.k,
                r.k1,
                r.k2,
                r.lhs,
                r.rhs,
                r.ratio,
                r.ratio <= 1.0
            ));
        }
        s
    }
}

/// Number of time samples used for the sup over `(0,T)`.
const TIME_SAMPLES: usize = 4097;

fn time_grid(t_final: f64) -> impl Iterator<Item = f64> {
    (0..TIME_SAMPLES).map(move |i| t_final * i as f64 / (TIME_SAMPLES - 1) as f64)
}

fn sup_separable(time: &[f64], space: &Field1D, shift: f64) -> f64 {
    // sup over (t,x) of |shift + m(t) w(x)|; extremes of a product sit at extremes of the factors
    let (tmin, tmax) = time
        .iter()
        .fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
    let (xmin, xmax) = space
        .values()
        .iter()
        .fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
    [tmin * xmin, tmin * xmax, tmax * xmin, tmax * xmax]
        .iter()
        .map(|p| (shift + p).abs())
        .fold(0.0, f64::max)
}

/// Checks `sup|a_k| + sup|b_k| + sup|c_k| + ‖g_k‖ ≤ q_k^r` on the discrete grid.
pub fn verify_bound0(coeffs: &NoiseCoefficients, q: &WeightSpec, r: f64) -> Bound0Report {
    let t_final = coeffs.basis.t_final;
    let times: Vec<f64> = time_grid(t_final).collect();
    let grid = coeffs.grid;
    let rows: Vec<Bound0Row> = coeffs
        .basis
        .elements
        .iter()
        .map(|e| {
            let m: Vec<f64> = times.iter().map(|&t| coeffs.basis.time_factor(e.k, t)).collect();
            let eps = coeffs.amplitude;
            let sup_a = sup_separable(&m, &e.space.scaled(eps), coeffs.mu0);
            let sup_b = sup_separable(&m, &e.space_dx.scaled(eps), 0.0);
            let mut lhs = sup_a + sup_b;
            if let Some(extra) = coeffs.extra(e.k) {
                if let Some(c) = &extra.c {
                    let tv: Vec<f64> = times.iter().map(|&t| c.time.value(t)).collect();
                    lhs += sup_separable(&tv, &c.space.sample(grid), 0.0);
                }
                if let Some(g) = &extra.g {
                    let dt = t_final / (TIME_SAMPLES - 1) as f64;
                    let time_l2: f64 = times
                        .iter()
                        .enumerate()
                        .map(|(i, &t)| {
                            let w = if i == 0 || i + 1 == TIME_SAMPLES { 0.5 * dt } else { dt };
                            w * g.time.value(t).powi(2)
                        })
                        .sum();
                    lhs += time_l2.sqrt() * g.space.sample(grid).l2_norm();
                }
            }
            let rhs = q.q(e.k).powf(r);
            Bound0Row {
                k: e.k,
                k1: e.pair.0,
                k2: e.pair.1,
                lhs,
                rhs,
                ratio: lhs / rhs,
            }
        })
        .collect();
    let pass = rows.iter().all(|r| r.ratio <= 1.0);
    Bound0Report { rows, pass }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::FieldSpec;
    use crate::pde::deriv;

    fn circle() -> Grid1D {
        Grid1D::circle(64).unwrap()
    }

    /// `∫∫ f g` over `(0,T) × G` with trapezoid in time.
    fn inner(basis: &NoiseBasis, j: usize, k: usize) -> f64 {
        let nt = 2001;
        let dt = basis.t_final / (nt - 1) as f64;
        (0..nt)
            .map(|i| {
                let t = i as f64 * dt;
                let w = if i == 0 || i + 1 == nt { 0.5 * dt } else { dt };
                w * basis.h(j, t).pointwise_mul(&basis.h(k, t)).unwrap().integral()
            })
            .sum()
    }

    #[test]
    fn pairing_order() {
        let pairs: Vec<_> = (1..=6).map(diagonal_pair).collect();
        assert_eq!(pairs, vec![(1, 1), (1, 2), (2, 1), (1, 3), (2, 2), (3, 1)]);
        assert_eq!(diagonal_pair(7), (1, 4));
    }

    #[test]
    fn first_circle_element() {
        let b = NoiseBasis::build(circle(), 1.0, 1);
        let x = 0.3;
        let t = 0.2;
        let i = (0..64).find(|&i| (circle().x(i) - x).abs() < 0.03).unwrap();
        let xi = circle().x(i);
        let expected = (2.0f64).sqrt() * (2.0 * PI * t).sin() * (2.0 / PI).sqrt() * (2.0 * xi).sin();
        assert!((b.h(1, t).values()[i] - expected).abs() < 1e-14);
        assert!((inner(&b, 1, 1) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn circle_basis_is_orthonormal() {
        let b = NoiseBasis::build(circle(), 1.0, 8);
        for j in 1..=8 {
            for k in j..=8 {
                let expected = if j == k { 1.0 } else { 0.0 };
                assert!((inner(&b, j, k) - expected).abs() < 1e-8, "{j} {k}");
            }
        }
    }

    #[test]
    fn line_basis_is_orthonormal() {
        let g = Grid1D::line(2049, 10.0).unwrap();
        let b = NoiseBasis::build(g, 0.5, 8);
        for j in 1..=8 {
            for k in j..=8 {
                let expected = if j == k { 1.0 } else { 0.0 };
                assert!((inner(&b, j, k) - expected).abs() < 1e-8, "{j} {k}");
            }
        }
    }

    #[test]
    fn hermite_functions_closed_forms() {
        let x: f64 = 0.7;
        let g0 = PI.powf(-0.25) * (-x * x / 2.0).exp();
        assert!((hermite_function(1, x).0 - g0).abs() < 1e-15);
        assert!((hermite_function(2, x).0 - 2f64.sqrt() * x * g0).abs() < 1e-15);
        assert!((hermite_function(3, x).0 - (2.0 * x * x - 1.0) / 2f64.sqrt() * g0).abs() < 1e-14);
        let h = 1e-6;
        for l in 1..8 {
            let fd = (hermite_function(l, x + h).0 - hermite_function(l, x - h).0) / (2.0 * h);
            assert!((fd - hermite_function(l, x).1).abs() < 1e-8);
        }
    }

    #[test]
    fn hermite_sup_envelope_decreases() {
        let sup = |l: usize| {
            (0..8001)
                .map(|i| hermite_function(l, -20.0 + i as f64 * 0.005).0.abs())
                .fold(0.0, f64::max)
        };
        let sups: Vec<f64> = (1..=60).map(sup).collect();
        // running maximum from the right is non-increasing and tracks l^{-1/12}
        let mut envelope = sups.clone();
        for i in (0..envelope.len() - 1).rev() {
            envelope[i] = envelope[i].max(envelope[i + 1]);
        }
        assert!(envelope.windows(2).all(|w| w[0] >= w[1]));
        assert!(envelope[59] < envelope[0]);
        let scaled: Vec<f64> = sups
            .iter()
            .enumerate()
            .map(|(i, s)| s * ((i + 1) as f64).powf(1.0 / 12.0))
            .collect();
        let (lo, hi) = scaled
            .iter()
            .fold((f64::MAX, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
        assert!(hi / lo < 1.5, "{lo} {hi}");
    }

    #[test]
    fn coefficient_formulas() {
        let spec = NoiseSpec::new(1.0, 1.0);
        let c = NoiseCoefficients::assemble(&spec, circle(), 1.0, 4);
        let t = 0.37;
        let a = c.a(1, t);
        let h = c.basis.h(1, t);
        for (av, hv) in a.values().iter().zip(h.values()) {
            assert!((av - (1.0 + hv)).abs() < 1e-15);
        }
        assert!(c.c(1, t).is_none() && c.g(3, t).is_none());
        let b = c.b(1, t);
        let spectral = deriv(&h, 1);
        assert!(b.max_abs_diff(&spectral) < 1e-10);
        let m1 = 2f64.sqrt() * (2.0 * PI * t).sin();
        let expected = Field1D::from_fn(circle(), |x| (2.0 / PI).sqrt() * m1 * 2.0 * (2.0 * x).cos());
        assert!(b.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn default_noise_passes_bound_for_32_indices() {
        let spec: NoiseSpec = serde_json::from_str(r#"{"mu0": 1.0}"#).unwrap();
        let c = NoiseCoefficients::assemble(&spec, circle(), 1.0, 32);
        let report = verify_bound0(&c, &spec.bound_weights, spec.r);
        assert!(report.pass, "{:?}", report.violations().collect::<Vec<_>>());
    }

    #[test]
    fn unit_intensity_fails_for_first_indices() {
        // sup|a_1| + sup|b_1| = 1 + 3·2/√π ≈ 4.385 > q_1 = 2
        let spec = NoiseSpec::new(1.0, 1.0);
        let c = NoiseCoefficients::assemble(&spec, circle(), 1.0, 8);
        let report = verify_bound0(&c, &spec.bound_weights, 1.0);
        let bad: Vec<usize> = report.violations().map(|r| r.k).collect();
        assert_eq!(bad, vec![1, 2]);
        assert!((report.rows[0].lhs - (1.0 + 6.0 / PI.sqrt())).abs() < 1e-3);
    }

    #[test]
    fn pure_viscosity_passes_when_weights_dominate() {
        let spec = NoiseSpec::new(1.5, 0.0);
        let c = NoiseCoefficients::assemble(&spec, circle(), 1.0, 6);
        let report = verify_bound0(&c, &WeightSpec::Polynomial { c: 2.0, gamma: 1.0 }, 1.0);
        assert!(report.pass);
        assert!(report.rows.iter().all(|r| (r.lhs - 1.5).abs() < 1e-15));
    }

    #[test]
    fn scaled_basis_is_caught() {
        let spec = NoiseSpec::new(1.0, 0.25);
        let q = WeightSpec::Polynomial { c: 2.0, gamma: 1.0 };
        let c = NoiseCoefficients::assemble(&spec, circle(), 1.0, 6).with_basis_scaled(|k| q.q(k).powi(2));
        let report = verify_bound0(&c, &q, 1.0);
        assert!(!report.pass);
        assert!(report.violations().any(|r| r.k == 6));
    }

    #[test]
    fn bound_is_monotone_in_r() {
        let spec = NoiseSpec::new(1.0, 0.25);
        let q = WeightSpec::Polynomial { c: 2.0, gamma: 1.0 };
        let c = NoiseCoefficients::assemble(&spec, circle(), 1.0, 10);
        for r in [0.8, 1.0, 1.5] {
            if verify_bound0(&c, &q, r).pass {
                assert!(verify_bound0(&c, &q, r + 0.5).pass);
            }
        }
    }

    #[test]
    fn extras_enter_the_bound() {
        let mut spec = NoiseSpec::new(1.0, 0.0);
        spec.extras.push(NoiseExtra {
            k: 2,
            c: Some(SeparableSpec {
                space: FieldSpec::Constant { value: 0.5 },
                time: Default::default(),
            }),
            g: Some(SeparableSpec {
                space: FieldSpec::Constant { value: 1.0 },
                time: Default::default(),
            }),
        });
        let c = NoiseCoefficients::assemble(&spec, circle(), 1.0, 3);
        let report = verify_bound0(&c, &WeightSpec::Polynomial { c: 2.0, gamma: 1.0 }, 1.0);
        // 1 + 0.5 + ‖1‖_{L²((0,1)×(0,π))} = 1.5 + √π
        assert!((report.rows[1].lhs - (1.5 + PI.sqrt())).abs() < 1e-12);
        assert!(c.g(2, 0.3).is_some());
    }

    #[test]
    fn projection_reconstructs_basis_combination() {
        let b = NoiseBasis::build(circle(), 1.0, 64);
        let target_coef = |k: usize| match k {
            1 => 1.0,
            5 => 0.5,
            20 => -0.25,
            _ => 0.0,
        };
        let nt = 1001;
        let dt = 1.0 / (nt - 1) as f64;
        let g = |t: f64| {
            let mut f = Field1D::zeros(circle());
            for k in [1, 5, 20] {
                f.axpy(target_coef(k), &b.h(k, t)).unwrap();
            }
            f
        };
        let coef: Vec<f64> = (1..=64)
            .map(|k| {
                (0..nt)
                    .map(|i| {
                        let t = i as f64 * dt;
                        let w = if i == 0 || i + 1 == nt { 0.5 * dt } else { dt };
                        w * g(t).pointwise_mul(&b.h(k, t)).unwrap().integral()
                    })
                    .sum()
            })
            .collect();
        let t = 0.41;
        let mut rebuilt = Field1D::zeros(circle());
        for (k, c) in coef.iter().enumerate() {
            rebuilt.axpy(*c, &b.h(k + 1, t)).unwrap();
        }
        assert!(rebuilt.max_abs_diff(&g(t)) < 1e-3);
    }
}
