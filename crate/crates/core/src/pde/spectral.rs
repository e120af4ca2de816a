//! Discrete Fourier machinery shared by both domains.
//!
//! On the circle `[0, π)` the discrete wavenumbers are the even integers
//! `2j`. The same formula `κ_j = 2πj/(n h)` is used on the line, where the
//! samples are treated as one period of their periodic extension.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::{Field1D, Grid1D};

type Plans = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

thread_local! {
    static PLANS: RefCell<HashMap<usize, Plans>> = RefCell::new(HashMap::new());
}

fn plans(n: usize) -> Plans {
    PLANS.with(|cell| {
        cell.borrow_mut()
            .entry(n)
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
            })
            .clone()
    })
}

/// Unnormalized forward DFT `F_j = Σ_i f_i e^{−2πi ij/n}`.
pub fn forward(values: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    plans(values.len()).0.process(&mut buf);
    buf
}

/// Inverse of [`forward`], keeping the real part.
pub fn inverse_real(spectrum: &[Complex64]) -> Vec<f64> {
    let n = spectrum.len();
    let mut buf = spectrum.to_vec();
    plans(n).1.process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.into_iter().map(|c| c.re * scale).collect()
}

/// Signed integer frequency of DFT slot `j`.
pub fn signed_index(j: usize, n: usize) -> f64 {
    if j <= n / 2 {
        j as f64
    } else {
        j as f64 - n as f64
    }
}

/// Angular wavenumbers `κ_j = 2π j' / (n h)` of the DFT slots.
pub fn wavenumbers(grid: &Grid1D) -> Vec<f64> {
    let n = grid.len();
    let scale = 2.0 * std::f64::consts::PI / (n as f64 * grid.spacing());
    (0..n).map(|j| scale * signed_index(j, n)).collect()
}

/// Fourier-multiplier derivative. The Nyquist mode is dropped for odd orders.
pub fn spectral_deriv(values: &[f64], grid: &Grid1D, order: u32) -> Vec<f64> {
    let n = values.len();
    let kappa = wavenumbers(grid);
    let mut spec = forward(values);
    let i_unit = Complex64::new(0.0, 1.0);
    for (j, s) in spec.iter_mut().enumerate() {
        if order % 2 == 1 && n.is_multiple_of(2) && j == n / 2 {
            *s = Complex64::new(0.0, 0.0);
            continue;
        }
        *s *= (i_unit * kappa[j]).powu(order);
    }
    inverse_real(&spec)
}

/// `‖f‖²_γ = (h/n) Σ_j (1 + κ_j²)^γ |F_j|²`.
pub fn sobolev_norm_sq(f: &Field1D, gamma: f64) -> f64 {
    let grid = f.grid();
    let n = grid.len();
    let kappa = wavenumbers(grid);
    let spec = forward(f.values());
    let sum: f64 = spec
        .iter()
        .zip(&kappa)
        .map(|(s, k)| (1.0 + k * k).powf(gamma) * s.norm_sqr())
        .sum();
    sum * grid.spacing() / n as f64
}

pub fn sobolev_norm(f: &Field1D, gamma: f64) -> f64 {
    sobolev_norm_sq(f, gamma).sqrt()
}

/// Exact heat semigroup `e^{tD²}` on the circle.
pub fn heat_evolve(f: &Field1D, t: f64) -> Field1D {
    assert!(f.grid().is_circle(), "exact heat evolution needs a periodic grid");
    let kappa = wavenumbers(f.grid());
    let mut spec = forward(f.values());
    for (s, k) in spec.iter_mut().zip(&kappa) {
        *s *= (-k * k * t).exp();
    }
    Field1D::new(*f.grid(), inverse_real(&spec)).expect("same length")
}

/// Periodic antiderivative of a mean-zero circle field, normalized to vanish at `x = 0`.
pub fn periodic_antiderivative(f: &Field1D) -> Field1D {
    assert!(f.grid().is_circle());
    let n = f.grid().len();
    let kappa = wavenumbers(f.grid());
    let mut spec = forward(f.values());
    spec[0] = Complex64::new(0.0, 0.0);
    for j in 1..n {
        if n.is_multiple_of(2) && j == n / 2 {
            spec[j] = Complex64::new(0.0, 0.0);
        } else {
            spec[j] /= Complex64::new(0.0, kappa[j]);
        }
    }
    let mut v = inverse_real(&spec);
    let v0 = v[0];
    for x in &mut v {
        *x -= v0;
    }
    Field1D::new(*f.grid(), v).expect("same length")
}
