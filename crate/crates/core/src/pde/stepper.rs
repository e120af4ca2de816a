//! Second-order IMEX time stepping for `u_t = u_xx + N(t, x)`.
//!
//! Diffusion is handled implicitly and the explicit part `N` is extrapolated
//! from the last two steps. On the circle the linear part is integrated
//! exactly (exponential Adams–Bashforth, ETD2). On the line a compact
//! fourth-order Crank–Nicolson discretization of `u_xx` with Dirichlet ends
//! is combined with AB2 for `N`.

use num_complex::Complex64;

use super::grid::{Field1D, Grid1D};
use super::{deriv, spectral, PdeError};

enum Scheme {
    Exponential {
        decay: Vec<f64>,
        phi1: Vec<f64>,
        phi2: Vec<f64>,
    },
    CompactCrankNicolson {
        // constant tridiagonal system (off, diag, off) and its Thomas factors
        off: f64,
        diag: f64,
        upper: Vec<f64>,
        denom: Vec<f64>,
    },
}

/// Stateful stepper: remembers the previous explicit term for extrapolation.
pub struct ParabolicStepper {
    grid: Grid1D,
    dt: f64,
    scheme: Scheme,
    prev: Option<Vec<f64>>,
}

fn phi_functions(z: f64) -> (f64, f64) {
    if z.abs() < 1e-2 {
        let phi1 = 1.0 + z / 2.0 + z * z / 6.0 + z.powi(3) / 24.0 + z.powi(4) / 120.0;
        let phi2 = 0.5 + z / 6.0 + z * z / 24.0 + z.powi(3) / 120.0 + z.powi(4) / 720.0;
        (phi1, phi2)
    } else {
        let em1 = z.exp_m1();
        (em1 / z, (em1 - z) / (z * z))
    }
}

impl ParabolicStepper {
    pub fn new(grid: Grid1D, dt: f64) -> Result<Self, PdeError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(PdeError::InvalidTime(format!("dt must be positive, got {dt}")));
        }
        let scheme = if grid.is_circle() {
            let kappa = spectral::wavenumbers(&grid);
            let mut decay = Vec::with_capacity(kappa.len());
            let mut phi1 = Vec::with_capacity(kappa.len());
            let mut phi2 = Vec::with_capacity(kappa.len());
            for k in kappa {
                let z = -k * k * dt;
                let (p1, p2) = phi_functions(z);
                decay.push(z.exp());
                phi1.push(p1);
                phi2.push(p2);
            }
            Scheme::Exponential { decay, phi1, phi2 }
        } else {
            let h = grid.spacing();
            let r = dt / (h * h);
            let off = 1.0 / 12.0 - 0.5 * r;
            let diag = 10.0 / 12.0 + r;
            let m = grid.len() - 2;
            let mut upper = vec![0.0; m];
            let mut denom = vec![0.0; m];
            denom[0] = diag;
            upper[0] = off / diag;
            for i in 1..m {
                denom[i] = diag - off * upper[i - 1];
                upper[i] = off / denom[i];
            }
            Scheme::CompactCrankNicolson {
                off,
                diag,
                upper,
                denom,
            }
        };
        Ok(Self {
            grid,
            dt,
            scheme,
            prev: None,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    /// Forget the stored explicit term so the next step starts at first order.
    pub fn reset(&mut self) {
        self.prev = None;
    }

    /// Advance one step with homogeneous Dirichlet ends on the line.
    pub fn step(&mut self, u: &Field1D, explicit: &Field1D) -> Result<Field1D, PdeError> {
        self.step_with_boundary(u, explicit, (0.0, 0.0))
    }

    /// Advance one step; on the line `boundary` holds the new end values.
    pub fn step_with_boundary(
        &mut self,
        u: &Field1D,
        explicit: &Field1D,
        boundary: (f64, f64),
    ) -> Result<Field1D, PdeError> {
        if *u.grid() != self.grid || *explicit.grid() != self.grid {
            return Err(PdeError::GridMismatch);
        }
        let now = explicit.values();
        let prev = self.prev.as_deref().unwrap_or(now);
        let out = match &self.scheme {
            Scheme::Exponential { decay, phi1, phi2 } => {
                let uh = spectral::forward(u.values());
                let nh = spectral::forward(now);
                let ph = spectral::forward(prev);
                let dt = self.dt;
                let next: Vec<Complex64> = (0..uh.len())
                    .map(|j| uh[j] * decay[j] + (nh[j] * (phi1[j] + phi2[j]) - ph[j] * phi2[j]) * dt)
                    .collect();
                spectral::inverse_real(&next)
            }
            Scheme::CompactCrankNicolson {
                off,
                diag,
                upper,
                denom,
            } => {
                let v = u.values();
                let n = v.len();
                let h = self.grid.spacing();
                let dt = self.dt;
                let inv_h2 = 1.0 / (h * h);
                let ext: Vec<f64> = now.iter().zip(prev).map(|(a, b)| 1.5 * a - 0.5 * b).collect();
                let m = n - 2;
                let mut rhs = vec![0.0; m];
                for i in 1..n - 1 {
                    let mass = (v[i - 1] + 10.0 * v[i] + v[i + 1]) / 12.0;
                    let lap = (v[i - 1] - 2.0 * v[i] + v[i + 1]) * inv_h2;
                    let src = (ext[i - 1] + 10.0 * ext[i] + ext[i + 1]) / 12.0;
                    rhs[i - 1] = mass + 0.5 * dt * lap + dt * src;
                }
                rhs[0] -= off * boundary.0;
                rhs[m - 1] -= off * boundary.1;
                debug_assert!(*diag > 0.0);
                // Thomas forward sweep and back substitution
                let mut y = vec![0.0; m];
                y[0] = rhs[0] / denom[0];
                for i in 1..m {
                    y[i] = (rhs[i] - off * y[i - 1]) / denom[i];
                }
                for i in (0..m - 1).rev() {
                    y[i] -= upper[i] * y[i + 1];
                }
                let mut out = Vec::with_capacity(n);
                out.push(boundary.0);
                out.extend_from_slice(&y);
                out.push(boundary.1);
                out
            }
        };
        self.prev = Some(now.to_vec());
        let field = Field1D::new(self.grid, out)?;
        if !field.is_finite() {
            return Err(PdeError::NonFinite);
        }
        Ok(field)
    }
}

/// `dt ≤ h / max|drift|`.
pub fn check_cfl(drift: &Field1D, dt: f64) -> Result<(), PdeError> {
    let m = drift.max_abs();
    if m > 0.0 {
        let limit = drift.grid().spacing() / m;
        if dt > limit {
            return Err(PdeError::Cfl { dt, limit });
        }
    }
    Ok(())
}

/// Explicit part `−D(drift·u) + forcing` of the transport-diffusion equation.
pub fn transport_term(u: &Field1D, drift: Option<&Field1D>, forcing: Option<&Field1D>) -> Result<Field1D, PdeError> {
    let mut out = match drift {
        Some(b) => deriv(&b.pointwise_mul(u)?, 1).scaled(-1.0),
        None => Field1D::zeros(*u.grid()),
    };
    if let Some(f) = forcing {
        out.axpy(1.0, f)?;
    }
    Ok(out)
}

/// Single step of `u_t = D(Du − drift·u) + forcing` from rest (no history).
pub fn parabolic_step(
    u: &Field1D,
    drift: Option<&Field1D>,
    forcing: Option<&Field1D>,
    dt: f64,
) -> Result<Field1D, PdeError> {
    if let Some(b) = drift {
        check_cfl(b, dt)?;
    }
    let explicit = transport_term(u, drift, forcing)?;
    ParabolicStepper::new(*u.grid(), dt)?.step(u, &explicit)
}

/// `∫_0^T ‖u‖²_{H²} dt` (trapezoid) and `sup_t ‖u‖²_{H¹}` over the sampled steps.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyRecord {
    pub h2_integral: f64,
    pub h1_sup: f64,
}

impl EnergyRecord {
    /// `L² = ∫‖u‖²_{H²} + sup‖u‖²_{H¹}`.
    pub fn l_squared(&self) -> f64 {
        self.h2_integral + self.h1_sup
    }
}

#[derive(Debug, Clone)]
pub struct EnergyAccumulator {
    dt: f64,
    record: EnergyRecord,
    last_h2: Option<f64>,
}

impl EnergyAccumulator {
    pub fn new(dt: f64) -> Self {
        Self {
            dt,
            record: EnergyRecord::default(),
            last_h2: None,
        }
    }

    /// Record the state at the next time level.
    pub fn push(&mut self, u: &Field1D) {
        let h2 = spectral::sobolev_norm_sq(u, 2.0);
        let h1 = spectral::sobolev_norm_sq(u, 1.0);
        if let Some(prev) = self.last_h2 {
            self.record.h2_integral += 0.5 * self.dt * (prev + h2);
        }
        self.last_h2 = Some(h2);
        self.record.h1_sup = self.record.h1_sup.max(h1);
    }

    pub fn record(&self) -> EnergyRecord {
        self.record
    }
}

/// Number of steps of size `dt` covering `[0, T]`; `dt` must divide `T`.
pub fn step_count(t_final: f64, dt: f64) -> Result<usize, PdeError> {
    if !(t_final.is_finite() && t_final > 0.0 && dt.is_finite() && dt > 0.0) {
        return Err(PdeError::InvalidTime(format!(
            "need T > 0 and dt > 0, got T={t_final}, dt={dt}"
        )));
    }
    let steps = (t_final / dt).round();
    if (steps * dt - t_final).abs() > 1e-9 * t_final {
        return Err(PdeError::InvalidTime(format!("dt={dt} does not divide T={t_final}")));
    }
    Ok(steps as usize)
}

/// Snapshots at every `stride`-th step (always including the last) plus the energy record.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<Field1D>,
    pub energy: EnergyRecord,
}

impl Trajectory {
    pub fn last(&self) -> &Field1D {
        self.snapshots
            .last()
            .expect("trajectory has at least the initial state")
    }
}

/// Repeated stepping of `u_t = D(Du − b·u) + f` with `b`, `f` supplied per step index.
pub fn time_integrate<B, F>(
    u0: &Field1D,
    drift: B,
    forcing: F,
    t_final: f64,
    dt: f64,
    stride: usize,
) -> Result<Trajectory, PdeError>
where
    B: Fn(usize) -> Option<Field1D>,
    F: Fn(usize) -> Option<Field1D>,
{
    let steps = step_count(t_final, dt)?;
    let stride = stride.max(1);
    let mut stepper = ParabolicStepper::new(*u0.grid(), dt)?;
    let mut energy = EnergyAccumulator::new(dt);
    let mut u = u0.clone();
    energy.push(&u);
    let mut times = vec![0.0];
    let mut snapshots = vec![u.clone()];
    for n in 0..steps {
        let b = drift(n);
        let f = forcing(n);
        if let Some(b) = &b {
            check_cfl(b, dt)?;
        }
        let explicit = transport_term(&u, b.as_ref(), f.as_ref())?;
        u = stepper.step(&u, &explicit)?;
        energy.push(&u);
        if (n + 1) % stride == 0 || n + 1 == steps {
            times.push((n + 1) as f64 * dt);
            snapshots.push(u.clone());
        }
    }
    Ok(Trajectory {
        times,
        snapshots,
        energy: energy.record(),
    })
}
