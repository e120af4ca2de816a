//! Deterministic viscous Burgers equation `u_t + u u_x = u_xx + F_x`.
//!
//! The direct solver steps the conservative form `u_t = D(Du − u²/2) + F_x`.
//! The Hopf–Cole route solves `V_t = V_xx − ½F V` for
//! `V(0,x) = exp(−½∫_{−∞}^x u_0)` and recovers `u = −2 V_x / V`.

use num_complex::Complex64;
use thiserror::Error;

use crate::config::SeparableSpec;
use crate::pde::{
    check_cfl, deriv, fd, spectral, step_count, EnergyAccumulator, Field1D, Grid1D, ParabolicStepper, PdeError,
    Trajectory,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeanError {
    #[error(transparent)]
    Pde(#[from] PdeError),
    #[error("this solver needs a {0} grid")]
    WrongDomain(&'static str),
    #[error("circle Hopf–Cole data must have zero mean (mean {0:e})")]
    NonZeroMean(f64),
    #[error("Hopf–Cole potential left its bounds: V ∈ [{min:e}, {max:e}], allowed [{lower:e}, {upper:e}]")]
    VBound { min: f64, max: f64, lower: f64, upper: f64 },
    #[error("closed-form denominator vanished ({0:e}); z is outside the safe region")]
    Denominator(f64),
    #[error("t must be positive, got {0}")]
    NonPositiveTime(f64),
}

/// One step of the direct Burgers solve. The propagator uses this same
/// stepper for its zero-index coefficient.
pub struct MeanStepper {
    grid: Grid1D,
    dt: f64,
    stepper: ParabolicStepper,
    potential: Option<SeparableSpec>,
}

impl MeanStepper {
    pub fn new(grid: Grid1D, dt: f64, potential: Option<SeparableSpec>) -> Result<Self, MeanError> {
        if grid.is_circle() && potential.as_ref().is_some_and(|p| !p.space.is_zero()) {
            return Err(MeanError::WrongDomain("line (forcing on the circle must vanish)"));
        }
        Ok(Self {
            grid,
            dt,
            stepper: ParabolicStepper::new(grid, dt)?,
            potential,
        })
    }

    /// Forcing `f = F_x` at step index `n`.
    pub fn forcing(&self, n: usize) -> Option<Field1D> {
        self.potential
            .as_ref()
            .map(|p| p.sample_dx(self.grid, n as f64 * self.dt))
    }

    /// `−D(u²/2) + f`.
    pub fn explicit_term(&self, u: &Field1D, n: usize) -> Result<Field1D, MeanError> {
        let half_sq = u.pointwise_mul(u)?.scaled(0.5);
        let mut out = deriv(&half_sq, 1).scaled(-1.0);
        if let Some(f) = self.forcing(n) {
            out.axpy(1.0, &f)?;
        }
        Ok(out)
    }

    /// Advance from step `n` to `n + 1`.
    pub fn step(&mut self, u: &Field1D, n: usize) -> Result<Field1D, MeanError> {
        check_cfl(u, self.dt)?;
        let explicit = self.explicit_term(u, n)?;
        Ok(self.stepper.step(u, &explicit)?)
    }
}

/// Direct solve on either domain; snapshots every `stride` steps.
pub fn solve_mean(
    u0: &Field1D,
    potential: Option<&SeparableSpec>,
    t_final: f64,
    dt: f64,
    stride: usize,
) -> Result<Trajectory, MeanError> {
    let steps = step_count(t_final, dt)?;
    let stride = stride.max(1);
    let mut stepper = MeanStepper::new(*u0.grid(), dt, potential.cloned())?;
    let mut energy = EnergyAccumulator::new(dt);
    let mut u = u0.clone();
    energy.push(&u);
    let mut times = vec![0.0];
    let mut snapshots = vec![u.clone()];
    for n in 0..steps {
        u = stepper.step(&u, n)?;
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

/// Pseudospectral solve on the circle (no forcing).
pub fn solve_mean_circle(u0: &Field1D, t_final: f64, dt: f64, stride: usize) -> Result<Trajectory, MeanError> {
    if !u0.grid().is_circle() {
        return Err(MeanError::WrongDomain("circle"));
    }
    solve_mean(u0, None, t_final, dt, stride)
}

/// Result of the Hopf–Cole line solve.
#[derive(Debug, Clone)]
pub struct HopfColeSolution {
    pub trajectory: Trajectory,
    pub v_min: f64,
    pub v_max: f64,
    /// Lower and upper a-priori bounds on `V`.
    pub v_bounds: (f64, f64),
}

/// Hopf–Cole solve on the line with potential `F` (forcing `f = F_x`).
pub fn solve_mean_line(
    u0: &Field1D,
    potential: Option<&SeparableSpec>,
    t_final: f64,
    dt: f64,
    stride: usize,
) -> Result<HopfColeSolution, MeanError> {
    let grid = *u0.grid();
    if grid.is_circle() {
        return Err(MeanError::WrongDomain("line"));
    }
    let steps = step_count(t_final, dt)?;
    let stride = stride.max(1);
    let h = grid.spacing();
    let n = grid.len();

    let integral = fd::cumulative_integral(u0.values(), h);
    let v0 = Field1D::new(grid, integral.iter().map(|s| (-0.5 * s).exp()).collect())?;

    let sample_f = |step: usize| potential.map(|p| p.sample(grid, step as f64 * dt));
    let sup_f = (0..=steps)
        .filter_map(|s| sample_f(s).map(|f| f.max_abs()))
        .fold(0.0, f64::max);
    let l1: f64 = u0
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| grid.weight(i) * v.abs())
        .sum();
    let growth = 0.5 * l1 + 0.5 * t_final * sup_f;
    let (lower, upper) = ((-growth).exp(), growth.exp());

    let to_u = |v: &Field1D| -> Result<Field1D, MeanError> {
        let dv = deriv(v, 1);
        Ok(Field1D::new(
            grid,
            dv.values().iter().zip(v.values()).map(|(d, v)| -2.0 * d / v).collect(),
        )?)
    };

    let mut stepper = ParabolicStepper::new(grid, dt)?;
    let mut energy = EnergyAccumulator::new(dt);
    let mut v = v0;
    let mut u = to_u(&v)?;
    energy.push(&u);
    let mut times = vec![0.0];
    let mut snapshots = vec![u.clone()];
    let (mut v_min, mut v_max) = extremes(&v);
    for s in 0..steps {
        let f_now = sample_f(s);
        let explicit = match &f_now {
            Some(f) => f.pointwise_mul(&v)?.scaled(-0.5),
            None => Field1D::zeros(grid),
        };
        // the far-field values obey V' = −½F V
        let boundary = match (&f_now, sample_f(s + 1)) {
            (Some(a), Some(b)) => {
                let fl = 0.5 * (a.values()[0] + b.values()[0]);
                let fr = 0.5 * (a.values()[n - 1] + b.values()[n - 1]);
                (
                    v.values()[0] * (-0.5 * fl * dt).exp(),
                    v.values()[n - 1] * (-0.5 * fr * dt).exp(),
                )
            }
            _ => (v.values()[0], v.values()[n - 1]),
        };
        v = stepper.step_with_boundary(&v, &explicit, boundary)?;
        let (lo, hi) = extremes(&v);
        v_min = v_min.min(lo);
        v_max = v_max.max(hi);
        u = to_u(&v)?;
        energy.push(&u);
        if (s + 1) % stride == 0 || s + 1 == steps {
            times.push((s + 1) as f64 * dt);
            snapshots.push(u.clone());
        }
    }
    let slack = 1e-10;
    if v_min < lower * (1.0 - slack) || v_max > upper * (1.0 + slack) {
        return Err(MeanError::VBound {
            min: v_min,
            max: v_max,
            lower,
            upper,
        });
    }
    Ok(HopfColeSolution {
        trajectory: Trajectory {
            times,
            snapshots,
            energy: energy.record(),
        },
        v_min,
        v_max,
        v_bounds: (lower, upper),
    })
}

fn extremes(f: &Field1D) -> (f64, f64) {
    f.values()
        .iter()
        .fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)))
}

/// Exact Hopf–Cole solution on the circle at time `t` for mean-zero data,
/// using the exact heat semigroup in Fourier space.
pub fn hopf_cole_circle(u0: &Field1D, t: f64) -> Result<Field1D, MeanError> {
    let grid = *u0.grid();
    if !grid.is_circle() {
        return Err(MeanError::WrongDomain("circle"));
    }
    let mean = u0.integral() / grid.length();
    if mean.abs() > 1e-12 * u0.max_abs().max(1.0) {
        return Err(MeanError::NonZeroMean(mean));
    }
    let antiderivative = spectral::periodic_antiderivative(u0);
    let v0 = Field1D::new(grid, antiderivative.values().iter().map(|s| (-0.5 * s).exp()).collect())?;
    let v = spectral::heat_evolve(&v0, t);
    let dv = deriv(&v, 1);
    Ok(Field1D::new(
        grid,
        dv.values().iter().zip(v.values()).map(|(d, v)| -2.0 * d / v).collect(),
    )?)
}

/// Tail cut-off of the heat kernel relative to its peak.
const KERNEL_TAIL: f64 = 1e-12;

/// Closed form of `S(u)(t, x; z)` in the single-variable case with `u(0) = φ ξ`
/// and no forcing:
///
/// `S(t,x;z) = ∫ (x−y)/t · K_t(x−y) e^{−z Φ(y)/2} dy / ∫ K_t(x−y) e^{−z Φ(y)/2} dy`,
///
/// with `K_t` the heat kernel and `Φ(y) = ∫_{−∞}^y φ`. Both integrals use
/// the trapezoid rule on a refinement of the grid (cubic Hermite
/// interpolation of `Φ`), extended beyond the ends with constant `Φ` until
/// the kernel drops below `10⁻¹²` of its peak.
pub fn stransform_closed_form(phi: &Field1D, z: Complex64, t: f64) -> Result<Vec<Complex64>, MeanError> {
    let grid = *phi.grid();
    if grid.is_circle() {
        return Err(MeanError::WrongDomain("line"));
    }
    if t.is_nan() || t <= 0.0 {
        return Err(MeanError::NonPositiveTime(t));
    }
    let n = grid.len();
    let h = grid.spacing();
    let width = (4.0 * t).sqrt();
    let refine = ((8.0 * h / width).ceil() as usize).max(1);
    let hf = h / refine as f64;
    let reach = width * (-KERNEL_TAIL.ln()).sqrt();
    let ext = (reach / hf).ceil() as usize;

    let potential = fd::cumulative_integral(phi.values(), h);
    let total = potential[n - 1];
    let p = phi.values();
    // Φ on the fine nodes y_m = x_0 + (m − ext)·hf
    let fine_len = (n - 1) * refine + 1 + 2 * ext;
    let mut fine = Vec::with_capacity(fine_len);
    for m in 0..fine_len {
        let pos = m as isize - ext as isize;
        let value = if pos <= 0 {
            0.0
        } else if pos as usize >= (n - 1) * refine {
            total
        } else {
            let pos = pos as usize;
            let cell = pos / refine;
            let s = (pos % refine) as f64 / refine as f64;
            let (f0, f1) = (potential[cell], potential[cell + 1]);
            let (d0, d1) = (p[cell] * h, p[cell + 1] * h);
            let s2 = s * s;
            let s3 = s2 * s;
            (2.0 * s3 - 3.0 * s2 + 1.0) * f0 + (s3 - 2.0 * s2 + s) * d0 + (-2.0 * s3 + 3.0 * s2) * f1 + (s3 - s2) * d1
        };
        fine.push(value);
    }
    let weight: Vec<Complex64> = fine.iter().map(|&f| (-z * f * 0.5).exp()).collect();
    let kernel: Vec<f64> = (0..=ext)
        .map(|j| {
            let r = j as f64 * hf;
            (-r * r / (4.0 * t)).exp()
        })
        .collect();

    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let centre = i * refine + ext;
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = Complex64::new(0.0, 0.0);
        den += kernel[0] * weight[centre];
        for j in 1..=ext {
            let r = j as f64 * hf / t;
            let (left, right) = (weight[centre - j], weight[centre + j]);
            den += kernel[j] * (left + right);
            // (x − y)/t is +r for the left node and −r for the right node
            num += kernel[j] * r * (left - right);
        }
        if den.norm() < 1e-30 {
            return Err(MeanError::Denominator(den.norm()));
        }
        out.push(num / den);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize) -> Grid1D {
        Grid1D::line(n, 10.0).unwrap()
    }

    fn gaussian(grid: Grid1D, amp: f64) -> Field1D {
        Field1D::from_fn(grid, |x| amp * (-x * x).exp())
    }

    #[test]
    fn zero_and_constant_data() {
        let g = Grid1D::circle(32).unwrap();
        let z = solve_mean_circle(&Field1D::zeros(g), 0.1, 1e-3, 10).unwrap();
        assert!(z.snapshots.iter().all(|s| s.max_abs() == 0.0));
        let c = Field1D::from_fn(g, |_| 0.7);
        let traj = solve_mean_circle(&c, 0.1, 1e-3, 10).unwrap();
        assert!(traj.last().max_abs_diff(&c) < 1e-13);
    }

    #[test]
    fn circle_matches_hopf_cole() {
        let g = Grid1D::circle(64).unwrap();
        let u0 = Field1D::from_fn(g, |x| (2.0 * x).sin());
        let traj = solve_mean_circle(&u0, 0.25, 1e-3, 250).unwrap();
        let oracle = hopf_cole_circle(&u0, 0.25).unwrap();
        assert!(traj.last().max_abs_diff(&oracle) < 1e-5);
    }

    #[test]
    fn circle_mass_and_max_principle() {
        let g = Grid1D::circle(64).unwrap();
        let u0 = Field1D::from_fn(g, |x| 0.3 + (2.0 * x).sin() + 0.5 * (4.0 * x).cos());
        let traj = solve_mean_circle(&u0, 1.0, 1e-3, 50).unwrap();
        let m0 = u0.integral();
        for (i, s) in traj.snapshots.iter().enumerate() {
            assert!((s.integral() - m0).abs() < 1e-6);
            if i > 0 {
                assert!(s.max_abs() <= traj.snapshots[i - 1].max_abs() + 1e-12);
            }
        }
    }

    #[test]
    fn circle_oracle_rejects_nonzero_mean() {
        let g = Grid1D::circle(32).unwrap();
        let u0 = Field1D::from_fn(g, |x| 1.0 + (2.0 * x).sin());
        assert!(matches!(hopf_cole_circle(&u0, 0.1), Err(MeanError::NonZeroMean(_))));
    }

    #[test]
    fn line_zero_data() {
        let g = line(257);
        let sol = solve_mean_line(&Field1D::zeros(g), None, 0.1, 1e-3, 10).unwrap();
        assert!((sol.v_min - 1.0).abs() < 1e-14 && (sol.v_max - 1.0).abs() < 1e-14);
        assert!(sol.trajectory.last().max_abs() < 1e-12);
    }

    #[test]
    fn line_hopf_cole_matches_direct_solver() {
        let g = line(1025);
        let u0 = gaussian(g, 1.0);
        let hc = solve_mean_line(&u0, None, 0.5, 1e-3, 500).unwrap();
        let direct = solve_mean(&u0, None, 0.5, 1e-3, 500).unwrap();
        let diff = hc.trajectory.last().max_abs_diff(direct.last());
        assert!(diff < 1e-5, "{diff}");
        assert!(hc.v_min >= hc.v_bounds.0 * (1.0 - 1e-10) && hc.v_max <= hc.v_bounds.1 * (1.0 + 1e-10));
    }

    #[test]
    fn line_forced_mass_conservation_and_agreement() {
        // F = 0.5 exp(−x²) sin(t)... integrates f = F_x to zero in x
        let g = line(1025);
        let pot = SeparableSpec {
            space: crate::config::FieldSpec::Gaussian {
                amplitude: 0.5,
                center: 1.0,
                width: 1.0,
            },
            time: crate::config::TimeSpec::Cosine {
                amplitude: 1.0,
                frequency: 3.0,
            },
        };
        let u0 = gaussian(g, 0.5);
        let direct = solve_mean(&u0, Some(&pot), 0.5, 1e-3, 100).unwrap();
        for s in &direct.snapshots {
            assert!((s.integral() - u0.integral()).abs() < 1e-8);
        }
        let hc = solve_mean_line(&u0, Some(&pot), 0.5, 1e-3, 100).unwrap();
        let diff = hc.trajectory.last().max_abs_diff(direct.last());
        assert!(diff < 1e-5, "{diff}");
    }

    #[test]
    fn closed_form_zero_z_vanishes() {
        let g = line(513);
        let phi = gaussian(g, 1.0);
        let s = stransform_closed_form(&phi, Complex64::new(0.0, 0.0), 0.3).unwrap();
        assert!(s.iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn closed_form_short_time_returns_initial_data() {
        let g = line(1025);
        let phi = gaussian(g, 1.0);
        let z = 0.1;
        let s = stransform_closed_form(&phi, Complex64::new(z, 0.0), 1e-4).unwrap();
        let err = s
            .iter()
            .zip(phi.values())
            .map(|(v, p)| (v - z * p).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-3, "{err}");
    }

    #[test]
    fn closed_form_real_z_is_burgers_solve() {
        let g = line(1025);
        let phi = gaussian(g, 1.0);
        let s = stransform_closed_form(&phi, Complex64::new(0.5, 0.0), 0.5).unwrap();
        let direct = solve_mean(&phi.scaled(0.5), None, 0.5, 1e-3, 500).unwrap();
        let err = s
            .iter()
            .zip(direct.last().values())
            .map(|(v, d)| (v - d).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-4, "{err}");
    }

    #[test]
    fn closed_form_rejects_bad_input() {
        let g = line(257);
        assert!(stransform_closed_form(&Field1D::zeros(g), Complex64::new(0.1, 0.0), 0.0).is_err());
        let c = Grid1D::circle(32).unwrap();
        assert!(stransform_closed_form(&Field1D::zeros(c), Complex64::new(0.1, 0.0), 0.1).is_err());
    }
}
