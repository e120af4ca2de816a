//! Spatial discretization and time stepping on the circle and the truncated line.

pub mod fd;
pub mod grid;
pub mod spectral;
pub mod stepper;

use thiserror::Error;

pub use grid::{Domain, Field1D, Grid1D};
pub use spectral::{sobolev_norm, sobolev_norm_sq};
pub use stepper::{
    check_cfl, parabolic_step, step_count, time_integrate, transport_term, EnergyAccumulator, EnergyRecord,
    ParabolicStepper, Trajectory,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PdeError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("field has {found} values, grid has {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("CFL violation: dt={dt} exceeds spacing/max|drift|={limit}")]
    Cfl { dt: f64, limit: f64 },
    #[error("non-finite value produced by the time stepper")]
    NonFinite,
    #[error("invalid time parameters: {0}")]
    InvalidTime(String),
}

/// Spatial derivative of order 1 or 2: spectral on the circle, fourth-order
/// finite differences on the line.
pub fn deriv(f: &Field1D, order: u32) -> Field1D {
    assert!(order == 1 || order == 2, "derivative order must be 1 or 2");
    let grid = *f.grid();
    let values = if grid.is_circle() {
        spectral::spectral_deriv(f.values(), &grid, order)
    } else if order == 1 {
        fd::first(f.values(), grid.spacing())
    } else {
        fd::second(f.values(), grid.spacing())
    };
    Field1D::new(grid, values).expect("derivative preserves length")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_derivative_of_sine() {
        let g = Grid1D::circle(64).unwrap();
        let f = Field1D::from_fn(g, |x| (2.0 * x).sin());
        let d = deriv(&f, 1);
        let exact = Field1D::from_fn(g, |x| 2.0 * (2.0 * x).cos());
        assert!(d.max_abs_diff(&exact) < 1e-10);
    }

    #[test]
    fn constants_are_annihilated() {
        for g in [Grid1D::circle(32).unwrap(), Grid1D::line(64, 3.0).unwrap()] {
            let f = Field1D::from_fn(g, |_| 2.5);
            assert!(deriv(&f, 1).max_abs() < 1e-10);
            assert!(deriv(&f, 2).max_abs() < 1e-8);
        }
    }

    #[test]
    fn line_second_derivative_of_gaussian() {
        let g = Grid1D::line(2048, 10.0).unwrap();
        let f = Field1D::from_fn(g, |x| (-x * x).exp());
        let exact = Field1D::from_fn(g, |x| (4.0 * x * x - 2.0) * (-x * x).exp());
        assert!(deriv(&f, 2).max_abs_diff(&exact) < 1e-6);
    }

    #[test]
    fn spectral_derivative_is_skew() {
        let g = Grid1D::circle(64).unwrap();
        let f = Field1D::from_fn(g, |x| (2.0 * x).sin() + 0.2 * (x * 4.0).cos().powi(3));
        let h = Field1D::from_fn(g, |x| (6.0 * x).cos() * (2.0 * x).sin().exp());
        let a = deriv(&f, 1).pointwise_mul(&h).unwrap().integral();
        let b = f.pointwise_mul(&deriv(&h, 1)).unwrap().integral();
        assert!((a + b).abs() < 1e-10);
    }
}
