use serde::{Deserialize, Serialize};

use super::PdeError;

/// Spatial domain. The circle has period π; the line is truncated to `[−X, X]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Domain {
    Circle,
    Line { half_width: f64 },
}

impl Domain {
    pub fn is_circle(&self) -> bool {
        matches!(self, Domain::Circle)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    domain: Domain,
    n: usize,
}

impl Grid1D {
    pub fn new(domain: Domain, n: usize) -> Result<Self, PdeError> {
        if n < 16 {
            return Err(PdeError::InvalidGrid(format!("need at least 16 points, got {n}")));
        }
        match domain {
            Domain::Circle if !n.is_power_of_two() => Err(PdeError::InvalidGrid(format!(
                "circle grids need a power-of-two size, got {n}"
            ))),
            Domain::Line { half_width } if !(half_width.is_finite() && half_width > 0.0) => Err(PdeError::InvalidGrid(
                format!("half width must be positive, got {half_width}"),
            )),
            _ => Ok(Self { domain, n }),
        }
    }

    pub fn circle(n: usize) -> Result<Self, PdeError> {
        Self::new(Domain::Circle, n)
    }

    pub fn line(n: usize, half_width: f64) -> Result<Self, PdeError> {
        Self::new(Domain::Line { half_width }, n)
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn is_circle(&self) -> bool {
        self.domain.is_circle()
    }

    pub fn spacing(&self) -> f64 {
        match self.domain {
            Domain::Circle => std::f64::consts::PI / self.n as f64,
            Domain::Line { half_width } => 2.0 * half_width / (self.n - 1) as f64,
        }
    }

    pub fn x(&self, i: usize) -> f64 {
        match self.domain {
            Domain::Circle => i as f64 * self.spacing(),
            Domain::Line { half_width } => -half_width + i as f64 * self.spacing(),
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Length of the domain (the period on the circle).
    pub fn length(&self) -> f64 {
        match self.domain {
            Domain::Circle => std::f64::consts::PI,
            Domain::Line { half_width } => 2.0 * half_width,
        }
    }

    /// Quadrature weights: uniform on the circle, trapezoid on the line.
    pub fn weight(&self, i: usize) -> f64 {
        let h = self.spacing();
        match self.domain {
            Domain::Circle => h,
            Domain::Line { .. } if i == 0 || i + 1 == self.n => 0.5 * h,
            Domain::Line { .. } => h,
        }
    }
}

/// Real samples of a function on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field1D {
    grid: Grid1D,
    values: Vec<f64>,
}

impl Field1D {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self, PdeError> {
        if values.len() != grid.len() {
            return Err(PdeError::LengthMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid1D) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid,
            values: grid.points().into_iter().map(f).collect(),
        }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn same_grid(&self, other: &Field1D) -> Result<(), PdeError> {
        if self.grid != other.grid {
            return Err(PdeError::GridMismatch);
        }
        Ok(())
    }

    pub fn scaled(&self, s: f64) -> Field1D {
        Field1D {
            grid: self.grid,
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    /// `self += s · other`.
    pub fn axpy(&mut self, s: f64, other: &Field1D) -> Result<(), PdeError> {
        self.same_grid(other)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += s * b;
        }
        Ok(())
    }

    pub fn pointwise_mul(&self, other: &Field1D) -> Result<Field1D, PdeError> {
        self.same_grid(other)?;
        Ok(Field1D {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Field1D) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// `∫ f dx` with the grid's quadrature rule.
    pub fn integral(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| self.grid.weight(i) * v)
            .sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| self.grid.weight(i) * v * v)
            .sum::<f64>()
            .sqrt()
    }

    /// Largest magnitude at the two ends of a line grid (0 on the circle).
    pub fn boundary_magnitude(&self) -> f64 {
        if self.grid.is_circle() {
            return 0.0;
        }
        self.values[0].abs().max(self.values[self.values.len() - 1].abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_conventions() {
        let c = Grid1D::circle(64).unwrap();
        assert!((c.spacing() - std::f64::consts::PI / 64.0).abs() < 1e-15);
        let l = Grid1D::line(2049, 10.0).unwrap();
        assert!((l.spacing() - 20.0 / 2048.0).abs() < 1e-15);
        assert_eq!(l.x(0), -10.0);
        assert!((l.x(2048) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid1D::circle(8).is_err());
        assert!(Grid1D::circle(48).is_err());
        assert!(Grid1D::line(100, -1.0).is_err());
        assert!(Grid1D::line(17, 5.0).is_ok());
    }

    #[test]
    fn quadrature_of_smooth_functions() {
        let c = Grid1D::circle(32).unwrap();
        let f = Field1D::from_fn(c, |x| (2.0 * x).sin().powi(2));
        assert!((f.integral() - std::f64::consts::FRAC_PI_2).abs() < 1e-13);
        let l = Grid1D::line(2001, 10.0).unwrap();
        let g = Field1D::from_fn(l, |x| (-x * x).exp());
        assert!((g.integral() - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = Field1D::zeros(Grid1D::circle(16).unwrap());
        let b = Field1D::zeros(Grid1D::circle(32).unwrap());
        assert_eq!(a.pointwise_mul(&b), Err(PdeError::GridMismatch));
        assert!(Field1D::new(Grid1D::circle(16).unwrap(), vec![0.0; 3]).is_err());
    }
}
