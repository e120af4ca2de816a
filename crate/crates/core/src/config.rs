//! Run configuration: JSON schema, analytic field specifications, validation.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::multiindex::{MultiIndex, WeightSpec};
use crate::noise::NoiseSpec;
use crate::pde::{Domain, Field1D, Grid1D};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl ConfigError {
    pub fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// A smooth function of `x` with closed-form derivative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    Zero,
    Constant {
        value: f64,
    },
    /// `amplitude · sin(wavenumber · x)`.
    Sine {
        amplitude: f64,
        wavenumber: f64,
    },
    /// `amplitude · cos(wavenumber · x)`.
    Cosine {
        amplitude: f64,
        wavenumber: f64,
    },
    /// `amplitude · exp(−((x − center)/width)²)`.
    Gaussian {
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// `amplitude · exp(1 − 1/(1 − s²))` for `|s| < 1`, `s = (x − center)/radius`.
    Bump {
        amplitude: f64,
        center: f64,
        radius: f64,
    },
    Sum {
        terms: Vec<FieldSpec>,
    },
}

impl FieldSpec {
    pub fn value(&self, x: f64) -> f64 {
        match self {
            FieldSpec::Zero => 0.0,
            FieldSpec::Constant { value } => *value,
            FieldSpec::Sine { amplitude, wavenumber } => amplitude * (wavenumber * x).sin(),
            FieldSpec::Cosine { amplitude, wavenumber } => amplitude * (wavenumber * x).cos(),
            FieldSpec::Gaussian {
                amplitude,
                center,
                width,
            } => {
                let s = (x - center) / width;
                amplitude * (-s * s).exp()
            }
            FieldSpec::Bump {
                amplitude,
                center,
                radius,
            } => {
                let s = (x - center) / radius;
                if s.abs() >= 1.0 {
                    0.0
                } else {
                    amplitude * (1.0 - 1.0 / (1.0 - s * s)).exp()
                }
            }
            FieldSpec::Sum { terms } => terms.iter().map(|t| t.value(x)).sum(),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            FieldSpec::Zero | FieldSpec::Constant { .. } => 0.0,
            FieldSpec::Sine { amplitude, wavenumber } => amplitude * wavenumber * (wavenumber * x).cos(),
            FieldSpec::Cosine { amplitude, wavenumber } => -amplitude * wavenumber * (wavenumber * x).sin(),
            FieldSpec::Gaussian { width, center, .. } => {
                let s = (x - center) / width;
                -2.0 * s / width * self.value(x)
            }
            FieldSpec::Bump { center, radius, .. } => {
                let s = (x - center) / radius;
                if s.abs() >= 1.0 {
                    0.0
                } else {
                    let w = 1.0 - s * s;
                    -2.0 * s / (w * w) / radius * self.value(x)
                }
            }
            FieldSpec::Sum { terms } => terms.iter().map(|t| t.derivative(x)).sum(),
        }
    }

    pub fn sample(&self, grid: Grid1D) -> Field1D {
        Field1D::from_fn(grid, |x| self.value(x))
    }

    pub fn sample_derivative(&self, grid: Grid1D) -> Field1D {
        Field1D::from_fn(grid, |x| self.derivative(x))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            FieldSpec::Zero => true,
            FieldSpec::Constant { value } => *value == 0.0,
            FieldSpec::Sine { amplitude, .. }
            | FieldSpec::Cosine { amplitude, .. }
            | FieldSpec::Gaussian { amplitude, .. }
            | FieldSpec::Bump { amplitude, .. } => *amplitude == 0.0,
            FieldSpec::Sum { terms } => terms.iter().all(FieldSpec::is_zero),
        }
    }

    /// Checks that the function is π-periodic and finite in its parameters.
    fn validate_circle(&self, path: &str) -> Result<(), ConfigError> {
        self.validate_params(path)?;
        match self {
            FieldSpec::Sine { wavenumber, .. } | FieldSpec::Cosine { wavenumber, .. } => {
                let half = wavenumber / 2.0;
                if half.fract() != 0.0 {
                    return Err(ConfigError::invalid(
                        path,
                        format!("wavenumber {wavenumber} is not an even integer (circle has period π)"),
                    ));
                }
                Ok(())
            }
            FieldSpec::Gaussian { .. } | FieldSpec::Bump { .. } => Err(ConfigError::invalid(
                path,
                "gaussian and bump fields are only available on the line",
            )),
            FieldSpec::Sum { terms } => terms
                .iter()
                .enumerate()
                .try_for_each(|(i, t)| t.validate_circle(&format!("{path}.terms[{i}]"))),
            FieldSpec::Zero | FieldSpec::Constant { .. } => Ok(()),
        }
    }

    fn validate_params(&self, path: &str) -> Result<(), ConfigError> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::invalid(format!("{path}.{name}"), "must be finite"))
            }
        };
        match self {
            FieldSpec::Zero => Ok(()),
            FieldSpec::Constant { value } => finite("value", *value),
            FieldSpec::Sine { amplitude, wavenumber } | FieldSpec::Cosine { amplitude, wavenumber } => {
                finite("amplitude", *amplitude)?;
                finite("wavenumber", *wavenumber)
            }
            FieldSpec::Gaussian {
                amplitude,
                center,
                width,
            } => {
                finite("amplitude", *amplitude)?;
                finite("center", *center)?;
                if !(width.is_finite() && *width > 0.0) {
                    return Err(ConfigError::invalid(format!("{path}.width"), "must be positive"));
                }
                Ok(())
            }
            FieldSpec::Bump {
                amplitude,
                center,
                radius,
            } => {
                finite("amplitude", *amplitude)?;
                finite("center", *center)?;
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(ConfigError::invalid(format!("{path}.radius"), "must be positive"));
                }
                Ok(())
            }
            FieldSpec::Sum { terms } => terms
                .iter()
                .enumerate()
                .try_for_each(|(i, t)| t.validate_params(&format!("{path}.terms[{i}]"))),
        }
    }
}

/// A function of time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TimeSpec {
    Constant {
        value: f64,
    },
    /// `amplitude · sin(frequency · t)`.
    Sine {
        amplitude: f64,
        frequency: f64,
    },
    /// `amplitude · cos(frequency · t)`.
    Cosine {
        amplitude: f64,
        frequency: f64,
    },
}

impl Default for TimeSpec {
    fn default() -> Self {
        TimeSpec::Constant { value: 1.0 }
    }
}

impl TimeSpec {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            TimeSpec::Constant { value } => value,
            TimeSpec::Sine { amplitude, frequency } => amplitude * (frequency * t).sin(),
            TimeSpec::Cosine { amplitude, frequency } => amplitude * (frequency * t).cos(),
        }
    }
}

/// Separable space-time function `space(x) · time(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparableSpec {
    pub space: FieldSpec,
    #[serde(default)]
    pub time: TimeSpec,
}

impl SeparableSpec {
    pub fn sample(&self, grid: Grid1D, t: f64) -> Field1D {
        self.space.sample(grid).scaled(self.time.value(t))
    }

    pub fn sample_dx(&self, grid: Grid1D, t: f64) -> Field1D {
        self.space.sample_derivative(grid).scaled(self.time.value(t))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Truncation {
    /// Number of retained Gaussian variables `ξ_1..ξ_d`.
    pub d: usize,
    /// Highest chaos order.
    #[serde(rename = "N")]
    pub n: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialEntry {
    pub alpha: MultiIndex,
    pub field: FieldSpec,
}

/// Settings for the S-transform residual check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidualSpec {
    pub z: Vec<f64>,
    #[serde(default)]
    pub ell: f64,
    pub times: Vec<f64>,
}

fn default_stride() -> usize {
    1
}

/// Full configuration of a propagator run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagatorConfig {
    pub domain: Domain,
    pub grid_points: usize,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub dt: f64,
    pub truncation: Truncation,
    #[serde(default)]
    pub weights: WeightSpec,
    #[serde(default)]
    pub noise: Option<NoiseSpec>,
    #[serde(default)]
    pub initial: Vec<InitialEntry>,
    /// Potential `F`; the equation is forced by `f = F_x`. Line only.
    #[serde(default)]
    pub forcing: Option<SeparableSpec>,
    /// Weight exponent of the initial data, used for `m = max(ℓ, r)`.
    #[serde(default)]
    pub ell_init: f64,
    /// Keep every `snapshot_stride`-th time level in memory and on disk.
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
    #[serde(default)]
    pub residual: Option<ResidualSpec>,
}

/// Largest boundary magnitude allowed for line initial data.
pub const LINE_BOUNDARY_TOLERANCE: f64 = 1e-8;

impl PropagatorConfig {
    pub fn from_json_str(s: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(s);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let msg = inner.to_string();
            // name the missing field by its full path, e.g. truncation.N
            if let Some(rest) = msg.strip_prefix("missing field `") {
                if let Some(name) = rest.split('`').next() {
                    let full = if path == "." {
                        name.to_string()
                    } else {
                        format!("{path}.{name}")
                    };
                    return ConfigError::invalid(full, "missing required field");
                }
            }
            ConfigError::invalid(path, msg)
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let s = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&s)
    }

    pub fn grid(&self) -> Result<Grid1D, ConfigError> {
        Grid1D::new(self.domain, self.grid_points).map_err(|e| ConfigError::invalid("grid_points", e.to_string()))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let grid = self.grid()?;
        if let Domain::Line { half_width } = self.domain {
            if !(half_width.is_finite() && half_width > 0.0) {
                return Err(ConfigError::invalid("domain.half_width", "must be positive"));
            }
        }
        crate::pde::step_count(self.t_final, self.dt).map_err(|e| ConfigError::invalid("dt", e.to_string()))?;
        if self.truncation.d == 0 {
            return Err(ConfigError::invalid("truncation.d", "must be at least 1"));
        }
        self.weights
            .validate()
            .map_err(|e| ConfigError::invalid("weights", e.to_string()))?;
        if self.snapshot_stride == 0 {
            return Err(ConfigError::invalid("snapshot_stride", "must be at least 1"));
        }
        if let Some(noise) = &self.noise {
            noise.validate(grid, self.truncation.d)?;
        }
        match (&self.forcing, grid.is_circle()) {
            (Some(f), true) if !f.space.is_zero() => {
                return Err(ConfigError::invalid("forcing", "forcing must vanish on the circle"));
            }
            (Some(f), false) => f.space.validate_params("forcing.space")?,
            _ => {}
        }
        for (i, entry) in self.initial.iter().enumerate() {
            let path = format!("initial[{i}].field");
            if entry.alpha.max_position() > self.truncation.d || entry.alpha.order() > self.truncation.n {
                return Err(ConfigError::invalid(
                    format!("initial[{i}].alpha"),
                    format!("index {} is outside the truncation", entry.alpha),
                ));
            }
            if self.initial[..i].iter().any(|e| e.alpha == entry.alpha) {
                return Err(ConfigError::invalid(
                    format!("initial[{i}].alpha"),
                    format!("index {} given twice", entry.alpha),
                ));
            }
            if grid.is_circle() {
                entry.field.validate_circle(&path)?;
            } else {
                entry.field.validate_params(&path)?;
                let b = entry.field.sample(grid).boundary_magnitude();
                if b >= LINE_BOUNDARY_TOLERANCE {
                    return Err(ConfigError::invalid(
                        path,
                        format!("line data must be compactly supported inside the domain (boundary value {b:e})"),
                    ));
                }
            }
        }
        if let Some(r) = &self.residual {
            if r.z.is_empty() {
                return Err(ConfigError::invalid("residual.z", "must not be empty"));
            }
            if r.times.iter().any(|&t| !(t > 0.0 && t < self.t_final)) {
                return Err(ConfigError::invalid(
                    "residual.times",
                    "times must lie strictly inside (0, T)",
                ));
            }
        }
        Ok(())
    }

    /// Initial field for `alpha` (zero when unspecified).
    pub fn initial_field(&self, alpha: &MultiIndex, grid: Grid1D) -> Field1D {
        self.initial
            .iter()
            .find(|e| &e.alpha == alpha)
            .map(|e| e.field.sample(grid))
            .unwrap_or_else(|| Field1D::zeros(grid))
    }

    /// Forcing `f = F_x` at time `t` (None when absent).
    pub fn forcing_at(&self, grid: Grid1D, t: f64) -> Option<Field1D> {
        self.forcing.as_ref().map(|f| f.sample_dx(grid, t))
    }
}

/// Checks that `spec` is a valid π-periodic field.
pub(crate) fn check_circle_field(spec: &FieldSpec, path: &str) -> Result<(), ConfigError> {
    spec.validate_circle(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "domain": {"kind": "circle"},
        "grid_points": 64,
        "T": 0.1,
        "dt": 0.001,
        "truncation": {"d": 1, "N": 2},
        "initial": [{"alpha": "1", "field": {"kind": "sine", "amplitude": 1.0, "wavenumber": 2.0}}]
    }"#;

    #[test]
    fn parses_minimal_config() {
        let c = PropagatorConfig::from_json_str(MINIMAL).unwrap();
        assert_eq!(c.truncation.n, 2);
        assert_eq!(c.weights, WeightSpec::default());
        assert!(c.noise.is_none());
    }

    #[test]
    fn missing_field_is_named_by_path() {
        let bad = MINIMAL.replace(r#", "N": 2"#, "");
        let err = PropagatorConfig::from_json_str(&bad).unwrap_err().to_string();
        assert!(err.contains("truncation.N"), "{err}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let bad = MINIMAL.replace(r#""dt": 0.001"#, r#""dt": 0.001, "colour": 3"#);
        let err = PropagatorConfig::from_json_str(&bad).unwrap_err().to_string();
        assert!(err.contains("colour"), "{err}");
    }

    #[test]
    fn circle_rejects_odd_wavenumber_and_forcing() {
        let bad = MINIMAL.replace(r#""wavenumber": 2.0"#, r#""wavenumber": 1.0"#);
        assert!(PropagatorConfig::from_json_str(&bad).is_err());
        let bad = MINIMAL.replace(
            r#""dt": 0.001"#,
            r#""dt": 0.001, "forcing": {"space": {"kind": "constant", "value": 1.0}}"#,
        );
        let err = PropagatorConfig::from_json_str(&bad).unwrap_err().to_string();
        assert!(err.contains("forcing"));
    }

    #[test]
    fn line_data_must_vanish_at_boundary() {
        let line = MINIMAL
            .replace(r#"{"kind": "circle"}"#, r#"{"kind": "line", "half_width": 10.0}"#)
            .replace(
                r#"{"kind": "sine", "amplitude": 1.0, "wavenumber": 2.0}"#,
                r#"{"kind": "gaussian", "amplitude": 1.0, "center": 0.0, "width": 1.0}"#,
            );
        assert!(PropagatorConfig::from_json_str(&line).is_ok());
        let wide = line.replace(r#""width": 1.0"#, r#""width": 4.0"#);
        let err = PropagatorConfig::from_json_str(&wide).unwrap_err().to_string();
        assert!(err.contains("initial[0].field"), "{err}");
    }

    #[test]
    fn initial_index_outside_truncation() {
        let bad = MINIMAL.replace(r#""alpha": "1""#, r#""alpha": "0.1""#);
        assert!(PropagatorConfig::from_json_str(&bad).is_err());
    }

    #[test]
    fn analytic_derivatives_match_differences() {
        let specs = [
            FieldSpec::Sine {
                amplitude: 0.5,
                wavenumber: 4.0,
            },
            FieldSpec::Cosine {
                amplitude: -1.0,
                wavenumber: 2.0,
            },
            FieldSpec::Gaussian {
                amplitude: 2.0,
                center: 0.3,
                width: 0.7,
            },
            FieldSpec::Bump {
                amplitude: 1.0,
                center: -0.2,
                radius: 1.5,
            },
            FieldSpec::Sum {
                terms: vec![
                    FieldSpec::Constant { value: 1.0 },
                    FieldSpec::Sine {
                        amplitude: 1.0,
                        wavenumber: 2.0,
                    },
                ],
            },
        ];
        let h = 1e-6;
        for s in &specs {
            for &x in &[-0.9, -0.1, 0.4, 1.1] {
                let fd = (s.value(x + h) - s.value(x - h)) / (2.0 * h);
                assert!((fd - s.derivative(x)).abs() < 1e-6, "{s:?} at {x}");
            }
        }
    }
}
