//! Triangular propagator system for the chaos coefficients `u_α`.
//!
//! `u_(0)` solves the deterministic Burgers equation. Every `u_α` with
//! `|α| ≥ 1` solves the linear equation
//! `u_t = u_xx − D(u_(0) u_α) + F_α` with `F_α` from [`assemble_free_term`].
//! `F_α` only reads coefficients of lower order, so all coefficients are
//! marched together one time step at a time, each step reading the previous
//! time level.

mod analysis;
mod free_term;
mod output;

use std::collections::{BTreeSet, HashMap};
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::burgers_mean::{MeanError, MeanStepper};
use crate::config::{ConfigError, PropagatorConfig};
use crate::multiindex::{enumerate_truncated, MultiIndex};
use crate::noise::NoiseCoefficients;
use crate::pde::{
    deriv, step_count, EnergyAccumulator, EnergyRecord, Field1D, Grid1D, ParabolicStepper, PdeError, Trajectory,
};

pub use analysis::{
    catalan_check, empirical_ell, fit_norm_bound, level_increments, level_norms, weighted_solution_norm, CatalanCheck,
    CatalanRow, NormFit,
};
pub use free_term::{assemble_free_term, FreeTermPlan, NoiseFrame, Slice};
pub use output::{norms_csv, write_outputs, NormRow};

#[derive(Debug, Error)]
pub enum PropagatorError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Mean(#[from] MeanError),
    #[error(transparent)]
    Pde(#[from] PdeError),
    #[error("coefficient {needed} is required by {alpha} but was not solved")]
    MissingDependency { alpha: MultiIndex, needed: MultiIndex },
    #[error("coefficient {0} became non-finite")]
    NonFinite(MultiIndex),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Deliberate defects for mutation tests of the validation layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Add the convolution sum instead of subtracting it.
    FlipConvolutionSign,
}

#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    /// Overrides the configured snapshot stride.
    pub snapshot_stride: Option<usize>,
    /// Step indices stored in addition to the stride.
    pub extra_steps: BTreeSet<usize>,
    pub fault: Option<Fault>,
}

/// The solved coefficient family.
#[derive(Debug, Clone)]
pub struct PropagatorSolution {
    pub config: PropagatorConfig,
    pub grid: Grid1D,
    pub dt: f64,
    pub steps: usize,
    /// Canonical index set; also the solve order.
    pub indices: Vec<MultiIndex>,
    /// Step indices of the stored snapshots, shared by every coefficient.
    pub snapshot_steps: Vec<usize>,
    pub trajectories: Vec<Trajectory>,
    pub elapsed_seconds: f64,
    position: HashMap<MultiIndex, usize>,
}

impl PropagatorSolution {
    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        self.position.get(alpha).copied()
    }

    pub fn trajectory(&self, alpha: &MultiIndex) -> Option<&Trajectory> {
        self.position(alpha).map(|i| &self.trajectories[i])
    }

    pub fn energy(&self, alpha: &MultiIndex) -> Option<EnergyRecord> {
        self.trajectory(alpha).map(|t| t.energy)
    }

    pub fn final_field(&self, alpha: &MultiIndex) -> Option<&Field1D> {
        self.trajectory(alpha).map(|t| t.last())
    }

    /// Field of `alpha` at step `n`, if that step was stored.
    pub fn field_at_step(&self, alpha: &MultiIndex, n: usize) -> Option<&Field1D> {
        let j = self.snapshot_steps.binary_search(&n).ok()?;
        self.trajectory(alpha).map(|t| &t.snapshots[j])
    }

    pub fn max_order(&self) -> u32 {
        self.indices.iter().map(MultiIndex::order).max().unwrap_or(0)
    }

    /// Drops every coefficient above order `max_order`.
    pub fn restrict(&self, max_order: u32) -> PropagatorSolution {
        let keep: Vec<usize> = (0..self.indices.len())
            .filter(|&i| self.indices[i].order() <= max_order)
            .collect();
        let indices: Vec<MultiIndex> = keep.iter().map(|&i| self.indices[i].clone()).collect();
        let mut config = self.config.clone();
        config.truncation.n = config.truncation.n.min(max_order);
        PropagatorSolution {
            config,
            grid: self.grid,
            dt: self.dt,
            steps: self.steps,
            position: position_map(&indices),
            indices,
            snapshot_steps: self.snapshot_steps.clone(),
            trajectories: keep.iter().map(|&i| self.trajectories[i].clone()).collect(),
            elapsed_seconds: self.elapsed_seconds,
        }
    }
}

fn position_map(indices: &[MultiIndex]) -> HashMap<MultiIndex, usize> {
    indices.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect()
}

/// Solves with the configured options.
pub fn solve(config: &PropagatorConfig) -> Result<PropagatorSolution, PropagatorError> {
    solve_with(config, &SolveOptions::default())
}

pub fn solve_with(config: &PropagatorConfig, options: &SolveOptions) -> Result<PropagatorSolution, PropagatorError> {
    config.validate()?;
    let started = Instant::now();
    let grid = config.grid()?;
    let dt = config.dt;
    let steps = step_count(config.t_final, dt)?;
    let stride = options.snapshot_stride.unwrap_or(config.snapshot_stride).max(1);
    let d = config.truncation.d;
    let indices = enumerate_truncated(d, config.truncation.n);
    let position = position_map(&indices);
    let plans = indices
        .iter()
        .map(|a| FreeTermPlan::build(a, &position))
        .collect::<Result<Vec<_>, _>>()?;
    let noise = config
        .noise
        .as_ref()
        .map(|spec| NoiseCoefficients::assemble(spec, grid, config.t_final, d));

    let mut mean = MeanStepper::new(grid, dt, config.forcing.clone())?;
    let mut steppers = (1..indices.len())
        .map(|_| ParabolicStepper::new(grid, dt))
        .collect::<Result<Vec<_>, _>>()?;
    let mut u: Vec<Field1D> = indices.iter().map(|a| config.initial_field(a, grid)).collect();
    let mut energy: Vec<EnergyAccumulator> = indices.iter().map(|_| EnergyAccumulator::new(dt)).collect();
    for (acc, f) in energy.iter_mut().zip(&u) {
        acc.push(f);
    }
    let mut snapshot_steps = vec![0];
    let mut snapshots: Vec<Vec<Field1D>> = u.iter().map(|f| vec![f.clone()]).collect();
    log::info!(
        "propagator: {} coefficients, {} steps, grid {}",
        indices.len(),
        steps,
        grid.len()
    );

    for n in 0..steps {
        let t = n as f64 * dt;
        let du: Vec<Field1D> = u.par_iter().map(|f| deriv(f, 1)).collect();
        let d2u: Vec<Field1D> = u.par_iter().map(|f| deriv(f, 2)).collect();
        let frame = noise.as_ref().map(|c| NoiseFrame::sample(c, t));
        let slice = Slice {
            u: &u,
            du: &du,
            d2u: &d2u,
        };
        let drift = &u[0];

        let next_mean = mean.step(drift, n)?;
        let mut next: Vec<Field1D> = steppers
            .par_iter_mut()
            .zip(&plans[1..])
            .map(|(stepper, plan)| {
                let own = &u[plan.position];
                let mut advance = || -> Result<Field1D, PdeError> {
                    let mut explicit = assemble_free_term(plan, &slice, frame.as_ref(), options.fault)?;
                    let transport = deriv(&drift.pointwise_mul(own)?, 1);
                    explicit.axpy(-1.0, &transport)?;
                    stepper.step(own, &explicit)
                };
                advance().map_err(|e| match e {
                    PdeError::NonFinite => PropagatorError::NonFinite(plan.alpha.clone()),
                    other => PropagatorError::Pde(other),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        next.insert(0, next_mean);
        u = next;
        for (acc, f) in energy.iter_mut().zip(&u) {
            acc.push(f);
        }
        let m = n + 1;
        if m % stride == 0 || m == steps || options.extra_steps.contains(&m) {
            snapshot_steps.push(m);
            for (s, f) in snapshots.iter_mut().zip(&u) {
                s.push(f.clone());
            }
        }
    }

    let times: Vec<f64> = snapshot_steps.iter().map(|&m| m as f64 * dt).collect();
    let trajectories = snapshots
        .into_iter()
        .zip(&energy)
        .map(|(snapshots, acc)| Trajectory {
            times: times.clone(),
            snapshots,
            energy: acc.record(),
        })
        .collect();
    Ok(PropagatorSolution {
        config: config.clone(),
        grid,
        dt,
        steps,
        indices,
        snapshot_steps,
        trajectories,
        elapsed_seconds: started.elapsed().as_secs_f64(),
        position,
    })
}
