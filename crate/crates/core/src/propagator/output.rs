//! Files written by a solve: `coeffs/<alpha>.csv`, `norms.csv`, `meta.json`
//! and `timings.json`. Everything except the timings is a pure function of
//! the configuration.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde_json::json;

use super::analysis::{catalan_check, empirical_ell, fit_norm_bound, level_norms, NormFit};
use super::{PropagatorError, PropagatorSolution};
use crate::multiindex::MultiIndex;

#[derive(Debug, Clone, PartialEq)]
pub struct NormRow {
    pub alpha: MultiIndex,
    pub l: f64,
    /// Fitted `C^{|α|} 𝔮^{pα}`; zero for `α = (0)`.
    pub bound: f64,
    pub ratio: f64,
}

/// Rows of `norms.csv` together with the fit behind the bound column.
pub fn norms_csv(sol: &PropagatorSolution) -> (String, Vec<NormRow>, NormFit) {
    let q = &sol.config.weights;
    let norms = level_norms(sol);
    let fit = fit_norm_bound(&norms, q);
    let rows: Vec<NormRow> = norms
        .into_iter()
        .map(|(alpha, l)| {
            let bound = if alpha.is_zero() { 0.0 } else { fit.bound(&alpha, q) };
            let ratio = if bound > 0.0 { l / bound } else { 0.0 };
            NormRow { alpha, l, bound, ratio }
        })
        .collect();
    let mut csv = String::from("alpha,order,L_alpha,bound_value,ratio\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{:.16e},{:.16e},{:.16e}",
            r.alpha,
            r.alpha.order(),
            r.l,
            r.bound,
            r.ratio
        );
    }
    (csv, rows, fit)
}

fn coefficient_csv(sol: &PropagatorSolution, i: usize) -> String {
    let traj = &sol.trajectories[i];
    let xs = sol.grid.points();
    let mut out = String::with_capacity(traj.snapshots.len() * xs.len() * 72);
    out.push_str("t,x,value\n");
    for (t, field) in traj.times.iter().zip(&traj.snapshots) {
        for (x, v) in xs.iter().zip(field.values()) {
            let _ = writeln!(out, "{t:.16e},{x:.16e},{v:.16e}");
        }
    }
    out
}

fn write(path: &Path, contents: &str) -> Result<(), PropagatorError> {
    fs::write(path, contents).map_err(|source| PropagatorError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes every output file of `sol` into `dir`, creating it if needed.
pub fn write_outputs(sol: &PropagatorSolution, dir: &Path) -> Result<(), PropagatorError> {
    let coeffs = dir.join("coeffs");
    fs::create_dir_all(&coeffs).map_err(|source| PropagatorError::Io {
        path: coeffs.display().to_string(),
        source,
    })?;
    for (i, alpha) in sol.indices.iter().enumerate() {
        write(&coeffs.join(format!("{alpha}.csv")), &coefficient_csv(sol, i))?;
    }
    let (csv, _, fit) = norms_csv(sol);
    write(&dir.join("norms.csv"), &csv)?;

    let q = &sol.config.weights;
    let norms = level_norms(sol);
    let r = sol.config.noise.as_ref().map_or(0.0, |n| n.r);
    let m = sol.config.ell_init.max(r);
    let catalan = catalan_check(&norms, q, m).ok();
    let meta = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "config": sol.config,
        "coefficients": sol.indices.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
        "steps": sol.steps,
        "snapshots": sol.snapshot_steps.len(),
        "fit": {
            "ln_C": fit.ln_c,
            "p": fit.p,
            "max_abs_log10_residual": fit.max_abs_residual,
        },
        "catalan": catalan.map(|c| json!({"lambda": c.lambda, "m": c.m, "pass": c.pass})),
        "empirical_ell": empirical_ell(&norms, q, 16),
    });
    write(
        &dir.join("meta.json"),
        &serde_json::to_string_pretty(&meta).expect("meta serializes"),
    )?;
    let timings = json!({ "solve_seconds": sol.elapsed_seconds });
    write(
        &dir.join("timings.json"),
        &serde_json::to_string_pretty(&timings).expect("timings serialize"),
    )
}
