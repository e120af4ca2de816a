use serde_json::{json, Value};

use super::*;
use crate::chaos::{Basis, ChaosExpansion};
use crate::propagator::{solve, Fault};

fn config(v: Value) -> PropagatorConfig {
    PropagatorConfig::from_json_str(&v.to_string()).unwrap()
}

fn single_xi(n: u32, mean: bool) -> PropagatorConfig {
    let mut initial = vec![json!({"alpha": "1", "field": {"kind": "cosine", "amplitude": 1.0, "wavenumber": 2.0}})];
    if mean {
        initial.push(json!({"alpha": "0", "field": {"kind": "sine", "amplitude": 0.5, "wavenumber": 2.0}}));
    }
    config(json!({
        "domain": {"kind": "circle"},
        "grid_points": 32,
        "T": 0.2,
        "dt": 0.001,
        "truncation": {"d": 1, "N": n},
        "snapshot_stride": 20,
        "initial": initial,
        "residual": {"z": [0.2], "ell": 1.0, "times": [0.1]}
    }))
}

fn solved(cfg: &PropagatorConfig) -> PropagatorSolution {
    let times = &cfg.residual.as_ref().unwrap().times;
    let opts = SolveOptions {
        extra_steps: residual_steps(times, cfg.dt),
        ..SolveOptions::default()
    };
    solve_with(cfg, &opts).unwrap()
}

#[test]
fn stransform_two_ways_agree() {
    let cfg = single_xi(4, true);
    let sol = solve(&cfg).unwrap();
    let step = *sol.snapshot_steps.last().unwrap();
    let expansion = ChaosExpansion::from_entries(
        Basis::H,
        sol.indices
            .iter()
            .cloned()
            .zip(sol.trajectories.iter().map(|t| t.last().clone())),
    );
    let z = [0.3];
    let a = expansion.s_transform(&z).unwrap();
    let b = stransform_field(&sol, &z, step).unwrap();
    assert!(a.max_abs_diff(&b) <= 1e-12);
}

#[test]
fn deterministic_data_residual_equals_mean_residual() {
    let mut cfg = single_xi(3, true);
    cfg.initial.retain(|e| e.alpha.is_zero());
    let sol = solved(&cfg);
    let at_zero = stransform_residual(&sol, &[0.0], &[0.1], 1.0).unwrap();
    let at_z = stransform_residual(&sol, &[0.2], &[0.1], 1.0).unwrap();
    assert_eq!(at_zero, at_z);
    assert!(at_zero[0].norm <= 1e-4, "{}", at_zero[0].norm);
}

#[test]
fn inadmissible_z_is_rejected() {
    let sol = solved(&single_xi(2, false));
    let err = stransform_residual(&sol, &[0.5], &[0.1], 1.0).unwrap_err();
    assert!(matches!(err, ValidateError::Inadmissible(_)));
}

#[test]
fn missing_neighbours_are_reported() {
    let sol = solve(&single_xi(2, false)).unwrap();
    let err = stransform_residual(&sol, &[0.2], &[0.105], 1.0).unwrap_err();
    assert!(matches!(err, ValidateError::MissingSnapshot(_)));
}

#[test]
fn residual_decreases_with_truncation() {
    // large data keeps the truncation error above the time-step floor up to N = 6
    let mut cfg = single_xi(6, true);
    cfg.initial[0].field = FieldSpec::Cosine {
        amplitude: 10.0,
        wavenumber: 2.0,
    };
    let sol = solved(&cfg);
    let curve = residual_curve(&sol, &[0.2], &[0.1], 1.0).unwrap();
    for w in curve[2..].windows(2) {
        assert!(w[1] <= w[0], "{curve:?}");
    }
}

#[test]
fn halving_z_shrinks_truncation_residual() {
    let n = 2;
    let sol = solved(&single_xi(n, false));
    let full = stransform_residual(&sol, &[0.2], &[0.1], 1.0).unwrap()[0].norm;
    let half = stransform_residual(&sol, &[0.1], &[0.1], 1.0).unwrap()[0].norm;
    assert!(full / half >= 2f64.powi(n as i32), "{full} / {half}");
}

fn gaussian(width: f64) -> FieldSpec {
    FieldSpec::Gaussian {
        amplitude: 1.0,
        center: 0.0,
        width,
    }
}

#[test]
fn zero_data_gives_vacuous_growth_verdict() {
    let cfg = growth_config(FieldSpec::Zero, 8.0, 129, 0.05, 0.001, 4).unwrap();
    let report = growth_diagnostic(&solve(&cfg).unwrap()).unwrap();
    assert!(report.norms.iter().all(|&v| v == 0.0));
    assert_eq!(report.verdict, None);
}

#[test]
fn growth_needs_single_variable_line_setup() {
    let sol = solve(&single_xi(2, false)).unwrap();
    assert!(matches!(growth_diagnostic(&sol), Err(ValidateError::Setup(_))));
}

#[test]
fn first_taylor_coefficient_is_heat_evolution() {
    let grid = crate::pde::Grid1D::line(401, 10.0).unwrap();
    let phi = gaussian(1.0).sample(grid);
    let t = 0.5;
    let coeffs = taylor_oracle(&phi, t, 2, 1.0, 32).unwrap();
    let s = 1.0 + 4.0 * t;
    let exact = Field1D::from_fn(grid, |x| (-x * x / s).exp() / s.sqrt());
    assert!(coeffs[0].max_abs() < 1e-12);
    assert!(coeffs[1].max_abs_diff(&exact) < 1e-6);
}

#[test]
fn propagator_matches_taylor_oracle_at_low_order() {
    let cfg = growth_config(gaussian(1.0), 10.0, 401, 0.5, 0.001, 3).unwrap();
    let sol = solve(&cfg).unwrap();
    let phi = gaussian(1.0).sample(sol.grid);
    let oracle = taylor_oracle(&phi, 0.5, 3, 1.0, 32).unwrap();
    for n in 1..=3u32 {
        let u = sol.final_field(&MultiIndex::from_dense(&[n])).unwrap();
        let err = u.max_abs_diff(&oracle[n as usize]) / oracle[n as usize].max_abs();
        assert!(err < 1e-3, "order {n}: {err}");
    }
}

#[test]
fn report_passes_on_clean_config() {
    let cfg = config(json!({
        "domain": {"kind": "circle"},
        "grid_points": 32,
        "T": 1.0,
        "dt": 0.001,
        "truncation": {"d": 2, "N": 4},
        "noise": {"mu0": 1.0},
        "snapshot_stride": 100,
        "initial": [
            {"alpha": "0", "field": {"kind": "sine", "amplitude": 0.5, "wavenumber": 2.0}},
            {"alpha": "1", "field": {"kind": "cosine", "amplitude": 1.0, "wavenumber": 2.0}}
        ],
        "residual": {"z": [0.03, 0.01], "ell": 1.0, "times": [0.5]}
    }));
    let report = report_all(&cfg).unwrap();
    assert!(report.passed(), "{}", report.summary());
    assert!(
        report.checks.iter().all(|c| c.status == Status::Pass),
        "{}",
        report.summary()
    );
    let json: Value = serde_json::from_str(&report.to_json()).unwrap();
    assert!(json["checks"][0]["name"].is_string());
}

#[test]
fn non_summable_weights_skip_the_proposition_checks() {
    let mut cfg = single_xi(2, false);
    cfg.weights = WeightSpec::Geometric { base: 1.01 };
    let report = report_all(&cfg).unwrap();
    for name in ["proposition_exp_sum", "proposition_geometric_sum"] {
        assert_eq!(report.check(name).unwrap().status, Status::Skipped, "{name}");
    }
}

#[test]
fn flipped_convolution_fails_the_residual_check() {
    let cfg = single_xi(4, false);
    let opts = SolveOptions {
        fault: Some(Fault::FlipConvolutionSign),
        ..SolveOptions::default()
    };
    let report = report_all_with(&cfg, &opts).unwrap();
    assert_eq!(report.check("stransform_residual").unwrap().status, Status::Fail);
}
