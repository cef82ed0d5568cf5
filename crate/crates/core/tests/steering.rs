use llwall::experiments::{run_theorem1, Theorem1Config};
use llwall::{Error, Grid};

// With nothing to steer the wall only relaxes onto the discrete equilibrium,
// an O(h^2) offset from M0; the 1e-4 bound needs N = 4097 at X = 20.
#[test]
fn still_wall_passes_trivially() {
    let cfg = Theorem1Config {
        grid: Grid::new(20.0, 4097).unwrap(),
        sigma2: 0.0,
        delta1: 0.0,
        delta2: 0.0,
        perturbation: 0.0,
        post_horizon: 4.0,
        output_interval: 0.05,
        ..Theorem1Config::default()
    };
    let rep = run_theorem1(&cfg).unwrap();
    assert!(rep.passed());
    assert!(rep.distance_at_switch <= 1e-4, "{}", rep.distance_at_switch);
    assert!(rep.lambda_drift <= 1e-4, "{}", rep.lambda_drift);
    assert_eq!(rep.plan.delta2, 0.0);
}

#[test]
fn strong_final_field_is_rejected_before_simulating() {
    let cfg = Theorem1Config {
        delta2: 0.5,
        ..Theorem1Config::default()
    };
    let err = run_theorem1(&cfg).unwrap_err();
    assert!(err.to_string().contains("delta2"), "{err}");
    assert!(matches!(err, Error::Stage { .. }));
}

#[test]
fn short_move_on_a_coarse_grid() {
    let cfg = Theorem1Config {
        grid: Grid::new(20.0, 257).unwrap(),
        sigma2: 2.0,
        post_horizon: 15.0,
        ..Theorem1Config::default()
    };
    let rep = run_theorem1(&cfg).unwrap();
    assert!(rep.passed(), "{:?}", rep.criteria);
    assert!((rep.lambda_limit.sigma - 2.0).abs() <= cfg.epsilon);
    assert!(rep.max_norm_drift <= 1e-12);
    let dir = tempfile::tempdir().unwrap();
    rep.write(dir.path()).unwrap();
    let report = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert!(report.starts_with("criterion,measured,threshold,pass\n"));
    assert_eq!(report.lines().count(), rep.criteria.len() + 1);
    let diag = std::fs::read_to_string(dir.path().join("diagnostics.csv")).unwrap();
    assert!(diag.starts_with("t,delta,norm_drift,sigma_est,theta_est,w_h2,lyapunov\n"));
}
