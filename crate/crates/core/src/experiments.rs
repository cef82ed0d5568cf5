//! Open-loop steering of the wall: control planning, wall tracking, best
//! matching travelling profiles and the end-to-end steering experiment.

use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use crate::dynamics::{
    simulate_with, write_diagnostics_csv, DiagnosticsRecord, Frame, Probe, SimConfig, DEFAULT_CFL,
};
use crate::error::{Error, Result};
use crate::field::{h2_dist, Grid, PairField, SpinField};
use crate::schedule::ControlSchedule;
use crate::stability::{
    decay_fit, decompose_field, lyapunov_v, orthogonal_perturbation, perturbed_wall, ChartOptions, Lambda,
};
use crate::walls::{wall_profile, WallParams};

/// Two-level control: delta2 - (sigma2 - sigma1) / T on [0, T), delta2 after.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlPlan {
    pub sigma1: f64,
    pub sigma2: f64,
    pub first_level: f64,
    pub delta2: f64,
    pub switch_time: f64,
    pub schedule: ControlSchedule,
    pub delta0_bound: f64,
}

impl ControlPlan {
    pub fn is_admissible(&self) -> bool {
        self.switch_time > 0.0
            && self.first_level.abs() <= self.delta0_bound * (1.0 + 1e-12)
            && self.delta2.abs() <= self.delta0_bound
    }
}

/// Multiple of `dt` at or above `t`.
pub fn align_up(t: f64, dt: f64) -> f64 {
    ((t / dt) - 1e-9).ceil().max(1.0) * dt
}

/// Safety factor applied to the smallest admissible switch time.
pub const SWITCH_SAFETY: f64 = 2.0;

/// Switch time used when no translation is requested and no hint is given.
pub const IDLE_SWITCH_TIME: f64 = 1.0;

pub fn plan_control(
    sigma1: f64,
    sigma2: f64,
    delta2: f64,
    delta0_bound: f64,
    dt: f64,
    t_hint: Option<f64>,
) -> Result<ControlPlan> {
    if !(delta0_bound > 0.0 && dt > 0.0) {
        return Err(Error::Precondition(format!(
            "need delta0_bound > 0 and dt > 0, got {delta0_bound} and {dt}"
        )));
    }
    if !(delta2.abs() <= delta0_bound) {
        return Err(Error::Precondition(format!(
            "|delta2| = {} exceeds the admissible bound {delta0_bound}",
            delta2.abs()
        )));
    }
    let shift = sigma2 - sigma1;
    let admissible = |t: f64| t > 0.0 && (delta2 - shift / t).abs() <= delta0_bound * (1.0 + 1e-12);

    let hinted = t_hint.map(|t| align_up(t, dt)).filter(|&t| admissible(t));
    let switch_time = match hinted {
        Some(t) => t,
        None => {
            // The upper constraint holds automatically because shift / T has
            // the sign that moves the level away from the violated side.
            let slack = if shift > 0.0 {
                delta2 + delta0_bound
            } else {
                delta0_bound - delta2
            };
            let t_min = if shift == 0.0 {
                IDLE_SWITCH_TIME / SWITCH_SAFETY
            } else if slack > 0.0 {
                shift.abs() / slack
            } else {
                return Err(Error::Precondition(format!(
                    "delta2 = {delta2} sits on the bound; no finite switch time moves the wall by {shift}"
                )));
            };
            align_up(SWITCH_SAFETY * t_min, dt)
        }
    };
    let first_level = delta2 - shift / switch_time;
    let schedule = ControlSchedule::new(vec![switch_time], vec![first_level, delta2])?;
    Ok(ControlPlan {
        sigma1,
        sigma2,
        first_level,
        delta2,
        switch_time,
        schedule,
        delta0_bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallEstimate {
    pub sigma_est: f64,
    pub theta_est: f64,
    /// The transverse part (u2, u3) at the crossing is far from zero.
    pub valid: bool,
}

/// Wrap an angle into (-pi, pi].
pub fn wrap_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Locate the single - to + zero crossing of u1 and read the phase there.
pub fn track_wall(u: &SpinField) -> Result<WallEstimate> {
    let v = u.values();
    let crossings: Vec<usize> = (0..v.len() - 1).filter(|&i| (v[i][0] < 0.0) != (v[i + 1][0] < 0.0)).collect();
    let i = match crossings.as_slice() {
        [] => return Err(Error::NoWall),
        [i] => *i,
        many => return Err(Error::MultiWall(many.len())),
    };
    if v[i][0] >= 0.0 {
        return Err(Error::NoWall);
    }
    let a = -v[i][0] / (v[i + 1][0] - v[i][0]);
    let grid = u.grid();
    let sigma_est = grid.node(i) + a * grid.spacing();
    let u2 = v[i][1] + a * (v[i + 1][1] - v[i][1]);
    let u3 = v[i][2] + a * (v[i + 1][2] - v[i][2]);
    Ok(WallEstimate {
        sigma_est,
        theta_est: wrap_angle((-u2).atan2(u3)),
        valid: u2.hypot(u3) > 0.5,
    })
}

/// Nearest-branch continuation of a wrapped angle series.
pub fn unwrap_phase(angles: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(angles.len());
    let mut prev: Option<f64> = None;
    for &a in angles {
        let next = match prev {
            None => a,
            Some(p) => p + wrap_angle(a - p),
        };
        out.push(next);
        prev = Some(next);
    }
    out
}

const GOLDEN_TOL: f64 = 1e-10;

/// Minimise f on [lo, hi] by golden-section search.
fn golden_section(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> Result<f64>) -> Result<(f64, f64)> {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while hi - lo > GOLDEN_TOL {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (lo + hi);
    Ok((x, f(x)?))
}

/// The phase theta minimising the H2 distance from `u` to the travelling
/// wall (delta, theta, sigma_target) at time t, and that distance.
pub fn best_matching_profile(u: &SpinField, delta: f64, t: f64, sigma_target: f64) -> Result<(f64, f64)> {
    let est = track_wall(u)?;
    let seed = est.theta_est - delta * t;
    let grid = *u.grid();
    let dist = |theta: f64| h2_dist(u, &wall_profile(&WallParams::new(delta, theta, sigma_target), t, &grid));
    let (theta, d) = golden_section(seed - PI / 2.0, seed + PI / 2.0, dist)?;
    Ok((wrap_angle(theta), d))
}

#[derive(Debug, Clone)]
pub struct Theorem1Config {
    pub grid: Grid,
    pub cfl: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub theta1: f64,
    pub epsilon: f64,
    pub epsilon0: f64,
    pub delta0: f64,
    /// H2 size of the initial kernel-orthogonal perturbation; 0 for none.
    pub perturbation: f64,
    pub seed: u64,
    pub t_hint: Option<f64>,
    pub post_horizon: f64,
    pub output_interval: f64,
    /// Start of the W-decay fit window, measured from the switch time.
    pub decay_skip: f64,
    /// The fit window ends once the per-record change of W falls to this
    /// multiple of its late-time level.
    pub decay_floor: f64,
}

impl Default for Theorem1Config {
    fn default() -> Self {
        Theorem1Config {
            grid: Grid::new(20.0, 1025).expect("valid default grid"),
            cfl: DEFAULT_CFL,
            sigma1: 0.0,
            sigma2: 5.0,
            delta1: 0.02,
            delta2: 0.03,
            theta1: 0.0,
            epsilon: 0.05,
            epsilon0: 0.05,
            delta0: 0.1,
            perturbation: 1e-3,
            seed: 42,
            t_hint: None,
            post_horizon: 100.0,
            output_interval: 0.1,
            decay_skip: 1.0,
            decay_floor: 1.5,
        }
    }
}

impl Theorem1Config {
    pub fn dt(&self) -> f64 {
        self.cfl * self.grid.spacing().powi(2)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, d) in [("delta1", self.delta1), ("delta2", self.delta2)] {
            if !(d.abs() <= self.delta0) {
                return Err(Error::Precondition(format!(
                    "|{name}| = {} exceeds delta0 = {}",
                    d.abs(),
                    self.delta0
                )));
            }
        }
        if !(self.epsilon > 0.0 && self.epsilon <= self.epsilon0) {
            return Err(Error::Precondition(format!(
                "epsilon = {} must lie in (0, {}]",
                self.epsilon, self.epsilon0
            )));
        }
        if !(self.perturbation >= 0.0 && self.perturbation <= self.epsilon) {
            return Err(Error::Precondition(format!(
                "perturbation size {} must lie in [0, epsilon = {}]",
                self.perturbation, self.epsilon
            )));
        }
        if !(self.post_horizon > 0.0 && self.output_interval > 0.0) {
            return Err(Error::Config("post_horizon and output_interval must be positive".into()));
        }
        if !(self.decay_floor > 1.0) {
            return Err(Error::Config(format!("decay_floor = {} must exceed 1", self.decay_floor)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    AtMost,
    AtLeast,
    Above,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub comparison: Comparison,
}

impl CriterionResult {
    pub fn new(name: impl Into<String>, measured: f64, threshold: f64, comparison: Comparison) -> CriterionResult {
        CriterionResult {
            name: name.into(),
            measured,
            threshold,
            comparison,
        }
    }

    pub fn pass(&self) -> bool {
        match self.comparison {
            Comparison::AtMost => self.measured <= self.threshold,
            Comparison::AtLeast => self.measured >= self.threshold,
            Comparison::Above => self.measured > self.threshold,
        }
    }
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.comparison {
            Comparison::AtMost => "<=",
            Comparison::AtLeast => ">=",
            Comparison::Above => ">",
        };
        write!(
            f,
            "{} {}: {:.6e} {op} {:.6e}",
            if self.pass() { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.threshold
        )
    }
}

pub const REPORT_HEADER: &str = "criterion,measured,threshold,pass";

pub fn write_report_csv(path: &Path, criteria: &[CriterionResult]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "{REPORT_HEADER}")?;
    for c in criteria {
        writeln!(w, "{},{:.16e},{:.16e},{}", c.name, c.measured, c.threshold, c.pass())?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub plan: ControlPlan,
    pub initial_distance: f64,
    pub distance_at_switch: f64,
    /// Best-matching phase at the switch time.
    pub theta2: f64,
    /// Limit of the symmetry coordinates, expressed as (theta, sigma) of the
    /// target family.
    pub lambda_limit: Lambda,
    pub lambda_drift: f64,
    pub decay_rate: f64,
    pub decay_r_squared: f64,
    pub decay_window: (f64, f64),
    pub monotone_slack: f64,
    pub max_norm_drift: f64,
    pub criteria: Vec<CriterionResult>,
    pub diagnostics: Vec<DiagnosticsRecord>,
    pub final_state: SpinField,
    pub runtime_secs: f64,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(CriterionResult::pass)
    }

    /// Writes `diagnostics.csv` and `report.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        write_diagnostics_csv(&dir.join("diagnostics.csv"), &self.diagnostics)?;
        write_report_csv(&dir.join("report.csv"), &self.criteria)
    }
}

/// Slack allowed on the monotone decrease of the distance to the limit.
pub const MONOTONE_SLACK: f64 = 1e-8;
/// Largest admissible nodal deviation | |u| - 1 |.
pub const SPHERE_TOL: f64 = 1e-12;

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.at_stage(name))
}

/// Steer a wall from sigma1 to sigma2 with the two-level open-loop control,
/// then follow the moving-frame solution under the final level and measure
/// convergence of its shape and symmetry coordinates.
pub fn run_theorem1(cfg: &Theorem1Config) -> Result<ExperimentReport> {
    let started = Instant::now();
    stage("validate", cfg.validate())?;
    let grid = cfg.grid;
    let dt = cfg.dt();
    let chart = ChartOptions::default();

    let u0 = stage("initial", initial_field(cfg))?;
    let plan = stage(
        "plan",
        plan_control(cfg.sigma1, cfg.sigma2, cfg.delta2, cfg.delta0, dt, cfg.t_hint),
    )?;
    let switch_time = plan.switch_time;
    let (_, initial_distance) = stage("initial", best_matching_profile(&u0, cfg.delta1, 0.0, cfg.sigma1))?;

    let steer_cfg = stage("steer", SimConfig::new(grid, switch_time, cfg.cfl))?.with_output_interval(cfg.output_interval);
    let steer = stage(
        "steer",
        simulate_with(&u0, &plan.schedule, &steer_cfg, Frame::Lab, |_, u| {
            let est = track_wall(u)?;
            let d = decompose_field(u, est.theta_est, est.sigma_est, &chart)?;
            Ok(Probe {
                sigma_est: Some(est.sigma_est),
                theta_est: Some(est.theta_est),
                w_h2: Some(d.w.h2_norm()),
                lyapunov: Some(lyapunov_v(&d.w)),
            })
        }),
    )?;
    let u_switch = steer.final_field().clone();
    let (theta2, distance_at_switch) =
        stage("match", best_matching_profile(&u_switch, cfg.delta2, switch_time, cfg.sigma2))?;

    // Moving frame from the switch time: v(s, x) = R_{-delta2 s} u(T + s, x - delta2 s).
    let phase_ref = theta2 + cfg.delta2 * switch_time;
    let position_ref = cfg.sigma2 - cfg.delta2 * switch_time;
    let settle_cfg = SimConfig {
        keep_snapshots: true,
        ..stage("settle", SimConfig::new(grid, cfg.post_horizon, cfg.cfl))?.with_output_interval(cfg.output_interval)
    };
    let mut shapes: Vec<(f64, PairField, Lambda)> = Vec::new();
    let delta2 = cfg.delta2;
    let settle = stage(
        "settle",
        simulate_with(
            &u_switch,
            &ControlSchedule::constant(delta2),
            &settle_cfg,
            Frame::Moving,
            |s, v| {
                let est = track_wall(v)?;
                let d = decompose_field(v, phase_ref, position_ref, &chart)?;
                let probe = Probe {
                    sigma_est: Some(est.sigma_est - delta2 * s),
                    theta_est: Some(wrap_angle(est.theta_est + delta2 * s)),
                    w_h2: Some(d.w.h2_norm()),
                    lyapunov: Some(lyapunov_v(&d.w)),
                };
                shapes.push((s, d.w, d.lambda));
                Ok(probe)
            },
        ),
    )?;

    let lambda_end = shapes.last().map(|s| s.2).expect("at least one record");
    let lambda_limit = Lambda::new(
        wrap_angle(lambda_end.theta - delta2 * switch_time),
        lambda_end.sigma + delta2 * switch_time,
    );
    let lambda_drift = wrap_angle(lambda_limit.theta - theta2).abs() + (lambda_limit.sigma - cfg.sigma2).abs();

    // The shape relaxes exponentially towards a profile that rides with the
    // wall, so |W(s) - W_end| carries a linear drift. Per-record increments
    // settle on a constant floor instead; their excess over it decays at the
    // relaxation rate.
    let mut increments = Vec::with_capacity(shapes.len());
    for pair in shapes.windows(2) {
        increments.push((pair[0].0, stage("decay", pair[1].1.sub(&pair[0].1))?.h2_norm()));
    }
    let mut late: Vec<f64> = increments
        .iter()
        .filter(|(s, _)| *s >= 0.5 * cfg.post_horizon)
        .map(|(_, v)| *v)
        .collect();
    late.sort_by(f64::total_cmp);
    let floor = late.get(late.len() / 2).copied().unwrap_or(0.0);
    let series: Vec<(f64, f64)> = increments
        .iter()
        .copied()
        .filter(|(s, _)| *s >= cfg.decay_skip)
        .take_while(|(_, v)| *v > cfg.decay_floor * floor)
        .map(|(s, v)| (s, v - floor))
        .collect();
    if series.is_empty() {
        return Err(Error::DecayFit("no W increments above the late-time floor".into()).at_stage("decay"));
    }
    let fit = stage("decay", decay_fit(&series, cfg.decay_skip))?;
    let decay_window = (series[0].0, series[series.len() - 1].0);

    let limit = settle.final_field();
    let mut monotone_slack: f64 = 0.0;
    let mut prev: Option<f64> = None;
    for (s, v) in &settle.snapshots {
        if *s < cfg.decay_skip {
            continue;
        }
        let d = stage("monotone", h2_dist(v, limit))?;
        if let Some(p) = prev {
            monotone_slack = monotone_slack.max(d - p);
        }
        prev = Some(d);
    }

    let mut diagnostics = steer.records.clone();
    diagnostics.extend(settle.records.iter().skip(1).map(|r| DiagnosticsRecord {
        t: switch_time + r.t,
        ..*r
    }));
    let max_norm_drift = diagnostics.iter().fold(0.0, |m: f64, r| m.max(r.norm_drift));

    let criteria = vec![
        CriterionResult::new("initial_distance", initial_distance, cfg.epsilon, Comparison::AtMost),
        CriterionResult::new("distance_at_switch", distance_at_switch, cfg.epsilon, Comparison::AtMost),
        CriterionResult::new("lambda_drift", lambda_drift, cfg.epsilon, Comparison::AtMost),
        CriterionResult::new("w_decay_rate", fit.rate, 0.0, Comparison::Above),
        CriterionResult::new("monotone_improvement", monotone_slack, MONOTONE_SLACK, Comparison::AtMost),
        CriterionResult::new("sphere_constraint", max_norm_drift, SPHERE_TOL, Comparison::AtMost),
    ];

    Ok(ExperimentReport {
        plan,
        initial_distance,
        distance_at_switch,
        theta2,
        lambda_limit,
        lambda_drift,
        decay_rate: fit.rate,
        decay_r_squared: fit.r_squared,
        decay_window,
        monotone_slack,
        max_norm_drift,
        criteria,
        diagnostics,
        final_state: settle.final_field().clone(),
        runtime_secs: started.elapsed().as_secs_f64(),
    })
}

/// Wall (theta1, sigma1) plus the configured kernel-orthogonal perturbation.
pub fn initial_field(cfg: &Theorem1Config) -> Result<SpinField> {
    let lambda = Lambda::new(cfg.theta1, cfg.sigma1);
    let centred = cfg.grid.shifted(-cfg.sigma1);
    let w = if cfg.perturbation > 0.0 {
        orthogonal_perturbation(&centred, cfg.perturbation, cfg.seed)?
    } else {
        PairField::zeros(centred)
    };
    perturbed_wall(lambda, &w, &cfg.grid)
}
