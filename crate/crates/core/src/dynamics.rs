//! Right-hand sides of the controlled Landau-Lifschitz equation in the lab
//! and moving frames, the projected RK4 integrator and trajectory output.

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::field::{d1_slice, d2_slice, trapezoid_dot, Grid, SpinField, Vec3};
use crate::io::write_spin_csv;
use crate::schedule::ControlSchedule;
use crate::walls::{wall_m0, WallParams};

pub const DEFAULT_CFL: f64 = 0.25;
pub const MAX_CFL: f64 = 0.3;

/// Pre-projection norm deviation treated as a blow-up.
pub const BLOWUP_NORM_DEVIATION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    Lab,
    Moving,
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Frame::Lab => "lab",
            Frame::Moving => "moving",
        })
    }
}

impl FromStr for Frame {
    type Err = Error;

    fn from_str(s: &str) -> Result<Frame> {
        match s {
            "lab" => Ok(Frame::Lab),
            "moving" => Ok(Frame::Moving),
            other => Err(Error::Config(format!("unknown frame `{other}`"))),
        }
    }
}

/// h(u) = u_xx - u2 e2 - u3 e3 at one node.
#[inline]
fn effective_point(u: &Vec3, u_xx: &Vec3) -> Vec3 {
    Vec3::new(u_xx[0], u_xx[1] - u[1], u_xx[2] - u[2])
}

/// -u x h - u x (u x h), the field-driven part shared by both frames.
#[inline]
fn gyro_damping(u: &Vec3, h: &Vec3) -> Vec3 {
    let c = u.cross(h);
    -c - u.cross(&c)
}

#[inline]
pub(crate) fn lab_point(u: &Vec3, u_xx: &Vec3, delta: f64) -> Vec3 {
    let h = effective_point(u, u_xx);
    // u x e1 = (0, u3, -u2)
    let a = Vec3::new(0.0, u[2], -u[1]);
    gyro_damping(u, &h) - delta * (a + u.cross(&a))
}

/// Moving-frame right-hand side at one node. The advective derivative is
/// projected onto the tangent plane, which is exact in the continuum
/// (|v| = 1 gives <v_x, v> = 0) and keeps the discrete field tangent.
#[inline]
pub(crate) fn moving_point(v: &Vec3, v_x: &Vec3, v_xx: &Vec3, delta: f64) -> Vec3 {
    let h = effective_point(v, v_xx);
    let v_x_t = v_x - v_x.dot(v) * v;
    let drift = v_x_t + v[0] * v - Vec3::x();
    gyro_damping(v, &h) - delta * drift
}

/// Scratch buffers for repeated RHS evaluations on one grid.
#[derive(Debug, Clone)]
struct RhsScratch {
    lap: Vec<Vec3>,
    grad: Vec<Vec3>,
}

impl RhsScratch {
    fn new(n: usize) -> RhsScratch {
        RhsScratch {
            lap: vec![Vec3::zeros(); n],
            grad: vec![Vec3::zeros(); n],
        }
    }

    fn eval(&mut self, frame: Frame, u: &[Vec3], delta: f64, h: f64, out: &mut [Vec3]) {
        d2_slice(u, h, &mut self.lap);
        match frame {
            Frame::Lab => {
                for ((o, ui), li) in out.iter_mut().zip(u).zip(&self.lap) {
                    *o = lab_point(ui, li, delta);
                }
            }
            Frame::Moving => {
                d1_slice(u, h, &mut self.grad);
                for (((o, vi), gi), li) in out.iter_mut().zip(u).zip(&self.grad).zip(&self.lap) {
                    *o = moving_point(vi, gi, li, delta);
                }
            }
        }
    }
}

pub fn effective_field(u: &SpinField) -> Vec<Vec3> {
    let mut lap = vec![Vec3::zeros(); u.values().len()];
    d2_slice(u.values(), u.grid().spacing(), &mut lap);
    u.values()
        .iter()
        .zip(&lap)
        .map(|(ui, li)| effective_point(ui, li))
        .collect()
}

pub fn rhs(u: &SpinField, delta: f64, frame: Frame) -> Vec<Vec3> {
    let n = u.values().len();
    let mut out = vec![Vec3::zeros(); n];
    RhsScratch::new(n).eval(frame, u.values(), delta, u.grid().spacing(), &mut out);
    out
}

pub fn rhs_lab(u: &SpinField, delta: f64) -> Vec<Vec3> {
    rhs(u, delta, Frame::Lab)
}

pub fn rhs_moving(v: &SpinField, delta: f64) -> Vec<Vec3> {
    rhs(v, delta, Frame::Moving)
}

/// Discrete energy E(u) = 1/2 int (|u_x|^2 + u2^2 + u3^2).
///
/// The exchange part uses forward differences between neighbouring nodes,
/// the form whose gradient is the three-point Laplacian; with it the
/// undriven scheme dissipates E step by step. The anisotropy part uses the
/// trapezoid rule.
pub fn energy(u: &SpinField) -> f64 {
    let h = u.grid().spacing();
    let v = u.values();
    let exchange: f64 = v.windows(2).map(|w| (w[1] - w[0]).norm_squared()).sum::<f64>() / h;
    let aniso: Vec<f64> = v.iter().map(|x| x[1] * x[1] + x[2] * x[2]).collect();
    let ones = vec![1.0; v.len()];
    0.5 * (exchange + trapezoid_dot(&aniso, &ones, h))
}

/// Classical RK4 stepper with sphere projection, reusing its buffers.
#[derive(Debug, Clone)]
pub struct Stepper {
    frame: Frame,
    h: f64,
    scratch: RhsScratch,
    k: [Vec<Vec3>; 4],
    stage: Vec<Vec3>,
}

impl Stepper {
    pub fn new(grid: &Grid, frame: Frame) -> Stepper {
        let n = grid.len();
        let z = vec![Vec3::zeros(); n];
        Stepper {
            frame,
            h: grid.spacing(),
            scratch: RhsScratch::new(n),
            k: [z.clone(), z.clone(), z.clone(), z.clone()],
            stage: z,
        }
    }

    /// Advances `u` in place by one step. `t` only labels errors.
    pub fn advance(&mut self, u: &mut [Vec3], delta: f64, dt: f64, t: f64, project: bool) -> Result<()> {
        let (frame, h) = (self.frame, self.h);
        let [k1, k2, k3, k4] = &mut self.k;
        self.scratch.eval(frame, u, delta, h, k1);
        for ((s, ui), ki) in self.stage.iter_mut().zip(u.iter()).zip(k1.iter()) {
            *s = ui + 0.5 * dt * ki;
        }
        self.scratch.eval(frame, &self.stage, delta, h, k2);
        for ((s, ui), ki) in self.stage.iter_mut().zip(u.iter()).zip(k2.iter()) {
            *s = ui + 0.5 * dt * ki;
        }
        self.scratch.eval(frame, &self.stage, delta, h, k3);
        for ((s, ui), ki) in self.stage.iter_mut().zip(u.iter()).zip(k3.iter()) {
            *s = ui + dt * ki;
        }
        self.scratch.eval(frame, &self.stage, delta, h, k4);
        let c = dt / 6.0;
        for (i, ui) in u.iter_mut().enumerate() {
            let next = *ui + c * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            let norm = next.norm();
            if !((norm - 1.0).abs() <= BLOWUP_NORM_DEVIATION) {
                return Err(Error::BlowUp { t, node: i, norm });
            }
            *ui = if project { next / norm } else { next };
        }
        Ok(())
    }
}

/// One projected RK4 step.
pub fn step(u: &SpinField, delta: f64, dt: f64, frame: Frame) -> Result<SpinField> {
    let mut values = u.values().to_vec();
    Stepper::new(u.grid(), frame).advance(&mut values, delta, dt, 0.0, true)?;
    Ok(SpinField::from_unit_values(*u.grid(), values))
}

/// Time-stepping parameters.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub grid: Grid,
    pub dt: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub cfl_factor: f64,
    pub renormalize_every: usize,
    pub output_stride: usize,
    pub keep_snapshots: bool,
}

impl SimConfig {
    /// dt = cfl * h^2, projection every step, output every step.
    pub fn new(grid: Grid, t_end: f64, cfl_factor: f64) -> Result<SimConfig> {
        let cfg = SimConfig {
            grid,
            dt: cfl_factor * grid.spacing().powi(2),
            t_start: 0.0,
            t_end,
            cfl_factor,
            renormalize_every: 1,
            output_stride: 1,
            keep_snapshots: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Output stride giving roughly one record per `interval` time units.
    pub fn with_output_interval(mut self, interval: f64) -> SimConfig {
        self.output_stride = ((interval / self.dt).round() as usize).max(1);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let h2 = self.grid.spacing().powi(2);
        if !(self.cfl_factor > 0.0 && self.cfl_factor <= MAX_CFL) {
            return Err(Error::Config(format!(
                "cfl factor {} outside (0, {MAX_CFL}]",
                self.cfl_factor
            )));
        }
        if !(self.dt > 0.0 && self.dt <= self.cfl_factor * h2 * (1.0 + 1e-12)) {
            return Err(Error::Config(format!(
                "dt = {} violates dt <= c h^2 = {}",
                self.dt,
                self.cfl_factor * h2
            )));
        }
        if !(self.t_end > self.t_start && self.t_end.is_finite()) {
            return Err(Error::Config(format!(
                "need t_end > t_start, got [{}, {}]",
                self.t_start, self.t_end
            )));
        }
        if self.renormalize_every == 0 || self.output_stride == 0 {
            return Err(Error::Config("strides must be positive".into()));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        ((self.t_end - self.t_start) / self.dt - 1e-9).ceil() as usize
    }

    pub fn time_of(&self, step: usize) -> f64 {
        self.t_start + step as f64 * self.dt
    }
}

/// Optional measurements supplied by a probe at each output time.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Probe {
    pub sigma_est: Option<f64>,
    pub theta_est: Option<f64>,
    pub w_h2: Option<f64>,
    pub lyapunov: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub delta: f64,
    pub norm_drift: f64,
    pub probe: Probe,
}

#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub snapshots: Vec<(f64, SpinField)>,
    pub records: Vec<DiagnosticsRecord>,
    pub final_state: Option<SpinField>,
}

impl Trajectory {
    pub fn final_field(&self) -> &SpinField {
        self.final_state
            .as_ref()
            .expect("trajectory always stores its final state")
    }

    pub fn max_norm_drift(&self) -> f64 {
        self.records.iter().fold(0.0, |m, r| m.max(r.norm_drift))
    }
}

/// Integrates from `u0` under `schedule` without probes.
pub fn simulate(u0: &SpinField, schedule: &ControlSchedule, cfg: &SimConfig, frame: Frame) -> Result<Trajectory> {
    simulate_with(u0, schedule, cfg, frame, |_, _| Ok(Probe::default()))
}

/// Integrates from `u0`, calling `probe` at every output time.
///
/// delta is sampled right-continuously at the start of each step and held
/// for all four stages.
pub fn simulate_with<F>(
    u0: &SpinField,
    schedule: &ControlSchedule,
    cfg: &SimConfig,
    frame: Frame,
    mut probe: F,
) -> Result<Trajectory>
where
    F: FnMut(f64, &SpinField) -> Result<Probe>,
{
    cfg.validate()?;
    u0.grid().check_same(&cfg.grid)?;
    let n_steps = cfg.n_steps();
    let mut stepper = Stepper::new(&cfg.grid, frame);
    let mut values = u0.values().to_vec();
    let mut traj = Trajectory::default();

    let mut record = |step: usize, values: &[Vec3], traj: &mut Trajectory| -> Result<()> {
        let t = cfg.time_of(step);
        let field = SpinField::from_unit_values(cfg.grid, values.to_vec());
        let p = probe(t, &field)?;
        traj.records.push(DiagnosticsRecord {
            t,
            delta: schedule.eval(t),
            norm_drift: field.norm_drift(),
            probe: p,
        });
        if cfg.keep_snapshots {
            traj.snapshots.push((t, field));
        }
        Ok(())
    };

    record(0, &values, &mut traj)?;
    for n in 0..n_steps {
        let t = cfg.time_of(n);
        let delta = schedule.eval(t);
        let project = (n + 1) % cfg.renormalize_every == 0 || n + 1 == n_steps;
        stepper.advance(&mut values, delta, cfg.dt, t, project)?;
        if (n + 1) % cfg.output_stride == 0 || n + 1 == n_steps {
            record(n + 1, &values, &mut traj)?;
        }
    }
    traj.final_state = Some(SpinField::from_unit_values(cfg.grid, values));
    Ok(traj)
}

/// Sup-norm of d/dt u^{delta,theta,sigma} - rhs_lab(u^{delta,theta,sigma}).
///
/// The time derivative is delta (e1 x u + u_x), with u_x taken by the
/// discrete first derivative.
pub fn residual_travelling_wall(p: &WallParams, grid: &Grid, t: f64) -> f64 {
    let u = crate::walls::wall_profile(p, t, grid);
    let n = grid.len();
    let mut u_x = vec![Vec3::zeros(); n];
    d1_slice(u.values(), grid.spacing(), &mut u_x);
    let r = rhs_lab(&u, p.delta);
    u.values()
        .iter()
        .zip(&u_x)
        .zip(&r)
        .map(|((ui, gi), ri)| {
            let dt_u = p.delta * (Vec3::x().cross(ui) + gi);
            (dt_u - ri).norm()
        })
        .fold(0.0, f64::max)
}

/// Largest nodal norm of a vector field.
pub fn sup_norm(v: &[Vec3]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.norm()))
}

pub const DIAGNOSTICS_HEADER: &str = "t,delta,norm_drift,sigma_est,theta_est,w_h2,lyapunov";

fn opt(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.16e}"),
        None => "nan".to_string(),
    }
}

pub fn write_diagnostics_csv(path: &Path, records: &[DiagnosticsRecord]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "{DIAGNOSTICS_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{:.16e},{:.16e},{:.16e},{},{},{},{}",
            r.t,
            r.delta,
            r.norm_drift,
            opt(r.probe.sigma_est),
            opt(r.probe.theta_est),
            opt(r.probe.w_h2),
            opt(r.probe.lyapunov)
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn snapshot_name(t: f64) -> String {
    format!("snap_{t:.6}.csv")
}

pub fn write_snapshots(dir: &Path, traj: &Trajectory) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (t, field) in &traj.snapshots {
        write_spin_csv(&dir.join(snapshot_name(*t)), field)?;
    }
    Ok(())
}

/// Exact stationary wall; convenience for the frequent u0 = M0 case.
pub fn stationary_wall(grid: &Grid) -> SpinField {
    SpinField::from_unit_values(*grid, grid.nodes().map(wall_m0).collect())
}
