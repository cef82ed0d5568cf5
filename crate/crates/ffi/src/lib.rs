//! C ABI over `llwall`.
//!
//! Objects cross the boundary as opaque handles created by `*_new` style
//! functions and released with the matching `*_free`. Every fallible call
//! returns an `LlwallStatus`; on failure the message is kept per thread and
//! can be read with `llwall_last_error_message`.

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use llwall::dynamics::{simulate, Frame, SimConfig};
use llwall::experiments::{best_matching_profile, run_theorem1, track_wall, Theorem1Config};
use llwall::field::h2_dist;
use llwall::stability::spectral_report;
use llwall::walls::wall_profile;
use llwall::{ControlSchedule, Error, Grid, SpinField, Vec3, WallParams};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LlwallStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    NoWall = 4,
    Io = 5,
    Panic = 6,
}

impl From<&Error> for LlwallStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidGrid(_)
            | Error::GridMismatch(_)
            | Error::NotUnitNorm { .. }
            | Error::DegenerateVector(_)
            | Error::InvalidSchedule(_)
            | Error::Config(_)
            | Error::Precondition(_)
            | Error::OutOfRegime(_)
            | Error::Csv { .. } => LlwallStatus::InvalidArgument,
            Error::NoWall | Error::MultiWall(_) => LlwallStatus::NoWall,
            Error::Io(_) => LlwallStatus::Io,
            Error::Stage { source, .. } => LlwallStatus::from(source.as_ref()),
            _ => LlwallStatus::Numerical,
        }
    }
}

/// Simulation frame selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LlwallFrame {
    Lab = 0,
    Moving = 1,
}

/// Opaque uniform grid.
pub struct LlwallGrid(Grid);

/// Opaque sphere-valued field.
pub struct LlwallField(SpinField);

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct LlwallSteeringParams {
    pub n: usize,
    pub half_width: f64,
    pub cfl: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub theta1: f64,
    pub epsilon: f64,
    pub delta0: f64,
    pub perturbation: f64,
    pub seed: u64,
    /// Requested switch time; values <= 0 let the planner choose.
    pub switch_time_hint: f64,
    pub post_horizon: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct LlwallSteeringSummary {
    pub switch_time: f64,
    pub first_level: f64,
    pub initial_distance: f64,
    pub distance_at_switch: f64,
    pub theta2: f64,
    pub theta_limit: f64,
    pub sigma_limit: f64,
    pub lambda_drift: f64,
    pub decay_rate: f64,
    pub max_norm_drift: f64,
    pub passed: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_last_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn guard(f: impl FnOnce() -> Result<(), (LlwallStatus, String)>) -> LlwallStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LlwallStatus::Ok,
        Ok(Err((status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            LlwallStatus::Panic
        }
    }
}

fn lift<T>(r: llwall::Result<T>) -> Result<T, (LlwallStatus, String)> {
    r.map_err(|e| (LlwallStatus::from(&e), e.to_string()))
}

fn null(what: &str) -> (LlwallStatus, String) {
    (LlwallStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (LlwallStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), (LlwallStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Copy the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn llwall_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn llwall_grid_new(half_width: f64, n: usize, out: *mut *mut LlwallGrid) -> LlwallStatus {
    guard(|| {
        let g = lift(Grid::new(half_width, n))?;
        store(out, LlwallGrid(g))
    })
}

/// # Safety
/// `grid` must be null or a handle from `llwall_grid_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn llwall_grid_free(grid: *mut LlwallGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// # Safety
/// `grid` must be a live grid handle.
#[no_mangle]
pub unsafe extern "C" fn llwall_grid_spacing(grid: *const LlwallGrid) -> f64 {
    grid.as_ref().map_or(f64::NAN, |g| g.0.spacing())
}

/// Travelling wall profile (delta, theta, sigma) at time t.
///
/// # Safety
/// `grid` must be a live grid handle and `out` valid for writing a handle.
#[no_mangle]
pub unsafe extern "C" fn llwall_field_wall(
    grid: *const LlwallGrid,
    delta: f64,
    theta: f64,
    sigma: f64,
    t: f64,
    out: *mut *mut LlwallField,
) -> LlwallStatus {
    guard(|| {
        let g = deref(grid, "grid")?;
        let u = wall_profile(&WallParams::new(delta, theta, sigma), t, &g.0);
        store(out, LlwallField(u))
    })
}

/// Field from 3 * N interleaved components (u1, u2, u3 per node).
///
/// # Safety
/// `values` must point to `len` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn llwall_field_from_values(
    grid: *const LlwallGrid,
    values: *const f64,
    len: usize,
    out: *mut *mut LlwallField,
) -> LlwallStatus {
    guard(|| {
        let g = deref(grid, "grid")?;
        if values.is_null() {
            return Err(null("values"));
        }
        if len != 3 * g.0.len() {
            return Err((
                LlwallStatus::InvalidArgument,
                format!("expected {} values, got {len}", 3 * g.0.len()),
            ));
        }
        let raw = std::slice::from_raw_parts(values, len);
        let vs = raw.chunks_exact(3).map(|c| Vec3::new(c[0], c[1], c[2])).collect();
        let u = lift(SpinField::new(g.0, vs))?;
        store(out, LlwallField(u))
    })
}

/// # Safety
/// `field` must be null or a live field handle.
#[no_mangle]
pub unsafe extern "C" fn llwall_field_free(field: *mut LlwallField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Number of nodes, or 0 for a null handle.
///
/// # Safety
/// `field` must be null or a live field handle.
#[no_mangle]
pub unsafe extern "C" fn llwall_field_len(field: *const LlwallField) -> usize {
    field.as_ref().map_or(0, |f| f.0.values().len())
}

/// Copy the 3 * N interleaved components into `buf`.
///
/// # Safety
/// `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn llwall_field_values(field: *const LlwallField, buf: *mut f64, len: usize) -> LlwallStatus {
    guard(|| {
        let f = deref(field, "field")?;
        if buf.is_null() {
            return Err(null("buffer"));
        }
        let vs = f.0.values();
        if len < 3 * vs.len() {
            return Err((
                LlwallStatus::InvalidArgument,
                format!("buffer holds {len} doubles, need {}", 3 * vs.len()),
            ));
        }
        let out = std::slice::from_raw_parts_mut(buf, len);
        for (chunk, v) in out.chunks_exact_mut(3).zip(vs) {
            chunk.copy_from_slice(v.as_slice());
        }
        Ok(())
    })
}

/// Integrate under a constant field with dt = cfl * h^2.
///
/// # Safety
/// `field` must be a live field handle and `out` valid for writing a handle.
#[no_mangle]
pub unsafe extern "C" fn llwall_simulate(
    field: *const LlwallField,
    delta: f64,
    t_end: f64,
    cfl: f64,
    frame: LlwallFrame,
    out: *mut *mut LlwallField,
) -> LlwallStatus {
    guard(|| {
        let f = deref(field, "field")?;
        let cfg = lift(SimConfig::new(*f.0.grid(), t_end, cfl))?.with_output_interval(t_end);
        let frame = match frame {
            LlwallFrame::Lab => Frame::Lab,
            LlwallFrame::Moving => Frame::Moving,
        };
        let traj = lift(simulate(&f.0, &ControlSchedule::constant(delta), &cfg, frame))?;
        store(out, LlwallField(traj.final_field().clone()))
    })
}

/// # Safety
/// Pointers must be valid; `sigma` and `theta` must be writable.
#[no_mangle]
pub unsafe extern "C" fn llwall_track_wall(field: *const LlwallField, sigma: *mut f64, theta: *mut f64) -> LlwallStatus {
    guard(|| {
        let f = deref(field, "field")?;
        if sigma.is_null() || theta.is_null() {
            return Err(null("output pointer"));
        }
        let est = lift(track_wall(&f.0))?;
        *sigma = est.sigma_est;
        *theta = est.theta_est;
        Ok(())
    })
}

/// # Safety
/// Both handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn llwall_h2_distance(a: *const LlwallField, b: *const LlwallField, out: *mut f64) -> LlwallStatus {
    guard(|| {
        let (a, b) = (deref(a, "a")?, deref(b, "b")?);
        if out.is_null() {
            return Err(null("output pointer"));
        }
        *out = lift(h2_dist(&a.0, &b.0))?;
        Ok(())
    })
}

/// Best-matching phase and distance to the travelling wall (delta, ., sigma) at t.
///
/// # Safety
/// `field` must be live; `theta` and `distance` must be writable.
#[no_mangle]
pub unsafe extern "C" fn llwall_best_match(
    field: *const LlwallField,
    delta: f64,
    t: f64,
    sigma: f64,
    theta: *mut f64,
    distance: *mut f64,
) -> LlwallStatus {
    guard(|| {
        let f = deref(field, "field")?;
        if theta.is_null() || distance.is_null() {
            return Err(null("output pointer"));
        }
        let (th, d) = lift(best_matching_profile(&f.0, delta, t, sigma))?;
        *theta = th;
        *distance = d;
        Ok(())
    })
}

/// Largest `k` eigenvalues of the discrete linearised operator, descending.
///
/// # Safety
/// `eigenvalues` must point to `k` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn llwall_spectrum(grid: *const LlwallGrid, k: usize, eigenvalues: *mut f64) -> LlwallStatus {
    guard(|| {
        let g = deref(grid, "grid")?;
        if eigenvalues.is_null() {
            return Err(null("eigenvalues"));
        }
        let rep = lift(spectral_report(&g.0, k))?;
        std::slice::from_raw_parts_mut(eigenvalues, k).copy_from_slice(&rep.eigenvalues);
        Ok(())
    })
}

/// Default steering parameters.
#[no_mangle]
pub extern "C" fn llwall_steering_default_params() -> LlwallSteeringParams {
    let d = Theorem1Config::default();
    LlwallSteeringParams {
        n: d.grid.len(),
        half_width: d.grid.half_width(),
        cfl: d.cfl,
        sigma1: d.sigma1,
        sigma2: d.sigma2,
        delta1: d.delta1,
        delta2: d.delta2,
        theta1: d.theta1,
        epsilon: d.epsilon,
        delta0: d.delta0,
        perturbation: d.perturbation,
        seed: d.seed,
        switch_time_hint: 0.0,
        post_horizon: d.post_horizon,
    }
}

/// Run the steering experiment and fill `out`.
///
/// # Safety
/// `params` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn llwall_run_steering(
    params: *const LlwallSteeringParams,
    out: *mut LlwallSteeringSummary,
) -> LlwallStatus {
    guard(|| {
        let p = deref(params, "params")?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let cfg = Theorem1Config {
            grid: lift(Grid::new(p.half_width, p.n))?,
            cfl: p.cfl,
            sigma1: p.sigma1,
            sigma2: p.sigma2,
            delta1: p.delta1,
            delta2: p.delta2,
            theta1: p.theta1,
            epsilon: p.epsilon,
            delta0: p.delta0,
            perturbation: p.perturbation,
            seed: p.seed,
            t_hint: (p.switch_time_hint > 0.0).then_some(p.switch_time_hint),
            post_horizon: p.post_horizon,
            ..Theorem1Config::default()
        };
        let rep = lift(run_theorem1(&cfg))?;
        *out = LlwallSteeringSummary {
            switch_time: rep.plan.switch_time,
            first_level: rep.plan.first_level,
            initial_distance: rep.initial_distance,
            distance_at_switch: rep.distance_at_switch,
            theta2: rep.theta2,
            theta_limit: rep.lambda_limit.theta,
            sigma_limit: rep.lambda_limit.sigma,
            lambda_drift: rep.lambda_drift,
            decay_rate: rep.decay_rate,
            max_norm_drift: rep.max_norm_drift,
            passed: rep.passed(),
        };
        Ok(())
    })
}
