//! Closed-form wall objects: the stationary wall M0, the mobile frame
//! (M0, M1, M2), and the travelling wall family.

use crate::error::Result;
use crate::field::{rotate, Grid, SpinField, Vec3};

/// Beyond this |x|, th is clamped to +-1 and sech to 0.
const HYPERBOLIC_CLAMP: f64 = 30.0;

#[inline]
pub fn th(x: f64) -> f64 {
    if x > HYPERBOLIC_CLAMP {
        1.0
    } else if x < -HYPERBOLIC_CLAMP {
        -1.0
    } else {
        x.tanh()
    }
}

#[inline]
pub fn sech(x: f64) -> f64 {
    if x.abs() > HYPERBOLIC_CLAMP {
        0.0
    } else {
        1.0 / x.cosh()
    }
}

/// Parameters (delta, theta, sigma) of a travelling wall profile.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WallParams {
    pub delta: f64,
    pub theta: f64,
    pub sigma: f64,
}

impl WallParams {
    pub fn new(delta: f64, theta: f64, sigma: f64) -> WallParams {
        WallParams {
            delta,
            theta,
            sigma,
        }
    }

    /// Total phase and wall position at time `t`.
    pub fn phase_at(&self, t: f64) -> f64 {
        self.delta * t + self.theta
    }

    pub fn position_at(&self, t: f64) -> f64 {
        self.sigma - self.delta * t
    }
}

/// M0(x) = (th x, 0, 1/ch x).
#[inline]
pub fn wall_m0(x: f64) -> Vec3 {
    Vec3::new(th(x), 0.0, sech(x))
}

/// M1(x) = (1/ch x, 0, -th x).
#[inline]
pub fn frame_m1(x: f64) -> Vec3 {
    Vec3::new(sech(x), 0.0, -th(x))
}

/// The constant third frame vector e2.
pub const FRAME_M2: Vec3 = Vec3::new(0.0, 1.0, 0.0);

/// Closed-form derivatives of the frame fields used by the chain rule in
/// the reduction module.
#[derive(Debug, Clone, Copy)]
pub(crate) struct FrameJet {
    pub m0: Vec3,
    pub m0_x: Vec3,
    pub m0_xx: Vec3,
    pub m1: Vec3,
    pub m1_x: Vec3,
    pub m1_xx: Vec3,
}

pub(crate) fn frame_jet(x: f64) -> FrameJet {
    let s = sech(x);
    let t = th(x);
    FrameJet {
        m0: Vec3::new(t, 0.0, s),
        m0_x: Vec3::new(s * s, 0.0, -s * t),
        m0_xx: Vec3::new(-2.0 * s * s * t, 0.0, s * t * t - s * s * s),
        m1: Vec3::new(s, 0.0, -t),
        m1_x: Vec3::new(-s * t, 0.0, -s * s),
        m1_xx: Vec3::new(s * t * t - s * s * s, 0.0, 2.0 * s * s * t),
    }
}

/// The mobile frame sampled on a grid.
#[derive(Debug, Clone)]
pub struct MobileFrame {
    grid: Grid,
    m0: Vec<Vec3>,
    m1: Vec<Vec3>,
}

impl MobileFrame {
    pub fn new(grid: Grid) -> MobileFrame {
        MobileFrame {
            grid,
            m0: grid.nodes().map(wall_m0).collect(),
            m1: grid.nodes().map(frame_m1).collect(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn m0(&self) -> &[Vec3] {
        &self.m0
    }

    pub fn m1(&self) -> &[Vec3] {
        &self.m1
    }

    pub fn m2(&self) -> Vec3 {
        FRAME_M2
    }
}

/// Samples u^{delta,theta,sigma}(t, x) = R_{delta t + theta} M0(x + delta t - sigma).
pub fn wall_profile(p: &WallParams, t: f64, grid: &Grid) -> SpinField {
    let phase = p.phase_at(t);
    let shift = p.delta * t - p.sigma;
    let values = grid
        .nodes()
        .map(|x| rotate(phase, &wall_m0(x + shift)))
        .collect();
    SpinField::from_unit_values(*grid, values)
}

/// The stationary wall sampled on `grid`.
pub fn wall_field(grid: &Grid) -> SpinField {
    wall_profile(&WallParams::default(), 0.0, grid)
}

/// M_Lambda(x) = R_theta M0(x - sigma), sampled.
pub fn symmetric_wall(theta: f64, sigma: f64, grid: &Grid) -> Result<SpinField> {
    Ok(wall_profile(&WallParams::new(0.0, theta, sigma), 0.0, grid))
}
