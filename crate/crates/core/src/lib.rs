//! Numerical laboratory for the controlled one-dimensional Landau-Lifschitz
//! equation of a ferromagnetic nanowire: domain-wall dynamics under an axial
//! applied field, the mobile-frame reduction around the wall, kernel /
//! orthogonal decomposition, and open-loop steering of the wall position.

pub mod config;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod field;
pub mod io;
pub mod reduction;
pub mod schedule;
pub mod stability;
pub mod walls;

pub use error::{Error, Result};
pub use field::{Grid, PairField, ScalarField, SpinField, Vec3};
pub use schedule::ControlSchedule;
pub use walls::{MobileFrame, WallParams};
