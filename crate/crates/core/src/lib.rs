//! Dynamics near the collinear libration points of the planar elliptic
//! restricted three-body problem, written in the rotating-pulsating frame
//! with the true anomaly as independent variable.
//!
//! The crate is `no_std` (it needs `alloc`). Layers, bottom up:
//!
//! - [`geometry`]: Euler quintics, potential expansion coefficients, frame maps
//! - [`dynamics`] and [`integrator`]: equations of motion, DOP853 integration
//! - [`linear`]: linearization and the symplectic diagonalizer
//! - [`center_manifold`]: resonant normal form, reduced flow, halo bifurcation
//! - [`series`] and [`synthesis`]: analytic orbit series and initial conditions
//! - [`refinement`]: symmetric shooting for periodic orbits

#![no_std]
// `!(a < b)` comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod center_manifold;
pub mod dynamics;
pub mod error;
mod fmath;
pub mod geometry;
pub mod integrator;
pub mod linear;
pub mod refinement;
pub mod roots;
pub mod series;
pub mod synthesis;

pub use dynamics::{ExtendedState, PulsatingState, Trajectory};
pub use error::{Error, Result};
pub use geometry::{CollinearFrame, Point, SystemParams};
