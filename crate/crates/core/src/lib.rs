//! Core algorithms for multi-vessel multi-float (MVMF) missions.
//!
//! Surface vessels drop underactuated floats into a current and pick them up
//! again once their drift is done. This crate covers the whole loop without
//! touching any IO:
//!
//! * [`flowfield`]: queryable 2D surface currents, RK4 advection and
//!   incompressibility diagnostics.
//! * [`estimator`]: drifter track smoothing and a divergence-free Gaussian
//!   process estimate of the local current.
//! * [`planner`]: candidate action sampling, MCTS coverage selection and
//!   decentralised MCTS scheduling across vessels.
//! * [`sim`]: schedule execution against a ground-truth current with vessel
//!   wakes, comm dropouts and the detour-on-miss pickup policy.
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is
//! disabled. All transcendental math goes through `libm` so results are
//! bit-reproducible across targets.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod estimator;
pub mod flowfield;
pub mod geom;
pub(crate) mod math;
pub mod planner;
pub mod sim;

pub use flowfield::{FieldError, FlowField, Trajectory};
pub use geom::{Rect, Vec2};
