//! Feasibility-enhanced control barrier functions (FECBF) for decentralized
//! multi-UAV collision avoidance.
//!
//! The crate provides the flight-side algorithmic stack and nothing else:
//! no IO, no clocks, no randomness. It is `no_std`-compatible (with `alloc`)
//! so the controllers can run on embedded flight computers; enable the `libm`
//! feature when building without `std`.
//!
//! Modules:
//!
//! - [`kinematics`]: UAV state, input saturation, fixed-step integration.
//! - [`cbf`]: virtual states, kinematic Jacobians, pairwise barrier
//!   constraints.
//! - [`compatibility`]: stacked constraint systems, Farkas-based internal
//!   compatibility checks, the sign-consistency sufficient condition, and the
//!   centralized CBF-QP.
//! - [`sign_consistency`]: cone axes, worst-case neighbor estimation, and the
//!   linearized sign-consistency constraint for the decentralized QP.
//! - [`qp`]: dense active-set QP solver with phase-I infeasibility
//!   certification.
//! - [`controllers`]: nominal navigation law, the decentralized FECBF-QP, and
//!   the DRCBF / VOCBF / centralized baselines.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("fecbf-core needs either the `std` or the `libm` feature");

pub mod cbf;
pub mod compatibility;
pub mod controllers;
pub mod kinematics;
pub mod linalg;
pub(crate) mod math;
pub mod qp;
pub mod sign_consistency;

pub use linalg::{Mat3, RowMat, Vec3};
