//! Cone-axis construction, worst-case neighbor-derivative estimation, and
//! the linearized sign-consistency constraint for the decentralized QP.
//!
//! The constraint steers each vehicle so that the one-second lookahead of
//! every relative virtual-state vector stays inside a cone of half-apex
//! angle β around a per-vehicle axis. The axis is the octant direction of
//! the goal in the vehicle's local frame, so satisfying every cone puts each
//! vehicle's constraint block on one strict sign pattern, which is the
//! sufficient condition for internal compatibility.

use alloc::vec::Vec;
use core::fmt;

use crate::cbf::{kinematic_jacobian, normalized_frame, virtual_state, SafetyParams};
use crate::kinematics::{velocity_vector, UavLimits, UavState};
use crate::linalg::{Mat3, Vec3};
use crate::math::{cos, wrap_angle_signed};

/// Below this relative-vector norm the constraint is omitted for the pair;
/// at that proximity the barrier constraint dominates anyway.
pub const DEN_EPS: f64 = 1e-6;

const SQRT3_INV: f64 = 0.577_350_269_189_625_8;

/// Ring buffer of timestamped state samples for one neighbor.
#[derive(Clone, Debug, Default)]
pub struct NeighborHistory {
    samples: Vec<(f64, UavState)>,
    cap: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NonIncreasingTime {
    pub last: f64,
    pub pushed: f64,
}

impl fmt::Display for NonIncreasingTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "history timestamps must increase: {} then {}", self.last, self.pushed)
    }
}

impl NeighborHistory {
    /// Capacity below 2 cannot hold a finite difference.
    pub fn new(cap: usize) -> Self {
        assert!(cap >= 2, "history capacity must be at least 2");
        NeighborHistory { samples: Vec::with_capacity(cap), cap }
    }

    pub fn push(&mut self, t: f64, state: UavState) -> Result<(), NonIncreasingTime> {
        if let Some(&(last, _)) = self.samples.last() {
            if !(t > last) {
                return Err(NonIncreasingTime { last, pushed: t });
            }
        }
        if self.samples.len() == self.cap {
            self.samples.remove(0);
        }
        self.samples.push((t, state));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn latest(&self) -> Option<&(f64, UavState)> {
        self.samples.last()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(f64, UavState)> {
        self.samples.iter()
    }
}

/// One linearized sign-consistency row `lᵀ u_i − ε ≤ δ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScConstraint {
    /// Coefficient of the vehicle's own input.
    pub l: Vec3,
    /// Right-hand side.
    pub delta: f64,
    /// Half-apex angle of the cone [rad].
    pub beta: f64,
    /// Cone axis in local-frame coordinates; each component is ±√3/3.
    pub d_axis: Vec3,
}

/// Octant axis of the goal direction in the local frame:
/// `d = (√3/3) · sign(W̃ᵀ (goal − p))`, with `sign(0) = +1` so the axis
/// always has unit norm.
pub fn cone_axis(state: &UavState, goal: Vec3) -> Vec3 {
    let wt = normalized_frame(state.pitch, state.yaw);
    let local = wt.tr_mul_vec(goal - state.position);
    let sign = |v: f64| if v < 0.0 { -SQRT3_INV } else { SQRT3_INV };
    Vec3::new(sign(local.x), sign(local.y), sign(local.z))
}

/// Worst-case neighbor virtual-state derivative `ŝ̇ = v_j + ζ W_j u*`.
///
/// The neighbor's input is unknown; a backward finite difference over the
/// two most recent samples estimates it, an input box of half-width
/// `u_tol_frac` times each channel range (intersected with the neighbor's
/// limits) covers the estimation error, and the box corner maximizing
/// `dᵀ W̃_iᵀ ŝ̇` is the worst case for the cone constraint. A single-sample
/// history falls back to the full input box.
pub fn worst_case_sdot(
    history: &NeighborHistory,
    d_axis: Vec3,
    wtilde_i: &Mat3,
    limits_j: &UavLimits,
    params: &SafetyParams,
    u_tol_frac: f64,
) -> Option<Vec3> {
    let &(_, latest) = history.latest()?;
    let w_j = kinematic_jacobian(&latest).ok()?;
    let v_j = velocity_vector(&latest);

    let (full_lo, full_hi) = limits_j.input_bounds();
    let (mut lo, mut hi) = (full_lo, full_hi);
    if history.len() >= 2 {
        let s = &history.samples;
        let (t0, ref prev) = s[s.len() - 2];
        let (t1, ref last) = s[s.len() - 1];
        let dt = t1 - t0;
        let est = [
            (last.speed - prev.speed) / dt,
            (last.pitch - prev.pitch) / dt,
            wrap_angle_signed(last.yaw - prev.yaw) / dt,
        ];
        for c in 0..3 {
            let u_hat = est[c].clamp(full_lo[c], full_hi[c]);
            let tol = u_tol_frac * (full_hi[c] - full_lo[c]);
            lo[c] = (u_hat - tol).max(full_lo[c]);
            hi[c] = (u_hat + tol).min(full_hi[c]);
        }
    }

    // Linear objective over a box: optimum sits on the corner selected by
    // the coefficient signs of ζ dᵀ W̃_iᵀ W_j.
    let coeff = w_j.tr_mul_vec(wtilde_i.mul_vec(d_axis)) * params.zeta;
    let pick = |c: usize| if coeff[c] > 0.0 { hi[c] } else { lo[c] };
    let u_star = Vec3::new(pick(0), pick(1), pick(2));
    Some(v_j + w_j.mul_vec(u_star) * params.zeta)
}

/// Linearized cone-membership row for one neighbor:
///
/// - `l = −ζ (dᵀ W̃_iᵀ W_i)ᵀ / ‖s_i + v_i − s_j − v_j‖`
/// - `δ = dᵀ W̃_iᵀ (s_i + v_i − s_j − ŝ̇) / ‖s_i + v_i − s_j − v_j‖ − cos β`
///
/// so that `lᵀ u_i − ε ≤ δ` reproduces the slacked cone constraint. The
/// denominator replaces the control-dependent `ṡ` by `v`, which is exactly
/// the part `l` moves to the left side; `ŝ̇` is the worst-case neighbor
/// estimate. Returns `None` (constraint omitted) for a degenerate
/// denominator or a non-positive own speed.
pub fn sc_coefficients(
    state_i: &UavState,
    state_j: &UavState,
    sdot_hat: Vec3,
    d_axis: Vec3,
    params: &SafetyParams,
    beta: f64,
) -> Option<ScConstraint> {
    let s_i = virtual_state(state_i, params);
    let s_j = virtual_state(state_j, params);
    let v_i = velocity_vector(state_i);
    let v_j = velocity_vector(state_j);
    let den = (s_i + v_i - s_j - v_j).norm();
    if den <= DEN_EPS {
        log::debug!("sign-consistency row omitted: denominator {den:.3e}");
        return None;
    }
    let Ok(w_i) = kinematic_jacobian(state_i) else {
        log::debug!("sign-consistency row omitted: non-positive speed");
        return None;
    };
    let wt_i = normalized_frame(state_i.pitch, state_i.yaw);
    let axis_global = wt_i.mul_vec(d_axis);
    let l = w_i.tr_mul_vec(axis_global) * (-params.zeta / den);
    let delta = axis_global.dot(s_i + v_i - s_j - sdot_hat) / den - cos(beta);
    Some(ScConstraint { l, delta, beta, d_axis })
}
