//! Virtual states, kinematic Jacobians, and pairwise barrier constraints.
//!
//! The distance constraint between two vehicles has relative degree two in
//! the raw position, so all barrier math runs on the virtual state
//! `s = p + ζ v`, which the control input drives directly:
//! `ṡ = v + ζ W u` with `W` the Jacobian of the velocity vector w.r.t.
//! `(v, θ, ψ)`.

use core::fmt;

use crate::kinematics::{velocity_vector, UavLimits, UavState};
use crate::linalg::{Mat3, Vec3};
use crate::math::{cos, sin};

/// Parameters of the safety filter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SafetyParams {
    /// Virtual-state lead horizon ζ [s].
    pub zeta: f64,
    /// Linear class-K gain κ [1/s].
    pub kappa: f64,
}

impl SafetyParams {
    pub fn new(zeta: f64, kappa: f64) -> Result<Self, CbfError> {
        if !(zeta > 0.0) {
            return Err(CbfError::NonPositiveParam("zeta"));
        }
        if !(kappa > 0.0) {
            return Err(CbfError::NonPositiveParam("kappa"));
        }
        Ok(SafetyParams { zeta, kappa })
    }
}

impl Default for SafetyParams {
    fn default() -> Self {
        SafetyParams { zeta: 0.5, kappa: 0.08 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CbfError {
    /// Barrier coefficients need a strictly positive speed.
    NonPositiveSpeed,
    NonPositiveParam(&'static str),
}

impl fmt::Display for CbfError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CbfError::NonPositiveSpeed => write!(f, "speed must be strictly positive"),
            CbfError::NonPositiveParam(p) => write!(f, "{p} must be strictly positive"),
        }
    }
}

/// Coefficients of one pairwise barrier constraint
/// `k_ijᵀ u_i + k_jiᵀ u_j + ξ ≥ 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairwiseCbf {
    /// Coefficient of this vehicle's input.
    pub k_ij: Vec3,
    /// Coefficient of the neighbor's input.
    pub k_ji: Vec3,
    /// Input-independent term, including the class-K term `κ h`.
    pub xi: f64,
    /// Barrier value `‖s_i − s_j‖² − d²`.
    pub h: f64,
    /// Velocity-inflated safety distance [m].
    pub d: f64,
}

/// Direction basis of the velocity-vector Jacobian:
///
/// ```text
///     [ cosθ cosψ   −sinθ cosψ   −cosθ sinψ ]
/// R = [ cosθ sinψ   −sinθ sinψ    cosθ cosψ ]
///     [ sinθ          cosθ         0        ]
/// ```
///
/// Columns are mutually orthogonal with norms `(1, 1, cosθ)`; the third
/// column collapses at θ = ±π/2 where yaw stops moving the velocity vector.
pub fn rotation_matrix(pitch: f64, yaw: f64) -> Mat3 {
    let (ct, st) = (cos(pitch), sin(pitch));
    let (cp, sp) = (cos(yaw), sin(yaw));
    Mat3::from_rows([
        [ct * cp, -st * cp, -ct * sp],
        [ct * sp, -st * sp, ct * cp],
        [st, ct, 0.0],
    ])
}

/// Orthonormal local frame `W̃` obtained by normalizing the Jacobian columns.
///
/// The third column of [`rotation_matrix`] is `cosθ · [−sinψ, cosψ, 0]`, so
/// its normalized direction is independent of pitch; using that closed form
/// keeps the frame well defined at θ = ±π/2.
pub fn normalized_frame(pitch: f64, yaw: f64) -> Mat3 {
    let (ct, st) = (cos(pitch), sin(pitch));
    let (cp, sp) = (cos(yaw), sin(yaw));
    Mat3::from_rows([
        [ct * cp, -st * cp, -sp],
        [ct * sp, -st * sp, cp],
        [st, ct, 0.0],
    ])
}

/// Kinematic Jacobian `W = R · diag(1, v, v)` of the velocity vector.
pub fn kinematic_jacobian(state: &UavState) -> Result<Mat3, CbfError> {
    if !(state.speed > 0.0) {
        return Err(CbfError::NonPositiveSpeed);
    }
    let r = rotation_matrix(state.pitch, state.yaw);
    Ok(Mat3::from_columns(r.col(0), r.col(1) * state.speed, r.col(2) * state.speed))
}

/// Virtual state `s = p + ζ v`.
#[inline]
pub fn virtual_state(state: &UavState, params: &SafetyParams) -> Vec3 {
    state.position + velocity_vector(state) * params.zeta
}

/// Barrier value and safety distance for a pair:
/// `h = ‖s_i − s_j‖² − d²` with `d = r_i + r_j + ζ (v_i + v_j)`.
///
/// The squared-distance form avoids the square-root kink at coincidence. The
/// velocity-dependent part of `d` is treated as a frozen margin: its time
/// derivative is deliberately excluded from the barrier-rate bookkeeping.
pub fn barrier_value(
    state_i: &UavState,
    state_j: &UavState,
    limits_i: &UavLimits,
    limits_j: &UavLimits,
    params: &SafetyParams,
) -> (f64, f64) {
    let d = limits_i.safety_radius
        + limits_j.safety_radius
        + params.zeta * (state_i.speed + state_j.speed);
    let ds = virtual_state(state_i, params) - virtual_state(state_j, params);
    (ds.norm_squared() - d * d, d)
}

/// Coefficients of the pairwise constraint `k_ijᵀ u_i + k_jiᵀ u_j + ξ ≥ 0`:
///
/// - `k_ij = 2ζ W_iᵀ (s_i − s_j)`
/// - `k_ji = 2ζ W_jᵀ (s_j − s_i)`
/// - `ξ = 2 (s_i − s_j)ᵀ (v_i − v_j) + κ h`
pub fn pairwise_coefficients(
    state_i: &UavState,
    state_j: &UavState,
    limits_i: &UavLimits,
    limits_j: &UavLimits,
    params: &SafetyParams,
) -> Result<PairwiseCbf, CbfError> {
    let w_i = kinematic_jacobian(state_i)?;
    let w_j = kinematic_jacobian(state_j)?;
    let ds = virtual_state(state_i, params) - virtual_state(state_j, params);
    let (h, d) = barrier_value(state_i, state_j, limits_i, limits_j, params);
    let dv = velocity_vector(state_i) - velocity_vector(state_j);
    Ok(PairwiseCbf {
        k_ij: w_i.tr_mul_vec(ds) * (2.0 * params.zeta),
        k_ji: w_j.tr_mul_vec(-ds) * (2.0 * params.zeta),
        xi: 2.0 * ds.dot(dv) + params.kappa * h,
        h,
        d,
    })
}
