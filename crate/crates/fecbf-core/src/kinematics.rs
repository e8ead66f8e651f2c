//! UAV state representation, input saturation, and fixed-step integration.
//!
//! States follow a 3-D speed/pitch/yaw kinematic model: position integrates
//! the velocity vector, while speed, pitch, and yaw integrate the control
//! input rates directly.

use core::fmt;

use crate::linalg::Vec3;
use crate::math::{cos, sin, wrap_angle_2pi};

/// State of one vehicle: position plus the polar velocity parametrization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UavState {
    /// Position in the inertial frame [m].
    pub position: Vec3,
    /// Speed (norm of the velocity vector) [m/s].
    pub speed: f64,
    /// Pitch angle [rad].
    pub pitch: f64,
    /// Yaw angle, kept in `[0, 2π)` [rad].
    pub yaw: f64,
}

impl UavState {
    /// Builds a state with the yaw wrapped into `[0, 2π)`.
    pub fn new(position: Vec3, speed: f64, pitch: f64, yaw: f64) -> Self {
        UavState { position, speed, pitch, yaw: wrap_angle_2pi(yaw) }
    }

    /// Checks the state against the owning UAV's limits.
    pub fn validate(&self, limits: &UavLimits) -> Result<(), InvalidState> {
        if !(self.speed >= limits.v_min && self.speed <= limits.v_max) {
            return Err(InvalidState::Speed(self.speed));
        }
        if !(self.pitch >= limits.pitch_min && self.pitch <= limits.pitch_max) {
            return Err(InvalidState::Pitch(self.pitch));
        }
        if !(0.0..core::f64::consts::TAU).contains(&self.yaw) {
            return Err(InvalidState::Yaw(self.yaw));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InvalidState {
    Speed(f64),
    Pitch(f64),
    Yaw(f64),
}

impl fmt::Display for InvalidState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InvalidState::Speed(v) => write!(f, "speed {v} outside limits"),
            InvalidState::Pitch(v) => write!(f, "pitch {v} outside limits"),
            InvalidState::Yaw(v) => write!(f, "yaw {v} not normalized to [0, 2pi)"),
        }
    }
}

/// Local control input: acceleration and the two attitude rates.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ControlInput {
    /// Linear acceleration [m/s²].
    pub accel: f64,
    /// Pitch rate [rad/s].
    pub pitch_rate: f64,
    /// Yaw rate [rad/s].
    pub yaw_rate: f64,
}

impl ControlInput {
    pub const fn new(accel: f64, pitch_rate: f64, yaw_rate: f64) -> Self {
        ControlInput { accel, pitch_rate, yaw_rate }
    }

    #[inline]
    pub fn as_array(self) -> [f64; 3] {
        [self.accel, self.pitch_rate, self.yaw_rate]
    }

    #[inline]
    pub fn from_slice(s: &[f64]) -> Self {
        ControlInput::new(s[0], s[1], s[2])
    }
}

/// Per-vehicle state and input bounds plus the physical safety radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UavLimits {
    pub v_min: f64,
    pub v_max: f64,
    pub accel_min: f64,
    pub accel_max: f64,
    pub pitch_min: f64,
    pub pitch_max: f64,
    pub pitch_rate_min: f64,
    pub pitch_rate_max: f64,
    pub yaw_min: f64,
    pub yaw_max: f64,
    pub yaw_rate_min: f64,
    pub yaw_rate_max: f64,
    /// Radius of the protected sphere around the vehicle [m].
    pub safety_radius: f64,
}

impl UavLimits {
    /// Standard limit set for a given maximum speed: `v_min = v_max / 4`,
    /// pitch within ±π/2, acceleration within ±1 m/s², pitch rate within
    /// ±π/36, yaw rate within ±π/18, yaw spanning a full turn.
    pub fn with_v_max(v_max: f64) -> Self {
        use core::f64::consts::{FRAC_PI_2, PI, TAU};
        UavLimits {
            v_min: v_max / 4.0,
            v_max,
            accel_min: -1.0,
            accel_max: 1.0,
            pitch_min: -FRAC_PI_2,
            pitch_max: FRAC_PI_2,
            pitch_rate_min: -PI / 36.0,
            pitch_rate_max: PI / 36.0,
            yaw_min: 0.0,
            yaw_max: TAU,
            yaw_rate_min: -PI / 18.0,
            yaw_rate_max: PI / 18.0,
            safety_radius: 2.0,
        }
    }

    pub fn validate(&self) -> Result<(), InvalidLimits> {
        let pairs = [
            (self.v_min, self.v_max, "speed"),
            (self.accel_min, self.accel_max, "acceleration"),
            (self.pitch_min, self.pitch_max, "pitch"),
            (self.pitch_rate_min, self.pitch_rate_max, "pitch rate"),
            (self.yaw_min, self.yaw_max, "yaw"),
            (self.yaw_rate_min, self.yaw_rate_max, "yaw rate"),
        ];
        for (lo, hi, what) in pairs {
            if !(lo < hi) {
                return Err(InvalidLimits(what));
            }
        }
        // A strictly positive floor speed keeps the kinematic Jacobian's
        // speed-scaled columns away from zero.
        if !(self.v_min > 0.0) {
            return Err(InvalidLimits("v_min must be > 0"));
        }
        if !(self.safety_radius > 0.0) {
            return Err(InvalidLimits("safety radius must be > 0"));
        }
        Ok(())
    }

    /// Input box as `(lower, upper)` arrays in `(accel, pitch_rate, yaw_rate)` order.
    #[inline]
    pub fn input_bounds(&self) -> ([f64; 3], [f64; 3]) {
        (
            [self.accel_min, self.pitch_rate_min, self.yaw_rate_min],
            [self.accel_max, self.pitch_rate_max, self.yaw_rate_max],
        )
    }
}

impl Default for UavLimits {
    fn default() -> Self {
        UavLimits::with_v_max(2.5)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InvalidLimits(pub &'static str);

impl fmt::Display for InvalidLimits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid UAV limits: {}", self.0)
    }
}

/// Velocity vector `v · [cosθ cosψ, cosθ sinψ, sinθ]`.
#[inline]
pub fn velocity_vector(state: &UavState) -> Vec3 {
    let (ct, st) = (cos(state.pitch), sin(state.pitch));
    let (cp, sp) = (cos(state.yaw), sin(state.yaw));
    Vec3::new(state.speed * ct * cp, state.speed * ct * sp, state.speed * st)
}

/// Projects each input component onto its admissible interval.
#[inline]
pub fn clamp_input(input: &ControlInput, limits: &UavLimits) -> ControlInput {
    ControlInput {
        accel: input.accel.clamp(limits.accel_min, limits.accel_max),
        pitch_rate: input.pitch_rate.clamp(limits.pitch_rate_min, limits.pitch_rate_max),
        yaw_rate: input.yaw_rate.clamp(limits.yaw_rate_min, limits.yaw_rate_max),
    }
}

/// Copy of the limits with the rate bounds narrowed so that one Euler step
/// of length `dt` cannot push speed or pitch past their state bounds.
///
/// Inside these bounds the one-step model `v⁺ = v + a·dt`, `θ⁺ = θ + γ·dt`
/// holds without saturation, so the barrier-rate accounting of a QP built on
/// them matches what the integrator actually does. Zero input always remains
/// admissible.
pub fn effective_limits(state: &UavState, limits: &UavLimits, dt: f64) -> UavLimits {
    debug_assert!(dt > 0.0);
    let mut out = *limits;
    out.accel_min = limits.accel_min.max((limits.v_min - state.speed) / dt);
    out.accel_max = limits.accel_max.min((limits.v_max - state.speed) / dt).max(out.accel_min);
    out.pitch_rate_min = limits.pitch_rate_min.max((limits.pitch_min - state.pitch) / dt);
    out.pitch_rate_max = limits
        .pitch_rate_max
        .min((limits.pitch_max - state.pitch) / dt)
        .max(out.pitch_rate_min);
    out
}

/// Explicit Euler step.
///
/// Position integrates the pre-step velocity vector; speed, pitch, and yaw
/// then integrate the input rates. Speed and pitch are clamped to the limits
/// after integration and yaw is wrapped into `[0, 2π)`. The input is assumed
/// to be pre-clamped.
pub fn step(state: &UavState, input: &ControlInput, limits: &UavLimits, dt: f64) -> UavState {
    debug_assert!(dt > 0.0);
    UavState {
        position: state.position + velocity_vector(state) * dt,
        speed: (state.speed + input.accel * dt).clamp(limits.v_min, limits.v_max),
        pitch: (state.pitch + input.pitch_rate * dt).clamp(limits.pitch_min, limits.pitch_max),
        yaw: wrap_angle_2pi(state.yaw + input.yaw_rate * dt),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_PI_2, PI};

    fn state(v: f64, pitch: f64, yaw: f64) -> UavState {
        UavState::new(Vec3::ZERO, v, pitch, yaw)
    }

    #[test]
    fn velocity_vector_axis_aligned() {
        let v = velocity_vector(&state(2.0, 0.0, 0.0));
        assert!((v - Vec3::new(2.0, 0.0, 0.0)).norm() < 1e-15);

        let v = velocity_vector(&state(2.0, 0.0, FRAC_PI_2));
        assert!((v - Vec3::new(0.0, 2.0, 0.0)).norm() < 1e-15);

        let v = velocity_vector(&state(3.0, FRAC_PI_2, 1.234));
        assert!((v - Vec3::new(0.0, 0.0, 3.0)).norm() < 1e-15);
    }

    #[test]
    fn clamp_examples() {
        let limits = UavLimits::with_v_max(3.0);
        let clamped = clamp_input(&ControlInput::new(5.0, 0.0, 0.0), &limits);
        assert_eq!(clamped.accel, 1.0);

        let inside = ControlInput::new(0.3, 0.01, -0.05);
        assert_eq!(clamp_input(&inside, &limits), inside);

        let clamped = clamp_input(&ControlInput::new(0.0, -1.0, 0.0), &limits);
        assert_eq!(clamped.pitch_rate, -PI / 36.0);
    }

    #[test]
    fn step_examples() {
        let limits = UavLimits::with_v_max(3.0);
        let s = step(&state(2.0, 0.0, 0.0), &ControlInput::new(1.0, 0.0, 0.0), &limits, 0.1);
        assert!((s.speed - 2.1).abs() < 1e-15);

        let s = step(&state(2.95, 0.0, 0.0), &ControlInput::new(1.0, 0.0, 0.0), &limits, 0.1);
        assert_eq!(s.speed, 3.0);

        let s = step(&state(2.0, 0.0, 0.0), &ControlInput::default(), &limits, 0.1);
        assert!((s.position - Vec3::new(0.2, 0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn step_determinism() {
        let limits = UavLimits::with_v_max(2.7);
        let s0 = UavState::new(Vec3::new(1.0, -2.0, 3.0), 1.9, 0.3, 5.1);
        let u = ControlInput::new(0.37, -0.05, 0.11);
        let a = step(&s0, &u, &limits, 0.1);
        let b = step(&s0, &u, &limits, 0.1);
        assert_eq!(a, b);
    }

    #[test]
    fn effective_limits_respect_state_bounds() {
        let limits = UavLimits::with_v_max(3.0);
        let dt = 0.1;
        // At the speed ceiling only deceleration remains.
        let s = state(3.0, 0.0, 0.0);
        let e = effective_limits(&s, &limits, dt);
        assert_eq!(e.accel_max, 0.0);
        assert_eq!(e.accel_min, limits.accel_min);
        // Near the ceiling the box narrows to exactly one step of headroom.
        let s = state(2.95, 0.0, 0.0);
        let e = effective_limits(&s, &limits, dt);
        assert!((e.accel_max - 0.5).abs() < 1e-12);
        // One step inside the box never saturates.
        let u = ControlInput::new(e.accel_max, e.pitch_rate_max, 0.0);
        let next = step(&s, &u, &limits, dt);
        assert!((next.speed - (s.speed + e.accel_max * dt)).abs() < 1e-12);
        // Zero input is always admissible.
        let s = state(limits.v_min, limits.pitch_min, 0.0);
        let e = effective_limits(&s, &limits, dt);
        assert!(e.accel_min <= 0.0 && e.accel_max >= 0.0);
        assert!(e.pitch_rate_min <= 0.0 && e.pitch_rate_max >= 0.0);
    }

    #[test]
    fn limits_validation() {
        assert!(UavLimits::with_v_max(2.0).validate().is_ok());
        let mut bad = UavLimits::with_v_max(2.0);
        bad.v_min = 0.0;
        assert!(bad.validate().is_err());
        let mut bad = UavLimits::with_v_max(2.0);
        bad.pitch_min = bad.pitch_max;
        assert!(bad.validate().is_err());
    }
}
