//! Property tests for the kinematic layer.

use fecbf_core::kinematics::{clamp_input, step, velocity_vector, ControlInput, UavLimits, UavState};
use fecbf_core::Vec3;
use proptest::prelude::*;

prop_compose! {
    fn arb_limits()(v_max in 2.0_f64..3.0) -> UavLimits {
        UavLimits::with_v_max(v_max)
    }
}

prop_compose! {
    fn arb_state(limits: UavLimits)(
        x in -500.0_f64..500.0,
        y in -500.0_f64..500.0,
        z in -500.0_f64..500.0,
        vfrac in 0.0_f64..1.0,
        pfrac in 0.0_f64..1.0,
        yaw in 0.0_f64..core::f64::consts::TAU,
    ) -> UavState {
        UavState::new(
            Vec3::new(x, y, z),
            limits.v_min + vfrac * (limits.v_max - limits.v_min),
            limits.pitch_min + pfrac * (limits.pitch_max - limits.pitch_min),
            yaw,
        )
    }
}

proptest! {
    #[test]
    fn velocity_norm_equals_speed(v in 0.1_f64..5.0, pitch in -1.5_f64..1.5, yaw in 0.0_f64..6.3) {
        let s = UavState::new(Vec3::ZERO, v, pitch, yaw);
        prop_assert!((velocity_vector(&s).norm() - v).abs() < 1e-12);
    }

    #[test]
    fn clamp_is_idempotent_and_bounded(
        a in -10.0_f64..10.0,
        g in -10.0_f64..10.0,
        w in -10.0_f64..10.0,
        v_max in 2.0_f64..3.0,
    ) {
        let limits = UavLimits::with_v_max(v_max);
        let c = clamp_input(&ControlInput::new(a, g, w), &limits);
        prop_assert!(c.accel >= limits.accel_min && c.accel <= limits.accel_max);
        prop_assert!(c.pitch_rate >= limits.pitch_rate_min && c.pitch_rate <= limits.pitch_rate_max);
        prop_assert!(c.yaw_rate >= limits.yaw_rate_min && c.yaw_rate <= limits.yaw_rate_max);
        prop_assert_eq!(clamp_input(&c, &limits), c);
    }

    #[test]
    fn step_preserves_state_invariants(
        v_max in 2.0_f64..3.0,
        x in -100.0_f64..100.0,
        vfrac in 0.0_f64..1.0,
        pitch in -1.57_f64..1.57,
        yaw in -20.0_f64..20.0,
        a in -5.0_f64..5.0,
        g in -5.0_f64..5.0,
        w in -5.0_f64..5.0,
        dt in 0.001_f64..0.5,
    ) {
        let limits = UavLimits::with_v_max(v_max);
        let state = UavState::new(
            Vec3::new(x, 0.0, 0.0),
            limits.v_min + vfrac * (limits.v_max - limits.v_min),
            pitch.clamp(limits.pitch_min, limits.pitch_max),
            yaw,
        );
        let input = clamp_input(&ControlInput::new(a, g, w), &limits);
        let next = step(&state, &input, &limits, dt);
        prop_assert!(next.validate(&limits).is_ok(), "{:?}", next.validate(&limits));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn rotation_frames_stay_orthonormal(pitch in -1.5707_f64..1.5707, yaw in 0.0_f64..6.3) {
        let w = fecbf_core::cbf::normalized_frame(pitch, yaw);
        for a in 0..3 {
            for b in 0..3 {
                let g = w.col(a).dot(w.col(b));
                let want = if a == b { 1.0 } else { 0.0 };
                prop_assert!((g - want).abs() < 1e-12);
            }
        }
    }
}
