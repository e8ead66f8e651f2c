//! Scalar math shim so the crate builds both with `std` and with `libm`.

use core::f64::consts::{PI, TAU};

#[cfg(feature = "std")]
mod fns {
    #[inline(always)]
    pub(crate) fn sin(x: f64) -> f64 {
        x.sin()
    }
    #[inline(always)]
    pub(crate) fn cos(x: f64) -> f64 {
        x.cos()
    }
    #[inline(always)]
    pub(crate) fn asin(x: f64) -> f64 {
        x.asin()
    }
    #[inline(always)]
    pub(crate) fn sqrt(x: f64) -> f64 {
        x.sqrt()
    }
    #[inline(always)]
    pub(crate) fn abs(x: f64) -> f64 {
        x.abs()
    }
    #[inline(always)]
    pub(crate) fn atan2(y: f64, x: f64) -> f64 {
        y.atan2(x)
    }
}

#[cfg(not(feature = "std"))]
mod fns {
    #[inline(always)]
    pub(crate) fn sin(x: f64) -> f64 {
        libm::sin(x)
    }
    #[inline(always)]
    pub(crate) fn cos(x: f64) -> f64 {
        libm::cos(x)
    }
    #[inline(always)]
    pub(crate) fn asin(x: f64) -> f64 {
        libm::asin(x)
    }
    #[inline(always)]
    pub(crate) fn sqrt(x: f64) -> f64 {
        libm::sqrt(x)
    }
    #[inline(always)]
    pub(crate) fn abs(x: f64) -> f64 {
        libm::fabs(x)
    }
    #[inline(always)]
    pub(crate) fn atan2(y: f64, x: f64) -> f64 {
        libm::atan2(y, x)
    }
}

pub(crate) use fns::{abs, asin, atan2, cos, sin, sqrt};

/// Wrap an angle into `[0, 2π)`.
#[inline]
pub(crate) fn wrap_angle_2pi(a: f64) -> f64 {
    let mut r = a % TAU;
    if r < 0.0 {
        r += TAU;
    }
    // Rounding in the addition can land exactly on 2π.
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Wrap an angle difference into `(-π, π]`.
#[inline]
pub(crate) fn wrap_angle_signed(a: f64) -> f64 {
    let r = wrap_angle_2pi(a);
    if r > PI {
        r - TAU
    } else {
        r
    }
}
