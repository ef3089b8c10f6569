use std::f64::consts::{PI, TAU};

use crate::error::CoreError;

/// Wraps `theta` into `(-π, π]`.
///
/// Values already inside the interval are returned untouched, which makes the
/// function exactly idempotent.
pub fn normalize_angle(theta: f64) -> Result<f64, CoreError> {
    if !theta.is_finite() {
        return Err(CoreError::NonFinite(theta));
    }
    Ok(wrap(theta))
}

/// Infallible variant for internal callers that already hold finite values.
/// Non-finite input is passed through unchanged.
pub(crate) fn wrap(theta: f64) -> f64 {
    if !theta.is_finite() || (theta > -PI && theta <= PI) {
        return theta;
    }
    let r = theta.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Smallest signed rotation taking `from` onto `to`.
pub fn angle_diff(to: f64, from: f64) -> f64 {
    wrap(to - from)
}
