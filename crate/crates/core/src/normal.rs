//! Standard normal distribution helpers.

use statrs::function::erf::{erfc, erfc_inv};
use std::f64::consts::SQRT_2;

use crate::error::{invalid, Result};

/// Smallest probability accepted by [`inverse_cdf`].
pub const MIN_PROB: f64 = 1e-8;

/// Standard normal density.
pub fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal CDF, computed through `erfc` to keep the lower tail accurate.
pub fn cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Upper tail `Pr{Z > x}`.
pub fn tail(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// Inverse of the upper tail, `x` such that `Pr{Z > x} = p`, for `p` in `(0, 1)`.
pub(crate) fn inverse_tail(p: f64) -> f64 {
    SQRT_2 * erfc_inv(2.0 * p)
}

/// Inverse standard normal CDF for `p` in `[1e-8, 1 - 1e-8]`.
pub fn inverse_cdf(p: f64) -> Result<f64> {
    if !(MIN_PROB..=1.0 - MIN_PROB).contains(&p) {
        return Err(invalid(
            "eps",
            format!("{p} outside [{MIN_PROB}, {}]", 1.0 - MIN_PROB),
        ));
    }
    Ok(-SQRT_2 * erfc_inv(2.0 * p))
}
