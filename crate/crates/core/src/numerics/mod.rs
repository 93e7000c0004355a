//! Numerically stable special-function and log-domain primitives.
//!
//! Everything here is a pure function; negative infinity encodes a
//! probability of exactly zero throughout the log-domain API.

mod bessel;
pub mod quad;
mod whittaker;

pub use bessel::{bessel_k0, exp_integral_e1, log_bessel_i0, log_bessel_k0};
pub use whittaker::{
    exp_integral_e1_quadrature, log_whittaker_w_neg_half, log_whittaker_w_neg_half_quadrature,
};

use crate::error::{Error, Result};

/// Binary max-star: max*(x, y) = max(x, y) + log(1 + e^{-|x-y|}),
/// which equals log(e^x + e^y) exactly.
#[inline]
pub fn max_star_pair(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a > b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

/// max* over a list: log sum_i exp(values_i), folded left in input order.
pub fn max_star(values: &[f64]) -> Result<f64> {
    let (&first, rest) = values
        .split_first()
        .ok_or_else(|| Error::InvalidArgument("max_star over empty list".into()))?;
    Ok(rest.iter().fold(first, |acc, &v| max_star_pair(acc, v)))
}
