//! Whittaker-W function W_{-(n+1/2),0}(x) in the log domain.
//!
//! Naive series or recurrence evaluation underflows long before the
//! operating range (n up to 50 and beyond) is covered, so both routes here
//! work with shifted log-domain integrands:
//!
//! * the production route goes through the confluent hypergeometric
//!   function, W_{-(n+1/2),0}(x) = e^{-x/2} sqrt(x) U(n+1, 1, x), with
//!   U evaluated from its real integral representation;
//! * the cross-check route inverts the Laplace-type integral
//!   `int_0^inf a^{2n+1} e^{-a^2} K0(2 sqrt(x) a) da`, which reaches the
//!   same function through K0 and shares no code with the first route
//!   beyond the generic quadrature engine.

use super::bessel::log_bessel_k0;
use super::quad::{integrate, log_integrate_exp};
use crate::error::{Error, Result};

pub(crate) fn ln_factorial(n: u32) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

fn check_args(n: u32, x: f64) -> Result<()> {
    if !(x > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "whittaker argument must be positive, got x = {x}, n = {n}"
        )));
    }
    Ok(())
}

/// Finds an upper integration limit beyond `start` where `g` has dropped
/// `cut` below `peak`.
fn upper_limit<G: Fn(f64) -> f64>(g: &G, start: f64, peak: f64, cut: f64) -> f64 {
    let mut t = start.max(1e-12);
    for _ in 0..400 {
        t *= 2.0;
        if g(t) < peak - cut {
            return t;
        }
    }
    t
}

/// log W_{-(n+1/2),0}(x) via U(n+1, 1, x) = (1/n!) int_0^inf
/// e^{-x t} t^n (1+t)^{-(n+1)} dt.
pub fn log_whittaker_w_neg_half(n: u32, x: f64) -> Result<f64> {
    check_args(n, x)?;
    let nf = n as f64;
    let g = |t: f64| {
        if t <= 0.0 {
            if n == 0 {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        } else {
            -x * t + nf * t.ln() - (nf + 1.0) * t.ln_1p()
        }
    };
    // stationary point of the integrand exponent: x t^2 + (1+x) t - n = 0
    let (t_peak, g_peak) = if n == 0 {
        (0.0, 0.0)
    } else {
        let t = (-(1.0 + x) + ((1.0 + x) * (1.0 + x) + 4.0 * x * nf).sqrt()) / (2.0 * x);
        (t, g(t))
    };
    let hi = upper_limit(&g, (t_peak + 1.0).max(1.0), g_peak, 60.0);
    let log_integral = log_integrate_exp(g, 0.0, hi, g_peak, 1e-12)?;
    let log_u = log_integral - ln_factorial(n);
    Ok(-0.5 * x + 0.5 * x.ln() + log_u)
}

/// Independent cross-check for [`log_whittaker_w_neg_half`]:
/// W_{-(n+1/2),0}(x) = (4 sqrt(x) e^{-x/2} / n!^2)
/// int_0^inf a^{2n+1} e^{-a^2} K0(2 sqrt(x) a) da.
pub fn log_whittaker_w_neg_half_quadrature(n: u32, x: f64) -> Result<f64> {
    check_args(n, x)?;
    let nf = n as f64;
    let sx = x.sqrt();
    let h = move |a: f64| -> f64 {
        if a <= 0.0 {
            return f64::NEG_INFINITY;
        }
        (2.0 * nf + 1.0) * a.ln() - a * a + log_bessel_k0(2.0 * sx * a).unwrap()
    };
    // coarse scan for the peak of the exponent
    let mut peak = f64::NEG_INFINITY;
    let mut a_peak = 1.0;
    let scan_hi = (nf + 2.0).sqrt() * 4.0;
    let mut a = 1e-6;
    while a < scan_hi {
        let v = h(a);
        if v > peak {
            peak = v;
            a_peak = a;
        }
        a *= 1.12;
    }
    let hi = upper_limit(&h, a_peak.max(1.0), peak, 60.0);
    let log_integral = log_integrate_exp(h, 0.0, hi, peak, 1e-11)?;
    Ok((4.0 * sx).ln() - 0.5 * x - 2.0 * ln_factorial(n) + log_integral)
}

/// E1(x) from quadrature of its defining integral, used to validate the
/// series/continued-fraction implementation in tests and `validate` runs.
pub fn exp_integral_e1_quadrature(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "exp_integral_e1_quadrature requires x > 0, got {x}"
        )));
    }
    // E1(x) = int_1^inf e^{-x t}/t dt; substitute t = 1 + s/x:
    // E1(x) = e^{-x} int_0^inf e^{-s} / (x + s) ds
    let g = |s: f64| (-s).exp() / (x + s);
    let r = integrate(g, 0.0, 60.0 + 10.0 * x.ln().abs(), 1e-14, 1e-13)?;
    Ok((-x).exp() * r.value)
}
