//! Quadrature ground truth for the closed-form symbol likelihood.
//!
//! Evaluates the pre-closed-form marginalization directly: per dimension,
//! the fading amplitude is integrated out of the phase-marginalized
//! Gaussian (an I0 factor) against the amplitude density (a K0 factor).
//! The integration route shares nothing with the Whittaker-series
//! implementation beyond f64 arithmetic.

use super::sigma_sq;
use crate::channel::ChannelParams;
use crate::error::Result;
use crate::numerics::quad::log_integrate_exp;
use crate::numerics::{log_bessel_i0, log_bessel_k0};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Hypothesis-independent terms dropped from the closed-form likelihood:
/// -M log(pi sqrt(N0 E_R) beta) - sum |y_m|^2 / N0. Adding this to
/// `log_symbol_likelihood` yields the log of a true density.
pub fn log_density_constant(y: &[Complex64], p: &ChannelParams, beta: f64) -> f64 {
    let energy: f64 = y.iter().map(|v| v.norm_sqr()).sum();
    -(p.m as f64) * (PI * (p.n0 * p.e_r).sqrt() * beta).ln() - energy / p.n0
}

/// Log of one dimension's amplitude integral:
/// integral over alpha of alpha exp(-beta^2 alpha^2 / N0)
/// I0(2 beta alpha |y| / N0) K0(2 alpha / (sqrt(E_R) sigma)) d alpha.
pub fn log_amplitude_integral(
    abs_y: f64,
    sigma2: f64,
    p: &ChannelParams,
    beta: f64,
    rel_tol: f64,
) -> Result<f64> {
    let gauss = beta * beta / p.n0;
    let i0_scale = 2.0 * beta * abs_y / p.n0;
    let k0_scale = 2.0 / (p.e_r.sqrt() * sigma2.sqrt());
    let g = move |a: f64| -> f64 {
        a.ln() - gauss * a * a
            + log_bessel_i0(i0_scale * a).expect("nonnegative argument")
            + log_bessel_k0(k0_scale * a).expect("positive argument")
    };

    // coarse geometric scan for the peak, then extend until the integrand
    // has fallen far below it (the tail decays at least exponentially)
    let mut peak = f64::NEG_INFINITY;
    let mut a = 1e-8;
    let hi = loop {
        let v = g(a);
        if v > peak {
            peak = v;
        } else if v < peak - 120.0 && a > 1.0 {
            break a;
        }
        a *= 1.25;
        if a > 1e12 {
            break a;
        }
    };
    log_integrate_exp(g, 0.0, hi, peak, rel_tol)
}

/// Log of the full received-symbol density by adaptive quadrature of the
/// pre-closed-form integral. Ground truth for `log_symbol_likelihood`.
pub fn oracle_log_symbol_density(
    y: &[Complex64],
    own_tone: usize,
    hyp_tone: usize,
    p: &ChannelParams,
    beta: f64,
) -> Result<f64> {
    let m = p.m as f64;
    let energy: f64 = y.iter().map(|v| v.norm_sqr()).sum();
    let mut log_p = -m * (PI * p.n0).ln() - energy / p.n0 + m * (4.0 / p.e_r).ln();
    for (d, ym) in y.iter().enumerate() {
        let s2 = sigma_sq(own_tone, hyp_tone, d, p);
        log_p += -s2.ln() + log_amplitude_integral(ym.norm(), s2, p, beta, 1e-11)?;
    }
    Ok(log_p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::relay_scale_factor;
    use crate::numerics::quad::integrate;

    /// Radial integral of h(r) = exp(log_f(r)) 2 pi r dr over [0, hi].
    fn radial(log_f: impl Fn(f64) -> f64, hi: f64, weight: impl Fn(f64) -> f64) -> f64 {
        integrate(
            |r| weight(r) * log_f(r).exp() * 2.0 * PI * r,
            0.0,
            hi,
            1e-12,
            1e-9,
        )
        .unwrap()
        .value
    }

    /// One dimension's density at radius r = |y_m|.
    fn log_dim_density(r: f64, s2: f64, p: &ChannelParams, beta: f64) -> f64 {
        -(PI * p.n0).ln() - r * r / p.n0 + (4.0 / (p.e_r * s2)).ln()
            + log_amplitude_integral(r, s2, p, beta, 1e-11).unwrap()
    }

    #[test]
    fn per_dimension_density_normalizes() {
        let p = ChannelParams::unit_energy(0.5, 2).unwrap();
        let beta = relay_scale_factor(&p);
        for own in [0usize, 1] {
            for hyp in [0usize, 1] {
                let s2 = sigma_sq(own, hyp, 0, &p);
                let mass = radial(|r| log_dim_density(r, s2, &p, beta), 30.0, |_| 1.0);
                assert!((mass - 1.0).abs() < 1e-3, "own {own} hyp {hyp}: {mass}");
            }
        }
    }

    #[test]
    fn per_dimension_second_moment_matches_channel() {
        // E|y_m|^2 = beta^2 E_R sigma_m^2 + N0 for the product channel
        let p = ChannelParams::unit_energy(0.3, 2).unwrap();
        let beta = relay_scale_factor(&p);
        let s2 = sigma_sq(0, 0, 0, &p);
        let m2 = radial(|r| log_dim_density(r, s2, &p, beta), 60.0, |r| r * r);
        let expect = beta * beta * p.e_r * s2 + p.n0;
        assert!(
            ((m2 - expect) / expect).abs() < 1e-3,
            "moment {m2} vs {expect}"
        );
    }

    #[test]
    fn density_spreads_with_relay_energy() {
        // larger E_R widens the received density in proportion
        let n0 = 0.2;
        let p_small = ChannelParams::new(1.0, 1.0, 1.0, n0, 2).unwrap();
        let p_large = ChannelParams::new(1.0, 1.0, 16.0, n0, 2).unwrap();
        let beta = relay_scale_factor(&p_small);
        let m2 = |p: &ChannelParams| {
            let s2 = sigma_sq(0, 0, 0, p);
            radial(|r| log_dim_density(r, s2, p, beta), 120.0, |r| r * r)
        };
        let small = m2(&p_small);
        let large = m2(&p_large);
        let ratio_expect = (beta * beta * 16.0 * sigma_sq(0, 0, 0, &p_large) + n0)
            / (beta * beta * 1.0 * sigma_sq(0, 0, 0, &p_small) + n0);
        assert!(((large / small) - ratio_expect).abs() / ratio_expect < 5e-3);
    }
}
