//! Self-contained validation suites: special-function identities and
//! quadrature ground truth for the closed-form receiver.
//!
//! Each check returns a [`CheckResult`] instead of panicking so the CLI
//! can report every outcome and exit nonzero only at the end.

use crate::channel::{ma_phase, relay_scale_factor, ChannelParams};
use crate::demod::{
    log_amplitude_integral, log_density_constant, log_symbol_likelihood,
    oracle_log_symbol_density, sigma_sq,
};
use crate::error::Result;
use crate::modem::SymbolFrame;
use crate::numerics::quad::integrate;
use crate::numerics::{
    exp_integral_e1, exp_integral_e1_quadrature, log_whittaker_w_neg_half,
    log_whittaker_w_neg_half_quadrature,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Worst observed deviation and where it occurred.
    pub detail: String,
}

impl CheckResult {
    fn from_worst(name: &str, worst: f64, tol: f64, at: &str) -> Self {
        CheckResult {
            name: name.to_string(),
            passed: worst <= tol,
            detail: format!("worst {worst:.3e} (tol {tol:.0e}) at {at}"),
        }
    }
}

pub fn all_passed(results: &[CheckResult]) -> bool {
    results.iter().all(|r| r.passed)
}

/// W_{-1/2,0}(x) = sqrt(x) e^{x/2} E1(x) over a log grid, with E1 itself
/// cross-checked by quadrature.
pub fn check_whittaker_e1_identity() -> Result<CheckResult> {
    let mut worst = 0.0f64;
    let mut at = String::new();
    let mut x = 0.01;
    while x <= 100.0 {
        let lhs = log_whittaker_w_neg_half(0, x)?;
        let e1 = exp_integral_e1(x)?;
        let e1_q = exp_integral_e1_quadrature(x)?;
        let rhs = 0.5 * x.ln() + 0.5 * x + e1.ln();
        let rel = ((lhs - rhs) / rhs).abs().max(((e1 - e1_q) / e1_q).abs());
        if rel > worst {
            worst = rel;
            at = format!("x = {x:.4}");
        }
        x *= 1.15;
    }
    Ok(CheckResult::from_worst(
        "whittaker-e1-identity",
        worst,
        1e-8,
        &at,
    ))
}

/// Recurrence-free quadrature route agrees with the table builder over
/// the full (n, x) operating range.
pub fn check_whittaker_quadrature() -> Result<CheckResult> {
    let mut worst = 0.0f64;
    let mut at = String::new();
    for n in [0u32, 1, 5, 12, 25, 50] {
        for &x in &[0.002, 0.05, 0.7, 4.0, 25.0, 90.0] {
            let a = log_whittaker_w_neg_half(n, x)?;
            let b = log_whittaker_w_neg_half_quadrature(n, x)?;
            let d = (a - b).abs();
            if d > worst {
                worst = d;
                at = format!("n = {n}, x = {x}");
            }
        }
    }
    Ok(CheckResult::from_worst(
        "whittaker-quadrature",
        worst,
        1e-8,
        &at,
    ))
}

/// One dimension of the closed-form density integrates to unit mass for
/// all four variance cases.
pub fn check_per_dimension_normalization() -> Result<CheckResult> {
    let p = ChannelParams::unit_energy(1.0, 2)?;
    let beta = relay_scale_factor(&p);
    let mut worst = 0.0f64;
    let mut at = String::new();
    for own in 0..2usize {
        for hyp in 0..2usize {
            let s2 = sigma_sq(own, hyp, 0, &p);
            let log_dim = |r: f64| {
                -(PI * p.n0).ln() - r * r / p.n0 + (4.0 / (p.e_r * s2)).ln()
                    + log_amplitude_integral(r, s2, &p, beta, 1e-11).unwrap()
            };
            let mass = integrate(|r| log_dim(r).exp() * 2.0 * PI * r, 0.0, 40.0, 1e-12, 1e-9)?
                .value;
            let d = (mass - 1.0).abs();
            if d > worst {
                worst = d;
                at = format!("sigma^2 = {s2}");
            }
        }
    }
    Ok(CheckResult::from_worst(
        "per-dimension-normalization",
        worst,
        1e-3,
        &at,
    ))
}

/// Closed form plus its dropped constant matches the quadrature oracle on
/// random received vectors.
///
/// Vectors are complex Gaussian with per-dimension variance
/// min(1 + N0, 3 N0): realistic amplitudes at moderate noise, and capped
/// so that |y_m|^2 / N0 stays inside the region where the length-50
/// truncated series has itself converged — outside it the comparison
/// would measure truncation, not correctness.
pub fn check_oracle_agreement(m: usize, n0: f64, draws: usize) -> Result<CheckResult> {
    let p = ChannelParams::unit_energy(n0, m)?;
    let beta = relay_scale_factor(&p);
    let var = (1.0 + n0).min(3.0 * n0);
    let mut rng = ChaCha12Rng::seed_from_u64(0x6f72_6163 ^ (m as u64) << 32 ^ n0.to_bits());
    let mut worst = 0.0f64;
    let mut at = String::new();
    for i in 0..draws {
        let y: Vec<Complex64> = (0..m)
            .map(|_| {
                let s = (var / 2.0).sqrt();
                Complex64::new(s * sample_normal(&mut rng), s * sample_normal(&mut rng))
            })
            .collect();
        let own = rng.gen_range(0..m);
        let hyp = rng.gen_range(0..m);
        let closed = log_symbol_likelihood(&y, own, hyp, &p, beta, 50)?
            + log_density_constant(&y, &p, beta);
        let oracle = oracle_log_symbol_density(&y, own, hyp, &p, beta)?;
        let rel = ((closed - oracle) / oracle).abs();
        if rel > worst {
            worst = rel;
            at = format!("draw {i}, own {own}, hyp {hyp}");
        }
    }
    Ok(CheckResult::from_worst(
        &format!("oracle-agreement-m{m}-n0{n0}"),
        worst,
        1e-4,
        &at,
    ))
}

/// The relay's power constraint: scaled multiple-access frames carry unit
/// mean energy per symbol.
pub fn check_relay_normalization(m: usize, symbols: usize) -> Result<CheckResult> {
    let p = ChannelParams::unit_energy(0.5, m)?;
    let mut rng = ChaCha12Rng::seed_from_u64(0x7265_6c61 + m as u64);
    let tones = |rng: &mut ChaCha12Rng| SymbolFrame {
        m,
        tones: (0..symbols).map(|_| rng.gen_range(0..m)).collect(),
    };
    let x1 = tones(&mut rng);
    let x2 = tones(&mut rng);
    let (mut r1, mut r2, mut r3) = (
        ChaCha12Rng::seed_from_u64(11),
        ChaCha12Rng::seed_from_u64(22),
        ChaCha12Rng::seed_from_u64(33),
    );
    let mut y = ma_phase(&x1, &x2, &p, &mut r1, &mut r2, &mut r3)?;
    y.scale(relay_scale_factor(&p));
    let n_q = y.n_q();
    let mean: f64 = (0..n_q)
        .map(|k| y.column(k).iter().map(|v| v.norm_sqr()).sum::<f64>())
        .sum::<f64>()
        / n_q as f64;
    Ok(CheckResult::from_worst(
        &format!("relay-normalization-m{m}"),
        (mean - 1.0).abs(),
        1e-2,
        &format!("mean energy {mean:.5}"),
    ))
}

fn sample_normal(rng: &mut ChaCha12Rng) -> f64 {
    // Box-Muller; the crate-wide Gaussian helper works on complex pairs
    let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let v: f64 = rng.gen_range(0.0..2.0 * PI);
    (-2.0 * u.ln()).sqrt() * v.cos()
}

/// Full suite. `oracle_draws` vectors per (M, N0) cell; 100 is a quick
/// smoke run, 1000 matches the long-form validation.
pub fn run_all(oracle_draws: usize) -> Result<Vec<CheckResult>> {
    let mut out = vec![
        check_whittaker_e1_identity()?,
        check_whittaker_quadrature()?,
        check_per_dimension_normalization()?,
    ];
    for &m in &[2usize, 4, 8] {
        for &n0 in &[0.1, 1.0, 10.0] {
            out.push(check_oracle_agreement(m, n0, oracle_draws)?);
        }
    }
    for &m in &[2usize, 4, 8] {
        out.push(check_relay_normalization(m, 20_000)?);
    }
    Ok(out)
}
