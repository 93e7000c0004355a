//! Stochastic channel simulation: per-symbol Rayleigh fading, complex
//! Gaussian noise, multiple-access superposition, relay scaling and
//! broadcast reception.

use crate::error::{Error, Result};
use crate::modem::SymbolFrame;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Fading variances and noise density driving every likelihood.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Fading variance, end node 1 to relay.
    pub e1: f64,
    /// Fading variance, end node 2 to relay.
    pub e2: f64,
    /// Fading variance, relay to end node.
    pub e_r: f64,
    /// One-sided noise spectral density.
    pub n0: f64,
    /// Modulation order.
    pub m: usize,
}

impl ChannelParams {
    pub fn new(e1: f64, e2: f64, e_r: f64, n0: f64, m: usize) -> Result<Self> {
        if !(e1 > 0.0 && e2 > 0.0 && e_r > 0.0 && n0 > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "channel parameters must be strictly positive: e1={e1} e2={e2} e_r={e_r} n0={n0}"
            )));
        }
        Ok(ChannelParams { e1, e2, e_r, n0, m })
    }

    /// Unit fading variances with the given noise density.
    pub fn unit_energy(n0: f64, m: usize) -> Result<Self> {
        Self::new(1.0, 1.0, 1.0, n0, m)
    }
}

/// M x N_q complex matrix of matched-filter outputs, column per
/// signaling interval.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedFrame {
    pub m: usize,
    /// Column-major: sample (row, col) at `samples[col * m + row]`.
    pub samples: Vec<Complex64>,
}

impl ReceivedFrame {
    pub fn zeros(m: usize, n_q: usize) -> Self {
        ReceivedFrame {
            m,
            samples: vec![Complex64::new(0.0, 0.0); m * n_q],
        }
    }

    pub fn n_q(&self) -> usize {
        self.samples.len() / self.m
    }

    pub fn column(&self, k: usize) -> &[Complex64] {
        &self.samples[k * self.m..(k + 1) * self.m]
    }

    pub fn column_mut(&mut self, k: usize) -> &mut [Complex64] {
        &mut self.samples[k * self.m..(k + 1) * self.m]
    }

    /// In-place scalar multiply (relay scaling).
    pub fn scale(&mut self, factor: f64) {
        for s in &mut self.samples {
            *s *= factor;
        }
    }
}

/// Per-symbol channel gains h_k with amplitude/phase views.
#[derive(Debug, Clone)]
pub struct FadingRealization {
    pub gains: Vec<Complex64>,
}

impl FadingRealization {
    pub fn amplitudes(&self) -> Vec<f64> {
        self.gains.iter().map(|h| h.norm()).collect()
    }

    pub fn phases(&self) -> Vec<f64> {
        self.gains.iter().map(|h| h.arg()).collect()
    }
}

/// One circularly symmetric complex Gaussian draw with E[|z|^2] = variance.
#[inline]
pub fn complex_gaussian<R: Rng>(variance: f64, rng: &mut R) -> Complex64 {
    let s = (variance * 0.5).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(s * re, s * im)
}

/// i.i.d. complex Gaussian gains, one per symbol period.
pub fn sample_fading<R: Rng>(variance: f64, n: usize, rng: &mut R) -> Result<FadingRealization> {
    if !(variance > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "fading variance must be positive, got {variance}"
        )));
    }
    Ok(FadingRealization {
        gains: (0..n).map(|_| complex_gaussian(variance, rng)).collect(),
    })
}

/// Multiple-access phase: Y_R = X_1 H_1R + X_2 H_2R + N_R.
///
/// `rng_fading_1`, `rng_fading_2` and `rng_noise` are separate streams so
/// that each physical source can be replayed independently.
pub fn ma_phase<R: Rng>(
    x1: &SymbolFrame,
    x2: &SymbolFrame,
    p: &ChannelParams,
    rng_fading_1: &mut R,
    rng_fading_2: &mut R,
    rng_noise: &mut R,
) -> Result<ReceivedFrame> {
    if x1.tones.len() != x2.tones.len() || x1.m != x2.m || x1.m != p.m {
        return Err(Error::DimensionMismatch(format!(
            "MA phase frames disagree: {}x{} vs {}x{} (params M = {})",
            x1.m,
            x1.tones.len(),
            x2.m,
            x2.tones.len(),
            p.m
        )));
    }
    let n_q = x1.tones.len();
    let mut y = ReceivedFrame::zeros(p.m, n_q);
    for k in 0..n_q {
        let h1 = complex_gaussian(p.e1, rng_fading_1);
        let h2 = complex_gaussian(p.e2, rng_fading_2);
        let col = y.column_mut(k);
        for s in col.iter_mut() {
            *s = complex_gaussian(p.n0, rng_noise);
        }
        col[x1.tones[k]] += h1;
        col[x2.tones[k]] += h2;
    }
    Ok(y)
}

/// Relay amplification factor beta = 1/sqrt(N0 M + E1 + E2), normalizing
/// the average relay transmit energy to one.
pub fn relay_scale_factor(p: &ChannelParams) -> f64 {
    1.0 / (p.n0 * p.m as f64 + p.e1 + p.e2).sqrt()
}

/// Broadcast phase: Y_i = X_R H_Ri + N_i. Expects the frame already
/// scaled by beta.
pub fn bc_phase<R: Rng>(
    x_r: &ReceivedFrame,
    p: &ChannelParams,
    rng_fading: &mut R,
    rng_noise: &mut R,
) -> Result<ReceivedFrame> {
    if x_r.m != p.m {
        return Err(Error::DimensionMismatch(format!(
            "BC phase modulation order {} vs params {}",
            x_r.m, p.m
        )));
    }
    let n_q = x_r.n_q();
    let mut y = ReceivedFrame::zeros(p.m, n_q);
    for k in 0..n_q {
        let h = complex_gaussian(p.e_r, rng_fading);
        let src = x_r.column(k);
        let dst = y.column_mut(k);
        for (d, s) in dst.iter_mut().zip(src.iter()) {
            *d = h * s + complex_gaussian(p.n0, rng_noise);
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{frame_rng, Stream};

    fn tones(m: usize, t: &[usize]) -> SymbolFrame {
        SymbolFrame {
            m,
            tones: t.to_vec(),
        }
    }

    #[test]
    fn fading_second_moment_matches_variance() {
        let mut rng = frame_rng(1, 0, 0, Stream::Fading1ToRelay);
        let f = sample_fading(1.0, 1_000_000, &mut rng).unwrap();
        let mean_sq: f64 =
            f.gains.iter().map(|h| h.norm_sqr()).sum::<f64>() / f.gains.len() as f64;
        assert!((mean_sq - 1.0).abs() < 0.01, "mean |h|^2 = {mean_sq}");

        let f4 = sample_fading(4.0, 500_000, &mut rng).unwrap();
        let mean_sq4: f64 =
            f4.gains.iter().map(|h| h.norm_sqr()).sum::<f64>() / f4.gains.len() as f64;
        assert!((mean_sq4 / 4.0 - 1.0).abs() < 0.02, "mean |h|^2 = {mean_sq4}");
    }

    #[test]
    fn fading_phase_uniform_ks() {
        let mut rng = frame_rng(2, 0, 0, Stream::Fading2ToRelay);
        let n = 200_000usize;
        let f = sample_fading(1.0, n, &mut rng).unwrap();
        let mut u: Vec<f64> = f
            .phases()
            .iter()
            .map(|&t| (t + std::f64::consts::PI) / (2.0 * std::f64::consts::PI))
            .collect();
        u.sort_by(|a, b| a.total_cmp(b));
        let mut d: f64 = 0.0;
        for (i, &x) in u.iter().enumerate() {
            let lo = i as f64 / n as f64;
            let hi = (i + 1) as f64 / n as f64;
            d = d.max((x - lo).abs()).max((hi - x).abs());
        }
        // critical value at significance 1e-3: c = sqrt(-ln(alpha/2)/2)/sqrt(n)
        let crit = ((-(0.5e-3f64).ln()) / 2.0).sqrt() / (n as f64).sqrt();
        assert!(d < crit, "KS statistic {d} exceeds {crit}");
    }

    #[test]
    fn fading_rejects_nonpositive_variance() {
        let mut rng = frame_rng(0, 0, 0, Stream::NoiseRelay);
        assert!(sample_fading(0.0, 1, &mut rng).is_err());
    }

    #[test]
    fn ma_phase_noiseless_superposition() {
        // N0 -> 0 limit, both nodes on tone 0: single nonzero row
        let p = ChannelParams::new(1.0, 1.0, 1.0, 1e-30, 2).unwrap();
        let mut f1 = frame_rng(3, 0, 0, Stream::Fading1ToRelay);
        let mut f2 = frame_rng(3, 0, 0, Stream::Fading2ToRelay);
        let mut nr = frame_rng(3, 0, 0, Stream::NoiseRelay);
        let y = ma_phase(
            &tones(2, &[0, 0]),
            &tones(2, &[0, 1]),
            &p,
            &mut f1,
            &mut f2,
            &mut nr,
        )
        .unwrap();
        // slot 0: both on tone 0
        assert!(y.column(0)[0].norm() > 1e-3);
        assert!(y.column(0)[1].norm() < 1e-10);
        // slot 1: orthogonal tones, both rows populated independently
        assert!(y.column(1)[0].norm() > 1e-6);
        assert!(y.column(1)[1].norm() > 1e-6);
    }

    #[test]
    fn ma_phase_mean_energy() {
        // E[||y_k||^2] = N0 M + E1 + E2
        let p = ChannelParams::new(1.0, 1.0, 1.0, 0.5, 4).unwrap();
        let n_q = 100_000;
        let mut f1 = frame_rng(4, 0, 0, Stream::Fading1ToRelay);
        let mut f2 = frame_rng(4, 0, 0, Stream::Fading2ToRelay);
        let mut nr = frame_rng(4, 0, 0, Stream::NoiseRelay);
        let mut dr = frame_rng(4, 0, 0, Stream::DataNode1);
        let t1: Vec<usize> = (0..n_q).map(|_| dr.gen_range(0..4)).collect();
        let t2: Vec<usize> = (0..n_q).map(|_| dr.gen_range(0..4)).collect();
        let y = ma_phase(&tones(4, &t1), &tones(4, &t2), &p, &mut f1, &mut f2, &mut nr).unwrap();
        let mean: f64 = (0..n_q)
            .map(|k| y.column(k).iter().map(|s| s.norm_sqr()).sum::<f64>())
            .sum::<f64>()
            / n_q as f64;
        let expect = p.n0 * 4.0 + p.e1 + p.e2;
        assert!(
            (mean / expect - 1.0).abs() < 0.01,
            "mean {mean} vs {expect}"
        );
    }

    #[test]
    fn ma_phase_dimension_mismatch() {
        let p = ChannelParams::unit_energy(1.0, 2).unwrap();
        let mut r = frame_rng(0, 0, 0, Stream::NoiseRelay);
        let mut r2 = frame_rng(0, 0, 1, Stream::NoiseRelay);
        let mut r3 = frame_rng(0, 0, 2, Stream::NoiseRelay);
        assert!(ma_phase(
            &tones(2, &[0, 1]),
            &tones(2, &[0]),
            &p,
            &mut r,
            &mut r2,
            &mut r3
        )
        .is_err());
    }

    #[test]
    fn relay_scale_factor_examples() {
        let p = ChannelParams::new(1.0, 1.0, 1.0, 1.0, 2).unwrap();
        assert_eq!(relay_scale_factor(&p), 0.5);
        let p = ChannelParams::new(1.0, 1.0, 1.0, 0.5, 4).unwrap();
        assert_eq!(relay_scale_factor(&p), 0.5);
    }

    #[test]
    fn relay_energy_normalized_after_scaling() {
        let p = ChannelParams::unit_energy(0.8, 4).unwrap();
        let n_q = 100_000;
        let mut f1 = frame_rng(5, 0, 0, Stream::Fading1ToRelay);
        let mut f2 = frame_rng(5, 0, 0, Stream::Fading2ToRelay);
        let mut nr = frame_rng(5, 0, 0, Stream::NoiseRelay);
        let mut dr = frame_rng(5, 0, 0, Stream::DataNode2);
        let t1: Vec<usize> = (0..n_q).map(|_| dr.gen_range(0..4)).collect();
        let t2: Vec<usize> = (0..n_q).map(|_| dr.gen_range(0..4)).collect();
        let mut y = ma_phase(&tones(4, &t1), &tones(4, &t2), &p, &mut f1, &mut f2, &mut nr).unwrap();
        y.scale(relay_scale_factor(&p));
        let mean: f64 = (0..n_q)
            .map(|k| y.column(k).iter().map(|s| s.norm_sqr()).sum::<f64>())
            .sum::<f64>()
            / n_q as f64;
        assert!((mean - 1.0).abs() < 0.01, "scaled energy {mean}");
    }

    #[test]
    fn bc_phase_degenerate_relay_is_pure_noise() {
        // E_R -> 0: output second moment is M * N0 per symbol
        let p_bc = ChannelParams::new(1.0, 1.0, 1e-12, 0.7, 2).unwrap();
        let n_q = 50_000;
        let x_r = ReceivedFrame {
            m: 2,
            samples: vec![Complex64::new(1.0, 0.0); 2 * n_q],
        };
        let mut fr = frame_rng(6, 0, 0, Stream::FadingRelayToNode);
        let mut ni = frame_rng(6, 0, 0, Stream::NoiseNode);
        let y = bc_phase(&x_r, &p_bc, &mut fr, &mut ni).unwrap();
        let mean: f64 = y.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / (2 * n_q) as f64;
        assert!((mean / p_bc.n0 - 1.0).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn bc_phase_product_channel_second_moment() {
        // noiseless hops: per-dimension moment is beta^2 E_R sigma^2_m
        let m = 2usize;
        let p = ChannelParams::new(1.0, 1.0, 1.0, 1e-20, m).unwrap();
        let beta = relay_scale_factor(&p);
        let n_q = 200_000;
        let mut f1 = frame_rng(7, 0, 0, Stream::Fading1ToRelay);
        let mut f2 = frame_rng(7, 0, 0, Stream::Fading2ToRelay);
        let mut nr = frame_rng(7, 0, 0, Stream::NoiseRelay);
        let mut fr = frame_rng(7, 0, 0, Stream::FadingRelayToNode);
        let mut ni = frame_rng(7, 0, 0, Stream::NoiseNode);
        // both nodes always on tone 0: sigma^2_0 = N0 + E1 + E2, sigma^2_1 = N0
        let t = vec![0usize; n_q];
        let mut x_r = ma_phase(&tones(m, &t), &tones(m, &t), &p, &mut f1, &mut f2, &mut nr).unwrap();
        x_r.scale(beta);
        let y = bc_phase(&x_r, &p, &mut fr, &mut ni).unwrap();
        let mean0: f64 = (0..n_q).map(|k| y.column(k)[0].norm_sqr()).sum::<f64>() / n_q as f64;
        let expect0 = beta * beta * p.e_r * (p.n0 + p.e1 + p.e2);
        assert!(
            (mean0 / expect0 - 1.0).abs() < 0.02,
            "mean {mean0} vs {expect0}"
        );
    }

    #[test]
    fn fading_independence_across_symbols() {
        let mut rng = frame_rng(8, 0, 0, Stream::FadingRelayToNode);
        let f = sample_fading(1.0, 100_000, &mut rng).unwrap();
        let n = f.gains.len();
        let mean: Complex64 = f.gains.iter().sum::<Complex64>() / n as f64;
        let mut acorr = Complex64::new(0.0, 0.0);
        for w in f.gains.windows(2) {
            acorr += (w[0] - mean) * (w[1] - mean).conj();
        }
        let var: f64 = f.gains.iter().map(|h| (h - mean).norm_sqr()).sum::<f64>() / n as f64;
        let rho = acorr.norm() / (n as f64 * var);
        assert!(rho < 0.01, "lag-1 autocorrelation {rho}");
    }

    #[test]
    fn identical_seeds_reproduce_frames() {
        let p = ChannelParams::unit_energy(1.0, 2).unwrap();
        let make = || {
            let mut f1 = frame_rng(9, 1, 2, Stream::Fading1ToRelay);
            let mut f2 = frame_rng(9, 1, 2, Stream::Fading2ToRelay);
            let mut nr = frame_rng(9, 1, 2, Stream::NoiseRelay);
            ma_phase(
                &tones(2, &[0, 1, 1]),
                &tones(2, &[1, 1, 0]),
                &p,
                &mut f1,
                &mut f2,
                &mut nr,
            )
            .unwrap()
        };
        assert_eq!(make(), make());
    }
}
