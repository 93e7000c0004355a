//! Noncoherent soft-output demodulation and the iterative receive loop.
//!
//! The closed-form symbol log-likelihood drops every hypothesis-independent
//! term (they cancel in the SOMAP ratio); `oracle::log_density_constant`
//! restores them when a true density is needed. The per-parameter-set
//! Whittaker-W table is precomputed once and shared across frames.

mod oracle;

pub use oracle::{log_amplitude_integral, log_density_constant, oracle_log_symbol_density};

use crate::channel::{relay_scale_factor, ChannelParams, ReceivedFrame};
use crate::error::{Error, Result};
use crate::ldpc::{Decoder, LdpcCode};
use crate::modem::{FrameConfig, Interleaver, SymbolFrame};
use crate::numerics::{log_whittaker_w_neg_half, max_star_pair};
use num_complex::Complex64;

/// Per-bit log-likelihood ratios, convention log P(u=1)/P(u=0).
pub type LlrFrame = Vec<f64>;

/// A-priori LLR magnitudes beyond this bound are treated as certainty;
/// keeps the max-star metrics finite when a decoder saturates.
const PRIOR_CLAMP: f64 = 500.0;

/// Demodulator settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DemodConfig {
    /// Modulation order, matching the frame and channel configuration.
    pub m: usize,
    /// Series truncation: terms n = 0..=n_t.
    pub n_t: u32,
    /// BICM-ID (decoder feedback to the demapper) on or off.
    pub use_feedback: bool,
}

/// Per-dimension variance of the relay superposition before scaling:
/// N0, plus E1 if the receiving node's own tone occupies dimension m,
/// plus E2 if the hypothesized remote tone does.
pub fn sigma_sq(own_tone: usize, hyp_tone: usize, m: usize, p: &ChannelParams) -> f64 {
    p.n0
        + if m == own_tone { p.e1 } else { 0.0 }
        + if m == hyp_tone { p.e2 } else { 0.0 }
}

/// The four distinct variance cases, indexed by occupancy:
/// bit 0 = own tone present, bit 1 = hypothesized tone present.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaTable {
    cases: [f64; 4],
}

impl SigmaTable {
    pub fn new(p: &ChannelParams) -> Self {
        Self {
            cases: [
                p.n0,
                p.n0 + p.e1,
                p.n0 + p.e2,
                p.n0 + p.e1 + p.e2,
            ],
        }
    }

    #[inline]
    pub fn case_index(own_tone: usize, hyp_tone: usize, m: usize) -> usize {
        usize::from(m == own_tone) | (usize::from(m == hyp_tone) << 1)
    }

    #[inline]
    pub fn value(&self, case: usize) -> f64 {
        self.cases[case]
    }
}

/// Precomputed per-case data for one (ChannelParams, N_t) pair: the
/// hypothesis-dependent additive constant and the log Whittaker-W series
/// coefficients.
#[derive(Debug, Clone)]
struct CaseTable {
    /// N0 / (2 E_R sigma^2 beta^2) - log sigma, per case.
    consts: [f64; 4],
    /// log W_{-(n+1/2),0}(N0 / (E_R sigma^2 beta^2)) for n = 0..=N_t.
    logw: [Vec<f64>; 4],
}

impl CaseTable {
    fn build(p: &ChannelParams, beta: f64, n_t: u32) -> Result<Self> {
        let sigma = SigmaTable::new(p);
        let mut consts = [0.0; 4];
        let mut logw: [Vec<f64>; 4] = Default::default();
        for c in 0..4 {
            let s2 = sigma.value(c);
            let arg = p.n0 / (p.e_r * s2 * beta * beta);
            consts[c] = arg / 2.0 - 0.5 * s2.ln();
            logw[c] = (0..=n_t)
                .map(|n| log_whittaker_w_neg_half(n, arg))
                .collect::<Result<_>>()?;
        }
        Ok(Self { consts, logw })
    }

    /// Truncated series of one dimension: max* over n of
    /// 2n log|y| - n log N0 + log W. At |y| = 0 only the n = 0 term
    /// survives (the rest are log 0 = -inf).
    #[inline]
    fn series(&self, case: usize, abs_y: f64, n0: f64) -> f64 {
        let logw = &self.logw[case];
        if abs_y == 0.0 {
            return logw[0];
        }
        let t = 2.0 * abs_y.ln() - n0.ln();
        let mut acc = logw[0];
        for (n, &w) in logw.iter().enumerate().skip(1) {
            acc = max_star_pair(acc, n as f64 * t + w);
        }
        acc
    }
}

/// Closed-form noncoherent symbol log-likelihood, truncated at N_t terms,
/// up to the common additive constant that cancels in the SOMAP ratio.
pub fn log_symbol_likelihood(
    y: &[Complex64],
    own_tone: usize,
    hyp_tone: usize,
    p: &ChannelParams,
    beta: f64,
    n_t: u32,
) -> Result<f64> {
    if y.len() != p.m {
        return Err(Error::DimensionMismatch(format!(
            "likelihood expects {} dimensions, got {}",
            p.m,
            y.len()
        )));
    }
    if own_tone >= p.m || hyp_tone >= p.m {
        return Err(Error::InvalidArgument(format!(
            "tone index out of range: own {own_tone}, hyp {hyp_tone}, M = {}",
            p.m
        )));
    }
    let table = CaseTable::build(p, beta, n_t)?;
    let mut sum = 0.0;
    for (m, ym) in y.iter().enumerate() {
        let c = SigmaTable::case_index(own_tone, hyp_tone, m);
        sum += table.consts[c] + table.series(c, ym.norm(), p.n0);
    }
    Ok(sum)
}

/// Bit-LLR soft demapper. `group_log_likelihoods[g]` is the symbol
/// log-likelihood of the hypothesis whose mu-bit label (first bit most
/// significant) is `g`; `v_a` are per-bit a-priori LLRs.
pub fn somap(group_log_likelihoods: &[f64], v_a: &[f64]) -> Result<Vec<f64>> {
    let m = group_log_likelihoods.len();
    let mu = v_a.len();
    if m == 0 || 1usize << mu != m {
        return Err(Error::DimensionMismatch(format!(
            "somap expects 2^{mu} likelihoods, got {m}"
        )));
    }
    let v: Vec<f64> = v_a.iter().map(|&x| x.clamp(-PRIOR_CLAMP, PRIOR_CLAMP)).collect();

    // metric per hypothesis: log p + sum over all bits of u_j v_j; bit
    // k's own prior is excluded from z_k, so it is subtracted again below
    let metrics: Vec<f64> = group_log_likelihoods
        .iter()
        .enumerate()
        .map(|(g, &lp)| {
            let prior: f64 = (0..mu)
                .filter(|&j| g >> (mu - 1 - j) & 1 == 1)
                .map(|j| v[j])
                .sum();
            lp + prior
        })
        .collect();

    Ok((0..mu)
        .map(|k| {
            let mut one = f64::NEG_INFINITY;
            let mut zero = f64::NEG_INFINITY;
            for (g, &t) in metrics.iter().enumerate() {
                if g >> (mu - 1 - k) & 1 == 1 {
                    one = max_star_pair(one, t);
                } else {
                    zero = max_star_pair(zero, t);
                }
            }
            one - zero - v[k]
        })
        .collect())
}

/// Outcome of a coded receive chain.
#[derive(Debug, Clone)]
pub struct ReceiveOutcome {
    /// Decoded information bits.
    pub info_bits: Vec<u8>,
    /// Full decoded codeword hard decisions.
    pub codeword: Vec<u8>,
    /// Zero syndrome at exit.
    pub converged: bool,
    /// Total decoder iterations spent.
    pub decoder_iterations: usize,
}

/// Demodulator bound to one parameter set; immutable and shareable across
/// concurrently processed frames.
#[derive(Debug, Clone)]
pub struct Demodulator {
    cfg: DemodConfig,
    frame: FrameConfig,
    p: ChannelParams,
    beta: f64,
    table: CaseTable,
}

impl Demodulator {
    pub fn new(cfg: DemodConfig, frame: FrameConfig, p: ChannelParams) -> Result<Self> {
        if cfg.m != frame.m || cfg.m != p.m {
            return Err(Error::DimensionMismatch(format!(
                "modulation order disagrees: demod {}, frame {}, channel {}",
                cfg.m, frame.m, p.m
            )));
        }
        let beta = relay_scale_factor(&p);
        let table = CaseTable::build(&p, beta, cfg.n_t)?;
        Ok(Self {
            cfg,
            frame,
            p,
            beta,
            table,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn config(&self) -> &DemodConfig {
        &self.cfg
    }

    /// Per-slot hypothesis log-likelihoods, group-indexed: entry
    /// k * M + g is the likelihood that the remote node sent the symbol
    /// labeled g in slot k. Computed once per frame; SOMAP passes reuse it.
    pub fn frame_log_likelihoods(
        &self,
        y: &ReceivedFrame,
        own: &SymbolFrame,
    ) -> Result<Vec<f64>> {
        let m = self.cfg.m;
        if y.m != m || own.m != m || y.n_q() != own.tones.len() {
            return Err(Error::DimensionMismatch(format!(
                "frame dimensions disagree: received {}x{}, own {}x{}",
                y.m,
                y.n_q(),
                own.m,
                own.tones.len()
            )));
        }
        let n_q = y.n_q();
        let mut lp = vec![0.0; n_q * m];
        // per dimension, only the hypothesized tone's case differs between
        // hypotheses; compute both occupancy variants once per slot
        let mut without = vec![0.0; m];
        let mut with = vec![0.0; m];
        for k in 0..n_q {
            let own_t = own.tones[k];
            let col = y.column(k);
            let mut base = 0.0;
            for d in 0..m {
                let abs_y = col[d].norm();
                let c0 = usize::from(d == own_t);
                without[d] = self.table.consts[c0] + self.table.series(c0, abs_y, self.p.n0);
                with[d] =
                    self.table.consts[c0 | 2] + self.table.series(c0 | 2, abs_y, self.p.n0);
                base += without[d];
            }
            for hyp in 0..m {
                let g = self.frame.labeling.group_of_tone(hyp);
                lp[k * m + g] = base - without[hyp] + with[hyp];
            }
        }
        Ok(lp)
    }

    /// SOMAP over a whole frame. `lp` comes from `frame_log_likelihoods`;
    /// `v_a`, when present, is in interleaved (symbol) bit order.
    pub fn somap_frame(&self, lp: &[f64], v_a: Option<&[f64]>) -> Result<LlrFrame> {
        let m = self.cfg.m;
        let mu = self.frame.mu();
        let n_q = lp.len() / m;
        if lp.len() != n_q * m || (n_q != self.frame.n_q()) {
            return Err(Error::DimensionMismatch(format!(
                "likelihood cache length {} does not match {} slots of {m} hypotheses",
                lp.len(),
                self.frame.n_q()
            )));
        }
        let zeros;
        let v_a = match v_a {
            Some(v) => {
                if v.len() != n_q * mu {
                    return Err(Error::DimensionMismatch(format!(
                        "a-priori length {} vs {} bits",
                        v.len(),
                        n_q * mu
                    )));
                }
                v
            }
            None => {
                zeros = vec![0.0; n_q * mu];
                &zeros
            }
        };
        let mut z = Vec::with_capacity(n_q * mu);
        for k in 0..n_q {
            z.extend(somap(
                &lp[k * m..(k + 1) * m],
                &v_a[k * mu..(k + 1) * mu],
            )?);
        }
        Ok(z)
    }

    /// One-shot demodulation (non-iterative path, also the uncoded path).
    pub fn demodulate_frame(
        &self,
        y: &ReceivedFrame,
        own: &SymbolFrame,
        v_a: Option<&[f64]>,
    ) -> Result<LlrFrame> {
        let lp = self.frame_log_likelihoods(y, own)?;
        self.somap_frame(&lp, v_a)
    }

    /// Full coded receive chain.
    ///
    /// Without feedback (BICM): one demodulator pass, then `iterations`
    /// decoder iterations. With feedback (BICM-ID): `iterations` outer
    /// rounds of demap / deinterleave / single decoder iteration, with
    /// extrinsic v'_e = v'_o - z' fed back; equal total decoder work.
    /// `early_exit` stops either schedule on a zero syndrome.
    pub fn bicm_id_receive(
        &self,
        y: &ReceivedFrame,
        own: &SymbolFrame,
        code: &LdpcCode,
        decoder: &Decoder,
        il: &Interleaver,
        iterations: usize,
        early_exit: bool,
    ) -> Result<ReceiveOutcome> {
        if code.n() != self.frame.l || il.len() != self.frame.l {
            return Err(Error::DimensionMismatch(format!(
                "code length {} / interleaver {} vs frame L = {}",
                code.n(),
                il.len(),
                self.frame.l
            )));
        }
        let lp = self.frame_log_likelihoods(y, own)?;

        if !self.cfg.use_feedback {
            let z = self.somap_frame(&lp, None)?;
            let v = il.deinterleave(&z)?;
            let out = decoder.decode(&v, iterations, early_exit)?;
            return Ok(ReceiveOutcome {
                info_bits: code.info_bits(&out.hard),
                codeword: out.hard,
                converged: out.converged,
                decoder_iterations: out.iterations,
            });
        }

        let l = self.frame.l;
        let mut extrinsic = vec![0.0; l];
        let mut state = decoder.init();
        let mut converged = false;
        for _ in 0..iterations {
            let v_a = il.interleave(&extrinsic)?;
            let z_int = self.somap_frame(&lp, Some(&v_a))?;
            let z = il.deinterleave(&z_int)?;
            converged = decoder.step(&mut state, &z)?;
            for ((e, &o), &zi) in extrinsic.iter_mut().zip(state.posterior()).zip(&z) {
                *e = o - zi;
            }
            if converged && early_exit {
                break;
            }
        }
        let hard = state.hard_bits();
        Ok(ReceiveOutcome {
            info_bits: code.info_bits(&hard),
            codeword: hard,
            converged,
            decoder_iterations: state.iterations(),
        })
    }
}
