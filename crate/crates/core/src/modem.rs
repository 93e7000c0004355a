//! Bit-frame handling: bit-to-tone mapping, one-hot symbol vectors,
//! interleaving and hard decisions.

use crate::error::{Error, Result};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Bit labeling applied when grouping `mu` bits into a tone index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Labeling {
    /// Natural binary order, first bit most significant.
    #[default]
    Natural,
    /// Binary-reflected Gray labeling.
    Gray,
}

impl Labeling {
    /// Tone index for a mu-bit group value (MSB-first packed).
    pub fn tone_of_group(self, group: usize) -> usize {
        match self {
            Labeling::Natural => group,
            Labeling::Gray => group ^ (group >> 1),
        }
    }

    /// Inverse of [`tone_of_group`](Self::tone_of_group).
    pub fn group_of_tone(self, tone: usize) -> usize {
        match self {
            Labeling::Natural => tone,
            Labeling::Gray => {
                let mut g = tone;
                let mut mask = tone >> 1;
                while mask != 0 {
                    g ^= mask;
                    mask >>= 1;
                }
                g
            }
        }
    }
}

/// Frame dimensioning shared by modulator, channel and code.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameConfig {
    /// Modulation order, a power of two.
    pub m: usize,
    /// Information bits per frame.
    pub k: usize,
    /// Coded bits per frame (equals `k` when uncoded).
    pub l: usize,
    /// Bit labeling for the tone map.
    pub labeling: Labeling,
}

impl FrameConfig {
    pub fn new(m: usize, k: usize, l: usize) -> Result<Self> {
        let cfg = FrameConfig {
            m,
            k,
            l,
            labeling: Labeling::Natural,
        };
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<()> {
        if self.m < 2 || !self.m.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "modulation order must be a power of two >= 2, got {}",
                self.m
            )));
        }
        if self.l % self.mu() != 0 {
            return Err(Error::InvalidArgument(format!(
                "coded length {} not divisible by bits per symbol {}",
                self.l,
                self.mu()
            )));
        }
        if self.k == 0 || self.l < self.k {
            return Err(Error::InvalidArgument(format!(
                "inconsistent frame sizes k = {}, l = {}",
                self.k, self.l
            )));
        }
        Ok(())
    }

    /// Bits per symbol, log2 M.
    pub fn mu(&self) -> usize {
        self.m.trailing_zeros() as usize
    }

    /// Symbols per frame, L / mu.
    pub fn n_q(&self) -> usize {
        self.l / self.mu()
    }

    /// Code rate K/L (1 when uncoded).
    pub fn rate(&self) -> f64 {
        self.k as f64 / self.l as f64
    }
}

/// Per-slot FSK tone indices for one transmitted frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolFrame {
    pub m: usize,
    pub tones: Vec<usize>,
}

impl SymbolFrame {
    /// One-hot view: M x N_q 0/1 matrix, column k holding a single 1 at
    /// row `tones[k]`.
    pub fn one_hot(&self) -> Vec<Vec<u8>> {
        self.tones
            .iter()
            .map(|&q| {
                let mut col = vec![0u8; self.m];
                col[q] = 1;
                col
            })
            .collect()
    }
}

/// Maps a length-L bit sequence to N_q = L/mu tones, mu bits per tone,
/// first bit of each group most significant.
pub fn map_bits_to_tones(bits: &[u8], cfg: &FrameConfig) -> Result<SymbolFrame> {
    if bits.len() != cfg.l {
        return Err(Error::DimensionMismatch(format!(
            "expected {} bits, got {}",
            cfg.l,
            bits.len()
        )));
    }
    let mu = cfg.mu();
    let tones = bits
        .chunks(mu)
        .map(|group| {
            let g = group.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
            cfg.labeling.tone_of_group(g)
        })
        .collect();
    Ok(SymbolFrame { m: cfg.m, tones })
}

/// Inverse of [`map_bits_to_tones`].
pub fn unmap_tones_to_bits(frame: &SymbolFrame, cfg: &FrameConfig) -> Result<Vec<u8>> {
    if frame.tones.len() != cfg.n_q() || frame.m != cfg.m {
        return Err(Error::DimensionMismatch(format!(
            "expected {} tones of order {}, got {} of order {}",
            cfg.n_q(),
            cfg.m,
            frame.tones.len(),
            frame.m
        )));
    }
    let mu = cfg.mu();
    let mut bits = Vec::with_capacity(cfg.l);
    for &tone in &frame.tones {
        let g = cfg.labeling.group_of_tone(tone);
        for j in (0..mu).rev() {
            bits.push(((g >> j) & 1) as u8);
        }
    }
    Ok(bits)
}

/// A fixed permutation of {0, ..., L-1} plus the seed that generated it.
#[derive(Debug, Clone)]
pub struct Interleaver {
    perm: Vec<usize>,
    inv: Vec<usize>,
    pub seed: u64,
}

impl Interleaver {
    /// Uniformly random permutation drawn from `rng`.
    pub fn random<R: Rng>(len: usize, seed: u64, rng: &mut R) -> Self {
        let mut perm: Vec<usize> = (0..len).collect();
        perm.shuffle(rng);
        Self::from_permutation(perm, seed)
    }

    pub fn identity(len: usize) -> Self {
        Self::from_permutation((0..len).collect(), 0)
    }

    fn from_permutation(perm: Vec<usize>, seed: u64) -> Self {
        let mut inv = vec![0usize; perm.len()];
        for (i, &p) in perm.iter().enumerate() {
            inv[p] = i;
        }
        Interleaver { perm, inv, seed }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    /// Output position j takes input position perm[j].
    pub fn interleave<T: Copy>(&self, seq: &[T]) -> Result<Vec<T>> {
        if seq.len() != self.perm.len() {
            return Err(Error::DimensionMismatch(format!(
                "interleaver length {} vs sequence length {}",
                self.perm.len(),
                seq.len()
            )));
        }
        Ok(self.perm.iter().map(|&p| seq[p]).collect())
    }

    pub fn deinterleave<T: Copy>(&self, seq: &[T]) -> Result<Vec<T>> {
        if seq.len() != self.inv.len() {
            return Err(Error::DimensionMismatch(format!(
                "interleaver length {} vs sequence length {}",
                self.inv.len(),
                seq.len()
            )));
        }
        Ok(self.inv.iter().map(|&p| seq[p]).collect())
    }
}

/// Hard decision on LLRs in the log P(1)/P(0) convention; exact zero
/// decides 0.
pub fn hard_decision(llrs: &[f64]) -> Vec<u8> {
    llrs.iter().map(|&z| u8::from(z > 0.0)).collect()
}
