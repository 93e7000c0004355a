//! LDPC encoding and sum-product decoding.
//!
//! Two encoder shapes are supported: the accumulator (IRA) structure of the
//! built-in DVB-S2 code, which encodes in linear time, and a dense
//! GF(2)-elimination encoder derived for arbitrary user codes loaded from
//! alist files. Codewords are systematic: the first K positions carry the
//! information bits.

pub mod alist;
mod decoder;
mod dvbs2;

pub use decoder::{CheckRule, DecodeOutcome, Decoder, DecoderState};

use crate::error::{Error, Result};
use std::path::{Path, PathBuf};

/// Sparse binary parity check matrix held as row and column adjacency lists.
#[derive(Debug, Clone)]
pub struct ParityCheckMatrix {
    /// Codeword length L.
    pub n: usize,
    /// rows[c] lists the variable indices of check c, ascending.
    pub rows: Vec<Vec<usize>>,
    /// cols[v] lists the check indices touching variable v, ascending.
    pub cols: Vec<Vec<usize>>,
}

impl ParityCheckMatrix {
    /// Builds from check-node adjacency, deriving the column lists.
    pub fn from_adjacency(n: usize, mut rows: Vec<Vec<usize>>) -> Result<Self> {
        let m = rows.len();
        if n == 0 || m == 0 || m >= n {
            return Err(Error::CodeLoad(format!(
                "parity check dimensions implausible: {m} x {n}"
            )));
        }
        let mut cols: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (c, row) in rows.iter_mut().enumerate() {
            row.sort_unstable();
            if row.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::CodeLoad(format!("check {c} has a repeated variable")));
            }
            if row.is_empty() {
                return Err(Error::CodeLoad(format!("check {c} is empty")));
            }
            for &v in row.iter() {
                if v >= n {
                    return Err(Error::CodeLoad(format!(
                        "check {c} references variable {v} >= {n}"
                    )));
                }
                cols[v].push(c);
            }
        }
        if let Some(v) = cols.iter().position(Vec::is_empty) {
            return Err(Error::CodeLoad(format!("variable {v} touches no check")));
        }
        Ok(Self { n, rows, cols })
    }

    /// Number of parity checks (L - K for full-rank codes).
    pub fn n_checks(&self) -> usize {
        self.rows.len()
    }

    /// True iff H c = 0 over GF(2).
    pub fn syndrome_ok(&self, bits: &[u8]) -> bool {
        debug_assert_eq!(bits.len(), self.n);
        self.rows
            .iter()
            .all(|row| row.iter().fold(0u8, |s, &v| s ^ (bits[v] & 1)) == 0)
    }

    /// Number of stored nonzero entries.
    pub fn n_edges(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }
}

/// Where a code definition comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CodeSource {
    /// User code in alist format on disk.
    Alist(PathBuf),
    /// Built-in DVB-S2 short frame (L = 16200) nominal rate 1/2 code.
    Dvbs2ShortR12,
}

#[derive(Debug, Clone)]
enum EncoderKind {
    /// Dual-diagonal parity part: p_c = p_{c-1} + sum of info bits of check c.
    Accumulator,
    /// Row-reduced H; parity[r] solved from the info bits via dense XOR rows.
    Dense {
        /// pivot_cols[r] is the codeword position solved by reduced row r.
        pivot_cols: Vec<usize>,
        /// info_cols in ascending order; info_cols.len() = K.
        info_cols: Vec<usize>,
        /// Bit-packed reduced rows over the full n columns, 64 per word.
        rows: Vec<Vec<u64>>,
    },
}

/// A loaded LDPC code: parity check matrix plus a derived encoder.
#[derive(Debug, Clone)]
pub struct LdpcCode {
    h: ParityCheckMatrix,
    k: usize,
    encoder: EncoderKind,
}

impl LdpcCode {
    /// Codeword length L.
    pub fn n(&self) -> usize {
        self.h.n
    }

    /// Information length K.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Code rate K / L.
    pub fn rate(&self) -> f64 {
        self.k as f64 / self.h.n as f64
    }

    pub fn parity_check(&self) -> &ParityCheckMatrix {
        &self.h
    }

    /// Derives a systematic encoder from an arbitrary full-rank parity check
    /// matrix by GF(2) Gaussian elimination. Fails on rank deficiency.
    pub fn from_parity_check(h: ParityCheckMatrix) -> Result<Self> {
        let n = h.n;
        let m = h.n_checks();
        let words = n.div_ceil(64);
        let mut rows: Vec<Vec<u64>> = h
            .rows
            .iter()
            .map(|row| {
                let mut packed = vec![0u64; words];
                for &v in row {
                    packed[v / 64] |= 1u64 << (v % 64);
                }
                packed
            })
            .collect();

        // eliminate scanning columns right to left so parity lands in the
        // tail and the systematic prefix stays maximal
        let mut pivot_cols = Vec::with_capacity(m);
        let mut is_pivot = vec![false; n];
        let mut rank = 0usize;
        for col in (0..n).rev() {
            if rank == m {
                break;
            }
            let (w, b) = (col / 64, 1u64 << (col % 64));
            let Some(p) = (rank..m).find(|&r| rows[r][w] & b != 0) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot_row = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row[w] & b != 0 {
                    for (dst, src) in row.iter_mut().zip(&pivot_row) {
                        *dst ^= src;
                    }
                }
            }
            pivot_cols.push(col);
            is_pivot[col] = true;
            rank += 1;
        }
        if rank < m {
            return Err(Error::CodeLoad(format!(
                "parity check matrix is rank deficient: rank {rank} < {m} checks"
            )));
        }

        let info_cols: Vec<usize> = (0..n).filter(|&v| !is_pivot[v]).collect();
        let k = info_cols.len();
        Ok(Self {
            h,
            k,
            encoder: EncoderKind::Dense {
                pivot_cols,
                info_cols,
                rows,
            },
        })
    }

    /// Loads an alist file from disk.
    pub fn load_alist(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_parity_check(alist::parse_alist(&text)?)
    }

    /// Loads a code from any supported source.
    pub fn load(source: &CodeSource) -> Result<Self> {
        match source {
            CodeSource::Alist(path) => Self::load_alist(path),
            CodeSource::Dvbs2ShortR12 => dvbs2::short_r12(),
        }
    }

    /// Systematic encode: H c = 0 with the information bits leading.
    ///
    /// For dense encoders the information bits occupy the non-pivot columns
    /// in ascending order; `info_bits` recovers them from a codeword.
    pub fn encode(&self, u: &[u8]) -> Result<Vec<u8>> {
        if u.len() != self.k {
            return Err(Error::DimensionMismatch(format!(
                "encode expects K = {} bits, got {}",
                self.k,
                u.len()
            )));
        }
        let n = self.h.n;
        let mut c = vec![0u8; n];
        match &self.encoder {
            EncoderKind::Accumulator => {
                let k = self.k;
                c[..k].copy_from_slice(u);
                let mut acc = 0u8;
                for (ci, row) in self.h.rows.iter().enumerate() {
                    for &v in row {
                        if v < k {
                            acc ^= u[v] & 1;
                        }
                    }
                    c[k + ci] = acc;
                }
            }
            EncoderKind::Dense {
                pivot_cols,
                info_cols,
                rows,
            } => {
                for (&v, &bit) in info_cols.iter().zip(u) {
                    c[v] = bit & 1;
                }
                for (row, &pv) in rows.iter().zip(pivot_cols) {
                    let mut parity = 0u8;
                    for (&v, &bit) in info_cols.iter().zip(u) {
                        parity ^= bit & (row[v / 64] >> (v % 64)) as u8;
                    }
                    c[pv] = parity & 1;
                }
            }
        }
        debug_assert!(self.h.syndrome_ok(&c));
        Ok(c)
    }

    /// Extracts the information bits from a codeword-length bit vector.
    pub fn info_bits(&self, c: &[u8]) -> Vec<u8> {
        match &self.encoder {
            EncoderKind::Accumulator => c[..self.k].to_vec(),
            EncoderKind::Dense { info_cols, .. } => info_cols.iter().map(|&v| c[v]).collect(),
        }
    }
}
