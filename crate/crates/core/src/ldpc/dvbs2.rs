//! Built-in DVB-S2 short-frame nominal rate 1/2 LDPC code.
//!
//! Construction is table driven from `data/dvbs2_r12_short.table`. The
//! header line gives `L K q`; each following line lists the check-node
//! addresses of the first bit of one group of 360 information bits. Bit
//! `360 g + w` of group `g` connects to check `(a + w q) mod (L - K)` for
//! each address `a` in line `g`. The parity part is the standard dual
//! diagonal accumulator, so encoding is linear time.

use super::{EncoderKind, LdpcCode, ParityCheckMatrix};
use crate::error::{Error, Result};

const TABLE: &str = include_str!("../../data/dvbs2_r12_short.table");

/// Builds the short-frame rate-1/2 code from the bundled address table.
pub fn short_r12() -> Result<LdpcCode> {
    short_r12_with_table(TABLE)
}

/// Table-parameterized constructor, exposed for table-format tests.
pub(crate) fn short_r12_with_table(table: &str) -> Result<LdpcCode> {
    let mut lines = table
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| Error::CodeLoad("address table: missing header".into()))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| Error::CodeLoad(format!("address table: bad header token {t:?}")))
        })
        .collect::<Result<_>>()?;
    let [n, k, q] = dims[..] else {
        return Err(Error::CodeLoad("address table: header must be `L K q`".into()));
    };
    let m = n - k;
    if k % 360 != 0 || q * 360 != m {
        return Err(Error::CodeLoad(format!(
            "address table: inconsistent dimensions L = {n}, K = {k}, q = {q}"
        )));
    }

    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut groups = 0usize;
    for (g, line) in lines.enumerate() {
        for tok in line.split_whitespace() {
            let a: usize = tok.parse().map_err(|_| {
                Error::CodeLoad(format!("address table: bad address {tok:?} in group {g}"))
            })?;
            if a >= m {
                return Err(Error::CodeLoad(format!(
                    "address table: address {a} >= {m} in group {g}"
                )));
            }
            for w in 0..360 {
                rows[(a + w * q) % m].push(360 * g + w);
            }
        }
        groups += 1;
    }
    if groups != k / 360 {
        return Err(Error::CodeLoad(format!(
            "address table: {groups} groups, expected {}",
            k / 360
        )));
    }

    // dual-diagonal parity columns
    for c in 0..m {
        rows[c].push(k + c);
        if c > 0 {
            rows[c].push(k + c - 1);
        }
    }

    let h = ParityCheckMatrix::from_adjacency(n, rows)?;
    Ok(LdpcCode {
        h,
        k,
        encoder: EncoderKind::Accumulator,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builds_with_expected_dimensions() {
        let code = short_r12().unwrap();
        assert_eq!(code.n(), 16200);
        assert_eq!(code.k(), 7200);
        assert_eq!(code.parity_check().n_checks(), 9000);
    }

    #[test]
    fn info_column_degrees_follow_table_row_lengths() {
        let code = short_r12().unwrap();
        let h = code.parity_check();
        let counts: Vec<usize> = TABLE
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .skip(1)
            .map(|l| l.split_whitespace().count())
            .collect();
        assert_eq!(counts.len(), 20);
        for (g, &deg) in counts.iter().enumerate() {
            for w in 0..360 {
                assert_eq!(h.cols[360 * g + w].len(), deg, "group {g}, offset {w}");
            }
        }
    }

    #[test]
    fn rejects_out_of_range_address() {
        let bad = TABLE.replacen("712", "9000", 1);
        assert!(short_r12_with_table(&bad).is_err());
    }

    #[test]
    fn rejects_inconsistent_header() {
        let bad = TABLE.replacen("16200 7200 25", "16200 7200 24", 1);
        assert!(short_r12_with_table(&bad).is_err());
    }
}
