//! Parser for the standard alist sparse-matrix text format.
//!
//! Layout: `n m`, `max_col_deg max_row_deg`, the n column degrees, the m
//! row degrees, then one line of 1-based row indices per column and one
//! line of 1-based column indices per row. Zero entries pad fixed-width
//! variants and are ignored.

use super::ParityCheckMatrix;
use crate::error::{Error, Result};

fn parse_line(tokens: &mut impl Iterator<Item = Result<usize>>, count: usize) -> Result<Vec<usize>> {
    (0..count)
        .map(|_| {
            tokens
                .next()
                .unwrap_or_else(|| Err(Error::CodeLoad("alist truncated".into())))
        })
        .collect()
}

/// Parses alist text into a validated parity check matrix.
pub fn parse_alist(text: &str) -> Result<ParityCheckMatrix> {
    let mut tokens = text.split_whitespace().map(|t| {
        t.parse::<usize>()
            .map_err(|_| Error::CodeLoad(format!("alist: bad token {t:?}")))
    });
    let head = parse_line(&mut tokens, 4)?;
    let (n, m, max_col, max_row) = (head[0], head[1], head[2], head[3]);
    if n == 0 || m == 0 || m >= n {
        return Err(Error::CodeLoad(format!(
            "alist: implausible dimensions n = {n}, m = {m}"
        )));
    }
    let col_degs = parse_line(&mut tokens, n)?;
    let row_degs = parse_line(&mut tokens, m)?;
    if col_degs.iter().any(|&d| d == 0 || d > max_col) {
        return Err(Error::CodeLoad("alist: column degree out of range".into()));
    }
    if row_degs.iter().any(|&d| d == 0 || d > max_row) {
        return Err(Error::CodeLoad("alist: row degree out of range".into()));
    }

    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (v, &deg) in col_degs.iter().enumerate() {
        // fixed-width alists pad with zeros up to max_col; tolerate both
        let entries = parse_line(&mut tokens, deg)?;
        for &r in &entries {
            if r == 0 || r > m {
                return Err(Error::CodeLoad(format!(
                    "alist: row index {r} out of range for column {v}"
                )));
            }
            rows[r - 1].push(v);
        }
        let mut lookahead_pad = max_col - deg;
        while lookahead_pad > 0 {
            // columns padded to max_col carry explicit zeros
            match tokens.next() {
                Some(Ok(0)) => lookahead_pad -= 1,
                _ => {
                    return Err(Error::CodeLoad(format!(
                        "alist: expected padding for column {v}"
                    )))
                }
            }
        }
    }

    // the row section must agree with the column section
    for (c, &deg) in row_degs.iter().enumerate() {
        if rows[c].len() != deg {
            return Err(Error::CodeLoad(format!(
                "alist: row {c} degree {} disagrees with declared {deg}",
                rows[c].len()
            )));
        }
        let entries = parse_line(&mut tokens, deg)?;
        let mut declared: Vec<usize> = entries
            .iter()
            .map(|&v| {
                if v == 0 || v > n {
                    Err(Error::CodeLoad(format!(
                        "alist: column index {v} out of range for row {c}"
                    )))
                } else {
                    Ok(v - 1)
                }
            })
            .collect::<Result<_>>()?;
        declared.sort_unstable();
        let mut built = rows[c].clone();
        built.sort_unstable();
        if declared != built {
            return Err(Error::CodeLoad(format!(
                "alist: row {c} inconsistent with column section"
            )));
        }
        let mut pad = max_row - deg;
        while pad > 0 {
            match tokens.next() {
                Some(Ok(0)) => pad -= 1,
                None => break, // trailing padding is commonly omitted on the last rows
                _ => return Err(Error::CodeLoad(format!("alist: expected padding for row {c}"))),
            }
        }
    }

    ParityCheckMatrix::from_adjacency(n, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HAMMING74: &str = include_str!("../../data/hamming74.alist");

    #[test]
    fn parses_hamming() {
        let h = parse_alist(HAMMING74).unwrap();
        assert_eq!(h.n, 7);
        assert_eq!(h.n_checks(), 3);
        assert_eq!(h.rows[0], vec![0, 2, 4, 6]);
    }

    #[test]
    fn rejects_column_index_out_of_range() {
        // row section references column 9 > n = 7
        let bad = HAMMING74.replace("4 5 6 7", "4 5 6 9");
        assert!(parse_alist(&bad).is_err());
    }

    #[test]
    fn rejects_truncated_file() {
        let lines: Vec<&str> = HAMMING74.lines().take(6).collect();
        assert!(parse_alist(&lines.join("\n")).is_err());
    }

    #[test]
    fn rejects_inconsistent_sections() {
        // row 0 declares column 6 instead of 7, contradicting the columns
        let bad = HAMMING74.replace("1 3 5 7", "1 3 5 6");
        assert!(parse_alist(&bad).is_err());
    }
}
