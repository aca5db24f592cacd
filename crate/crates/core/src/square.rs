//! Latin squares over the symbol set `1..=n`.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatinError {
    #[error("order must be positive")]
    ZeroOrder,
    #[error("expected {expected} entries in row {row}, found {found}")]
    RowLength {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("expected {expected} rows, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error("symbol {symbol} at ({row},{col}) is outside 1..={n}")]
    SymbolRange {
        row: usize,
        col: usize,
        symbol: usize,
        n: usize,
    },
    #[error("row {row} repeats symbol {symbol} (columns {first} and {second})")]
    RowRepeat {
        row: usize,
        symbol: usize,
        first: usize,
        second: usize,
    },
    #[error("column {col} repeats symbol {symbol} (rows {first} and {second})")]
    ColumnRepeat {
        col: usize,
        symbol: usize,
        first: usize,
        second: usize,
    },
    #[error("parse error: {0}")]
    Parse(String),
}

/// An `n x n` Latin square. Rows, columns and symbols are 1-based.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LatinSquare {
    n: usize,
    cells: Vec<u16>,
}

impl LatinSquare {
    /// Builds a square from rows of 1-based symbols, checking every constraint.
    pub fn from_rows(rows: Vec<Vec<usize>>) -> Result<Self, LatinError> {
        let n = rows.len();
        if n == 0 {
            return Err(LatinError::ZeroOrder);
        }
        let mut cells = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(LatinError::RowLength {
                    row: i + 1,
                    expected: n,
                    found: row.len(),
                });
            }
            for (j, &s) in row.iter().enumerate() {
                if s == 0 || s > n {
                    return Err(LatinError::SymbolRange {
                        row: i + 1,
                        col: j + 1,
                        symbol: s,
                        n,
                    });
                }
                cells.push(s as u16);
            }
        }
        let sq = LatinSquare { n, cells };
        sq.validate()?;
        Ok(sq)
    }

    /// Builds from a flat row-major vector without validation. Callers must
    /// guarantee the Latin property.
    pub(crate) fn from_flat_unchecked(n: usize, cells: Vec<u16>) -> Self {
        debug_assert_eq!(cells.len(), n * n);
        LatinSquare { n, cells }
    }

    /// Reports the first violated row, column or range constraint.
    pub fn validate(&self) -> Result<(), LatinError> {
        let n = self.n;
        if n == 0 {
            return Err(LatinError::ZeroOrder);
        }
        if self.cells.len() != n * n {
            return Err(LatinError::RowCount {
                expected: n,
                found: self.cells.len() / n.max(1),
            });
        }
        let mut seen = vec![0usize; n + 1];
        for i in 0..n {
            seen.iter_mut().for_each(|x| *x = 0);
            for j in 0..n {
                let s = self.cells[i * n + j] as usize;
                if s == 0 || s > n {
                    return Err(LatinError::SymbolRange {
                        row: i + 1,
                        col: j + 1,
                        symbol: s,
                        n,
                    });
                }
                if seen[s] != 0 {
                    return Err(LatinError::RowRepeat {
                        row: i + 1,
                        symbol: s,
                        first: seen[s],
                        second: j + 1,
                    });
                }
                seen[s] = j + 1;
            }
        }
        for j in 0..n {
            seen.iter_mut().for_each(|x| *x = 0);
            for i in 0..n {
                let s = self.cells[i * n + j] as usize;
                if seen[s] != 0 {
                    return Err(LatinError::ColumnRepeat {
                        col: j + 1,
                        symbol: s,
                        first: seen[s],
                        second: i + 1,
                    });
                }
                seen[s] = i + 1;
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Symbol at 1-based `(row, col)`.
    #[inline]
    pub fn get(&self, row: usize, col: usize) -> usize {
        self.cells[(row - 1) * self.n + (col - 1)] as usize
    }

    pub fn rows(&self) -> Vec<Vec<usize>> {
        self.cells
            .chunks(self.n)
            .map(|r| r.iter().map(|&s| s as usize).collect())
            .collect()
    }

    /// Symbols on the leading diagonal, in row order.
    pub fn diagonal(&self) -> Vec<usize> {
        (1..=self.n).map(|i| self.get(i, i)).collect()
    }

    /// Permutes rows: row `i` of the result is row `sigma[i-1]` of `self`.
    pub fn permute_rows(&self, sigma: &[usize]) -> LatinSquare {
        let n = self.n;
        assert_eq!(sigma.len(), n);
        let mut cells = Vec::with_capacity(n * n);
        for &src in sigma {
            cells.extend_from_slice(&self.cells[(src - 1) * n..src * n]);
        }
        LatinSquare { n, cells }
    }

    /// Parses the text format: `n` on the first line, then `n` rows.
    pub fn parse_text(text: &str) -> Result<Self, LatinError> {
        let mut tokens = text.split_whitespace();
        let n: usize = tokens
            .next()
            .ok_or_else(|| LatinError::Parse("empty input".into()))?
            .parse()
            .map_err(|e| LatinError::Parse(format!("order: {e}")))?;
        if n == 0 {
            return Err(LatinError::ZeroOrder);
        }
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = Vec::with_capacity(n);
            for j in 0..n {
                let tok = tokens.next().ok_or_else(|| {
                    LatinError::Parse(format!("missing entry at ({},{})", i + 1, j + 1))
                })?;
                row.push(
                    tok.parse().map_err(|e| {
                        LatinError::Parse(format!("entry ({},{}): {e}", i + 1, j + 1))
                    })?,
                );
            }
            rows.push(row);
        }
        if tokens.next().is_some() {
            return Err(LatinError::Parse("trailing data after the last row".into()));
        }
        Self::from_rows(rows)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for row in self.cells.chunks(self.n) {
            let line: Vec<String> = row.iter().map(|s| s.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    /// Accepts either the JSON object form or the plain text form.
    pub fn parse_any(text: &str) -> Result<Self, LatinError> {
        if text.trim_start().starts_with('{') {
            serde_json::from_str::<LatinSquare>(text).map_err(|e| LatinError::Parse(e.to_string()))
        } else {
            Self::parse_text(text)
        }
    }
}

impl fmt::Debug for LatinSquare {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LatinSquare({:?})", self.rows())
    }
}

#[derive(Serialize, Deserialize)]
struct SquareJson {
    n: usize,
    grid: Vec<Vec<usize>>,
}

impl Serialize for LatinSquare {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SquareJson {
            n: self.n,
            grid: self.rows(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LatinSquare {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = SquareJson::deserialize(d)?;
        if raw.grid.len() != raw.n {
            return Err(serde::de::Error::custom(format!(
                "n = {} but grid has {} rows",
                raw.n,
                raw.grid.len()
            )));
        }
        LatinSquare::from_rows(raw.grid).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_repeated_row_symbol() {
        let err = LatinSquare::from_rows(vec![vec![1, 1], vec![2, 2]]).unwrap_err();
        assert_eq!(
            err,
            LatinError::RowRepeat {
                row: 1,
                symbol: 1,
                first: 1,
                second: 2
            }
        );
    }

    #[test]
    fn rejects_repeated_column_symbol() {
        let err = LatinSquare::from_rows(vec![vec![1, 2], vec![1, 2]]).unwrap_err();
        assert_eq!(
            err,
            LatinError::ColumnRepeat {
                col: 1,
                symbol: 1,
                first: 1,
                second: 2
            }
        );
    }

    #[test]
    fn text_round_trip() {
        let sq = LatinSquare::from_rows(vec![vec![1, 2, 3], vec![2, 3, 1], vec![3, 1, 2]]).unwrap();
        let back = LatinSquare::parse_text(&sq.to_text()).unwrap();
        assert_eq!(sq, back);
    }

    #[test]
    fn json_round_trip() {
        let sq = LatinSquare::from_rows(vec![vec![2, 1], vec![1, 2]]).unwrap();
        let js = serde_json::to_string(&sq).unwrap();
        assert_eq!(js, r#"{"n":2,"grid":[[2,1],[1,2]]}"#);
        assert_eq!(LatinSquare::parse_any(&js).unwrap(), sq);
    }

    #[test]
    fn text_rejects_trailing_tokens() {
        assert!(LatinSquare::parse_text("1\n1 1\n").is_err());
    }
}
