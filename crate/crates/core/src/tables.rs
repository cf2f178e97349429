//! Two-axis contingency tables. By convention the conditioning variable sits
//! on the rows and the response on the columns.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::Serialize;

use crate::discretize::CodedColumn;
use crate::{Error, Result};

/// Rows above this count are tallied in parallel chunks.
const CHUNK: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContingencyTable {
    pub row_name: String,
    pub col_name: String,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    n_rows: usize,
    n_cols: usize,
    counts: Vec<u64>,
    row_sums: Vec<u64>,
    col_sums: Vec<u64>,
    total: u64,
}

impl ContingencyTable {
    pub fn build(row: &CodedColumn, col: &CodedColumn) -> Result<Self> {
        if row.len() != col.len() {
            return Err(Error::LengthMismatch {
                expected: row.len(),
                found: col.len(),
            });
        }
        let counts = tally(row.codes(), row.n_cats(), col.codes(), col.n_cats());
        let mut t = Self::from_flat(row.n_cats(), col.n_cats(), counts)?;
        t.row_name = row.name.clone();
        t.col_name = col.name.clone();
        t.row_labels = row.labels().to_vec();
        t.col_labels = col.labels().to_vec();
        Ok(t)
    }

    /// Table from a count matrix given row by row. All rows must have the
    /// same length and the grand total must be positive.
    pub fn from_counts(counts: &[Vec<u64>]) -> Result<Self> {
        let r = counts.len();
        let c = counts.first().map_or(0, Vec::len);
        if r == 0 || c == 0 {
            return Err(Error::Empty("contingency table needs at least one row and column"));
        }
        if let Some(bad) = counts.iter().find(|row| row.len() != c) {
            return Err(Error::LengthMismatch {
                expected: c,
                found: bad.len(),
            });
        }
        Self::from_flat(r, c, counts.concat())
    }

    fn from_flat(r: usize, c: usize, counts: Vec<u64>) -> Result<Self> {
        let mut row_sums = vec![0u64; r];
        let mut col_sums = vec![0u64; c];
        for i in 0..r {
            for j in 0..c {
                let v = counts[i * c + j];
                row_sums[i] += v;
                col_sums[j] += v;
            }
        }
        let total: u64 = row_sums.iter().sum();
        if total == 0 {
            return Err(Error::ZeroCounts);
        }
        Ok(ContingencyTable {
            row_name: String::from("row"),
            col_name: String::from("col"),
            row_labels: (0..r).map(|i| i.to_string()).collect(),
            col_labels: (0..c).map(|j| j.to_string()).collect(),
            n_rows: r,
            n_cols: c,
            counts,
            row_sums,
            col_sums,
            total,
        })
    }

    pub fn with_labels(mut self, rows: Vec<String>, cols: Vec<String>) -> Result<Self> {
        if rows.len() != self.n_rows {
            return Err(Error::LengthMismatch {
                expected: self.n_rows,
                found: rows.len(),
            });
        }
        if cols.len() != self.n_cols {
            return Err(Error::LengthMismatch {
                expected: self.n_cols,
                found: cols.len(),
            });
        }
        self.row_labels = rows;
        self.col_labels = cols;
        Ok(self)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.counts[r * self.n_cols + c]
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.counts[r * self.n_cols..(r + 1) * self.n_cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u64]> {
        self.counts.chunks_exact(self.n_cols)
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn row_sums(&self) -> &[u64] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[u64] {
        &self.col_sums
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn nonzero_cells(&self) -> usize {
        self.counts.iter().filter(|&&v| v > 0).count()
    }

    pub fn transpose(&self) -> Self {
        let (r, c) = (self.n_rows, self.n_cols);
        let mut counts = vec![0u64; r * c];
        for i in 0..r {
            for j in 0..c {
                counts[j * r + i] = self.counts[i * c + j];
            }
        }
        ContingencyTable {
            row_name: self.col_name.clone(),
            col_name: self.row_name.clone(),
            row_labels: self.col_labels.clone(),
            col_labels: self.row_labels.clone(),
            n_rows: c,
            n_cols: r,
            counts,
            row_sums: self.col_sums.clone(),
            col_sums: self.row_sums.clone(),
            total: self.total,
        }
    }

    /// Each row divided by its sum. Rows with a zero sum come out as zeros.
    pub fn row_proportions(&self) -> Vec<Vec<f64>> {
        self.rows()
            .zip(&self.row_sums)
            .map(|(row, &s)| {
                let s = s.max(1) as f64;
                row.iter().map(|&v| v as f64 / s).collect()
            })
            .collect()
    }

    pub fn odds_table(&self) -> Result<Vec<OddsRow>> {
        if self.n_cols != 2 {
            return Err(Error::NotBinary {
                name: self.col_name.clone(),
                categories: self.n_cols,
            });
        }
        Ok(self
            .rows()
            .zip(&self.row_labels)
            .map(|(row, label)| OddsRow::new(label.clone(), row[0], row[1]))
            .collect())
    }

    /// odds(r1) / odds(r2); infinite when row `r1` has no column-0 count and
    /// NaN when both odds are degenerate.
    pub fn odds_ratio(&self, r1: usize, r2: usize) -> Result<f64> {
        let rows = self.odds_table()?;
        let get = |r: usize| {
            rows.get(r)
                .ok_or_else(|| Error::InvalidConfig(format!("row {r} out of range ({} rows)", rows.len())))
        };
        Ok(get(r1)?.odds / get(r2)?.odds)
    }
}

fn tally(rows: &[u32], r: usize, cols: &[u32], c: usize) -> Vec<u64> {
    let count = |lo: usize, hi: usize| {
        let mut out = vec![0u64; r * c];
        for (&a, &b) in rows[lo..hi].iter().zip(&cols[lo..hi]) {
            out[a as usize * c + b as usize] += 1;
        }
        out
    };
    let n = rows.len();
    if n <= CHUNK || r * c > n {
        return count(0, n);
    }
    let chunks = n.div_ceil(CHUNK);
    let parts = crate::par::map_indexed(chunks, |k| count(k * CHUNK, ((k + 1) * CHUNK).min(n)));
    let mut total = vec![0u64; r * c];
    for p in parts {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    total
}

/// One row of a table against a binary response.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OddsRow {
    pub label: String,
    pub count_col0: u64,
    pub count_col1: u64,
    pub prob_vector: (f64, f64),
    /// p1 / p0, infinite when `count_col0` is zero.
    pub odds: f64,
}

impl OddsRow {
    pub fn new(label: String, count_col0: u64, count_col1: u64) -> Self {
        let n = (count_col0 + count_col1) as f64;
        let (p0, p1) = if n > 0.0 {
            (count_col0 as f64 / n, count_col1 as f64 / n)
        } else {
            (f64::NAN, f64::NAN)
        };
        let odds = if count_col0 == 0 {
            if count_col1 == 0 {
                f64::NAN
            } else {
                f64::INFINITY
            }
        } else {
            count_col1 as f64 / count_col0 as f64
        };
        OddsRow {
            label,
            count_col0,
            count_col1,
            prob_vector: (p0, p1),
            odds,
        }
    }

    pub fn n(&self) -> u64 {
        self.count_col0 + self.count_col1
    }

    pub fn odds_finite(&self) -> bool {
        self.odds.is_finite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(name: &str, codes: &[u32]) -> CodedColumn {
        CodedColumn::from_codes(name, codes, &[])
    }

    #[test]
    fn counts_and_marginals() {
        let a = col("a", &[0, 0, 1, 1, 1]);
        let b = col("b", &[0, 1, 1, 1, 0]);
        let t = ContingencyTable::build(&a, &b).unwrap();
        assert_eq!(t.counts(), &[1, 1, 1, 2]);
        assert_eq!(t.row_sums(), &[2, 3]);
        assert_eq!(t.col_sums(), &[2, 3]);
        assert_eq!(t.total(), 5);
        assert_eq!(ContingencyTable::build(&b, &a).unwrap(), t.transpose());
    }

    #[test]
    fn self_table_is_diagonal() {
        let a = col("a", &[2, 0, 1, 2, 0]);
        let t = ContingencyTable::build(&a, &a).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(t.get(i, j) > 0, i == j);
            }
        }
    }

    #[test]
    fn chunked_tally_matches_sequential() {
        let n = 3 * CHUNK + 17;
        let a: Vec<u32> = (0..n).map(|i| (i * 31 % 7) as u32).collect();
        let b: Vec<u32> = (0..n).map(|i| (i * 17 % 5) as u32).collect();
        let mut seq = vec![0u64; 35];
        for i in 0..n {
            seq[a[i] as usize * 5 + b[i] as usize] += 1;
        }
        assert_eq!(tally(&a, 7, &b, 5), seq);
    }

    #[test]
    fn odds_and_errors() {
        let t = ContingencyTable::from_counts(&[vec![10, 10], vec![0, 3]]).unwrap();
        let rows = t.odds_table().unwrap();
        assert_eq!(rows[0].odds, 1.0);
        assert!(!rows[1].odds_finite());
        assert_eq!(t.odds_ratio(1, 0).unwrap(), f64::INFINITY);
        let wide = ContingencyTable::from_counts(&[vec![1, 2, 3]]).unwrap();
        assert!(matches!(wide.odds_table(), Err(Error::NotBinary { categories: 3, .. })));
        assert_eq!(
            ContingencyTable::from_counts(&[vec![0, 0]]).unwrap_err(),
            Error::ZeroCounts
        );
    }

    #[test]
    fn uniform_proportions() {
        let t = ContingencyTable::from_counts(&[vec![1, 1], vec![1, 1]]).unwrap();
        assert_eq!(t.row_proportions(), vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
    }
}
