//! Cluster-allocation matrices.
//!
//! A clustering of `N` points into up to `n` clusters is stored as an `N x n`
//! row-major matrix whose row `i` is the membership vector of point `i`.

use std::fmt::Display;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Row-sum tolerance for the fuzzy (probabilistic) class.
pub const FUZZY_ROW_TOLERANCE: f64 = 1e-9;
/// Entry tolerance for the hard class.
pub const HARD_ENTRY_TOLERANCE: f64 = 1e-12;

/// Nested clustering classes: every hard clustering is fuzzy, every fuzzy
/// clustering is possibilistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Hard,
    Fuzzy,
    Possibilistic,
}

impl Classification {
    /// Whether rows lie on the probability simplex.
    pub fn is_fuzzy_compatible(self) -> bool {
        matches!(self, Classification::Hard | Classification::Fuzzy)
    }

    pub fn is_hard(self) -> bool {
        self == Classification::Hard
    }
}

impl Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Classification::Hard => "hard",
            Classification::Fuzzy => "fuzzy",
            Classification::Possibilistic => "possibilistic",
        })
    }
}

/// `N x n` matrix of nonnegative membership values, `N >= 2`, `n >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipMatrix<T> {
    rows: usize,
    cols: usize,
    values: Vec<T>,
}

impl<T: Scalar> MembershipMatrix<T> {
    /// Builds a matrix from row-major values, validating every entry.
    pub fn new(rows: usize, cols: usize, values: Vec<T>) -> Result<Self> {
        if rows < 2 {
            return Err(Error::DimensionMismatch(format!(
                "a clustering needs at least 2 points, got {rows}"
            )));
        }
        if cols == 0 {
            return Err(Error::DimensionMismatch(
                "a clustering needs at least 1 cluster".into(),
            ));
        }
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                values.len()
            )));
        }
        for (k, v) in values.iter().enumerate() {
            let (row, col) = (k / cols, k % cols);
            if !v.is_finite() {
                return Err(Error::InvalidEntry {
                    row,
                    col,
                    reason: "not finite".into(),
                });
            }
            if *v < T::zero() {
                return Err(Error::InvalidEntry {
                    row,
                    col,
                    reason: format!("negative value {v}"),
                });
            }
        }
        Ok(Self { rows, cols, values })
    }

    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            values.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, values)
    }

    /// One-hot matrix from zero-based labels.
    pub fn from_labels(labels: &[usize], n_clusters: usize) -> Result<Self> {
        let mut values = vec![T::zero(); labels.len() * n_clusters];
        for (i, &l) in labels.iter().enumerate() {
            if l >= n_clusters {
                return Err(Error::InvalidEntry {
                    row: i,
                    col: l,
                    reason: format!("label {l} outside {n_clusters} clusters"),
                });
            }
            values[i * n_clusters + l] = T::one();
        }
        Self::new(labels.len(), n_clusters, values)
    }

    /// Number of points `N`.
    pub fn n_points(&self) -> usize {
        self.rows
    }

    /// Number of clusters `n`.
    pub fn n_clusters(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[T]> + '_ {
        self.values.chunks_exact(self.cols)
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn classify(&self) -> Classification {
        let hard_tol = T::lit(HARD_ENTRY_TOLERANCE);
        // Single precision cannot resolve 1e-9; widen to a few ulps per term.
        let fuzzy_tol = T::lit(FUZZY_ROW_TOLERANCE)
            .max(T::epsilon() * T::from_usize(8 * self.cols).expect("small count"));
        let is_hard_row = |r: &[T]| {
            let ones = r
                .iter()
                .filter(|&&v| (v - T::one()).abs() <= hard_tol)
                .count();
            let zeros = r.iter().filter(|&&v| v.abs() <= hard_tol).count();
            ones == 1 && zeros == r.len() - 1
        };
        if self.rows().all(is_hard_row) {
            return Classification::Hard;
        }
        let on_simplex = |r: &[T]| (r.iter().copied().sum::<T>() - T::one()).abs() <= fuzzy_tol;
        if self.rows().all(on_simplex) {
            Classification::Fuzzy
        } else {
            Classification::Possibilistic
        }
    }

    /// Classifies and rejects possibilistic matrices, which no index here accepts.
    pub fn require_fuzzy(&self, what: &str) -> Result<Classification> {
        let class = self.classify();
        if class.is_fuzzy_compatible() {
            Ok(class)
        } else {
            Err(Error::Unsupported(format!(
                "{what} is possibilistic (rows do not sum to 1); indices need fuzzy or hard allocations"
            )))
        }
    }

    /// Replaces every row by the indicator of its largest entry (lowest column on ties).
    pub fn harden(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            values: self.rows().flat_map(|r| one_hot(r)).collect(),
        }
    }

    /// Label of each point's largest membership, lowest column on ties.
    pub fn argmax_labels(&self) -> Vec<usize> {
        self.rows().map(argmax).collect()
    }

    /// Column sums (cluster sizes for hard matrices).
    pub fn column_sums(&self) -> Vec<T> {
        let mut sums = vec![T::zero(); self.cols];
        for r in self.rows() {
            for (s, &v) in sums.iter_mut().zip(r) {
                *s = *s + v;
            }
        }
        sums
    }

    pub fn column_means(&self) -> Vec<T> {
        let n = T::from_usize(self.rows).expect("row count representable");
        self.column_sums().into_iter().map(|s| s / n).collect()
    }

    pub(crate) fn set_row(&mut self, i: usize, row: &[T]) {
        self.values[i * self.cols..(i + 1) * self.cols].copy_from_slice(row);
    }

    /// Reads a comma-separated matrix, one point per line.
    pub fn read_csv<P: AsRef<Path>>(path: P, has_header: bool) -> Result<Self>
    where
        T: FromStr,
    {
        let file = std::fs::File::open(path.as_ref())
            .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_csv_reader(file, has_header)
    }

    pub fn from_csv_reader<R: Read>(reader: R, has_header: bool) -> Result<Self>
    where
        T: FromStr,
    {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(has_header)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut cols = None;
        let mut values = Vec::new();
        let mut rows = 0;
        for record in rdr.records() {
            let record = record.map_err(|e| Error::Parse {
                line: e.position().map_or(0, |p| p.line() as usize),
                reason: e.to_string(),
            })?;
            let line = record.position().map_or(rows + 1, |p| p.line() as usize);
            if record.len() == 1 && record[0].is_empty() {
                continue;
            }
            match cols {
                None => cols = Some(record.len()),
                Some(c) if c != record.len() => {
                    return Err(Error::Parse {
                        line,
                        reason: format!("ragged row: {} fields, expected {c}", record.len()),
                    })
                }
                Some(_) => {}
            }
            for (j, field) in record.iter().enumerate() {
                let v = field.parse::<T>().map_err(|_| Error::Parse {
                    line,
                    reason: format!("field {} ({field:?}) is not a number", j + 1),
                })?;
                values.push(v);
            }
            rows += 1;
        }
        let Some(cols) = cols else {
            return Err(Error::Parse {
                line: 1,
                reason: "no data rows".into(),
            });
        };
        if rows < 2 {
            return Err(Error::Parse {
                line: rows,
                reason: "a clustering needs at least 2 rows".into(),
            });
        }
        Self::new(rows, cols, values)
    }

    /// Writes the matrix as CSV with the shortest round-tripping representation.
    pub fn write_csv<W: Write>(&self, writer: W, header: bool) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::Io(e.to_string());
        if header {
            w.write_record((1..=self.cols).map(|j| format!("c{j}")))
                .map_err(io)?;
        }
        for r in self.rows() {
            w.write_record(r.iter().map(|v| v.to_string()))
                .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_csv_path<P: AsRef<Path>>(&self, path: P, header: bool) -> Result<()> {
        let file = std::fs::File::create(path.as_ref())
            .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        self.write_csv(std::io::BufWriter::new(file), header)
    }
}

fn argmax<T: Scalar>(r: &[T]) -> usize {
    let mut best = 0;
    for (j, &v) in r.iter().enumerate().skip(1) {
        if v > r[best] {
            best = j;
        }
    }
    best
}

fn one_hot<T: Scalar>(r: &[T]) -> Vec<T> {
    let k = argmax(r);
    (0..r.len())
        .map(|j| if j == k { T::one() } else { T::zero() })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[&[f64]]) -> MembershipMatrix<f64> {
        MembershipMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn classifies_nested_classes() {
        assert_eq!(
            m(&[&[1.0, 0.0], &[0.0, 1.0]]).classify(),
            Classification::Hard
        );
        let low_fuzzy = vec![[0.98, 0.01, 0.01]; 9];
        assert_eq!(
            MembershipMatrix::from_rows(&low_fuzzy).unwrap().classify(),
            Classification::Fuzzy
        );
        assert_eq!(
            m(&[&[0.5, 0.7], &[0.5, 0.5]]).classify(),
            Classification::Possibilistic
        );
    }

    #[test]
    fn rejects_negative_and_non_finite_entries() {
        let err = m_err(&[&[1.0, 0.0], &[-0.1, 1.1]]);
        assert_eq!(
            err,
            Error::InvalidEntry {
                row: 1,
                col: 0,
                reason: "negative value -0.1".into()
            }
        );
        let err = m_err(&[&[1.0, f64::NAN], &[0.0, 1.0]]);
        assert!(matches!(err, Error::InvalidEntry { row: 0, col: 1, .. }));
    }

    fn m_err(rows: &[&[f64]]) -> Error {
        MembershipMatrix::from_rows(rows).unwrap_err()
    }

    #[test]
    fn harden_breaks_ties_to_lowest_column() {
        let h = m(&[
            &[0.98, 0.01, 0.01],
            &[1.0, 0.0, 0.0],
            &[0.5, 0.5, 0.0],
            &[0.2, 0.3, 0.5],
        ])
        .harden();
        assert_eq!(h.row(0), &[1.0, 0.0, 0.0]);
        assert_eq!(h.row(1), &[1.0, 0.0, 0.0]);
        assert_eq!(h.row(2), &[1.0, 0.0, 0.0]);
        assert_eq!(h.row(3), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn reads_csv_with_and_without_header() {
        let plain =
            MembershipMatrix::<f64>::from_csv_reader("1,0\n0,1\n".as_bytes(), false).unwrap();
        assert_eq!(plain, m(&[&[1.0, 0.0], &[0.0, 1.0]]));
        assert_eq!(plain.classify(), Classification::Hard);
        let headed =
            MembershipMatrix::<f64>::from_csv_reader("c1,c2\n1,0\n0,1\n".as_bytes(), true).unwrap();
        assert_eq!(headed, plain);
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let err =
            MembershipMatrix::<f64>::from_csv_reader("1,0\n0\n".as_bytes(), false).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
        let err =
            MembershipMatrix::<f64>::from_csv_reader("1,0\n0,x\n".as_bytes(), false).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
        let err = MembershipMatrix::<f64>::from_csv_reader("".as_bytes(), false).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn f32_matrices_classify_too() {
        let x = MembershipMatrix::<f32>::from_rows(&[[0.25f32, 0.75], [1.0, 0.0]]).unwrap();
        assert_eq!(x.classify(), Classification::Fuzzy);
    }

    fn fuzzy_matrix() -> impl Strategy<Value = MembershipMatrix<f64>> {
        (2usize..12, 1usize..5).prop_flat_map(|(n, k)| {
            prop::collection::vec(prop::collection::vec(0.001f64..1.0, k), n).prop_map(|rows| {
                let rows: Vec<Vec<f64>> = rows
                    .into_iter()
                    .map(|r| {
                        let s: f64 = r.iter().sum();
                        r.into_iter().map(|v| v / s).collect()
                    })
                    .collect();
                MembershipMatrix::from_rows(&rows).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn hardening_yields_hard(x in fuzzy_matrix()) {
            prop_assert_eq!(x.harden().classify(), Classification::Hard);
        }

        #[test]
        fn classify_ignores_row_order(x in fuzzy_matrix(), shift in 0usize..12) {
            let n = x.n_points();
            let rows: Vec<Vec<f64>> = (0..n).map(|i| x.row((i + shift) % n).to_vec()).collect();
            prop_assert_eq!(MembershipMatrix::from_rows(&rows).unwrap().classify(), x.classify());
        }

        #[test]
        fn csv_round_trip(x in fuzzy_matrix()) {
            let mut buf = Vec::new();
            x.write_csv(&mut buf, true).unwrap();
            let back = MembershipMatrix::<f64>::from_csv_reader(buf.as_slice(), true).unwrap();
            for (a, b) in x.values().iter().zip(back.values()) {
                prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300));
            }
        }
    }
}
