//! Sample ingestion and validation.
//!
//! [`Dataset`] is the single ingress for both file-loaded and generated
//! data: an `n x d` covariate matrix plus a response vector of length `n`.
//! Entries are stored row-major. A dataset is immutable after construction
//! and safe to share across threads.

use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("column {0:?} not found in header")]
    MissingColumn(String),
    #[error("non-numeric cell {value:?} at data row {row}, column {col:?}")]
    NonNumericCell { row: usize, col: String, value: String },
    #[error("need at least 2 data rows, found {0}")]
    TooFewRows(usize),
    #[error("no covariate columns remain once the response column is removed")]
    NoCovariates,
    #[error("row/column shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite value at data row {row}, column index {col}")]
    NonFinite { row: usize, col: usize },
    #[error("response is constant; the coefficient denominator would be zero")]
    ConstantResponse,
}

/// The raw sample `{(X_i, Y_i)}`: covariates `x` (n rows, d columns,
/// row-major) and response `y` of length n.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Vec<f64>,
    y: Vec<f64>,
    n: usize,
    d: usize,
    column_names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset from a row-major covariate matrix and a response.
    ///
    /// Checks shape invariants only (`n >= 2`, `d >= 1`, lengths agree);
    /// finiteness and non-degeneracy of the response are [`validate`]'s job.
    pub fn new(
        x: Vec<f64>,
        y: Vec<f64>,
        d: usize,
        column_names: Vec<String>,
    ) -> Result<Self, DataError> {
        if d == 0 {
            return Err(DataError::NoCovariates);
        }
        if x.len() % d != 0 {
            return Err(DataError::Shape(format!(
                "covariate buffer length {} is not a multiple of d = {}",
                x.len(),
                d
            )));
        }
        let n = x.len() / d;
        if n < 2 {
            return Err(DataError::TooFewRows(n));
        }
        if y.len() != n {
            return Err(DataError::Shape(format!(
                "response length {} != row count {}",
                y.len(),
                n
            )));
        }
        if column_names.len() != d + 1 {
            return Err(DataError::Shape(format!(
                "expected {} column names, got {}",
                d + 1,
                column_names.len()
            )));
        }
        Ok(Dataset { x, y, n, d, column_names })
    }

    /// Convenience constructor with generated column names `x1..xd, y`.
    pub fn from_parts(x: Vec<f64>, y: Vec<f64>, d: usize) -> Result<Self, DataError> {
        let mut names: Vec<String> = (1..=d).map(|j| format!("x{j}")).collect();
        names.push("y".to_string());
        Dataset::new(x, y, d, names)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn x(&self, i: usize, j: usize) -> f64 {
        self.x[i * self.d + j]
    }

    pub fn x_data(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    /// Serializes back to the CSV dialect accepted by [`load_csv`].
    ///
    /// Values are written with Rust's shortest round-trip float formatting,
    /// so load -> write -> load is exact.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        let mut header: Vec<&str> = self.column_names[..self.d].iter().map(|s| s.as_str()).collect();
        header.push(&self.column_names[self.d]);
        let _ = writeln!(out, "{}", header.join(","));
        for i in 0..self.n {
            for j in 0..self.d {
                let _ = write!(out, "{},", self.x(i, j));
            }
            let _ = writeln!(out, "{}", self.y[i]);
        }
        out
    }
}

/// Loads a comma-delimited, header-first CSV file, taking `y_column` as the
/// response and all remaining columns, in file order, as covariates.
pub fn load_csv<P: AsRef<Path>>(path: P, y_column: &str) -> Result<Dataset, DataError> {
    let path_str = path.as_ref().display().to_string();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path.as_ref())
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => {
                let io = match e.into_kind() {
                    csv::ErrorKind::Io(io) => io,
                    _ => unreachable!(),
                };
                DataError::Io { path: path_str.clone(), source: io }
            }
            _ => DataError::Shape(format!("csv error: {e}")),
        })?;

    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| DataError::Shape(format!("csv header error: {e}")))?
        .iter()
        .map(|s| s.to_string())
        .collect();
    let y_idx = headers
        .iter()
        .position(|h| h == y_column)
        .ok_or_else(|| DataError::MissingColumn(y_column.to_string()))?;
    let d = headers.len() - 1;
    if d == 0 {
        return Err(DataError::NoCovariates);
    }

    let mut x = Vec::new();
    let mut y = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| DataError::Shape(format!("csv row {row}: {e}")))?;
        if rec.len() != headers.len() {
            return Err(DataError::Shape(format!(
                "row {row} has {} fields, expected {}",
                rec.len(),
                headers.len()
            )));
        }
        for (j, cell) in rec.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| DataError::NonNumericCell {
                row,
                col: headers[j].clone(),
                value: cell.to_string(),
            })?;
            if j == y_idx {
                y.push(v);
            } else {
                x.push(v);
            }
        }
    }
    if y.len() < 2 {
        return Err(DataError::TooFewRows(y.len()));
    }

    let mut names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != y_idx)
        .map(|(_, h)| h.clone())
        .collect();
    names.push(headers[y_idx].clone());
    Dataset::new(x, y, d, names)
}

/// Checks the value-level invariants: every entry finite and the response
/// non-constant. Returns the dataset unchanged on success.
pub fn validate(ds: Dataset) -> Result<Dataset, DataError> {
    for i in 0..ds.n {
        for j in 0..ds.d {
            if !ds.x(i, j).is_finite() {
                return Err(DataError::NonFinite { row: i, col: j });
            }
        }
        if !ds.y[i].is_finite() {
            return Err(DataError::NonFinite { row: i, col: ds.d });
        }
    }
    let y0 = ds.y[0];
    if ds.y.iter().all(|&v| v == y0) {
        return Err(DataError::ConstantResponse);
    }
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn load_basic() {
        let f = write_tmp("a,b,y\n1,2,3\n4,5,6\n7,8,9\n");
        let ds = load_csv(f.path(), "y").unwrap();
        assert_eq!(ds.n(), 3);
        assert_eq!(ds.d(), 2);
        assert_eq!(ds.y(), &[3.0, 6.0, 9.0]);
        assert_eq!(ds.x(2, 1), 8.0);
        assert_eq!(ds.column_names(), &["a", "b", "y"]);
    }

    #[test]
    fn response_column_in_the_middle() {
        let f = write_tmp("a,y,b\n1,2,3\n4,5,6\n");
        let ds = load_csv(f.path(), "y").unwrap();
        assert_eq!(ds.y(), &[2.0, 5.0]);
        assert_eq!(ds.x(0, 0), 1.0);
        assert_eq!(ds.x(0, 1), 3.0);
    }

    #[test]
    fn non_numeric_cell() {
        let f = write_tmp("a,y\n1,2\nabc,4\n");
        match load_csv(f.path(), "y") {
            Err(DataError::NonNumericCell { row, col, .. }) => {
                assert_eq!(row, 1);
                assert_eq!(col, "a");
            }
            other => panic!("expected NonNumericCell, got {other:?}"),
        }
    }

    #[test]
    fn missing_column() {
        let f = write_tmp("a,b\n1,2\n3,4\n");
        match load_csv(f.path(), "z") {
            Err(DataError::MissingColumn(c)) => assert_eq!(c, "z"),
            other => panic!("expected MissingColumn, got {other:?}"),
        }
    }

    #[test]
    fn too_few_rows() {
        let f = write_tmp("a,y\n1,2\n");
        assert!(matches!(load_csv(f.path(), "y"), Err(DataError::TooFewRows(1))));
    }

    #[test]
    fn missing_file() {
        assert!(matches!(
            load_csv("/nonexistent/nope.csv", "y"),
            Err(DataError::Io { .. })
        ));
    }

    #[test]
    fn scientific_notation() {
        let f = write_tmp("a,y\n1e-3,2.5E2\n-4.25e1,0\n");
        let ds = load_csv(f.path(), "y").unwrap();
        assert_eq!(ds.x(0, 0), 1e-3);
        assert_eq!(ds.y()[0], 250.0);
    }

    #[test]
    fn validate_constant_response() {
        let ds = Dataset::from_parts(vec![1.0, 2.0, 3.0], vec![1.0, 1.0, 1.0], 1).unwrap();
        assert!(matches!(validate(ds), Err(DataError::ConstantResponse)));
    }

    #[test]
    fn validate_near_constant_passes() {
        let ds = Dataset::from_parts(vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 2.0], 1).unwrap();
        assert!(validate(ds).is_ok());
    }

    #[test]
    fn validate_non_finite() {
        let ds =
            Dataset::from_parts(vec![1.0, f64::INFINITY, 3.0], vec![1.0, 2.0, 3.0], 1).unwrap();
        match validate(ds) {
            Err(DataError::NonFinite { row, col }) => {
                assert_eq!((row, col), (1, 0));
            }
            other => panic!("expected NonFinite, got {other:?}"),
        }
    }

    #[test]
    fn csv_round_trip_exact() {
        let f = write_tmp("a,b,y\n0.1,2.00000000000000011,3\n-1e300,5.5,6.25\n1,2,3\n");
        let ds = load_csv(f.path(), "y").unwrap();
        let f2 = write_tmp(&ds.to_csv_string());
        let ds2 = load_csv(f2.path(), "y").unwrap();
        assert_eq!(ds, ds2);
    }
}
