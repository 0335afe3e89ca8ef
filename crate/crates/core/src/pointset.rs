//! Point clouds, their CSV representation, Euclidean distances and
//! non-dominated filtering.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// A finite sample of decision vectors with optional objective values.
///
/// Rows of `points` and `objectives` are paired: row `i` of the objective
/// matrix holds the objective vector of decision point `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Matrix,
    objectives: Option<Matrix>,
}

impl PointCloud {
    pub fn new(points: Matrix, objectives: Option<Matrix>) -> Result<Self> {
        if points.rows() == 0 {
            return Err(Error::InvalidCloud("no points".into()));
        }
        if points.cols() == 0 {
            return Err(Error::InvalidCloud("points have zero dimensions".into()));
        }
        check_finite(&points, "decision")?;
        if let Some(f) = &objectives {
            if f.rows() != points.rows() {
                return Err(Error::RowCountMismatch {
                    decision: points.rows(),
                    objective: f.rows(),
                });
            }
            if f.cols() == 0 {
                return Err(Error::InvalidCloud("objectives have zero columns".into()));
            }
            check_finite(f, "objective")?;
        }
        Ok(Self { points, objectives })
    }

    pub fn points(&self) -> &Matrix {
        &self.points
    }

    pub fn objectives(&self) -> Option<&Matrix> {
        self.objectives.as_ref()
    }

    /// Number of points `N`.
    pub fn len(&self) -> usize {
        self.points.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.rows() == 0
    }

    /// Decision-space dimension `n`.
    pub fn dim(&self) -> usize {
        self.points.cols()
    }

    /// Number of objectives `m`, if objectives are present.
    pub fn n_objectives(&self) -> Option<usize> {
        self.objectives.as_ref().map(Matrix::cols)
    }

    /// Sub-cloud made of the given rows (in the given order).
    pub fn select(&self, rows: &[usize]) -> Self {
        Self {
            points: self.points.select_rows(rows),
            objectives: self.objectives.as_ref().map(|f| f.select_rows(rows)),
        }
    }

    /// Keeps only the listed objective columns.
    pub fn with_objective_subset(&self, cols: &[usize]) -> Self {
        Self {
            points: self.points.clone(),
            objectives: self.objectives.as_ref().map(|f| f.select_cols(cols)),
        }
    }
}

fn check_finite(m: &Matrix, what: &str) -> Result<()> {
    for (i, row) in m.iter_rows().enumerate() {
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidCloud(format!(
                "{what} row {i} column {j} is not finite"
            )));
        }
    }
    Ok(())
}

/// Reads a decision CSV (`x1..xn` header) and an optional objective CSV
/// (`f1..fm` header). Row order is preserved.
pub fn load_point_cloud(decision_csv: &Path, objective_csv: Option<&Path>) -> Result<PointCloud> {
    let points = read_matrix(decision_csv, 'x')?;
    let objectives = objective_csv.map(|p| read_matrix(p, 'f')).transpose()?;
    PointCloud::new(points, objectives)
}

/// Writes `<prefix>_x.csv` and, when objectives exist, `<prefix>_f.csv`.
pub fn write_point_cloud(cloud: &PointCloud, decision_csv: &Path, objective_csv: Option<&Path>) -> Result<()> {
    write_matrix(decision_csv, cloud.points(), 'x')?;
    if let (Some(path), Some(f)) = (objective_csv, cloud.objectives()) {
        write_matrix(path, f, 'f')?;
    }
    Ok(())
}

fn csv_error(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

pub fn read_matrix(path: &Path, prefix: char) -> Result<Matrix> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let header = reader
        .headers()
        .map_err(|e| csv_error(path, 1, e.to_string()))?
        .clone();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(csv_error(path, 1, "empty file: header row required"));
    }
    for (j, name) in header.iter().enumerate() {
        let expected = format!("{prefix}{}", j + 1);
        if name != expected {
            return Err(csv_error(
                path,
                1,
                format!("header column {} is {name:?}, expected {expected:?}", j + 1),
            ));
        }
    }

    let cols = header.len();
    let mut data = Vec::new();
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            csv_error(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != cols {
            return Err(csv_error(
                path,
                line,
                format!("expected {cols} fields, found {}", record.len()),
            ));
        }
        for (j, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| {
                csv_error(path, line, format!("non-numeric cell {cell:?} in column {}", j + 1))
            })?;
            if !v.is_finite() {
                return Err(csv_error(path, line, format!("non-finite value in column {}", j + 1)));
            }
            data.push(v);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(csv_error(path, 1, "empty file: no data rows"));
    }
    Matrix::from_vec(rows, cols, data)
}

pub fn write_matrix(path: &Path, m: &Matrix, prefix: char) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = std::io::BufWriter::new(File::create(path).map_err(io_err)?);
    let header: Vec<String> = (1..=m.cols()).map(|j| format!("{prefix}{j}")).collect();
    writeln!(out, "{}", header.join(",")).map_err(io_err)?;
    for row in m.iter_rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        writeln!(out, "{}", cells.join(",")).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

/// Symmetric matrix of pairwise Euclidean distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    /// Builds a distance matrix from a full `n x n` table; the caller
    /// guarantees symmetry and a zero diagonal (checked in debug builds).
    pub fn from_full(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::InvalidArgument(format!(
                "distance table has {} entries, expected {n}x{n}",
                data.len()
            )));
        }
        for i in 0..n {
            if data[i * n + i] != 0.0 {
                return Err(Error::InvalidArgument(format!("diagonal entry {i} is not zero")));
            }
            for j in 0..i {
                let (a, b) = (data[i * n + j], data[j * n + i]);
                if a != b || a.is_nan() || a < 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "entries ({i},{j}) are not a symmetric non-negative pair"
                    )));
                }
            }
        }
        Ok(Self { n, data })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Largest entry; zero for a single point.
    pub fn max_distance(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    /// `min_i max_j d(i, j)`: beyond this scale the Rips complex is a cone.
    pub fn enclosing_radius(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).iter().copied().fold(0.0, f64::max))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Euclidean distances between decision points.
pub fn pairwise_distances(pc: &PointCloud) -> DistanceMatrix {
    euclidean_distances(pc.points())
}

pub fn euclidean_distances(points: &Matrix) -> DistanceMatrix {
    let n = points.rows();
    let mut data = vec![0.0; n * n];
    data.par_chunks_mut(n.max(1)).enumerate().for_each(|(i, row)| {
        let p = points.row(i);
        for (j, out) in row.iter_mut().enumerate() {
            if i != j {
                *out = euclidean(p, points.row(j));
            }
        }
    });
    DistanceMatrix { n, data }
}

#[inline]
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Indices (ascending) of rows not dominated on the objective subset.
///
/// Row `y` dominates row `x` when `y <= x` on every subset column and
/// `y < x` on at least one. Rows with identical subset values never
/// dominate each other, so all copies of a tie are kept.
pub fn non_dominated_filter(objectives: &Matrix, subset: &[usize]) -> Result<Vec<usize>> {
    if subset.is_empty() {
        return Err(Error::InvalidArgument("objective subset is empty".into()));
    }
    if let Some(&bad) = subset.iter().find(|&&j| j >= objectives.cols()) {
        return Err(Error::InvalidArgument(format!(
            "objective index {bad} out of range (m = {})",
            objectives.cols()
        )));
    }

    let key = |i: usize| subset.iter().map(move |&j| objectives.get(i, j));
    let mut order: Vec<usize> = (0..objectives.rows()).collect();
    // A dominator is lexicographically smaller, so it is always visited first.
    order.sort_by(|&a, &b| {
        key(a)
            .zip(key(b))
            .map(|(x, y)| x.total_cmp(&y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });

    let mut kept: Vec<usize> = Vec::new();
    for &x in &order {
        let dominated = kept.iter().any(|&y| {
            let mut strict = false;
            for &j in subset {
                let (fy, fx) = (objectives.get(y, j), objectives.get(x, j));
                if fy > fx {
                    return false;
                }
                strict |= fy < fx;
            }
            strict
        });
        if !dominated {
            kept.push(x);
        }
    }
    kept.sort_unstable();
    Ok(kept)
}
