//! Benchmark problems and samplers for their Pareto sets.
//!
//! | problem | n | m | Pareto set |
//! |---------|---|---|------------|
//! | MED | 40 | 6 | simplex spanned by `e_1..e_6` |
//! | Gapped MED | 40 | 6 | same set; objectives jump where `g_i` crosses 1/2 |
//! | DTLZ5 | 12 | 3 | `x_3..x_12 = 0.5`; the front is a curve |
//! | DTLZ7 | 22 | 3 | `x_3..x_22 = 0`; four disconnected regions |
//!
//! DTLZ5 with `g = sum_{i>=3} (x_i - 0.5)^2`:
//!
//! ```text
//! theta_1 = pi/2 * x_1
//! theta_2 = pi / (4 (1 + g)) * (1 + 2 g x_2)
//! f = (1 + g) * (cos theta_1 cos theta_2, cos theta_1 sin theta_2, sin theta_1)
//! ```
//!
//! DTLZ7 with `g = 1 + 9/20 * sum_{i>=3} x_i`:
//!
//! ```text
//! f_1 = x_1, f_2 = x_2
//! h = 3 - sum_{i=1,2} f_i / (1 + g) * (1 + sin(3 pi f_i))
//! f_3 = (1 + g) h
//! ```

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::pointset::{non_dominated_filter, PointCloud};
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProblemKind {
    Med,
    GappedMed,
    Dtlz5,
    Dtlz7,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 4] = [Self::Med, Self::GappedMed, Self::Dtlz5, Self::Dtlz7];

    pub fn name(self) -> &'static str {
        match self {
            Self::Med => "MED",
            Self::GappedMed => "GappedMED",
            Self::Dtlz5 => "DTLZ5",
            Self::Dtlz7 => "DTLZ7",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase();
        match key.as_str() {
            "med" => Ok(Self::Med),
            "gappedmed" => Ok(Self::GappedMed),
            "dtlz5" => Ok(Self::Dtlz5),
            "dtlz7" => Ok(Self::Dtlz7),
            _ => Err(Error::InvalidArgument(format!(
                "unknown problem {s:?} (expected MED, GappedMED, DTLZ5 or DTLZ7)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    /// Number of decision variables.
    pub n: usize,
    /// Number of objectives.
    pub m: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Candidate multiplier for samplers that filter for non-dominance.
    pub oversampling: usize,
}

/// DTLZ7 keeps about 23% of uniform candidates, so 4x falls short of the
/// requested count on average.
pub const DEFAULT_OVERSAMPLING: usize = 8;

impl ProblemSpec {
    pub fn new(kind: ProblemKind) -> Self {
        let (n, m) = match kind {
            ProblemKind::Med | ProblemKind::GappedMed => (40, 6),
            ProblemKind::Dtlz5 => (12, 3),
            ProblemKind::Dtlz7 => (22, 3),
        };
        Self {
            kind,
            n,
            m,
            lower: vec![0.0; n],
            upper: vec![1.0; n],
            oversampling: DEFAULT_OVERSAMPLING,
        }
    }

    pub fn with_oversampling(mut self, factor: usize) -> Self {
        self.oversampling = factor;
        self
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self.kind {
            ProblemKind::Med => med_eval(x),
            ProblemKind::GappedMed => gapped_med_eval(x),
            ProblemKind::Dtlz5 => dtlz5_eval(x),
            ProblemKind::Dtlz7 => dtlz7_eval(x),
        }
    }

    /// Diameter cap used by the benchmark trials.
    pub fn protocol_delta_max(&self) -> f64 {
        1.0
    }
}

fn check_len(x: &[f64], n: usize) -> Result<()> {
    if x.len() != n {
        return Err(Error::InvalidArgument(format!("expected {n} variables, got {}", x.len())));
    }
    if let Some(v) = x.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite variable {v}")));
    }
    Ok(())
}

fn check_box(x: &[f64], n: usize) -> Result<()> {
    check_len(x, n)?;
    if let Some((i, v)) = x.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
        return Err(Error::InvalidArgument(format!("x{} = {v} outside [0, 1]", i + 1)));
    }
    Ok(())
}

/// Exponent of the i-th MED objective (1-based `i`).
pub fn med_exponent(i: usize) -> f64 {
    ((2.0 * i as f64 - 7.0) / 5.0).exp()
}

/// `g_i(x) = (|x - e_i| / sqrt 2)^{p_i}` for `i = 1..6`.
fn med_terms(x: &[f64]) -> Vec<f64> {
    let total: f64 = x.iter().map(|v| v * v).sum();
    (0..6)
        .map(|i| {
            // |x - e_i|^2 = |x|^2 - 2 x_i + 1
            let sq = (total - 2.0 * x[i] + 1.0).max(0.0);
            (sq.sqrt() / std::f64::consts::SQRT_2).powf(med_exponent(i + 1))
        })
        .collect()
}

pub fn med_eval(x: &[f64]) -> Result<Vec<f64>> {
    check_len(x, 40)?;
    Ok(med_terms(x))
}

pub fn gapped_med_eval(x: &[f64]) -> Result<Vec<f64>> {
    check_len(x, 40)?;
    Ok(med_terms(x).into_iter().map(gap).collect())
}

/// The Gapped MED transform of a single MED term.
pub fn gap(g: f64) -> f64 {
    if g <= 0.5 {
        2.0 / 3.0 * g
    } else {
        2.0 / 3.0 * g + 1.0 / 3.0
    }
}

pub fn dtlz5_eval(x: &[f64]) -> Result<Vec<f64>> {
    check_box(x, 12)?;
    let g: f64 = x[2..].iter().map(|v| (v - 0.5) * (v - 0.5)).sum();
    let t1 = FRAC_PI_2 * x[0];
    let t2 = FRAC_PI_4 / (1.0 + g) * (1.0 + 2.0 * g * x[1]);
    let r = 1.0 + g;
    Ok(vec![r * t1.cos() * t2.cos(), r * t1.cos() * t2.sin(), r * t1.sin()])
}

pub fn dtlz7_eval(x: &[f64]) -> Result<Vec<f64>> {
    check_box(x, 22)?;
    let g = 1.0 + 9.0 / 20.0 * x[2..].iter().sum::<f64>();
    let h = 3.0
        - x[..2]
            .iter()
            .map(|&f| f / (1.0 + g) * (1.0 + (3.0 * PI * f).sin()))
            .sum::<f64>();
    Ok(vec![x[0], x[1], (1.0 + g) * h])
}

/// `max_i w_i (fx_i - z_i)`; `w` must be a probability vector.
pub fn chebyshev_scalarize(fx: &[f64], w: &[f64], z: &[f64]) -> Result<f64> {
    if fx.len() != w.len() || fx.len() != z.len() || fx.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "length mismatch: fx {}, w {}, z {}",
            fx.len(),
            w.len(),
            z.len()
        )));
    }
    let sum: f64 = w.iter().sum();
    if w.iter().any(|&v| !(v >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("weights must be non-negative and sum to 1, got {w:?}")));
    }
    Ok(fx
        .iter()
        .zip(w)
        .zip(z)
        .map(|((f, w), z)| w * (f - z))
        .fold(f64::NEG_INFINITY, f64::max))
}

/// `n_points` samples from the Pareto set of `spec`, objectives attached.
pub fn sample_pareto(spec: &ProblemSpec, n_points: usize, seed: u64) -> Result<PointCloud> {
    if n_points == 0 {
        return Err(Error::InvalidArgument("n_points must be >= 1".into()));
    }
    let mut rng = stream_rng(seed, 0);
    let points = match spec.kind {
        ProblemKind::Med | ProblemKind::GappedMed => {
            let mut m = Matrix::zeros(n_points, spec.n);
            for i in 0..n_points {
                let w: Vec<f64> = (0..6).map(|_| rng.sample::<f64, _>(Exp1)).collect();
                let s: f64 = w.iter().sum();
                for (j, v) in w.iter().enumerate() {
                    m.row_mut(i)[j] = v / s;
                }
            }
            m
        }
        ProblemKind::Dtlz5 => {
            let mut m = Matrix::zeros(n_points, spec.n);
            for i in 0..n_points {
                let row = m.row_mut(i);
                row[0] = rng.gen();
                row[1] = rng.gen();
                row[2..].fill(0.5);
            }
            m
        }
        ProblemKind::Dtlz7 => {
            let count = n_points.saturating_mul(spec.oversampling.max(1));
            let mut m = Matrix::zeros(count, spec.n);
            for i in 0..count {
                let row = m.row_mut(i);
                row[0] = rng.gen();
                row[1] = rng.gen();
            }
            m
        }
    };
    let (points, objectives) = if spec.kind == ProblemKind::Dtlz7 {
        let reference = Dtlz7Reference::new(DTLZ7_REFERENCE_STEPS);
        let rows: Vec<usize> = (0..points.rows())
            .filter(|&i| !reference.dominates(points.row(i)))
            .collect();
        let points = points.select_rows(&rows);
        let objectives = evaluate_rows(spec, &points)?;
        (points, objectives)
    } else {
        let objectives = evaluate_rows(spec, &points)?;
        (points, objectives)
    };
    let all: Vec<usize> = (0..points.rows()).collect();
    let keep = non_dominated_filter(&objectives, &(0..spec.m).collect::<Vec<_>>())?;
    let keep: Vec<usize> = if spec.kind == ProblemKind::Dtlz7 {
        if keep.len() < n_points {
            return Err(Error::InsufficientSample {
                produced: keep.len(),
                requested: n_points,
            });
        }
        // candidates are i.i.d., so the first rows form a uniform subsample
        keep[..n_points].to_vec()
    } else {
        all
    };
    PointCloud::new(points.select_rows(&keep), Some(objectives.select_rows(&keep)))
}

const DTLZ7_REFERENCE_STEPS: usize = 100_000;

// On the optimal slice f_3 = 6 - a(x_1) - a(x_2) with a(t) = t (1 + sin 3 pi t),
// so some point with smaller x_1 and x_2 dominates x exactly when a is below
// its running maximum in either coordinate (move that coordinate alone). Filtering the candidates only
// against each other lets dominated points near the region edges survive and
// bridge the four regions; a dense grid of the running maximum removes them.
struct Dtlz7Reference {
    running_max: Vec<f64>,
}

impl Dtlz7Reference {
    fn a(t: f64) -> f64 {
        t * (1.0 + (3.0 * PI * t).sin())
    }

    fn new(steps: usize) -> Self {
        let mut best = f64::NEG_INFINITY;
        let running_max = (0..=steps)
            .map(|i| {
                best = best.max(Self::a(i as f64 / steps as f64));
                best
            })
            .collect();
        Self { running_max }
    }

    // best value of `a` over grid points <= t
    fn best_below(&self, t: f64) -> f64 {
        let steps = self.running_max.len() - 1;
        self.running_max[((t * steps as f64).floor() as usize).min(steps)]
    }

    fn dominates(&self, x: &[f64]) -> bool {
        x[..2].iter().any(|&t| self.best_below(t) > Self::a(t))
    }
}

pub fn evaluate_rows(spec: &ProblemSpec, points: &Matrix) -> Result<Matrix> {
    let mut out = Matrix::zeros(points.rows(), spec.m);
    for (i, x) in points.iter_rows().enumerate() {
        out.row_mut(i).copy_from_slice(&spec.evaluate(x)?);
    }
    Ok(out)
}
