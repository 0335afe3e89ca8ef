//! The S1 and S2 tests and the end-to-end analysis over subproblems.
//!
//! S1 builds the Rips complex at the estimated diameter and flags any Betti
//! number other than those of a point. S2 looks for two distinct simplices
//! whose objective images share a point that is interior to both hulls:
//!
//! ```text
//! sum_i a_i g(x_i) = sum_j b_j g(y_j),   sum a = sum b = 1,   a, b > 0
//! ```
//!
//! Most pairs never reach the LP. Simplices whose image boxes are disjoint
//! are skipped, and when the images of all distinct vertices of the two
//! simplices are affinely independent the system only admits `a = b` on
//! shared vertices, which is impossible for distinct simplices.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagram::{
    confidence_band, estimate_diameter, signal_pairs, BandMethod, BandParams, ConfidenceBand, DiameterEstimate,
};
use crate::error::{Error, Result};
use crate::lp::{solve_strict_feasibility, LpOutcome, StrictFeasibilityProblem, DEFAULT_EPS};
use crate::matrix::Matrix;
use crate::persistence::{betti_at, rips_persistence_with_cap, PersistenceDiagram};
use crate::pointset::{non_dominated_filter, pairwise_distances, DistanceMatrix, PointCloud};
use crate::rips::{build_rips_with_cap, default_simplex_cap, Filtration, Simplex};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct S1Verdict {
    pub delta_used: f64,
    pub betti: Vec<usize>,
    pub violated: bool,
    pub reasons: Vec<String>,
}

impl S1Verdict {
    pub fn from_betti(delta_used: f64, betti: Vec<usize>) -> Self {
        let mut reasons = Vec::new();
        for (k, &b) in betti.iter().enumerate() {
            let expected = usize::from(k == 0);
            if b != expected {
                reasons.push(format!("β_{k} = {b} ≠ {expected}"));
            }
        }
        Self {
            delta_used,
            betti,
            violated: !reasons.is_empty(),
            reasons,
        }
    }
}

/// Betti numbers of `K_delta` up to `maxdim` and the resulting verdict.
pub fn test_s1(dm: &DistanceMatrix, delta: f64, maxdim: usize) -> Result<S1Verdict> {
    test_s1_with_cap(dm, delta, maxdim, default_simplex_cap())
}

pub fn test_s1_with_cap(dm: &DistanceMatrix, delta: f64, maxdim: usize, cap: u64) -> Result<S1Verdict> {
    if delta.is_nan() || delta < 0.0 {
        return Err(Error::InvalidArgument(format!("delta must be >= 0, got {delta}")));
    }
    let diagram = rips_persistence_with_cap(dm, maxdim, Some(delta), cap)?;
    s1_from_diagram(&diagram, delta, maxdim)
}

/// S1 verdict read off a diagram computed up to at least `delta`.
pub fn s1_from_diagram(diagram: &PersistenceDiagram, delta: f64, maxdim: usize) -> Result<S1Verdict> {
    let mut betti = betti_at(diagram, delta)?;
    betti.resize(maxdim + 1, 0);
    Ok(S1Verdict::from_betti(delta, betti))
}

/// Each simplex together with the objective vectors of its vertices.
pub fn mapped_hull_family<'a>(
    simplices: impl IntoIterator<Item = &'a Simplex>,
    objectives: &Matrix,
) -> Result<Vec<(Vec<u32>, Vec<Vec<f64>>)>> {
    simplices
        .into_iter()
        .map(|s| {
            let images = s
                .vertices()
                .iter()
                .map(|&v| {
                    if (v as usize) < objectives.rows() {
                        Ok(objectives.row(v as usize).to_vec())
                    } else {
                        Err(Error::InvalidArgument(format!("vertex {v} has no objective row")))
                    }
                })
                .collect::<Result<_>>()?;
            Ok((s.vertices().to_vec(), images))
        })
        .collect()
}

/// Which simplex dimensions enter the S2 pair enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairDim {
    Dim(usize),
    All,
}

impl fmt::Display for PairDim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Dim(k) => write!(f, "{k}"),
            Self::All => f.write_str("all"),
        }
    }
}

impl FromStr for PairDim {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("all") {
            return Ok(Self::All);
        }
        s.parse()
            .map(Self::Dim)
            .map_err(|_| Error::InvalidArgument(format!("pair dimension must be an integer or \"all\", got {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct S2Options {
    pub pair_dim: PairDim,
    pub eps: f64,
    /// Stop after this many witnesses; 0 checks every pair.
    pub max_witnesses: usize,
}

impl Default for S2Options {
    fn default() -> Self {
        Self {
            pair_dim: PairDim::Dim(1),
            eps: DEFAULT_EPS,
            max_witnesses: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct S2Witness {
    pub sigma: Vec<u32>,
    pub tau: Vec<u32>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub t: f64,
}

impl S2Witness {
    /// Max-norm residual of `sum a g(sigma) - sum b g(tau)` and of the two
    /// normalizations.
    pub fn residual(&self, objectives: &Matrix) -> f64 {
        let m = objectives.cols();
        let mut diff = vec![0.0; m];
        for (&v, &w) in self.sigma.iter().zip(&self.a) {
            for (d, &f) in diff.iter_mut().zip(objectives.row(v as usize)) {
                *d += w * f;
            }
        }
        for (&v, &w) in self.tau.iter().zip(&self.b) {
            for (d, &f) in diff.iter_mut().zip(objectives.row(v as usize)) {
                *d -= w * f;
            }
        }
        let sums = [self.a.iter().sum::<f64>(), self.b.iter().sum::<f64>()];
        diff.iter()
            .map(|d| d.abs())
            .chain(sums.iter().map(|s| (s - 1.0).abs()))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct S2Verdict {
    pub violated: bool,
    pub witnesses: Vec<S2Witness>,
    /// Number of simplices entering the enumeration.
    pub simplices: usize,
    /// Unordered pairs whose image boxes overlap and that were decided.
    pub pairs_checked: u64,
    /// Pairs settled by affine independence of the images.
    pub certified_disjoint: u64,
    pub lp_calls: u64,
    pub inconclusive_pairs: u64,
    /// Simplices with affinely dependent vertex images.
    pub degenerate_images: usize,
    /// Enumeration stopped early at the witness cap.
    pub truncated: bool,
}

struct Image {
    vertices: Vec<u32>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

#[derive(Default)]
struct Tally {
    witnesses: Vec<S2Witness>,
    checked: u64,
    certified: u64,
    lp_calls: u64,
    inconclusive: u64,
}

/// Looks for pairs of distinct simplices of `complex` with intersecting
/// image interiors.
pub fn test_s2(complex: &Filtration, objectives: &Matrix, opts: &S2Options) -> Result<S2Verdict> {
    let selected: Vec<&Simplex> = match opts.pair_dim {
        PairDim::Dim(k) => {
            if k > complex.maxdim() {
                return Err(Error::InvalidArgument(format!(
                    "pair dimension {k} exceeds complex dimension {}",
                    complex.maxdim()
                )));
            }
            complex.of_dim(k).collect()
        }
        PairDim::All => complex.simplices().iter().collect(),
    };
    let family = mapped_hull_family(selected.iter().copied(), objectives)?;
    let m = objectives.cols();
    let mut images: Vec<Image> = family
        .iter()
        .map(|(vertices, pts)| {
            let mut lo = vec![f64::INFINITY; m];
            let mut hi = vec![f64::NEG_INFINITY; m];
            for p in pts {
                for k in 0..m {
                    lo[k] = lo[k].min(p[k]);
                    hi[k] = hi[k].max(p[k]);
                }
            }
            Image {
                vertices: vertices.clone(),
                lo,
                hi,
            }
        })
        .collect();
    let degenerate_images = family.iter().filter(|(_, pts)| !affinely_independent(pts)).count();
    // sweep along the first objective; ties keep filtration order
    images.sort_by(|x, y| x.lo[0].total_cmp(&y.lo[0]));

    const CHUNK: usize = 64;
    let mut total = Tally::default();
    let mut truncated = false;
    let mut start = 0;
    while start < images.len() {
        let end = (start + CHUNK).min(images.len());
        let parts: Vec<Tally> = (start..end)
            .into_par_iter()
            .map(|i| scan_partners(&images, i, objectives, opts.eps))
            .collect();
        for part in parts {
            total.witnesses.extend(part.witnesses);
            total.checked += part.checked;
            total.certified += part.certified;
            total.lp_calls += part.lp_calls;
            total.inconclusive += part.inconclusive;
        }
        start = end;
        if opts.max_witnesses > 0 && total.witnesses.len() >= opts.max_witnesses {
            truncated = start < images.len() || total.witnesses.len() > opts.max_witnesses;
            total.witnesses.truncate(opts.max_witnesses);
            break;
        }
    }

    Ok(S2Verdict {
        violated: !total.witnesses.is_empty(),
        witnesses: total.witnesses,
        simplices: images.len(),
        pairs_checked: total.checked,
        certified_disjoint: total.certified,
        lp_calls: total.lp_calls,
        inconclusive_pairs: total.inconclusive,
        degenerate_images,
        truncated,
    })
}

fn scan_partners(images: &[Image], i: usize, objectives: &Matrix, eps: f64) -> Tally {
    let mut tally = Tally::default();
    let s = &images[i];
    let m = objectives.cols();
    let mut union: Vec<u32> = Vec::new();
    let mut pts: Vec<&[f64]> = Vec::new();
    let mut scratch = Vec::new();
    for t in &images[i + 1..] {
        if t.lo[0] > s.hi[0] {
            break;
        }
        if (1..m).any(|k| t.lo[k] > s.hi[k] || s.lo[k] > t.hi[k]) {
            continue;
        }
        tally.checked += 1;
        union.clear();
        union.extend_from_slice(&s.vertices);
        union.extend_from_slice(&t.vertices);
        union.sort_unstable();
        union.dedup();
        pts.clear();
        pts.extend(union.iter().map(|&v| objectives.row(v as usize)));
        if affinely_independent_with(&pts, &mut scratch) {
            tally.certified += 1;
            continue;
        }
        tally.lp_calls += 1;
        let problem = pair_problem(&s.vertices, &t.vertices, objectives);
        match solve_strict_feasibility(&problem, eps) {
            Ok(LpOutcome::Feasible { t: margin, witness }) => {
                let (a, b) = witness.split_at(s.vertices.len());
                let (sigma, tau, a, b) = if s.vertices <= t.vertices {
                    (s.vertices.clone(), t.vertices.clone(), a.to_vec(), b.to_vec())
                } else {
                    (t.vertices.clone(), s.vertices.clone(), b.to_vec(), a.to_vec())
                };
                tally.witnesses.push(S2Witness { sigma, tau, a, b, t: margin });
            }
            Ok(LpOutcome::Infeasible) => {}
            Err(_) => tally.inconclusive += 1,
        }
    }
    tally
}

/// The strict-feasibility system for the simplex pair `(sigma, tau)`.
pub fn pair_problem(sigma: &[u32], tau: &[u32], objectives: &Matrix) -> StrictFeasibilityProblem {
    let (p, q, m) = (sigma.len(), tau.len(), objectives.cols());
    let mut eq = Matrix::zeros(m, p + q);
    for (j, &v) in sigma.iter().enumerate() {
        for k in 0..m {
            eq.row_mut(k)[j] = objectives.get(v as usize, k);
        }
    }
    for (j, &v) in tau.iter().enumerate() {
        for k in 0..m {
            eq.row_mut(k)[p + j] = -objectives.get(v as usize, k);
        }
    }
    StrictFeasibilityProblem {
        eq_matrix: eq,
        eq_rhs: vec![0.0; m],
        positive_vars: (0..p + q).collect(),
        groups: vec![(0..p).collect(), (p..p + q).collect()],
    }
}

/// Whether the points are affinely independent, judged by Gram-Schmidt on
/// the differences with a tolerance relative to the point spread.
pub fn affinely_independent<P: AsRef<[f64]>>(points: &[P]) -> bool {
    affinely_independent_with(points, &mut Vec::new())
}

fn affinely_independent_with<P: AsRef<[f64]>>(points: &[P], scratch: &mut Vec<f64>) -> bool {
    if points.len() <= 1 {
        return true;
    }
    let origin = points[0].as_ref();
    let dim = origin.len();
    let k = points.len() - 1;
    if k > dim {
        return false;
    }
    scratch.clear();
    let mut scale: f64 = 0.0;
    for p in &points[1..] {
        scratch.extend(p.as_ref().iter().zip(origin).map(|(x, o)| x - o));
        scale = scale.max(norm(&scratch[scratch.len() - dim..]));
    }
    if scale == 0.0 {
        return false;
    }
    let tol = 1e-9 * scale;
    for i in 0..k {
        let (done, rest) = scratch.split_at_mut(i * dim);
        let r = &mut rest[..dim];
        // two passes keep the projection accurate
        for _ in 0..2 {
            for b in done.chunks_exact(dim) {
                let c: f64 = r.iter().zip(b).map(|(x, y)| x * y).sum();
                for (x, y) in r.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
        }
        let n = norm(r);
        if n <= tol {
            return false;
        }
        r.iter_mut().for_each(|x| *x /= n);
    }
    true
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Which objective subsets are analysed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubsetSelection {
    /// The full problem only.
    Full,
    /// Every non-empty subset.
    All,
    /// Subsets with at most this many objectives, plus the full problem.
    UpTo(usize),
}

impl FromStr for SubsetSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(Self::Full),
            "all" => Ok(Self::All),
            other => other
                .parse()
                .map(Self::UpTo)
                .map_err(|_| Error::InvalidArgument(format!("subsets must be full, all or a size, got {s:?}"))),
        }
    }
}

impl SubsetSelection {
    /// Objective index sets ordered by size, then lexicographically.
    pub fn expand(self, m: usize) -> Vec<Vec<usize>> {
        let limit = match self {
            Self::Full => return vec![(0..m).collect()],
            Self::All => m,
            Self::UpTo(k) => k.min(m),
        };
        let mut out: Vec<Vec<usize>> = (1u64..(1u64 << m))
            .map(|mask| (0..m).filter(|&i| mask >> i & 1 == 1).collect::<Vec<_>>())
            .filter(|s| s.len() <= limit || s.len() == m)
            .collect();
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub maxdim: usize,
    pub alpha: f64,
    pub replicates: usize,
    pub seed: u64,
    pub band_method: BandMethod,
    /// Skip the estimate and test at this diameter.
    pub delta: Option<f64>,
    /// Filtration cap; defaults to the largest pairwise distance.
    pub delta_max: Option<f64>,
    pub s2: S2Options,
    pub run_s2: bool,
    pub subsets: SubsetSelection,
    pub simplex_cap: u64,
    /// Record wall time per phase (makes reports run-dependent).
    pub timings: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            maxdim: 2,
            alpha: 0.05,
            replicates: 100,
            seed: 0,
            band_method: BandMethod::Hausdorff,
            delta: None,
            delta_max: None,
            s2: S2Options::default(),
            run_s2: true,
            subsets: SubsetSelection::Full,
            simplex_cap: default_simplex_cap(),
            timings: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimings {
    pub persistence_s: f64,
    pub band_s: f64,
    pub s1_s: f64,
    pub s2_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetReport {
    /// Zero-based objective indices.
    pub objectives: Vec<usize>,
    /// Points surviving the non-dominated filter.
    pub n_points: usize,
    /// `None` when the analysis ran; otherwise why it was skipped.
    pub skipped: Option<String>,
    pub band: Option<ConfidenceBand>,
    pub estimate: Option<DiameterEstimate>,
    pub delta: Option<f64>,
    pub diagram: Option<PersistenceDiagram>,
    pub s1: Option<S1Verdict>,
    pub s2: Option<S2Verdict>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timings: Option<PhaseTimings>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplicityReport {
    pub config: AnalysisConfig,
    pub n_points: usize,
    pub subsets: Vec<SubsetReport>,
}

impl SimplicityReport {
    /// Report of the full objective set.
    pub fn full(&self) -> Option<&SubsetReport> {
        self.subsets.iter().max_by_key(|s| s.objectives.len())
    }
}

/// Runs the whole pipeline on every requested objective subset.
pub fn analyze(pc: &PointCloud, config: &AnalysisConfig) -> Result<SimplicityReport> {
    if !(config.alpha > 0.0 && config.alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must be in (0, 1), got {}", config.alpha)));
    }
    if config.replicates == 0 {
        return Err(Error::InvalidArgument("bootstrap replicates must be >= 1".into()));
    }
    if let Some(d) = config.delta {
        if !(d >= 0.0) {
            return Err(Error::InvalidArgument(format!("delta must be >= 0, got {d}")));
        }
    }
    if let Some(d) = config.delta_max {
        if !(d > 0.0) {
            return Err(Error::InvalidArgument(format!("delta_max must be > 0, got {d}")));
        }
    }
    if let PairDim::Dim(k) = config.s2.pair_dim {
        if k > config.maxdim {
            return Err(Error::InvalidArgument(format!("pair dimension {k} exceeds maxdim {}", config.maxdim)));
        }
    }
    let subsets = match pc.n_objectives() {
        Some(m) => config.subsets.expand(m),
        None if config.run_s2 => return Err(Error::MissingObjectives),
        None => vec![Vec::new()],
    };
    let reports = subsets
        .par_iter()
        .map(|subset| analyze_subset(pc, subset, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(SimplicityReport {
        config: config.clone(),
        n_points: pc.len(),
        subsets: reports,
    })
}

fn analyze_subset(pc: &PointCloud, subset: &[usize], config: &AnalysisConfig) -> Result<SubsetReport> {
    let cloud = match pc.objectives() {
        Some(f) => {
            let keep = non_dominated_filter(f, subset)?;
            pc.select(&keep).with_objective_subset(subset)
        }
        None => pc.clone(),
    };
    let mut report = SubsetReport {
        objectives: subset.to_vec(),
        n_points: cloud.len(),
        skipped: None,
        band: None,
        estimate: None,
        delta: None,
        diagram: None,
        s1: None,
        s2: None,
        warnings: Vec::new(),
        timings: None,
    };
    let dm = pairwise_distances(&cloud);
    if cloud.len() < 2 || dm.max_distance() == 0.0 {
        report.skipped = Some(format!(
            "insufficient sample: {} distinct non-dominated point(s)",
            if dm.max_distance() == 0.0 { 1.min(cloud.len()) } else { cloud.len() }
        ));
        return Ok(report);
    }
    let mut timings = PhaseTimings::default();

    let clock = Instant::now();
    let diagram = rips_persistence_with_cap(&dm, config.maxdim, config.delta_max, config.simplex_cap)?;
    timings.persistence_s = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let band = confidence_band(
        &dm,
        &BandParams {
            alpha: config.alpha,
            replicates: config.replicates,
            maxdim: config.maxdim,
            seed: config.seed,
            method: config.band_method,
            delta_max: Some(diagram.delta_max),
        },
    )?;
    timings.band_s = clock.elapsed().as_secs_f64();
    let signal = signal_pairs(&diagram, &band);
    let estimate = estimate_diameter(&signal, diagram.delta_max)?;
    if !estimate.consistent {
        report.warnings.push(format!(
            "inconsistent diameter estimate: max birth {} >= min death {}",
            estimate.max_birth, estimate.min_death
        ));
    }
    let delta = config.delta.unwrap_or(estimate.delta);

    let clock = Instant::now();
    let s1 = if delta <= diagram.delta_max {
        s1_from_diagram(&diagram, delta, config.maxdim)?
    } else {
        test_s1_with_cap(&dm, delta, config.maxdim, config.simplex_cap)?
    };
    timings.s1_s = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let s2 = match (config.run_s2, cloud.objectives()) {
        (true, Some(f)) => {
            let top = match config.s2.pair_dim {
                PairDim::Dim(k) => k,
                PairDim::All => config.maxdim,
            };
            let complex = build_rips_with_cap(&dm, delta, top.min(cloud.len() - 1), config.simplex_cap)?;
            Some(test_s2(&complex, f, &config.s2)?)
        }
        _ => None,
    };
    timings.s2_s = clock.elapsed().as_secs_f64();

    report.band = Some(band);
    report.estimate = Some(estimate);
    report.delta = Some(delta);
    report.diagram = Some(diagram);
    report.s1 = Some(s1);
    report.s2 = s2;
    if config.timings {
        report.timings = Some(timings);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointset::euclidean_distances;
    use crate::problems::{sample_pareto, ProblemKind, ProblemSpec};
    use crate::rips::build_filtration;
    use crate::rng::stream_rng;
    use rand::Rng;

    fn complex(edges: &[[u32; 2]], n: usize) -> Filtration {
        let mut simplices: Vec<Simplex> = (0..n as u32)
            .map(|v| Simplex::from_parts(smallvec::smallvec![v], 0.0))
            .collect();
        simplices.extend(edges.iter().map(|e| Simplex::from_parts(smallvec::smallvec![e[0], e[1]], 1.0)));
        Filtration::from_simplices(simplices, 1, 1.0, n).unwrap()
    }

    fn objectives(rows: &[[f64; 2]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn crossing_segments() {
        let f = objectives(&[[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]]);
        let v = test_s2(&complex(&[[0, 1], [2, 3]], 4), &f, &S2Options::default()).unwrap();
        assert!(v.violated);
        let w = &v.witnesses[0];
        assert!(w.t >= 0.25);
        for x in w.a.iter().chain(&w.b) {
            assert!((x - 0.5).abs() < 1e-9);
        }
        assert!(w.residual(&f) < 1e-9);
    }

    #[test]
    fn shared_vertex_is_not_a_violation() {
        let f = objectives(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        let v = test_s2(&complex(&[[0, 1], [0, 2]], 3), &f, &S2Options::default()).unwrap();
        assert!(!v.violated);
        // collinear overlapping images do intersect in their interiors
        let f = objectives(&[[0.0, 0.0], [2.0, 0.0], [1.0, 0.0]]);
        let v = test_s2(&complex(&[[0, 1], [0, 2]], 3), &f, &S2Options::default()).unwrap();
        assert!(v.violated);
    }

    #[test]
    fn vertices_with_equal_images() {
        let f = objectives(&[[0.5, 0.5], [0.5, 0.5]]);
        let opts = S2Options { pair_dim: PairDim::Dim(0), ..Default::default() };
        let v = test_s2(&complex(&[], 2), &f, &opts).unwrap();
        assert!(v.violated);
        assert_eq!(v.degenerate_images, 0);
    }

    #[test]
    fn affine_images_of_a_simplex_are_embedded() {
        let mut rng = stream_rng(23, 0);
        for trial in 0..40 {
            let k = rng.gen_range(1..=3usize);
            let m = rng.gen_range(k..=k + 2);
            let rows: Vec<Vec<f64>> = (0..=k).map(|_| (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
            let f = Matrix::from_rows(&rows).unwrap();
            let dm = euclidean_distances(&f);
            let full = build_filtration(&dm, k, None).unwrap();
            let opts = S2Options { pair_dim: PairDim::All, max_witnesses: 0, ..Default::default() };
            let v = test_s2(&full, &f, &opts).unwrap();
            assert!(!v.violated, "trial {trial}: {:?}", v.witnesses);
        }
    }

    #[test]
    fn affine_independence() {
        assert!(affinely_independent(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]));
        assert!(!affinely_independent(&[vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]]));
        assert!(!affinely_independent(&[vec![0.0, 0.0], vec![0.0, 0.0]]));
        assert!(!affinely_independent(&[vec![0.0], vec![1.0], vec![2.0]]));
        assert!(affinely_independent(&[vec![3.0, 4.0]]));
    }

    #[test]
    fn hull_family_records_images() {
        let f = Matrix::from_rows(&[[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [1.0, 0.0, 0.0]]).unwrap();
        let c = complex(&[[0, 1], [1, 2]], 3);
        let fam = mapped_hull_family(c.simplices(), &f).unwrap();
        assert_eq!(fam.len(), 5);
        assert_eq!(fam[0], (vec![0], vec![vec![0.0, 0.0, 1.0]]));
        let edge = fam.iter().find(|(v, _)| v == &vec![0, 1]).unwrap();
        assert_eq!(edge.1, vec![vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]]);
        let dup = fam.iter().find(|(v, _)| v == &vec![1, 2]).unwrap();
        assert_eq!(dup.1[0], dup.1[1]);
        let short = Matrix::from_rows(&[[0.0, 0.0, 1.0]]).unwrap();
        assert!(mapped_hull_family(c.simplices(), &short).is_err());
    }

    #[test]
    fn s1_on_two_points() {
        let dm = euclidean_distances(&Matrix::from_rows(&[[0.0], [2.0]]).unwrap());
        let v = test_s1(&dm, 1.0, 1).unwrap();
        assert!(v.violated);
        assert_eq!(v.betti, vec![2, 0]);
        assert_eq!(v.reasons, vec!["β_0 = 2 ≠ 1".to_string()]);
        let v = test_s1(&dm, 2.0, 1).unwrap();
        assert!(!v.violated);
    }

    #[test]
    fn verdict_is_function_of_betti() {
        for betti in [vec![1, 0, 0], vec![4, 0, 0], vec![1, 1, 0], vec![1, 0, 3], vec![0, 0, 0]] {
            let v = S1Verdict::from_betti(0.5, betti.clone());
            let expected = betti[0] != 1 || betti[1..].iter().any(|&b| b != 0);
            assert_eq!(v.violated, expected);
        }
    }

    #[test]
    fn subset_expansion() {
        assert_eq!(SubsetSelection::Full.expand(3), vec![vec![0, 1, 2]]);
        let all = SubsetSelection::All.expand(3);
        assert_eq!(all.len(), 7);
        assert_eq!(all[0], vec![0]);
        assert_eq!(all[6], vec![0, 1, 2]);
        let small = SubsetSelection::UpTo(1).expand(3);
        assert_eq!(small, vec![vec![0], vec![1], vec![2], vec![0, 1, 2]]);
        assert_eq!("2".parse::<SubsetSelection>().unwrap(), SubsetSelection::UpTo(2));
        assert_eq!("all".parse::<PairDim>().unwrap(), PairDim::All);
    }

    #[test]
    fn med_singleton_subsets() {
        let pc = sample_pareto(&ProblemSpec::new(ProblemKind::Med), 60, 3).unwrap();
        let config = AnalysisConfig {
            replicates: 20,
            subsets: SubsetSelection::UpTo(1),
            run_s2: true,
            ..Default::default()
        };
        let report = analyze(&pc, &config).unwrap();
        assert_eq!(report.subsets.len(), 7);
        let f = pc.objectives().unwrap();
        for sub in &report.subsets[..6] {
            let i = sub.objectives[0];
            // brute force: minimizers of f_i
            let best = (0..f.rows()).map(|r| f.get(r, i)).fold(f64::INFINITY, f64::min);
            let count = (0..f.rows()).filter(|&r| f.get(r, i) == best).count();
            assert_eq!(sub.n_points, count);
            assert!(sub.skipped.is_some() || !sub.s1.as_ref().unwrap().violated);
        }
        assert_eq!(report.full().unwrap().objectives, vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(report, analyze(&pc, &config).unwrap());
    }

    #[test]
    fn missing_objectives() {
        let pc = PointCloud::new(Matrix::from_rows(&[[0.0], [1.0]]).unwrap(), None).unwrap();
        assert!(matches!(analyze(&pc, &AnalysisConfig::default()), Err(Error::MissingObjectives)));
        let cfg = AnalysisConfig { run_s2: false, replicates: 5, ..Default::default() };
        let r = analyze(&pc, &cfg).unwrap();
        assert!(r.subsets[0].s1.is_some());
    }
}
