//! Explicit Vietoris-Rips complexes and filtrations.
//!
//! A `k`-simplex enters the complex at its diameter, the largest pairwise
//! distance among its `k + 1` vertices. Filtrations are totally ordered by
//! `(diameter, dimension, vertex list)` so every run produces the same
//! simplex sequence.

use std::cmp::Ordering;

use std::path::Path;

use smallvec::SmallVec;

use crate::binomial::binomial;
use crate::error::{Error, Result};
use crate::pointset::DistanceMatrix;

/// Default cap on the projected number of simplices.
pub const DEFAULT_SIMPLEX_CAP: u64 = 50_000_000;

/// Environment variable overriding [`DEFAULT_SIMPLEX_CAP`].
pub const SIMPLEX_CAP_ENV: &str = "PARETOTOPO_SIMPLEX_CAP";

/// Simplex cap from the environment, falling back to the default.
pub fn default_simplex_cap() -> u64 {
    std::env::var(SIMPLEX_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_SIMPLEX_CAP)
}

pub type Vertices = SmallVec<[u32; 4]>;

#[derive(Debug, Clone, PartialEq)]
pub struct Simplex {
    vertices: Vertices,
    diameter: f64,
}

impl Simplex {
    /// Simplex on `vertices` (any order, no repeats) with its diameter
    /// taken from `dm`.
    pub fn new(mut vertices: Vertices, dm: &DistanceMatrix) -> Self {
        vertices.sort_unstable();
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        let diameter = diameter_of(&vertices, dm);
        Self { vertices, diameter }
    }

    pub(crate) fn from_parts(vertices: Vertices, diameter: f64) -> Self {
        Self { vertices, diameter }
    }

    /// A simplex with an explicit filtration value, for complexes that do
    /// not come from a distance matrix.
    pub fn from_vertices(vertices: &[u32], diameter: f64) -> Self {
        let mut v: Vertices = vertices.iter().copied().collect();
        v.sort_unstable();
        v.dedup();
        Self { vertices: v, diameter }
    }

    /// Strictly increasing vertex indices.
    pub fn vertices(&self) -> &[u32] {
        &self.vertices
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Facets, each obtained by dropping one vertex (in vertex order).
    pub fn facets(&self) -> impl Iterator<Item = Vertices> + '_ {
        let k = if self.vertices.len() > 1 { self.vertices.len() } else { 0 };
        (0..k).map(move |skip| {
            self.vertices
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .map(|(_, &v)| v)
                .collect()
        })
    }
}

pub fn diameter_of(vertices: &[u32], dm: &DistanceMatrix) -> f64 {
    let mut d: f64 = 0.0;
    for (i, &a) in vertices.iter().enumerate() {
        for &b in &vertices[i + 1..] {
            d = d.max(dm.get(a as usize, b as usize));
        }
    }
    d
}

/// Filtration order: diameter, then dimension, then lexicographic vertices.
pub fn filtration_order(a: &Simplex, b: &Simplex) -> Ordering {
    a.diameter
        .total_cmp(&b.diameter)
        .then(a.vertices.len().cmp(&b.vertices.len()))
        .then_with(|| a.vertices.cmp(&b.vertices))
}

/// Rips simplices up to dimension `maxdim` sorted in filtration order.
#[derive(Debug, Clone, PartialEq)]
pub struct Filtration {
    simplices: Vec<Simplex>,
    maxdim: usize,
    delta_max: f64,
    n_vertices: usize,
}

impl Filtration {
    /// Wraps an arbitrary simplex list; sorts it and checks face closure.
    pub fn from_simplices(mut simplices: Vec<Simplex>, maxdim: usize, delta_max: f64, n_vertices: usize) -> Result<Self> {
        simplices.sort_by(filtration_order);
        let f = Self {
            simplices,
            maxdim,
            delta_max,
            n_vertices,
        };
        f.check_closed()?;
        Ok(f)
    }

    fn check_closed(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for s in &self.simplices {
            if s.dim() > self.maxdim || s.diameter > self.delta_max {
                return Err(Error::InvalidArgument(format!(
                    "simplex {:?} exceeds maxdim {} or delta_max {}",
                    s.vertices, self.maxdim, self.delta_max
                )));
            }
            if let Some(&v) = s.vertices.iter().find(|&&v| v as usize >= self.n_vertices) {
                return Err(Error::InvalidArgument(format!("vertex {v} out of range")));
            }
            for facet in s.facets() {
                if !seen.contains(&facet) {
                    return Err(Error::InvalidArgument(format!(
                        "facet {facet:?} of {:?} missing or ordered after it",
                        s.vertices
                    )));
                }
            }
            seen.insert(s.vertices.clone());
        }
        Ok(())
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn maxdim(&self) -> usize {
        self.maxdim
    }

    pub fn delta_max(&self) -> f64 {
        self.delta_max
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    /// The order-prefix of simplices with diameter `<= delta`.
    pub fn prefix(&self, delta: f64) -> &[Simplex] {
        let end = self.simplices.partition_point(|s| s.diameter <= delta);
        &self.simplices[..end]
    }

    /// Sub-complex at scale `delta`, keeping this filtration's order.
    pub fn restrict(&self, delta: f64) -> Filtration {
        Filtration {
            simplices: self.prefix(delta).to_vec(),
            maxdim: self.maxdim,
            delta_max: delta.min(self.delta_max),
            n_vertices: self.n_vertices,
        }
    }

    pub fn of_dim(&self, k: usize) -> impl Iterator<Item = &Simplex> + '_ {
        self.simplices.iter().filter(move |s| s.dim() == k)
    }

    /// Writes rows `dim,diameter,v0..vk` (header included).
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let io_err = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err)?);
        let mut header = vec!["dim".to_string(), "diameter".to_string()];
        header.extend((0..=self.maxdim).map(|i| format!("v{i}")));
        writeln!(out, "{}", header.join(",")).map_err(io_err)?;
        for s in &self.simplices {
            let mut cells = vec![s.dim().to_string(), format!("{:?}", s.diameter)];
            cells.extend(s.vertices.iter().map(u32::to_string));
            cells.resize(header.len(), String::new());
            writeln!(out, "{}", cells.join(",")).map_err(io_err)?;
        }
        use std::io::Write as _;
        out.flush().map_err(io_err)
    }
}

/// Per-dimension simplex counts `[#vertices, #edges, ...]` up to `maxdim`.
pub fn simplex_count_profile(filtration: &Filtration) -> Vec<usize> {
    let mut counts = vec![0; filtration.maxdim + 1];
    for s in &filtration.simplices {
        counts[s.dim()] += 1;
    }
    counts
}

/// Upper-bound count of simplices with dimension `<= maxdim` and diameter
/// `<= delta`: every `(k+1)`-clique is a choice of `k` higher neighbours of
/// its lowest vertex.
pub fn projected_simplex_count(dm: &DistanceMatrix, delta: f64, maxdim: usize) -> u128 {
    let n = dm.len();
    let mut total: u128 = 0;
    for v in 0..n {
        let up = (v + 1..n).filter(|&w| dm.get(v, w) <= delta).count() as u64;
        for k in 0..=maxdim as u64 {
            total = total.saturating_add(binomial(up, k));
        }
    }
    total
}

/// Exact number of simplices per dimension in `K_delta` up to `maxdim`,
/// counted on neighbour bitsets without materializing the complex.
pub fn count_rips_simplices(dm: &DistanceMatrix, delta: f64, maxdim: usize) -> Vec<u64> {
    let n = dm.len();
    let words = n.div_ceil(64);
    let mut up = vec![0u64; n * words];
    for v in 0..n {
        for w in v + 1..n {
            if dm.get(v, w) <= delta {
                up[v * words + w / 64] |= 1 << (w % 64);
            }
        }
    }
    let mut counts = vec![0u64; maxdim + 1];
    if n == 0 {
        return counts;
    }
    // depth-first over cliques; `mask` holds the common upper neighbours
    fn descend(up: &[u64], words: usize, mask: &[u64], dim: usize, counts: &mut [u64]) {
        counts[dim + 1] += mask.iter().map(|b| u64::from(b.count_ones())).sum::<u64>();
        if dim + 2 >= counts.len() {
            return;
        }
        let mut child = vec![0u64; words];
        for (wi, &bits) in mask.iter().enumerate() {
            let mut b = bits;
            while b != 0 {
                let w = wi * 64 + b.trailing_zeros() as usize;
                b &= b - 1;
                for ((c, a), u) in child.iter_mut().zip(mask).zip(&up[w * words..(w + 1) * words]) {
                    *c = a & u;
                }
                descend(up, words, &child, dim + 1, counts);
            }
        }
    }
    for v in 0..n {
        counts[0] += 1;
        if maxdim > 0 {
            descend(&up, words, &up[v * words..(v + 1) * words], 0, &mut counts);
        }
    }
    counts
}

fn validate(dm: &DistanceMatrix, delta: f64, maxdim: usize) -> Result<()> {
    if dm.is_empty() {
        return Err(Error::InvalidArgument("empty distance matrix".into()));
    }
    if delta.is_nan() || delta < 0.0 {
        return Err(Error::InvalidArgument(format!("delta must be >= 0, got {delta}")));
    }
    if maxdim >= dm.len() {
        return Err(Error::InvalidArgument(format!(
            "maxdim {maxdim} out of range for {} points",
            dm.len()
        )));
    }
    Ok(())
}

/// The Rips complex `K_delta` with simplices of dimension `<= maxdim`.
pub fn build_rips(dm: &DistanceMatrix, delta: f64, maxdim: usize) -> Result<Filtration> {
    build_rips_with_cap(dm, delta, maxdim, default_simplex_cap())
}

pub fn build_rips_with_cap(dm: &DistanceMatrix, delta: f64, maxdim: usize, cap: u64) -> Result<Filtration> {
    validate(dm, delta, maxdim)?;
    let projected = projected_simplex_count(dm, delta, maxdim);
    if projected > cap as u128 {
        return Err(Error::SimplexCapExceeded { projected, cap });
    }

    let n = dm.len();
    let upper: Vec<Vec<u32>> = (0..n)
        .map(|v| {
            (v + 1..n)
                .filter(|&w| dm.get(v, w) <= delta)
                .map(|w| w as u32)
                .collect()
        })
        .collect();

    let mut simplices = Vec::with_capacity(projected.min(1 << 24) as usize);
    let mut stack: Vertices = SmallVec::new();
    for v in 0..n as u32 {
        stack.clear();
        stack.push(v);
        expand(dm, &upper, &mut stack, &upper[v as usize], 0.0, maxdim, &mut simplices);
    }
    simplices.sort_by(filtration_order);

    let delta_max = if delta.is_finite() { delta } else { dm.max_distance() };
    Ok(Filtration {
        simplices,
        maxdim,
        delta_max,
        n_vertices: n,
    })
}

fn expand(
    dm: &DistanceMatrix,
    upper: &[Vec<u32>],
    clique: &mut Vertices,
    candidates: &[u32],
    diameter: f64,
    maxdim: usize,
    out: &mut Vec<Simplex>,
) {
    out.push(Simplex::from_parts(clique.clone(), diameter));
    if clique.len() > maxdim {
        return;
    }
    for (i, &w) in candidates.iter().enumerate() {
        let d = clique
            .iter()
            .map(|&u| dm.get(u as usize, w as usize))
            .fold(diameter, f64::max);
        // candidates after `w` that are also neighbours of `w`
        let next: Vec<u32> = candidates[i + 1..]
            .iter()
            .copied()
            .filter(|x| upper[w as usize].binary_search(x).is_ok())
            .collect();
        clique.push(w);
        expand(dm, upper, clique, &next, d, maxdim, out);
        clique.pop();
    }
}

/// Full filtration up to `delta_max` (defaults to the largest distance).
pub fn build_filtration(dm: &DistanceMatrix, maxdim: usize, delta_max: Option<f64>) -> Result<Filtration> {
    build_filtration_with_cap(dm, maxdim, delta_max, default_simplex_cap())
}

pub fn build_filtration_with_cap(
    dm: &DistanceMatrix,
    maxdim: usize,
    delta_max: Option<f64>,
    cap: u64,
) -> Result<Filtration> {
    let delta_max = delta_max.unwrap_or_else(|| dm.max_distance());
    if !(delta_max > 0.0) && dm.len() > 1 {
        return Err(Error::InvalidArgument(format!("delta_max must be > 0, got {delta_max}")));
    }
    let mut f = build_rips_with_cap(dm, delta_max, maxdim, cap)?;
    f.delta_max = delta_max;
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use crate::pointset::euclidean_distances;
    use crate::rng::stream_rng;
    use rand::Rng;

    fn dm_from(rows: &[[f64; 2]]) -> DistanceMatrix {
        euclidean_distances(&Matrix::from_rows(rows).unwrap())
    }

    fn equilateral() -> DistanceMatrix {
        let mut d = vec![1.0; 9];
        for i in 0..3 {
            d[i * 3 + i] = 0.0;
        }
        DistanceMatrix::from_full(3, d).unwrap()
    }

    fn random_dm(n: usize, seed: u64) -> DistanceMatrix {
        let mut rng = stream_rng(seed, 0);
        let pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen(), rng.gen()]).collect();
        dm_from(&pts)
    }

    #[test]
    fn equilateral_at_threshold() {
        let f = build_rips(&equilateral(), 1.0, 2).unwrap();
        assert_eq!(simplex_count_profile(&f), vec![3, 3, 1]);
        let f = build_rips(&equilateral(), 0.5, 2).unwrap();
        assert_eq!(simplex_count_profile(&f), vec![3, 0, 0]);
    }

    #[test]
    fn complete_complex_counts() {
        let dm = random_dm(10, 3);
        let f = build_rips(&dm, f64::INFINITY, 2).unwrap();
        assert_eq!(f.len(), 175);
        assert_eq!(simplex_count_profile(&f), vec![10, 45, 120]);
        let f = build_rips(&dm, 0.0, 2).unwrap();
        assert_eq!(simplex_count_profile(&f), vec![10, 0, 0]);
    }

    #[test]
    fn two_points_order() {
        let dm = dm_from(&[[0.0, 0.0], [0.0, 2.5]]);
        let f = build_filtration(&dm, 1, None).unwrap();
        let seq: Vec<(Vec<u32>, f64)> = f.simplices().iter().map(|s| (s.vertices().to_vec(), s.diameter())).collect();
        assert_eq!(seq, vec![(vec![0], 0.0), (vec![1], 0.0), (vec![0, 1], 2.5)]);
    }

    #[test]
    fn unit_square_entry_scales() {
        // Sides enter at 1; the diagonals and all four triangles at sqrt(2).
        let dm = dm_from(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        let f = build_filtration(&dm, 2, None).unwrap();
        let edges: Vec<f64> = f.of_dim(1).map(Simplex::diameter).collect();
        assert_eq!(edges.iter().filter(|&&d| d == 1.0).count(), 4);
        assert_eq!(edges.iter().filter(|&&d| d == 2f64.sqrt()).count(), 2);
        let tris: Vec<f64> = f.of_dim(2).map(Simplex::diameter).collect();
        assert_eq!(tris, vec![2f64.sqrt(); 4]);
    }

    #[test]
    fn rejects_bad_arguments() {
        let dm = equilateral();
        assert!(build_rips(&dm, -1.0, 1).is_err());
        assert!(build_rips(&dm, 1.0, 3).is_err());
        assert!(matches!(
            build_rips_with_cap(&random_dm(20, 1), f64::INFINITY, 3, 100),
            Err(Error::SimplexCapExceeded { .. })
        ));
    }

    #[test]
    fn prefix_equals_independent_build() {
        for seed in 0..20 {
            let dm = random_dm(9, seed);
            let full = build_filtration(&dm, 2, None).unwrap();
            let mut rng = stream_rng(seed, 1);
            for _ in 0..5 {
                let delta = rng.gen::<f64>() * dm.max_distance();
                let direct = build_rips(&dm, delta, 2).unwrap();
                assert_eq!(full.prefix(delta), direct.simplices(), "seed {seed} delta {delta}");
            }
        }
    }

    #[test]
    fn face_closure_and_monotone_order() {
        for seed in 0..10 {
            let dm = random_dm(12, 100 + seed);
            let f = build_filtration(&dm, 3, None).unwrap();
            f.check_closed().unwrap();
            assert!(f.simplices().windows(2).all(|w| w[0].diameter() <= w[1].diameter()));
            for s in f.simplices() {
                assert_eq!(s.diameter(), diameter_of(s.vertices(), &dm));
            }
            assert_eq!(f, build_filtration(&dm, 3, None).unwrap());
        }
    }

    #[test]
    fn projection_bounds_actual_count() {
        for seed in 0..10 {
            let dm = random_dm(15, 200 + seed);
            let f = build_rips(&dm, 0.5, 3).unwrap();
            assert!(projected_simplex_count(&dm, 0.5, 3) >= f.len() as u128);
        }
    }

    #[test]
    fn exact_count_matches_profile() {
        for seed in 0..10 {
            let dm = random_dm(70, 300 + seed);
            for maxdim in 0..4 {
                let f = build_rips(&dm, 0.45, maxdim).unwrap();
                let counts = count_rips_simplices(&dm, 0.45, maxdim);
                let profile: Vec<u64> = simplex_count_profile(&f).iter().map(|&c| c as u64).collect();
                assert_eq!(counts, profile);
            }
        }
    }
}
