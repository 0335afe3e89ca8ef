//! Diagram statistics: bottleneck distance, the noise band and the diameter
//! estimate taken from the middle of the signal lifetimes.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::persistence::{rips_persistence, PersistenceDiagram, PersistencePair};
use crate::pointset::DistanceMatrix;
use crate::rng::stream_rng;

/// L-infinity distance between two diagram points.
fn linf(a: &PersistencePair, b: &PersistencePair) -> f64 {
    (a.birth - b.birth).abs().max((a.death - b.death).abs())
}

/// Distance of a point to the diagonal.
fn to_diagonal(a: &PersistencePair) -> f64 {
    (a.death - a.birth) / 2.0
}

/// Bottleneck distance between the `dim`-dimensional parts of two diagrams.
pub fn bottleneck_distance(d1: &PersistenceDiagram, d2: &PersistenceDiagram, dim: usize) -> f64 {
    let a: Vec<PersistencePair> = d1.of_dim(dim).copied().collect();
    let b: Vec<PersistencePair> = d2.of_dim(dim).copied().collect();
    bottleneck_points(&a, &b)
}

/// Bottleneck distance between two finite point multisets.
///
/// The optimum is one of the point-to-point or point-to-diagonal distances,
/// so a binary search over those candidates with a feasibility test is exact.
pub fn bottleneck_points(a: &[PersistencePair], b: &[PersistencePair]) -> f64 {
    let mut candidates: Vec<f64> = a.iter().chain(b).map(to_diagonal).collect();
    for p in a {
        for q in b {
            candidates.push(linf(p, q));
        }
    }
    candidates.push(0.0);
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    let (mut lo, mut hi) = (0, candidates.len() - 1);
    // the largest diagonal distance is always feasible
    while lo < hi {
        let mid = (lo + hi) / 2;
        if matchable(a, b, candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[lo]
}

// Points farther than r from the diagonal must be matched across. Light
// points can always go to the diagonal, and by the Mendelsohn-Dulmage
// theorem a matching covering both heavy sets exists iff each heavy set can
// be covered on its own.
fn matchable(a: &[PersistencePair], b: &[PersistencePair], r: f64) -> bool {
    covers(a, b, r) && covers(b, a, r)
}

fn covers(left: &[PersistencePair], right: &[PersistencePair], r: f64) -> bool {
    let heavy: Vec<&PersistencePair> = left.iter().filter(|p| to_diagonal(p) > r).collect();
    if heavy.len() > right.len() {
        return false;
    }
    let adj: Vec<Vec<usize>> = heavy
        .iter()
        .map(|p| (0..right.len()).filter(|&j| linf(p, &right[j]) <= r).collect())
        .collect();
    hopcroft_karp(&adj, right.len()) == heavy.len()
}

/// Maximum matching size of a bipartite graph given by left adjacency lists.
pub fn hopcroft_karp(adj: &[Vec<usize>], n_right: usize) -> usize {
    const NONE: usize = usize::MAX;
    let n_left = adj.len();
    let mut match_l = vec![NONE; n_left];
    let mut match_r = vec![NONE; n_right];
    let mut dist = vec![0usize; n_left];
    let mut size = 0;
    loop {
        // BFS layering from free left vertices
        let mut queue = std::collections::VecDeque::new();
        for u in 0..n_left {
            if match_l[u] == NONE {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                let w = match_r[v];
                if w == NONE {
                    found = true;
                } else if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        if !found {
            return size;
        }
        fn augment(u: usize, adj: &[Vec<usize>], match_l: &mut [usize], match_r: &mut [usize], dist: &mut [usize]) -> bool {
            for &v in &adj[u] {
                let w = match_r[v];
                if w == usize::MAX || (dist[w] == dist[u] + 1 && augment(w, adj, match_l, match_r, dist)) {
                    match_l[u] = v;
                    match_r[v] = u;
                    return true;
                }
            }
            dist[u] = usize::MAX;
            false
        }
        for u in 0..n_left {
            if match_l[u] == NONE && augment(u, adj, &mut match_l, &mut match_r, &mut dist) {
                size += 1;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BandMethod {
    /// Quantile of the Hausdorff distance between resample and sample.
    Hausdorff,
    /// Quantile of the bottleneck distance between resample and sample
    /// diagrams (max over dimensions).
    Bottleneck,
}

impl fmt::Display for BandMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Hausdorff => "hausdorff",
            Self::Bottleneck => "bottleneck",
        })
    }
}

impl FromStr for BandMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hausdorff" => Ok(Self::Hausdorff),
            "bottleneck" => Ok(Self::Bottleneck),
            _ => Err(Error::InvalidArgument(format!("unknown band method {s:?}"))),
        }
    }
}

/// Diagonal band of half-width `c`: pairs with persistence `<= 2c` are noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceBand {
    pub c: f64,
    pub alpha: f64,
    pub replicates: usize,
    pub seed: u64,
    pub method: BandMethod,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandParams {
    pub alpha: f64,
    pub replicates: usize,
    pub maxdim: usize,
    pub seed: u64,
    pub method: BandMethod,
    /// Diameter cap for resample diagrams (bottleneck method only).
    pub delta_max: Option<f64>,
}

impl Default for BandParams {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            replicates: 100,
            maxdim: 2,
            seed: 0,
            method: BandMethod::Hausdorff,
            delta_max: None,
        }
    }
}

/// Seeded bootstrap band for the cloud with distance matrix `dm`.
pub fn confidence_band(dm: &DistanceMatrix, params: &BandParams) -> Result<ConfidenceBand> {
    let n = dm.len();
    if params.replicates == 0 {
        return Err(Error::InvalidArgument("bootstrap replicates must be >= 1".into()));
    }
    if !(params.alpha > 0.0 && params.alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must be in (0, 1), got {}", params.alpha)));
    }
    if n < 2 {
        return Err(Error::InvalidCloud(format!("confidence band needs >= 2 points, got {n}")));
    }
    if dm.max_distance() == 0.0 {
        return Err(Error::InvalidCloud("all points are identical".into()));
    }

    let full = match params.method {
        BandMethod::Bottleneck => Some(rips_persistence(dm, params.maxdim, params.delta_max)?),
        BandMethod::Hausdorff => None,
    };
    let stats: Vec<f64> = (0..params.replicates as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = stream_rng(params.seed, rep);
            let idx: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            match &full {
                None => Ok(hausdorff_to_subset(dm, &idx)),
                Some(full) => {
                    let sub = submatrix(dm, &idx);
                    let d = rips_persistence(&sub, params.maxdim, Some(full.delta_max))?;
                    Ok((0..=full.maxdim)
                        .map(|k| bottleneck_distance(full, &d, k))
                        .fold(0.0, f64::max))
                }
            }
        })
        .collect::<Result<_>>()?;
    Ok(ConfidenceBand {
        c: upper_quantile(stats, params.alpha),
        alpha: params.alpha,
        replicates: params.replicates,
        seed: params.seed,
        method: params.method,
    })
}

/// Empirical `(1 - alpha)` quantile: the `ceil((1 - alpha) B)`-th smallest.
pub fn upper_quantile(mut values: Vec<f64>, alpha: f64) -> f64 {
    values.sort_by(f64::total_cmp);
    let k = ((1.0 - alpha) * values.len() as f64 - 1e-9).ceil().max(1.0) as usize;
    values[k.min(values.len()) - 1]
}

/// Hausdorff distance between the full cloud and the rows `idx` of it.
pub fn hausdorff_to_subset(dm: &DistanceMatrix, idx: &[usize]) -> f64 {
    let mut chosen = vec![false; dm.len()];
    for &i in idx {
        chosen[i] = true;
    }
    let members: Vec<usize> = (0..dm.len()).filter(|&i| chosen[i]).collect();
    (0..dm.len())
        .map(|i| {
            if chosen[i] {
                0.0
            } else {
                let row = dm.row(i);
                members.iter().map(|&j| row[j]).fold(f64::INFINITY, f64::min)
            }
        })
        .fold(0.0, f64::max)
}

fn submatrix(dm: &DistanceMatrix, idx: &[usize]) -> DistanceMatrix {
    let k = idx.len();
    let mut data = vec![0.0; k * k];
    for (a, &i) in idx.iter().enumerate() {
        for (b, &j) in idx.iter().enumerate() {
            data[a * k + b] = dm.get(i, j);
        }
    }
    DistanceMatrix::from_full(k, data).expect("sub-table of a valid distance matrix")
}

/// Pairs above the band plus every essential class.
pub fn signal_pairs(diagram: &PersistenceDiagram, band: &ConfidenceBand) -> Vec<PersistencePair> {
    diagram
        .pairs
        .iter()
        .filter(|p| p.essential || p.persistence() > 2.0 * band.c)
        .copied()
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiameterEstimate {
    pub delta: f64,
    pub max_birth: f64,
    pub min_death: f64,
    /// `max_birth < min_death`: every signal class is alive at `delta`.
    pub consistent: bool,
}

/// Middle of the common lifetime of the signal classes; essential classes
/// take `delta_max` as their death.
pub fn estimate_diameter(signal: &[PersistencePair], delta_max: f64) -> Result<DiameterEstimate> {
    if signal.is_empty() {
        return Err(Error::InvalidArgument("signal is empty".into()));
    }
    let max_birth = signal.iter().map(|p| p.birth).fold(f64::NEG_INFINITY, f64::max);
    let min_death = signal
        .iter()
        .map(|p| if p.essential { delta_max } else { p.death })
        .fold(f64::INFINITY, f64::min);
    Ok(DiameterEstimate {
        delta: (max_birth + min_death) / 2.0,
        max_birth,
        min_death,
        consistent: max_birth < min_death,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use crate::pointset::euclidean_distances;
    use proptest::prelude::{prop_assert, prop_assert_eq, proptest};
    use rand::Rng;

    fn pair(dim: usize, birth: f64, death: f64) -> PersistencePair {
        PersistencePair { dim, birth, death, essential: false }
    }

    fn diagram(points: &[(f64, f64)]) -> PersistenceDiagram {
        PersistenceDiagram::new(points.iter().map(|&(b, d)| pair(0, b, d)).collect(), 10.0, 0)
    }

    // Exhaustive matching: both sides padded with diagonal slots.
    fn brute_force(a: &[PersistencePair], b: &[PersistencePair]) -> f64 {
        let n = a.len() + b.len();
        let cost = |i: usize, j: usize| -> f64 {
            match (i < a.len(), j < b.len()) {
                (true, true) => linf(&a[i], &b[j]),
                (true, false) => to_diagonal(&a[i]),
                (false, true) => to_diagonal(&b[j]),
                (false, false) => 0.0,
            }
        };
        let mut perm: Vec<usize> = (0..n).collect();
        let mut best = f64::INFINITY;
        fn rec(k: usize, perm: &mut Vec<usize>, cost: &dyn Fn(usize, usize) -> f64, acc: f64, best: &mut f64) {
            if acc >= *best {
                return;
            }
            if k == perm.len() {
                *best = acc;
                return;
            }
            for i in k..perm.len() {
                perm.swap(k, i);
                rec(k + 1, perm, cost, acc.max(cost(k, perm[k])), best);
                perm.swap(k, i);
            }
        }
        rec(0, &mut perm, &cost, 0.0, &mut best);
        if n == 0 {
            0.0
        } else {
            best
        }
    }

    fn random_points(rng: &mut impl Rng, k: usize) -> Vec<PersistencePair> {
        (0..k)
            .map(|_| {
                let b: f64 = rng.gen_range(0.0..1.0);
                pair(0, b, b + rng.gen_range(0.0..1.0))
            })
            .collect()
    }

    #[test]
    fn trivial_distances() {
        let d = diagram(&[(0.0, 2.0), (0.5, 0.7)]);
        assert_eq!(bottleneck_distance(&d, &d, 0), 0.0);
        assert_eq!(bottleneck_distance(&diagram(&[(0.0, 2.0)]), &diagram(&[]), 0), 1.0);
        assert_eq!(bottleneck_distance(&diagram(&[]), &diagram(&[]), 0), 0.0);
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = stream_rng(5, 0);
        for _ in 0..200 {
            let (ka, kb) = (rng.gen_range(0..=5), rng.gen_range(0..=5));
            let a = random_points(&mut rng, ka);
            let b = random_points(&mut rng, kb);
            let fast = bottleneck_points(&a, &b);
            let slow = brute_force(&a, &b);
            assert!((fast - slow).abs() <= 1e-12, "{fast} vs {slow}");
        }
    }

    proptest! {
        #[test]
        fn pseudometric(seed in 0u64..10_000) {
            let mut rng = stream_rng(seed, 1);
            let (x, y, z) = (random_points(&mut rng, 4), random_points(&mut rng, 3), random_points(&mut rng, 5));
            let xy = bottleneck_points(&x, &y);
            prop_assert_eq!(xy, bottleneck_points(&y, &x));
            prop_assert_eq!(bottleneck_points(&x, &x), 0.0);
            prop_assert!(bottleneck_points(&x, &z) <= xy + bottleneck_points(&y, &z) + 1e-12);
        }
    }

    #[test]
    fn stability_under_perturbation() {
        let mut rng = stream_rng(9, 0);
        for _ in 0..10 {
            let rows: Vec<Vec<f64>> = (0..25).map(|_| vec![rng.gen(), rng.gen(), rng.gen()]).collect();
            let eps = 0.01;
            let moved: Vec<Vec<f64>> = rows
                .iter()
                .map(|r| {
                    let dir: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
                    r.iter().zip(&dir).map(|(x, d)| x + eps * rng.gen::<f64>() * d / norm).collect()
                })
                .collect();
            let a = rips_persistence(&euclidean_distances(&Matrix::from_rows(&rows).unwrap()), 2, Some(2.0)).unwrap();
            let b = rips_persistence(&euclidean_distances(&Matrix::from_rows(&moved).unwrap()), 2, Some(2.0)).unwrap();
            for k in 0..=2 {
                assert!(bottleneck_distance(&a, &b, k) <= 2.0 * eps + 1e-12);
            }
        }
    }

    #[test]
    fn diameter_examples() {
        let mut signal = vec![pair(0, 0.0, 1.3), pair(0, 0.0, 5.0), pair(1, 0.4, 1.8), pair(1, 0.9, 3.5)];
        signal[1].essential = true;
        let e = estimate_diameter(&signal, 5.0).unwrap();
        assert_eq!((e.max_birth, e.min_death), (0.9, 1.3));
        assert!((e.delta - 1.1).abs() < 1e-12 && e.consistent);

        let ess = PersistencePair { dim: 0, birth: 0.0, death: 3.0, essential: true };
        assert_eq!(estimate_diameter(&[ess], 3.0).unwrap().delta, 1.5);

        let e = estimate_diameter(&[pair(0, 0.0, 1.0), pair(1, 0.8, 0.9)], 3.0).unwrap();
        assert!(e.consistent && (e.delta - 0.85).abs() < 1e-12);
        let e = estimate_diameter(&[pair(0, 0.0, 0.5), pair(1, 0.8, 0.9)], 3.0).unwrap();
        assert!(!e.consistent);
        assert!(estimate_diameter(&[], 1.0).is_err());
    }

    #[test]
    fn signal_selection() {
        let mut d = diagram(&[(0.0, 0.1), (0.0, 0.3), (0.2, 0.25)]);
        d.pairs.push(PersistencePair { dim: 0, birth: 0.0, death: 10.0, essential: true });
        let band = |c| ConfidenceBand { c, alpha: 0.05, replicates: 1, seed: 0, method: BandMethod::Hausdorff };
        assert_eq!(signal_pairs(&d, &band(1.0)).len(), 1);
        assert_eq!(signal_pairs(&d, &band(0.1)).len(), 2);
        assert_eq!(signal_pairs(&d, &band(0.0)).len(), 4);
    }

    #[test]
    fn band_is_seeded_and_validated() {
        let mut rng = stream_rng(2, 0);
        let rows: Vec<Vec<f64>> = (0..40).map(|_| vec![rng.gen(), rng.gen()]).collect();
        let dm = euclidean_distances(&Matrix::from_rows(&rows).unwrap());
        for method in [BandMethod::Hausdorff, BandMethod::Bottleneck] {
            let params = BandParams { seed: 11, method, replicates: 30, maxdim: 1, ..Default::default() };
            let a = confidence_band(&dm, &params).unwrap();
            assert_eq!(a, confidence_band(&dm, &params).unwrap());
            assert!(a.c > 0.0);
        }
        let zero = BandParams { replicates: 0, ..Default::default() };
        assert!(confidence_band(&dm, &zero).is_err());
        let same = euclidean_distances(&Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap());
        assert!(confidence_band(&same, &BandParams::default()).is_err());
    }

    #[test]
    fn hausdorff_and_quantile() {
        let dm = euclidean_distances(&Matrix::from_rows(&[vec![0.0], vec![1.0], vec![3.0]]).unwrap());
        assert_eq!(hausdorff_to_subset(&dm, &[0, 0, 0]), 3.0);
        assert_eq!(hausdorff_to_subset(&dm, &[1, 2, 1]), 1.0);
        assert_eq!(hausdorff_to_subset(&dm, &[0, 1, 2]), 0.0);
        let values: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(upper_quantile(values, 0.05), 95.0);
        assert_eq!(upper_quantile(vec![3.0], 0.05), 3.0);
    }
}
