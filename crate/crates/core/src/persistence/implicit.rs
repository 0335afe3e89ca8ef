// Implicit Rips persistence via cohomology with clearing, apparent pairs and
// emergent pairs. Simplices are never stored beyond dimension `maxdim`; a
// simplex is its index in the combinatorial number system and coboundaries
// are enumerated on the fly.
//
// Ties in diameter are broken by descending index, so columns are reduced in
// order (diameter desc, index asc) and a column's pivot is its entry with the
// smallest diameter, largest index.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rustc_hash::FxHashMap;

use super::{PersistenceDiagram, PersistencePair};
use crate::binomial::BinomialTable;
use crate::error::{Error, Result};
use crate::pointset::DistanceMatrix;
use crate::rips::{default_simplex_cap, projected_simplex_count};

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    diameter: f64,
    index: u64,
}

impl Eq for Entry {}

impl Ord for Entry {
    // Heap top = smallest diameter, then largest index.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .diameter
            .total_cmp(&self.diameter)
            .then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

type Column = BinaryHeap<Entry>;

struct Engine<'a> {
    dm: &'a DistanceMatrix,
    n: usize,
    threshold: f64,
    binom: BinomialTable,
}

/// Persistence diagram of the Rips filtration of `dm` in dimensions
/// `0..=maxdim`, truncated at `delta_max` (default: largest distance).
pub fn rips_persistence(dm: &DistanceMatrix, maxdim: usize, delta_max: Option<f64>) -> Result<PersistenceDiagram> {
    rips_persistence_with_cap(dm, maxdim, delta_max, default_simplex_cap())
}

/// As [`rips_persistence`]; the cap bounds the simplices of dimension
/// `<= maxdim` that get materialized.
pub fn rips_persistence_with_cap(
    dm: &DistanceMatrix,
    maxdim: usize,
    delta_max: Option<f64>,
    cap: u64,
) -> Result<PersistenceDiagram> {
    let n = dm.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty distance matrix".into()));
    }
    let delta_max = delta_max.unwrap_or_else(|| dm.max_distance());
    if delta_max.is_nan() || delta_max < 0.0 {
        return Err(Error::InvalidArgument(format!("delta_max must be >= 0, got {delta_max}")));
    }
    // Past the enclosing radius the complex is a cone, so every class of
    // positive dimension has died and the graph is connected.
    let threshold = delta_max.min(dm.enclosing_radius());
    let maxdim = maxdim.min(n.saturating_sub(1));
    let projected = projected_simplex_count(dm, threshold, maxdim);
    if projected > cap as u128 {
        return Err(Error::SimplexCapExceeded { projected, cap });
    }

    let engine = Engine {
        dm,
        n,
        threshold,
        binom: BinomialTable::new(n + 1, maxdim.max(1) + 2),
    };
    let mut pairs = Vec::new();
    let (mut simplices, mut columns) = engine.dim0(delta_max, &mut pairs);
    for dim in 1..=maxdim {
        let mut pivots: FxHashMap<u64, usize> = FxHashMap::default();
        pivots.reserve(columns.len());
        engine.reduce(&columns, &mut pivots, dim, delta_max, &mut pairs);
        if dim < maxdim {
            let (next_simplices, next_columns) = engine.assemble(&simplices, &pivots, dim + 1, dim + 1 < maxdim);
            simplices = next_simplices;
            columns = next_columns;
        }
    }
    Ok(PersistenceDiagram::new(pairs, delta_max, maxdim))
}

impl Engine<'_> {
    #[inline]
    fn c(&self, n: usize, k: usize) -> u64 {
        if k > n {
            0
        } else {
            self.binom.get(n, k)
        }
    }

    /// Largest `v <= top` with `C(v, k) <= idx`.
    fn max_vertex(&self, idx: u64, k: usize, top: usize) -> usize {
        let (mut lo, mut hi) = (k - 1, top);
        // invariant: C(lo, k) <= idx; answer in [lo, hi]
        if self.c(hi, k) <= idx {
            return hi;
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.c(mid, k) <= idx {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Vertices of simplex `idx` of dimension `dim`, descending.
    fn vertices(&self, mut idx: u64, dim: usize, out: &mut Vec<usize>) {
        out.clear();
        let mut top = self.n - 1;
        for k in (1..=dim + 1).rev() {
            let v = self.max_vertex(idx, k, top);
            out.push(v);
            idx -= self.c(v, k);
            top = v.saturating_sub(1);
        }
    }

    fn diameter(&self, idx: u64, dim: usize) -> f64 {
        let mut verts = Vec::with_capacity(dim + 1);
        self.vertices(idx, dim, &mut verts);
        let mut d: f64 = 0.0;
        for (i, &a) in verts.iter().enumerate() {
            for &b in &verts[i + 1..] {
                d = d.max(self.dm.get(a, b));
            }
        }
        d
    }

    fn cofacets<'s>(&'s self, simplex: Entry, dim: usize) -> Cofacets<'s> {
        let mut vertices = Vec::with_capacity(dim + 1);
        self.vertices(simplex.index, dim, &mut vertices);
        Cofacets {
            engine: self,
            diameter: simplex.diameter,
            idx_below: simplex.index,
            idx_above: 0,
            v: self.n as i64 - 1,
            k: dim + 1,
            vertices,
        }
    }

    fn facets<'s>(&'s self, simplex: Entry, dim: usize) -> Facets<'s> {
        Facets {
            engine: self,
            dim,
            idx_below: simplex.index,
            idx_above: 0,
            top: self.n - 1,
            k: dim as i64,
        }
    }

    // Cofacet of equal diameter with the largest index: the pivot of the
    // unreduced coboundary when it exists.
    fn zero_pivot_cofacet(&self, simplex: Entry, dim: usize) -> Option<Entry> {
        let mut it = self.cofacets(simplex, dim);
        while it.has_next(true) {
            let c = it.next_entry();
            if c.diameter == simplex.diameter {
                return Some(c);
            }
        }
        None
    }

    // Facet of equal diameter with the smallest index.
    fn zero_pivot_facet(&self, simplex: Entry, dim: usize) -> Option<Entry> {
        self.facets(simplex, dim).find(|f| f.diameter == simplex.diameter)
    }

    fn zero_apparent_cofacet(&self, simplex: Entry, dim: usize) -> Option<Entry> {
        let c = self.zero_pivot_cofacet(simplex, dim)?;
        (self.zero_pivot_facet(c, dim + 1).map(|f| f.index) == Some(simplex.index)).then_some(c)
    }

    fn zero_apparent_facet(&self, simplex: Entry, dim: usize) -> Option<Entry> {
        let f = self.zero_pivot_facet(simplex, dim)?;
        (self.zero_pivot_cofacet(f, dim - 1).map(|c| c.index) == Some(simplex.index)).then_some(f)
    }

    fn in_zero_apparent_pair(&self, simplex: Entry, dim: usize) -> bool {
        self.zero_apparent_cofacet(simplex, dim).is_some() || self.zero_apparent_facet(simplex, dim).is_some()
    }

    /// Union-find over edges; returns all edges and the columns to reduce in
    /// dimension 1.
    fn dim0(&self, delta_max: f64, pairs: &mut Vec<PersistencePair>) -> (Vec<Entry>, Vec<Entry>) {
        let n = self.n;
        let mut edges = Vec::new();
        for b in 1..n {
            for a in 0..b {
                let d = self.dm.get(a, b);
                if d <= self.threshold {
                    edges.push(Entry {
                        diameter: d,
                        index: self.c(b, 2) + a as u64,
                    });
                }
            }
        }
        // filtration order: diameter asc, index desc (the heap order reversed)
        edges.sort_by(|x, y| y.cmp(x));

        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut columns = Vec::new();
        let mut verts = Vec::with_capacity(2);
        for &e in &edges {
            self.vertices(e.index, 1, &mut verts);
            let (u, v) = (find(&mut parent, verts[0]), find(&mut parent, verts[1]));
            if u != v {
                pairs.push(PersistencePair {
                    dim: 0,
                    birth: 0.0,
                    death: e.diameter,
                    essential: false,
                });
                let (elder, younger) = if u < v { (u, v) } else { (v, u) };
                parent[younger] = elder;
            } else if self.zero_apparent_cofacet(e, 1).is_none() {
                columns.push(e);
            }
        }
        columns.reverse();
        for v in 0..n {
            if find(&mut parent, v) == v {
                pairs.push(PersistencePair {
                    dim: 0,
                    birth: 0.0,
                    death: delta_max,
                    essential: true,
                });
            }
        }
        (edges, columns)
    }

    /// Simplices of dimension `dim` within the threshold (when `keep` is
    /// set) and the ones among them that still need a column.
    fn assemble(
        &self,
        lower: &[Entry],
        pivots: &FxHashMap<u64, usize>,
        dim: usize,
        keep: bool,
    ) -> (Vec<Entry>, Vec<Entry>) {
        let mut simplices = Vec::new();
        let mut columns = Vec::new();
        for &s in lower {
            let mut it = self.cofacets(s, dim - 1);
            while it.has_next(false) {
                let c = it.next_entry();
                if c.diameter > self.threshold {
                    continue;
                }
                if keep {
                    simplices.push(c);
                }
                if !pivots.contains_key(&c.index) && !self.in_zero_apparent_pair(c, dim) {
                    columns.push(c);
                }
            }
        }
        // diameter desc, index asc
        columns.sort_unstable_by(|x, y| y.diameter.total_cmp(&x.diameter).then(x.index.cmp(&y.index)));
        (simplices, columns)
    }

    fn push_coboundary(&self, simplex: Entry, dim: usize, reduction: &mut Column, coboundary: &mut Column) {
        reduction.push(simplex);
        let mut it = self.cofacets(simplex, dim);
        while it.has_next(true) {
            let c = it.next_entry();
            if c.diameter <= self.threshold {
                coboundary.push(c);
            }
        }
    }

    fn init_coboundary(&self, simplex: Entry, dim: usize, pivots: &FxHashMap<u64, usize>, coboundary: &mut Column) -> Option<Entry> {
        let mut check_emergent = true;
        let mut entries = Vec::new();
        let mut it = self.cofacets(simplex, dim);
        while it.has_next(true) {
            let c = it.next_entry();
            if c.diameter > self.threshold {
                continue;
            }
            entries.push(c);
            if check_emergent && c.diameter == simplex.diameter {
                if !pivots.contains_key(&c.index) && self.zero_apparent_facet(c, dim + 1).is_none() {
                    return Some(c);
                }
                check_emergent = false;
            }
        }
        coboundary.extend(entries);
        get_pivot(coboundary)
    }

    fn reduce(
        &self,
        columns: &[Entry],
        pivots: &mut FxHashMap<u64, usize>,
        dim: usize,
        delta_max: f64,
        pairs: &mut Vec<PersistencePair>,
    ) {
        // reduction matrix columns stored back to back
        let mut offsets = vec![0usize];
        let mut arena: Vec<Entry> = Vec::new();
        let mut reduction = Column::new();
        let mut coboundary = Column::new();

        for (j, &column) in columns.iter().enumerate() {
            reduction.clear();
            coboundary.clear();
            let mut pivot = self.init_coboundary(column, dim, pivots, &mut coboundary);
            loop {
                let Some(p) = pivot else {
                    pairs.push(PersistencePair {
                        dim,
                        birth: column.diameter,
                        death: delta_max,
                        essential: true,
                    });
                    break;
                };
                if let Some(&k) = pivots.get(&p.index) {
                    self.push_coboundary(columns[k], dim, &mut reduction, &mut coboundary);
                    for &s in &arena[offsets[k]..offsets[k + 1]] {
                        self.push_coboundary(s, dim, &mut reduction, &mut coboundary);
                    }
                    pivot = get_pivot(&mut coboundary);
                } else if let Some(f) = self.zero_apparent_facet(p, dim + 1) {
                    self.push_coboundary(f, dim, &mut reduction, &mut coboundary);
                    pivot = get_pivot(&mut coboundary);
                } else {
                    pairs.push(PersistencePair {
                        dim,
                        birth: column.diameter,
                        death: p.diameter,
                        essential: false,
                    });
                    pivots.insert(p.index, j);
                    while let Some(e) = pop_pivot(&mut reduction) {
                        arena.push(e);
                    }
                    break;
                }
            }
            offsets.push(arena.len());
        }
    }
}

// Over Z/2 equal entries cancel in pairs.
fn pop_pivot(column: &mut Column) -> Option<Entry> {
    while let Some(top) = column.pop() {
        match column.peek() {
            Some(next) if next.index == top.index => {
                column.pop();
            }
            _ => return Some(top),
        }
    }
    None
}

fn get_pivot(column: &mut Column) -> Option<Entry> {
    let p = pop_pivot(column)?;
    column.push(p);
    Some(p)
}

// Cofacets in decreasing index order, each formed by inserting one vertex.
struct Cofacets<'a> {
    engine: &'a Engine<'a>,
    diameter: f64,
    idx_below: u64,
    idx_above: u64,
    v: i64,
    k: usize,
    vertices: Vec<usize>,
}

impl Cofacets<'_> {
    // With `all == false` only cofacets whose new vertex exceeds every
    // existing vertex are produced, so each simplex is generated once.
    fn has_next(&self, all: bool) -> bool {
        self.v >= self.k as i64 && (all || self.engine.c(self.v as usize, self.k) > self.idx_below)
    }

    fn next_entry(&mut self) -> Entry {
        let e = self.engine;
        while e.c(self.v as usize, self.k) <= self.idx_below {
            self.idx_below -= e.c(self.v as usize, self.k);
            self.idx_above += e.c(self.v as usize, self.k + 1);
            self.v -= 1;
            self.k -= 1;
        }
        let v = self.v as usize;
        let diameter = self
            .vertices
            .iter()
            .map(|&w| e.dm.get(v, w))
            .fold(self.diameter, f64::max);
        let index = self.idx_above + e.c(v, self.k + 1) + self.idx_below;
        self.v -= 1;
        Entry { diameter, index }
    }
}

// Facets in increasing index order, dropping the largest vertex first.
struct Facets<'a> {
    engine: &'a Engine<'a>,
    dim: usize,
    idx_below: u64,
    idx_above: u64,
    top: usize,
    k: i64,
}

impl Iterator for Facets<'_> {
    type Item = Entry;

    fn next(&mut self) -> Option<Entry> {
        if self.k < 0 {
            return None;
        }
        let e = self.engine;
        let k = self.k as usize;
        let j = e.max_vertex(self.idx_below, k + 1, self.top);
        let index = self.idx_above + (self.idx_below - e.c(j, k + 1));
        let diameter = e.diameter(index, self.dim - 1);
        self.idx_below -= e.c(j, k + 1);
        self.idx_above += e.c(j, k);
        self.top = j.saturating_sub(1);
        self.k -= 1;
        Some(Entry { diameter, index })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use crate::persistence::{compute_persistence, pair_order};
    use crate::pointset::euclidean_distances;
    use crate::rips::build_filtration;
    use crate::rng::stream_rng;
    use rand::seq::SliceRandom;
    use rand::Rng;

    fn cloud(n: usize, dim: usize, seed: u64) -> Matrix {
        let mut rng = stream_rng(seed, 11);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.gen()).collect()).collect();
        Matrix::from_rows(&rows).unwrap()
    }

    // Explicit diagram with one extra dimension, truncated back to `maxdim`.
    fn reference(dm: &DistanceMatrix, maxdim: usize, delta_max: f64) -> Vec<PersistencePair> {
        let f = build_filtration(dm, maxdim + 1, Some(delta_max)).unwrap();
        let mut pairs: Vec<_> = compute_persistence(&f).pairs.into_iter().filter(|p| p.dim <= maxdim).collect();
        pairs.sort_by(pair_order);
        pairs
    }

    #[test]
    fn index_round_trip() {
        let dm = euclidean_distances(&cloud(12, 2, 0));
        let engine = Engine {
            dm: &dm,
            n: 12,
            threshold: f64::INFINITY,
            binom: BinomialTable::new(13, 5),
        };
        let mut verts = Vec::new();
        for dim in 0..4 {
            for idx in 0..engine.c(12, dim + 1) {
                engine.vertices(idx, dim, &mut verts);
                assert!(verts.windows(2).all(|w| w[0] > w[1]));
                let back: u64 = verts.iter().rev().enumerate().map(|(i, &v)| engine.c(v, i + 1)).sum();
                assert_eq!(back, idx);
                if dim >= 1 {
                    let facets: Vec<u64> = engine.facets(Entry { diameter: 0.0, index: idx }, dim).map(|f| f.index).collect();
                    assert!(facets.windows(2).all(|w| w[0] < w[1]));
                    assert_eq!(facets.len(), dim + 1);
                }
                let mut it = engine.cofacets(Entry { diameter: 0.0, index: idx }, dim);
                let mut cof = Vec::new();
                while it.has_next(true) {
                    cof.push(it.next_entry().index);
                }
                assert_eq!(cof.len(), 12 - dim - 1);
                assert!(cof.windows(2).all(|w| w[0] > w[1]));
            }
        }
    }

    #[test]
    fn matches_explicit_reduction() {
        for seed in 0..60 {
            let n = 6 + (seed as usize % 7);
            let dm = euclidean_distances(&cloud(n, 2 + (seed as usize % 3), seed));
            for maxdim in 0..=2 {
                for delta_max in [dm.max_distance(), 0.6 * dm.max_distance(), 0.3 * dm.max_distance()] {
                    let fast = rips_persistence(&dm, maxdim, Some(delta_max)).unwrap();
                    assert_eq!(fast.pairs, reference(&dm, maxdim, delta_max), "seed {seed} maxdim {maxdim} cap {delta_max}");
                }
            }
        }
    }

    #[test]
    fn ties_and_relabelling() {
        // integer grid points produce many equal distances
        for seed in 0..20 {
            let mut rng = stream_rng(seed, 5);
            let mut rows: Vec<Vec<f64>> = (0..11).map(|_| vec![rng.gen_range(0..4) as f64, rng.gen_range(0..4) as f64, rng.gen_range(0..2) as f64]).collect();
            rows.sort_by(|a, b| a.partial_cmp(b).unwrap());
            rows.dedup();
            let dm = euclidean_distances(&Matrix::from_rows(&rows).unwrap());
            let base = rips_persistence(&dm, 2, None).unwrap();
            assert_eq!(base.pairs, reference(&dm, 2, dm.max_distance()), "seed {seed}");
            rows.shuffle(&mut rng);
            let shuffled = euclidean_distances(&Matrix::from_rows(&rows).unwrap());
            assert_eq!(rips_persistence(&shuffled, 2, None).unwrap().pairs, base.pairs);
        }
    }

    #[test]
    fn circle_has_one_loop() {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / 40.0;
                vec![t.cos(), t.sin()]
            })
            .collect();
        let dm = euclidean_distances(&Matrix::from_rows(&rows).unwrap());
        let d = rips_persistence(&dm, 2, None).unwrap();
        let h1: Vec<_> = d.of_dim(1).collect();
        assert_eq!(h1.len(), 1);
        assert!((h1[0].birth - dm.get(0, 1)).abs() < 1e-12);
        assert!(h1[0].death > 1.7 && !h1[0].essential);
        assert_eq!(d.essential_count(0), 1);
    }

    #[test]
    fn guard_trips() {
        let dm = euclidean_distances(&cloud(40, 2, 3));
        assert!(matches!(
            rips_persistence_with_cap(&dm, 2, None, 1000),
            Err(Error::SimplexCapExceeded { .. })
        ));
    }

    #[test]
    fn single_point() {
        let dm = euclidean_distances(&cloud(1, 2, 3));
        let d = rips_persistence(&dm, 2, Some(1.0)).unwrap();
        assert_eq!(d.pairs.len(), 1);
        assert!(d.pairs[0].essential);
    }
}
