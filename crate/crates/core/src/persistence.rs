//! Persistent homology over the two-element field.
//!
//! [`compute_persistence`] reduces the boundary matrix of an explicit
//! [`Filtration`]; top-dimensional cycles have no cofaces in it and are
//! reported as essential. [`rips_persistence`] works straight from a
//! distance matrix and computes `H_0..H_maxdim` exactly, treating
//! `(maxdim + 1)`-simplices implicitly.

mod implicit;

use std::io::Write;
use std::path::Path;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pointset::DistanceMatrix;
use crate::rips::{Filtration, Vertices};

pub use implicit::{rips_persistence, rips_persistence_with_cap};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PersistencePair {
    pub dim: usize,
    pub birth: f64,
    pub death: f64,
    pub essential: bool,
}

impl PersistencePair {
    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistenceDiagram {
    /// Pairs with positive persistence plus all essential classes, sorted by
    /// `(dim, birth, death)`.
    pub pairs: Vec<PersistencePair>,
    pub delta_max: f64,
    pub maxdim: usize,
    /// Pairs with `birth == death`. Only the explicit reduction fills this.
    #[serde(skip)]
    pub zero_persistence: Vec<PersistencePair>,
}

impl PersistenceDiagram {
    pub(crate) fn new(mut pairs: Vec<PersistencePair>, delta_max: f64, maxdim: usize) -> Self {
        let mut zero = Vec::new();
        pairs.retain(|p| {
            if !p.essential && p.birth == p.death {
                zero.push(*p);
                false
            } else {
                true
            }
        });
        pairs.sort_by(pair_order);
        Self {
            pairs,
            delta_max,
            maxdim,
            zero_persistence: zero,
        }
    }

    pub fn of_dim(&self, dim: usize) -> impl Iterator<Item = &PersistencePair> + '_ {
        self.pairs.iter().filter(move |p| p.dim == dim)
    }

    pub fn essential_count(&self, dim: usize) -> usize {
        self.of_dim(dim).filter(|p| p.essential).count()
    }

    /// Writes rows `dim,birth,death,essential`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let io_err = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err)?);
        writeln!(out, "dim,birth,death,essential").map_err(io_err)?;
        for p in &self.pairs {
            writeln!(out, "{},{:?},{:?},{}", p.dim, p.birth, p.death, u8::from(p.essential)).map_err(io_err)?;
        }
        out.flush().map_err(io_err)
    }
}

pub(crate) fn pair_order(a: &PersistencePair, b: &PersistencePair) -> std::cmp::Ordering {
    a.dim
        .cmp(&b.dim)
        .then(a.birth.total_cmp(&b.birth))
        .then(a.death.total_cmp(&b.death))
        .then(a.essential.cmp(&b.essential))
}

/// Reduction variants; all of them produce the same pairing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReductionOptions {
    pub clearing: bool,
    pub union_find_h0: bool,
}

impl Default for ReductionOptions {
    fn default() -> Self {
        Self {
            clearing: true,
            union_find_h0: true,
        }
    }
}

/// Persistence pairs of an explicit filtration.
pub fn compute_persistence(filtration: &Filtration) -> PersistenceDiagram {
    compute_persistence_with(filtration, ReductionOptions::default())
}

pub fn compute_persistence_with(filtration: &Filtration, opts: ReductionOptions) -> PersistenceDiagram {
    let simplices = filtration.simplices();
    let pairing = reduce(filtration, opts);
    let delta_max = filtration.delta_max();
    let pairs = pairing
        .iter()
        .map(|&(b, d)| {
            let s = &simplices[b];
            match d {
                Some(d) => PersistencePair {
                    dim: s.dim(),
                    birth: s.diameter(),
                    death: simplices[d].diameter(),
                    essential: false,
                },
                None => PersistencePair {
                    dim: s.dim(),
                    birth: s.diameter(),
                    death: delta_max,
                    essential: true,
                },
            }
        })
        .collect();
    PersistenceDiagram::new(pairs, delta_max, filtration.maxdim())
}

/// Boundary columns as ascending filtration positions.
fn boundary_columns(filtration: &Filtration) -> Vec<Vec<usize>> {
    let simplices = filtration.simplices();
    let mut position: FxHashMap<&[u32], usize> = FxHashMap::default();
    position.reserve(simplices.len());
    for (i, s) in simplices.iter().enumerate() {
        position.insert(s.vertices(), i);
    }
    simplices
        .iter()
        .map(|s| {
            let mut col: Vec<usize> = s
                .facets()
                .map(|f: Vertices| position[f.as_slice()])
                .collect();
            col.sort_unstable();
            col
        })
        .collect()
}

/// `(birth position, death position)` for every class, in birth order.
pub(crate) fn reduce(filtration: &Filtration, opts: ReductionOptions) -> Vec<(usize, Option<usize>)> {
    let simplices = filtration.simplices();
    let n = simplices.len();
    let mut columns = boundary_columns(filtration);
    // death[i] = column that kills the class born at i
    let mut death: Vec<Option<usize>> = vec![None; n];
    let mut negative = vec![false; n];
    let mut low_owner: Vec<Option<usize>> = vec![None; n];

    let lowest_dim = if opts.union_find_h0 {
        union_find_h0(filtration, &mut death, &mut negative);
        2
    } else {
        1
    };

    let dims: Vec<usize> = if opts.clearing {
        (lowest_dim..=filtration.maxdim()).rev().collect()
    } else {
        (lowest_dim..=filtration.maxdim()).collect()
    };
    let mut scratch = Vec::new();
    for dim in dims {
        for j in 0..n {
            if simplices[j].dim() != dim {
                continue;
            }
            if opts.clearing && is_cleared(j, &death) {
                columns[j].clear();
                continue;
            }
            while let Some(&low) = columns[j].last() {
                match low_owner[low] {
                    Some(k) => {
                        symmetric_difference(&columns[j], &columns[k], &mut scratch);
                        std::mem::swap(&mut columns[j], &mut scratch);
                    }
                    None => {
                        low_owner[low] = Some(j);
                        death[low] = Some(j);
                        negative[j] = true;
                        break;
                    }
                }
            }
        }
    }

    (0..n)
        .filter(|&i| !negative[i])
        .map(|i| (i, death[i]))
        .collect()
}

// A column is cleared once its simplex is known to create a class that a
// higher-dimensional column kills.
fn is_cleared(j: usize, death: &[Option<usize>]) -> bool {
    death[j].is_some()
}

fn symmetric_difference(a: &[usize], b: &[usize], out: &mut Vec<usize>) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
}

/// Elder-rule union-find on the 1-skeleton. Components are represented by
/// their oldest vertex, which is exactly the low-entry choice of the column
/// reduction.
fn union_find_h0(filtration: &Filtration, death: &mut [Option<usize>], negative: &mut [bool]) {
    let simplices = filtration.simplices();
    let mut vertex_pos = vec![usize::MAX; filtration.n_vertices()];
    for (i, s) in simplices.iter().enumerate() {
        if s.dim() == 0 {
            vertex_pos[s.vertices()[0] as usize] = i;
        }
    }
    // parent links in terms of filtration positions of vertices
    let mut parent: Vec<usize> = (0..simplices.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (i, s) in simplices.iter().enumerate() {
        if s.dim() != 1 {
            continue;
        }
        let a = find(&mut parent, vertex_pos[s.vertices()[0] as usize]);
        let b = find(&mut parent, vertex_pos[s.vertices()[1] as usize]);
        if a == b {
            continue;
        }
        let (elder, younger) = if a < b { (a, b) } else { (b, a) };
        parent[younger] = elder;
        death[younger] = Some(i);
        negative[i] = true;
    }
}

/// `β_0..β_maxdim` at scale `delta`: pairs with `birth <= delta < death`,
/// essential classes counting whenever `birth <= delta`.
pub fn betti_at(diagram: &PersistenceDiagram, delta: f64) -> Result<Vec<usize>> {
    if !(0.0..=diagram.delta_max).contains(&delta) {
        return Err(Error::InvalidArgument(format!(
            "delta {delta} outside [0, {}]",
            diagram.delta_max
        )));
    }
    let mut betti = vec![0; diagram.maxdim + 1];
    for p in &diagram.pairs {
        if p.birth <= delta && (p.essential || delta < p.death) {
            betti[p.dim] += 1;
        }
    }
    Ok(betti)
}

pub const ORACLE_CAP: usize = 2000;

/// Betti numbers of the sub-complex at `delta` by dense rank computation.
/// `β_maxdim` counts all top cycles since the filtration has no cofaces.
pub fn homology_rank_oracle(filtration: &Filtration, delta: f64) -> Result<Vec<usize>> {
    let complex = filtration.prefix(delta);
    if complex.len() > ORACLE_CAP {
        return Err(Error::OracleTooLarge {
            size: complex.len(),
            cap: ORACLE_CAP,
        });
    }
    let maxdim = filtration.maxdim();
    let mut by_dim: Vec<Vec<&[u32]>> = vec![Vec::new(); maxdim + 1];
    for s in complex {
        by_dim[s.dim()].push(s.vertices());
    }
    // rank[k] = rank of the boundary map from k-chains to (k-1)-chains
    let mut rank = vec![0usize; maxdim + 2];
    for k in 1..=maxdim {
        let index: FxHashMap<&[u32], usize> = by_dim[k - 1].iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let words = by_dim[k - 1].len().div_ceil(64);
        let rows: Vec<Vec<u64>> = by_dim[k]
            .iter()
            .map(|verts| {
                let mut row = vec![0u64; words];
                for skip in 0..verts.len() {
                    let facet: Vec<u32> = verts
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != skip)
                        .map(|(_, &v)| v)
                        .collect();
                    let i = index[facet.as_slice()];
                    row[i / 64] ^= 1 << (i % 64);
                }
                row
            })
            .collect();
        rank[k] = gf2_rank(rows, words);
    }
    Ok((0..=maxdim)
        .map(|k| by_dim[k].len() - rank[k] - rank[k + 1])
        .collect())
}

fn gf2_rank(mut rows: Vec<Vec<u64>>, words: usize) -> usize {
    let mut rank = 0;
    for bit in 0..words * 64 {
        let (w, mask) = (bit / 64, 1u64 << (bit % 64));
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][w] & mask != 0) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for r in rank + 1..rows.len() {
            if rows[r][w] & mask != 0 {
                for (x, y) in rows[r].iter_mut().zip(&pivot) {
                    *x ^= y;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Convenience: diagram of the explicit Rips filtration of `dm`.
pub fn explicit_rips_persistence(dm: &DistanceMatrix, maxdim: usize, delta_max: Option<f64>) -> Result<PersistenceDiagram> {
    let f = crate::rips::build_filtration(dm, maxdim, delta_max)?;
    Ok(compute_persistence(&f))
}
