//! Strict feasibility of small linear systems.
//!
//! Decides whether `A u = rhs` has a solution in which every variable of
//! each normalization group is strictly positive and the group sums to 1.
//! This is posed as
//!
//! ```text
//! max t  s.t.  A u = rhs,  sum_{i in g} u_i = 1 for each group g,
//!              u_i >= t for grouped variables,  t >= 0
//! ```
//!
//! and solved with a dense two-phase tableau simplex using Bland's rule.
//! Ungrouped variables are free.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Matrix;

pub const DEFAULT_EPS: f64 = 1e-9;
/// Accepted `|A u - rhs|` for a returned witness.
pub const RESIDUAL_TOL: f64 = 1e-7;
/// Accepted deviation of a group sum from 1.
pub const GROUP_TOL: f64 = 1e-9;

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-12;
const PHASE1_TOL: f64 = 1e-10;
const MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("invalid LP: {0}")]
    Invalid(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("iteration limit {0} reached")]
    IterationLimit(usize),
    #[error("objective unbounded")]
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrictFeasibilityProblem {
    pub eq_matrix: Matrix,
    pub eq_rhs: Vec<f64>,
    /// Variables that must be strictly positive; each lies in exactly one group.
    pub positive_vars: Vec<usize>,
    /// Partition of `positive_vars`; every group sums to 1.
    pub groups: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    /// `t` is the optimal margin, `witness` a solution with `u_i >= t` on
    /// grouped variables.
    Feasible { t: f64, witness: Vec<f64> },
    Infeasible,
}

impl LpOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Self::Feasible { .. })
    }
}

impl StrictFeasibilityProblem {
    pub fn n_vars(&self) -> usize {
        self.eq_matrix.cols()
    }

    fn validate(&self) -> Result<(), LpError> {
        let (r, v) = (self.eq_matrix.rows(), self.eq_matrix.cols());
        if r == 0 || v == 0 {
            return Err(LpError::Invalid(format!("empty system {r}x{v}")));
        }
        if self.eq_rhs.len() != r {
            return Err(LpError::Invalid(format!("{} right-hand sides for {r} rows", self.eq_rhs.len())));
        }
        if self.eq_matrix.as_slice().iter().chain(&self.eq_rhs).any(|x| !x.is_finite()) {
            return Err(LpError::Invalid("non-finite coefficient".into()));
        }
        if self.positive_vars.is_empty() {
            return Err(LpError::Invalid("no positive variables".into()));
        }
        let mut owner = vec![usize::MAX; v];
        for (g, group) in self.groups.iter().enumerate() {
            if group.is_empty() {
                return Err(LpError::Invalid(format!("group {g} is empty")));
            }
            for &i in group {
                if i >= v || owner[i] != usize::MAX {
                    return Err(LpError::Invalid(format!("variable {i} out of range or in two groups")));
                }
                owner[i] = g;
            }
        }
        let mut listed = vec![false; v];
        for &i in &self.positive_vars {
            if i >= v || listed[i] {
                return Err(LpError::Invalid(format!("positive variable {i} out of range or repeated")));
            }
            listed[i] = true;
            if owner[i] == usize::MAX {
                return Err(LpError::Invalid(format!("positive variable {i} is in no group")));
            }
        }
        if (0..v).any(|i| owner[i] != usize::MAX && !listed[i]) {
            return Err(LpError::Invalid("grouped variable missing from positive_vars".into()));
        }
        Ok(())
    }

    /// Max-norm residual of the equalities and group sums at `u`.
    pub fn residuals(&self, u: &[f64]) -> (f64, f64) {
        let eq = self
            .eq_matrix
            .iter_rows()
            .zip(&self.eq_rhs)
            .map(|(row, b)| (row.iter().zip(u).map(|(a, x)| a * x).sum::<f64>() - b).abs())
            .fold(0.0, f64::max);
        let group = self
            .groups
            .iter()
            .map(|g| (g.iter().map(|&i| u[i]).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max);
        (eq, group)
    }
}

/// Feasible iff the optimal margin exceeds `eps`.
pub fn solve_strict_feasibility(p: &StrictFeasibilityProblem, eps: f64) -> Result<LpOutcome, LpError> {
    if !(eps > 0.0) {
        return Err(LpError::Invalid(format!("eps must be > 0, got {eps}")));
    }
    p.validate()?;
    let v = p.n_vars();
    let mut is_positive = vec![false; v];
    for &i in &p.positive_vars {
        is_positive[i] = true;
    }
    let free: Vec<usize> = (0..v).filter(|&i| !is_positive[i]).collect();

    // Columns: s_i (positive vars, u_i = s_i + t), t, w+_j, w-_j (free vars).
    let mut col_of_s = vec![usize::MAX; v];
    for (c, &i) in p.positive_vars.iter().enumerate() {
        col_of_s[i] = c;
    }
    let t_col = p.positive_vars.len();
    let n_cols = t_col + 1 + 2 * free.len();
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for (row, &b) in p.eq_matrix.iter_rows().zip(&p.eq_rhs) {
        let mut out = vec![0.0; n_cols];
        for &i in &p.positive_vars {
            out[col_of_s[i]] = row[i];
            out[t_col] += row[i];
        }
        for (k, &j) in free.iter().enumerate() {
            out[t_col + 1 + 2 * k] = row[j];
            out[t_col + 2 + 2 * k] = -row[j];
        }
        rows.push((out, b));
    }
    for g in &p.groups {
        let mut out = vec![0.0; n_cols];
        for &i in g {
            out[col_of_s[i]] = 1.0;
        }
        out[t_col] = g.len() as f64;
        rows.push((out, 1.0));
    }
    let mut objective = vec![0.0; n_cols];
    objective[t_col] = -1.0;

    let x = Tableau::solve(rows, &objective)?;
    let Some(x) = x else {
        return Ok(LpOutcome::Infeasible);
    };
    let t = x[t_col];
    let mut u = vec![0.0; v];
    for &i in &p.positive_vars {
        u[i] = x[col_of_s[i]] + t;
    }
    for (k, &j) in free.iter().enumerate() {
        u[j] = x[t_col + 1 + 2 * k] - x[t_col + 2 + 2 * k];
    }

    let (eq, group) = p.residuals(&u);
    let scale = 1.0 + p.eq_rhs.iter().fold(0.0f64, |m, b| m.max(b.abs()));
    if eq > RESIDUAL_TOL * scale || group > GROUP_TOL {
        return Err(LpError::Numerical(format!(
            "witness residuals {eq:.3e} (equalities) / {group:.3e} (groups)"
        )));
    }
    if t > eps {
        Ok(LpOutcome::Feasible { t, witness: u })
    } else {
        Ok(LpOutcome::Infeasible)
    }
}

/// Dense tableau for `min c x  s.t.  M x = b, x >= 0`.
struct Tableau {
    // (rows + 1) x (cols + 1); last row holds reduced costs, last column rhs
    a: Vec<f64>,
    width: usize,
    rows: usize,
    cols: usize,
    basis: Vec<usize>,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.a[r * self.width + c]
    }

    /// Optimal `x`, or `None` when the constraints are infeasible.
    fn solve(rows: Vec<(Vec<f64>, f64)>, objective: &[f64]) -> Result<Option<Vec<f64>>, LpError> {
        let m = rows.len();
        let n = objective.len();
        // Structural columns, then one artificial per row.
        let cols = n + m;
        let width = cols + 1;
        let mut a = vec![0.0; (m + 1) * width];
        for (r, (coeffs, b)) in rows.iter().enumerate() {
            // equilibrate and make the right-hand side non-negative
            let norm = coeffs.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
            let scale = if norm > 0.0 { 1.0 / norm } else { 1.0 };
            let sign = if *b < 0.0 { -1.0 } else { 1.0 };
            for c in 0..n {
                a[r * width + c] = sign * scale * coeffs[c];
            }
            a[r * width + n + r] = 1.0;
            a[r * width + cols] = sign * scale * b;
        }
        let mut t = Tableau {
            a,
            width,
            rows: m,
            cols,
            basis: (n..n + m).collect(),
        };

        // Phase 1: minimize the sum of artificials.
        t.set_costs(&(0..cols).map(|c| if c >= n { 1.0 } else { 0.0 }).collect::<Vec<_>>());
        t.run(cols)?;
        let rhs_scale = 1.0 + (0..m).map(|r| t.at(r, cols).abs()).fold(0.0, f64::max);
        if -t.at(m, cols) > PHASE1_TOL * rhs_scale {
            return Ok(None);
        }
        // Drive artificials out of the basis where possible.
        let mut dead_rows = Vec::new();
        for r in 0..m {
            if t.basis[r] < n {
                continue;
            }
            let entering = (0..n)
                .filter(|&c| t.at(r, c).abs() > PIVOT_TOL)
                .max_by(|&x, &y| t.at(r, x).abs().total_cmp(&t.at(r, y).abs()));
            match entering {
                Some(c) => t.pivot(r, c),
                None => dead_rows.push(r),
            }
        }
        // Phase 2 on structural columns only; redundant rows keep their
        // artificial basic at zero and never constrain a ratio test.
        let mut costs = objective.to_vec();
        costs.resize(cols, 0.0);
        t.set_costs(&costs);
        t.run(n)?;

        let mut x = vec![0.0; n];
        for r in 0..m {
            let b = t.basis[r];
            if b < n {
                x[b] = t.at(r, cols).max(0.0);
            } else if t.at(r, cols).abs() > PHASE1_TOL * rhs_scale && !dead_rows.contains(&r) {
                return Err(LpError::Numerical("artificial variable left positive".into()));
            }
        }
        Ok(Some(x))
    }

    /// Writes the reduced-cost row for costs `c` under the current basis.
    fn set_costs(&mut self, c: &[f64]) {
        let (m, w) = (self.rows, self.width);
        for col in 0..w {
            let mut v = if col < self.cols { c[col] } else { 0.0 };
            for r in 0..m {
                v -= c[self.basis[r]] * self.at(r, col);
            }
            self.a[m * w + col] = v;
        }
    }

    /// Simplex iterations with Bland's rule over columns `< allowed`.
    fn run(&mut self, allowed: usize) -> Result<(), LpError> {
        let m = self.rows;
        for _ in 0..MAX_ITERATIONS {
            let Some(enter) = (0..allowed).find(|&c| self.at(m, c) < -COST_TOL) else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..m {
                let coeff = self.at(r, enter);
                if coeff <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.at(r, self.cols).max(0.0) / coeff;
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((best, best_ratio)) => {
                        let tie = (ratio - best_ratio).abs() <= 1e-12 * (1.0 + best_ratio.abs());
                        if (ratio < best_ratio && !tie) || (tie && self.basis[r] < self.basis[best]) {
                            Some((r, ratio))
                        } else {
                            Some((best, best_ratio))
                        }
                    }
                };
            }
            let Some((r, _)) = leave else {
                return Err(LpError::Unbounded);
            };
            self.pivot(r, enter);
        }
        Err(LpError::IterationLimit(MAX_ITERATIONS))
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.at(r, c);
        for k in 0..w {
            self.a[r * w + k] /= p;
        }
        self.a[r * w + c] = 1.0;
        for i in 0..=self.rows {
            if i == r {
                continue;
            }
            let f = self.at(i, c);
            if f == 0.0 {
                continue;
            }
            for k in 0..w {
                self.a[i * w + k] -= f * self.a[r * w + k];
            }
            self.a[i * w + c] = 0.0;
        }
        self.basis[r] = c;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use rand::Rng;
    use rand_chacha::ChaCha20Rng;

    fn problem(rows: &[Vec<f64>], rhs: Vec<f64>, groups: Vec<Vec<usize>>) -> StrictFeasibilityProblem {
        let positive_vars = groups.iter().flatten().copied().collect();
        StrictFeasibilityProblem {
            eq_matrix: Matrix::from_rows(rows).unwrap(),
            eq_rhs: rhs,
            positive_vars,
            groups,
        }
    }

    #[test]
    fn symmetric_pair() {
        // a1 + a2 = 1 as an equality row as well as a group
        let p = problem(&[vec![1.0, 1.0]], vec![1.0], vec![vec![0, 1]]);
        match solve_strict_feasibility(&p, DEFAULT_EPS).unwrap() {
            LpOutcome::Feasible { t, witness } => {
                assert!((t - 0.5).abs() < 1e-12);
                assert!((witness[0] - 0.5).abs() < 1e-12 && (witness[1] - 0.5).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn contradiction() {
        let p = problem(&[vec![1.0, 0.0], vec![1.0, 0.0]], vec![1.0, 0.0], vec![vec![0], vec![1]]);
        assert_eq!(solve_strict_feasibility(&p, DEFAULT_EPS).unwrap(), LpOutcome::Infeasible);
    }

    #[test]
    fn boundary_touch_is_not_strict() {
        // only solution is (1, 0)
        let p = problem(&[vec![1.0, 0.0]], vec![1.0], vec![vec![0, 1]]);
        assert_eq!(solve_strict_feasibility(&p, DEFAULT_EPS).unwrap(), LpOutcome::Infeasible);
    }

    #[test]
    fn free_variables() {
        // u0 + u2 = 3 with u0 in a singleton group: u2 = 2 free
        let p = StrictFeasibilityProblem {
            eq_matrix: Matrix::from_rows(&[vec![1.0, 0.0, 1.0], vec![0.0, 1.0, -1.0]]).unwrap(),
            eq_rhs: vec![3.0, -1.0],
            positive_vars: vec![0, 1],
            groups: vec![vec![0], vec![1]],
        };
        match solve_strict_feasibility(&p, DEFAULT_EPS).unwrap() {
            LpOutcome::Feasible { witness, .. } => assert!((witness[2] - 2.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn invalid_inputs() {
        let mut p = problem(&[vec![1.0, 1.0]], vec![1.0], vec![vec![0, 1]]);
        assert!(solve_strict_feasibility(&p, 0.0).is_err());
        p.groups = vec![vec![0]];
        assert!(matches!(solve_strict_feasibility(&p, DEFAULT_EPS), Err(LpError::Invalid(_))));
        p.groups = vec![vec![0, 1], vec![1]];
        assert!(matches!(solve_strict_feasibility(&p, DEFAULT_EPS), Err(LpError::Invalid(_))));
        p.groups = vec![vec![0, 1]];
        p.eq_rhs = vec![f64::NAN];
        assert!(matches!(solve_strict_feasibility(&p, DEFAULT_EPS), Err(LpError::Invalid(_))));
    }

    fn random_groups(rng: &mut ChaCha20Rng, v: usize) -> Vec<Vec<usize>> {
        let split = rng.gen_range(1..v);
        vec![(0..split).collect(), (split..v).collect()]
    }

    fn random_point(rng: &mut ChaCha20Rng, groups: &[Vec<usize>], v: usize) -> Vec<f64> {
        let mut u = vec![0.0; v];
        for g in groups {
            let w: Vec<f64> = g.iter().map(|_| rng.gen_range(0.05..1.0)).collect();
            let s: f64 = w.iter().sum();
            for (&i, x) in g.iter().zip(w) {
                u[i] = x / s;
            }
        }
        u
    }

    #[test]
    fn planted_interior_points_are_found() {
        let mut rng = stream_rng(17, 0);
        for _ in 0..300 {
            let v = rng.gen_range(2..=8);
            let r = rng.gen_range(1..=5);
            let groups = random_groups(&mut rng, v);
            let rows: Vec<Vec<f64>> = (0..r).map(|_| (0..v).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
            let u0 = random_point(&mut rng, &groups, v);
            let rhs = rows.iter().map(|row| row.iter().zip(&u0).map(|(a, x)| a * x).sum()).collect();
            let p = problem(&rows, rhs, groups);
            match solve_strict_feasibility(&p, DEFAULT_EPS).unwrap() {
                LpOutcome::Feasible { t, witness } => {
                    let min0 = u0.iter().fold(f64::INFINITY, |a, &b| a.min(b));
                    assert!(t >= min0 - 1e-9);
                    let (eq, gs) = p.residuals(&witness);
                    assert!(eq <= RESIDUAL_TOL && gs <= GROUP_TOL);
                    assert!(witness.iter().all(|&x| x >= t - 1e-12));
                }
                LpOutcome::Infeasible => panic!("planted point missed"),
            }
        }
    }

    #[test]
    fn separated_right_hand_sides_are_infeasible() {
        let mut rng = stream_rng(18, 0);
        for _ in 0..300 {
            let v = rng.gen_range(2..=8);
            let r = rng.gen_range(1..=5);
            let groups = random_groups(&mut rng, v);
            let rows: Vec<Vec<f64>> = (0..r).map(|_| (0..v).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
            let y: Vec<f64> = (0..r).map(|_| rng.gen_range(-1.0..1.0)).collect();
            // y^T A u >= sum over groups of the smallest y^T A column
            let ya: Vec<f64> = (0..v).map(|i| (0..r).map(|k| y[k] * rows[k][i]).sum()).collect();
            let floor: f64 = groups.iter().map(|g| g.iter().map(|&i| ya[i]).fold(f64::INFINITY, f64::min)).sum();
            let u0 = random_point(&mut rng, &groups, v);
            let base: Vec<f64> = rows.iter().map(|row| row.iter().zip(&u0).map(|(a, x)| a * x).sum()).collect();
            let yy: f64 = y.iter().map(|x| x * x).sum();
            let yb: f64 = y.iter().zip(&base).map(|(a, b)| a * b).sum();
            let lambda = (floor - 0.05 - yb) / yy;
            let rhs = base.iter().zip(&y).map(|(b, yk)| b + lambda * yk).collect();
            let p = problem(&rows, rhs, groups);
            assert_eq!(solve_strict_feasibility(&p, DEFAULT_EPS).unwrap(), LpOutcome::Infeasible);
        }
    }

    #[test]
    fn row_scaling_keeps_verdict() {
        let mut rng = stream_rng(19, 0);
        for _ in 0..200 {
            let v = rng.gen_range(2..=6);
            let r = rng.gen_range(1..=4);
            let groups = random_groups(&mut rng, v);
            let rows: Vec<Vec<f64>> = (0..r).map(|_| (0..v).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
            let rhs: Vec<f64> = (0..r).map(|_| rng.gen_range(-0.5..0.5)).collect();
            let p = problem(&rows, rhs.clone(), groups.clone());
            let scales: Vec<f64> = (0..r).map(|_| 10f64.powf(rng.gen_range(-3.0..3.0))).collect();
            let scaled_rows: Vec<Vec<f64>> = rows.iter().zip(&scales).map(|(row, s)| row.iter().map(|a| a * s).collect()).collect();
            let scaled_rhs = rhs.iter().zip(&scales).map(|(b, s)| b * s).collect();
            let q = problem(&scaled_rows, scaled_rhs, groups);
            let a = solve_strict_feasibility(&p, DEFAULT_EPS).unwrap().is_feasible();
            let b = solve_strict_feasibility(&q, DEFAULT_EPS).unwrap().is_feasible();
            assert_eq!(a, b);
        }
    }
}
