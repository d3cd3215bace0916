//! Dense elimination kernels and bipartite matching.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Pivot tolerance, relative to the largest entry magnitude.
pub const PIVOT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(k: usize) -> Self {
        let mut a = Self::zeros(k, k);
        for i in 0..k {
            a.set(i, i, 1.0);
        }
        a
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Structural("matrix rows differ in length".into()));
        }
        let data: Vec<f64> = rows.iter().flatten().copied().collect();
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("matrix entries must be finite".into()));
        }
        Ok(Self { rows: rows.len(), cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Largest absolute entry (the max-row-sum norm is not needed here).
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| f64::max(m, math::abs(*v)))
    }

    /// Infinity norm: largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|r| self.row(r).iter().map(|v| math::abs(*v)).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows).map(|r| self.row(r).iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }
}

/// Reduced row echelon form. Returns the pivot column of each pivot row.
fn rref(a: &DenseMatrix) -> (DenseMatrix, Vec<usize>) {
    let mut m = a.clone();
    let tol = PIVOT_TOL * m.max_abs();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..m.cols {
        if row == m.rows {
            break;
        }
        let (best, best_abs) = (row..m.rows)
            .map(|r| (r, math::abs(m.get(r, col))))
            .fold((row, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if best_abs <= tol {
            continue;
        }
        if best != row {
            for c in 0..m.cols {
                m.data.swap(best * m.cols + c, row * m.cols + c);
            }
        }
        let piv = m.get(row, col);
        for c in 0..m.cols {
            let v = m.get(row, c) / piv;
            m.set(row, c, v);
        }
        for r in 0..m.rows {
            if r == row {
                continue;
            }
            let f = m.get(r, col);
            if f == 0.0 {
                continue;
            }
            for c in 0..m.cols {
                let v = m.get(r, c) - f * m.get(row, c);
                m.set(r, c, v);
            }
            m.set(r, col, 0.0);
        }
        pivots.push(col);
        row += 1;
    }
    (m, pivots)
}

/// Numerical rank.
pub fn rank(a: &DenseMatrix) -> usize {
    if a.max_abs() == 0.0 {
        return 0;
    }
    rref(a).1.len()
}

/// A nonzero kernel vector with unit infinity norm, built from the first
/// free column of the echelon form. `None` when the columns are independent.
pub fn null_space_vector(a: &DenseMatrix) -> Option<Vec<f64>> {
    if a.cols == 0 {
        return None;
    }
    let (r, pivots) = if a.max_abs() == 0.0 { (a.clone(), Vec::new()) } else { rref(a) };
    if pivots.len() == a.cols {
        return None;
    }
    let pivot_set: BTreeSet<usize> = pivots.iter().copied().collect();
    let free = (0..a.cols).find(|c| !pivot_set.contains(c))?;
    let mut v = vec![0.0; a.cols];
    v[free] = 1.0;
    for (row, &pc) in pivots.iter().enumerate() {
        v[pc] = -r.get(row, free);
    }
    let scale = v.iter().fold(0.0, |m, x| f64::max(m, math::abs(*x)));
    for x in &mut v {
        *x /= scale;
    }
    Some(v)
}

/// Bipartite graph with left and right vertex classes and optional edge
/// weights.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteGraph {
    left: usize,
    right: usize,
    edges: Vec<(usize, usize, Option<f64>)>,
}

impl BipartiteGraph {
    pub fn new(left: usize, right: usize, edges: Vec<(usize, usize, Option<f64>)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for &(l, r, _) in &edges {
            if l >= left || r >= right {
                return Err(Error::Structural(format!("edge ({l}, {r}) out of range")));
            }
            if !seen.insert((l, r)) {
                return Err(Error::Structural(format!("duplicate edge ({l}, {r})")));
            }
        }
        Ok(Self { left, right, edges })
    }

    pub fn left_count(&self) -> usize {
        self.left
    }

    pub fn right_count(&self) -> usize {
        self.right
    }

    pub fn edges(&self) -> &[(usize, usize, Option<f64>)] {
        &self.edges
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.left];
        for &(l, r, _) in &self.edges {
            adj[l].push(r);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }
}

/// Maximum-cardinality matching; `result[l]` is the right partner of `l`.
pub fn max_bipartite_matching(g: &BipartiteGraph) -> Vec<Option<usize>> {
    let order: Vec<usize> = (0..g.left).collect();
    max_bipartite_matching_ordered(g, &order)
}

/// Like [`max_bipartite_matching`] but augments from left vertices in the
/// given order. A left vertex matched earlier is never unmatched later, so
/// the matched left set is the lexicographically first one for `order`.
pub fn max_bipartite_matching_ordered(g: &BipartiteGraph, order: &[usize]) -> Vec<Option<usize>> {
    let adj = g.adjacency();
    let mut match_right: Vec<Option<usize>> = vec![None; g.right];
    let mut visited = vec![false; g.right];
    for &l in order {
        visited.iter_mut().for_each(|v| *v = false);
        augment(l, &adj, &mut match_right, &mut visited);
    }
    let mut out = vec![None; g.left];
    for (r, l) in match_right.iter().enumerate() {
        if let Some(l) = l {
            out[*l] = Some(r);
        }
    }
    out
}

// iterative DFS so deep alternating paths cannot overflow the stack
fn augment(
    start: usize,
    adj: &[Vec<usize>],
    match_right: &mut [Option<usize>],
    visited: &mut [bool],
) -> bool {
    // stack of (left vertex, next adjacency index, right vertex taken to reach it)
    let mut stack: Vec<(usize, usize, Option<usize>)> = vec![(start, 0, None)];
    while let Some(&mut (l, ref mut idx, _)) = stack.last_mut() {
        if *idx >= adj[l].len() {
            stack.pop();
            continue;
        }
        let r = adj[l][*idx];
        *idx += 1;
        if visited[r] {
            continue;
        }
        visited[r] = true;
        match match_right[r] {
            None => {
                // flip the path
                let mut r_cur = r;
                while let Some((l_cur, _, via)) = stack.pop() {
                    match_right[r_cur] = Some(l_cur);
                    match via {
                        Some(v) => r_cur = v,
                        None => break,
                    }
                }
                return true;
            }
            Some(l2) => stack.push((l2, 0, Some(r))),
        }
    }
    false
}
