//! Dense two-phase primal simplex with Bland's rule.

use alloc::vec;
use alloc::vec::Vec;

use super::{LinearProgram, LpOutcome, LpSolution, Relation, Sense, FEAS_TOL, OPT_TOL};
use crate::error::{Error, Result};
use crate::math;
use crate::linalg::PIVOT_TOL;

#[derive(Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Structural,
    Slack,
    Surplus,
    Artificial,
}

struct Tableau {
    rows: usize,
    cols: usize,
    // rows x (cols + 1); the last column holds the right-hand side
    a: Vec<f64>,
    // reduced-cost row, last entry is minus the objective value
    obj: Vec<f64>,
    basis: Vec<usize>,
    kind: Vec<ColKind>,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.a[r * (self.cols + 1) + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.cols + 1;
        let piv = self.a[pr * w + pc];
        for c in 0..w {
            self.a[pr * w + c] /= piv;
        }
        self.a[pr * w + pc] = 1.0;
        for r in 0..self.rows {
            if r == pr {
                continue;
            }
            let f = self.a[r * w + pc];
            if f == 0.0 {
                continue;
            }
            for c in 0..w {
                self.a[r * w + c] -= f * self.a[pr * w + c];
            }
            self.a[r * w + pc] = 0.0;
        }
        let f = self.obj[pc];
        if f != 0.0 {
            for c in 0..w {
                self.obj[c] -= f * self.a[pr * w + c];
            }
            self.obj[pc] = 0.0;
        }
        self.basis[pr] = pc;
    }

    /// Loads `costs` (length `cols`) as the objective and prices out the basis.
    fn set_objective(&mut self, costs: &[f64]) {
        let w = self.cols + 1;
        self.obj = vec![0.0; w];
        self.obj[..self.cols].copy_from_slice(costs);
        for r in 0..self.rows {
            let cb = costs[self.basis[r]];
            if cb != 0.0 {
                for c in 0..w {
                    self.obj[c] -= cb * self.a[r * w + c];
                }
            }
        }
    }

    /// Bland's rule iterations. Returns false when unbounded.
    fn run(&mut self, allow: impl Fn(usize) -> bool) -> bool {
        loop {
            let entering = (0..self.cols).find(|&c| allow(c) && self.obj[c] < -OPT_TOL);
            let Some(e) = entering else { return true };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let coef = self.at(r, e);
                if coef > PIVOT_TOL {
                    let ratio = self.rhs(r) / coef;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            let tie = math::abs(ratio - lratio) <= 1e-12 * f64::max(1.0, math::abs(lratio));
                            if ratio < lratio && !tie || tie && self.basis[r] < self.basis[lr] {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            match leave {
                None => return false,
                Some((r, _)) => self.pivot(r, e),
            }
        }
    }
}

pub(super) fn solve(lp: &LinearProgram) -> Result<LpOutcome> {
    let n = lp.num_vars();
    let sign = match lp.sense {
        Sense::Min => 1.0,
        Sense::Max => -1.0,
    };

    // rows of the shifted problem: x = lo + x', x' >= 0
    struct Row {
        coeffs: Vec<f64>,
        rel: Relation,
        rhs: f64,
        flip: f64,
    }
    let mut rows: Vec<Row> = Vec::new();
    for con in &lp.constraints {
        let mut coeffs = vec![0.0; n];
        for &(v, a) in &con.coeffs {
            coeffs[v] += a;
        }
        let shift: f64 = coeffs.iter().zip(&lp.lo).map(|(a, l)| a * l).sum();
        rows.push(Row { coeffs, rel: con.relation, rhs: con.rhs - shift, flip: 1.0 });
    }
    let n_cons = rows.len();
    let mut bound_rows = Vec::new();
    for v in 0..n {
        if lp.hi[v].is_finite() {
            let mut coeffs = vec![0.0; n];
            coeffs[v] = 1.0;
            bound_rows.push(v);
            rows.push(Row { coeffs, rel: Relation::Le, rhs: lp.hi[v] - lp.lo[v], flip: 1.0 });
        }
    }
    for row in &mut rows {
        if row.rhs < 0.0 {
            row.rhs = -row.rhs;
            row.coeffs.iter_mut().for_each(|a| *a = -*a);
            row.flip = -1.0;
            row.rel = match row.rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    // columns: structural, then one slack/surplus per inequality, then artificials
    let n_rows = rows.len();
    let n_ineq = rows.iter().filter(|r| r.rel != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.rel != Relation::Le).count();
    let cols = n + n_ineq + n_art;
    let w = cols + 1;
    let mut kind = vec![ColKind::Structural; n];
    kind.extend(core::iter::repeat(ColKind::Slack).take(n_ineq + n_art));
    let mut a = vec![0.0; n_rows * w];
    let mut basis = vec![0; n_rows];
    // column whose tableau entries equal B^-1 e_r, for dual recovery
    let mut unit_col = vec![0; n_rows];
    let mut next_slack = n;
    let mut next_art = n + n_ineq;
    for (r, row) in rows.iter().enumerate() {
        a[r * w..r * w + n].copy_from_slice(&row.coeffs);
        a[r * w + cols] = row.rhs;
        match row.rel {
            Relation::Le => {
                a[r * w + next_slack] = 1.0;
                kind[next_slack] = ColKind::Slack;
                basis[r] = next_slack;
                unit_col[r] = next_slack;
                next_slack += 1;
            }
            Relation::Ge => {
                a[r * w + next_slack] = -1.0;
                kind[next_slack] = ColKind::Surplus;
                next_slack += 1;
                a[r * w + next_art] = 1.0;
                kind[next_art] = ColKind::Artificial;
                basis[r] = next_art;
                unit_col[r] = next_art;
                next_art += 1;
            }
            Relation::Eq => {
                a[r * w + next_art] = 1.0;
                kind[next_art] = ColKind::Artificial;
                basis[r] = next_art;
                unit_col[r] = next_art;
                next_art += 1;
            }
        }
    }
    let mut t = Tableau { rows: n_rows, cols, a, obj: vec![0.0; w], basis, kind };

    let b_scale = rows.iter().fold(1.0, |m, r| f64::max(m, math::abs(r.rhs)));
    if n_art > 0 {
        let phase1: Vec<f64> =
            t.kind.iter().map(|k| if *k == ColKind::Artificial { 1.0 } else { 0.0 }).collect();
        t.set_objective(&phase1);
        t.run(|_| true);
        let infeas = -t.obj[cols];
        if infeas > FEAS_TOL * b_scale {
            return Ok(LpOutcome::Infeasible);
        }
        // drive remaining artificials out of the basis
        for r in 0..t.rows {
            if t.kind[t.basis[r]] == ColKind::Artificial {
                let col = (0..cols).find(|&c| t.kind[c] != ColKind::Artificial && math::abs(t.at(r, c)) > PIVOT_TOL);
                if let Some(c) = col {
                    t.pivot(r, c);
                }
            }
        }
    }

    let mut costs = vec![0.0; cols];
    for v in 0..n {
        costs[v] = sign * lp.objective[v];
    }
    t.set_objective(&costs);
    let kinds = t.kind.clone();
    if !t.run(|c| kinds[c] != ColKind::Artificial) {
        return Ok(LpOutcome::Unbounded);
    }

    let mut shifted = vec![0.0; cols];
    for r in 0..t.rows {
        shifted[t.basis[r]] = t.rhs(r);
    }
    let values: Vec<f64> = (0..n)
        .map(|v| {
            let x = lp.lo[v] + f64::max(shifted[v], 0.0);
            if lp.hi[v].is_finite() { f64::min(x, lp.hi[v]) } else { x }
        })
        .collect();
    let objective: f64 = values.iter().zip(&lp.objective).map(|(x, c)| x * c).sum();

    // duals of the minimisation form: y_r = c_B B^-1 e_r = -(reduced cost of the unit column)
    let row_dual = |r: usize| -t.obj[unit_col[r]] * rows[r].flip;
    let duals: Vec<f64> = (0..n_cons).map(row_dual).collect();
    let bound_duals: Vec<(usize, f64)> =
        bound_rows.iter().enumerate().map(|(k, &v)| (v, row_dual(n_cons + k))).collect();
    let const_term: f64 = costs[..n].iter().zip(&lp.lo).map(|(c, l)| c * l).sum();
    let dual_min: f64 = (0..n_rows).map(|r| -t.obj[unit_col[r]] * rows[r].rhs).sum::<f64>() + const_term;

    let sol = LpSolution { values, objective, duals, bound_duals, dual_objective: sign * dual_min };
    lp.check_feasible(&sol.values).map_err(|e| Error::Invariant(alloc::format!("simplex returned an infeasible point: {e}")))?;
    Ok(LpOutcome::Optimal(sol))
}
