use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{LinearProgram, LpOutcome, Relation, Sense, FEAS_TOL};
use crate::error::{Error, Result};
use crate::model::Instance;

/// Opening vector `y` and assignment matrix `x` of the activation LP.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalSolution {
    pub y: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub objective: f64,
    /// Per-machine makespan budgets the LP was built with.
    pub budgets: Vec<f64>,
}

impl FractionalSolution {
    /// Checks the activation-LP constraints: each job fully assigned, `x <= y`,
    /// budgeted loads, and no mass on pairs that are infeasible or too long.
    pub fn check(&self, inst: &Instance) -> Result<()> {
        let (m, n) = (inst.m(), inst.n());
        if self.y.len() != m || self.x.len() != m || self.x.iter().any(|r| r.len() != n) || self.budgets.len() != m {
            return Err(Error::Precondition("fractional solution has wrong shape".into()));
        }
        for j in 0..n {
            let s: f64 = (0..m).map(|i| self.x[i][j]).sum();
            if (s - 1.0).abs() > FEAS_TOL {
                return Err(Error::Precondition(format!("job {j} has total assignment {s}")));
            }
        }
        for i in 0..m {
            if !(-1e-9..=1.0 + 1e-9).contains(&self.y[i]) {
                return Err(Error::Precondition(format!("y[{i}] = {} outside [0, 1]", self.y[i])));
            }
            let mut load = 0.0;
            for j in 0..n {
                let x = self.x[i][j];
                if x < -1e-9 || x > self.y[i] + 1e-9 {
                    return Err(Error::Precondition(format!("x[{i}][{j}] = {x} exceeds y = {}", self.y[i])));
                }
                match inst.p_within(i, j, self.budgets[i]) {
                    Some(p) => load += p * x,
                    None if x > 1e-9 => {
                        return Err(Error::Precondition(format!("x[{i}][{j}] = {x} on a disallowed pair")));
                    }
                    None => {}
                }
            }
            let t = self.budgets[i];
            if load > t * self.y[i] + FEAS_TOL * f64::max(t, 1.0) {
                return Err(Error::Precondition(format!("machine {i} load {load} exceeds {}", t * self.y[i])));
            }
        }
        Ok(())
    }

    pub fn is_integral(&self) -> bool {
        let int = |v: f64| v.abs() <= 1e-9 || (v - 1.0).abs() <= 1e-9;
        self.y.iter().all(|v| int(*v)) && self.x.iter().flatten().all(|v| int(*v))
    }
}

/// The activation LP together with its variable map.
#[derive(Debug, Clone)]
pub struct ActivationLp {
    pub lp: LinearProgram,
    y_var: Vec<usize>,
    x_var: Vec<Vec<Option<usize>>>,
    budgets: Vec<f64>,
}

impl ActivationLp {
    /// `None` when the program is infeasible at these budgets.
    pub fn solve(&self) -> Result<Option<FractionalSolution>> {
        let sol = match self.lp.solve()? {
            LpOutcome::Optimal(s) => s,
            LpOutcome::Infeasible => return Ok(None),
            LpOutcome::Unbounded => return Err(Error::Invariant("activation LP reported unbounded".into())),
        };
        let y: Vec<f64> = self.y_var.iter().map(|&v| sol.values[v]).collect();
        let x = self
            .x_var
            .iter()
            .map(|row| row.iter().map(|v| v.map_or(0.0, |v| sol.values[v])).collect())
            .collect();
        Ok(Some(FractionalSolution { y, x, objective: sol.objective, budgets: self.budgets.clone() }))
    }

    /// Whether `x_ij` exists in the program.
    pub fn has_var(&self, i: usize, j: usize) -> bool {
        self.x_var[i][j].is_some()
    }
}

/// The activation LP with per-machine budgets `T_i`. Pairs with `p_ij > T_i`
/// or infeasible `p_ij` get no variable.
pub fn build_activation_lp(inst: &Instance, budgets: &[f64]) -> Result<ActivationLp> {
    build_activation_lp_filtered(inst, budgets, false, |_, _| true)
}

/// The activation LP with the assignment costs added to the objective and a
/// single budget `t`.
pub fn build_activation_assignment_lp(inst: &Instance, t: f64) -> Result<ActivationLp> {
    if inst.assignment_costs().is_none() {
        return Err(Error::Parameter("instance carries no assignment costs".into()));
    }
    build_activation_lp_filtered(inst, &vec![t; inst.m()], true, |_, _| true)
}

/// General form: `keep(i, j)` can veto further pairs and `with_c` adds the
/// assignment costs to the objective.
pub fn build_activation_lp_filtered(
    inst: &Instance,
    budgets: &[f64],
    with_c: bool,
    keep: impl Fn(usize, usize) -> bool,
) -> Result<ActivationLp> {
    let (m, n) = (inst.m(), inst.n());
    if budgets.len() != m {
        return Err(Error::Structural(format!("{} budgets for {m} machines", budgets.len())));
    }
    if budgets.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::Parameter("makespan budgets must be finite and nonnegative".into()));
    }
    let mut lp = LinearProgram::new(Sense::Min);
    let mut y_var = Vec::with_capacity(m);
    for i in 0..m {
        y_var.push(lp.add_var(format!("y{i}"), inst.cost(i), 0.0, 1.0)?);
    }
    let mut x_var = vec![vec![None; n]; m];
    for i in 0..m {
        for j in 0..n {
            if inst.p_within(i, j, budgets[i]).is_some() && keep(i, j) {
                let c = if with_c { inst.c(i, j) } else { 0.0 };
                x_var[i][j] = Some(lp.add_var(format!("x{i}_{j}"), c, 0.0, 1.0)?);
            }
        }
    }
    for j in 0..n {
        let row = (0..m).filter_map(|i| x_var[i][j].map(|v| (v, 1.0))).collect();
        lp.add_constraint(row, Relation::Eq, 1.0)?;
    }
    for i in 0..m {
        for j in 0..n {
            if let Some(v) = x_var[i][j] {
                lp.add_constraint(vec![(v, 1.0), (y_var[i], -1.0)], Relation::Le, 0.0)?;
            }
        }
    }
    for i in 0..m {
        let mut row: Vec<(usize, f64)> = (0..n)
            .filter_map(|j| x_var[i][j].map(|v| (v, inst.p(i, j).unwrap_or(0.0))))
            .filter(|(_, p)| *p != 0.0)
            .collect();
        row.push((y_var[i], -budgets[i]));
        lp.add_constraint(row, Relation::Le, 0.0)?;
    }
    Ok(ActivationLp { lp, y_var, x_var, budgets: budgets.to_vec() })
}

/// Fractional-coverage LP for a machine set `s` at makespan `t`.
#[derive(Debug, Clone)]
pub struct CoverageLp {
    pub lp: LinearProgram,
    x_var: Vec<Vec<Option<usize>>>,
}

impl CoverageLp {
    /// Optimal coverage value and the maximising `x` (`m x n`).
    pub fn solve(&self) -> Result<(f64, Vec<Vec<f64>>)> {
        let sol = match self.lp.solve()? {
            LpOutcome::Optimal(s) => s,
            other => return Err(Error::Invariant(format!("coverage LP not optimal: {other:?}"))),
        };
        let x = self
            .x_var
            .iter()
            .map(|row| row.iter().map(|v| v.map_or(0.0, |v| sol.values[v])).collect())
            .collect();
        Ok((sol.objective, x))
    }
}

pub fn build_coverage_lp(inst: &Instance, s: &BTreeSet<usize>, t: f64) -> Result<CoverageLp> {
    let (m, n) = (inst.m(), inst.n());
    if let Some(i) = s.iter().find(|&&i| i >= m) {
        return Err(Error::Structural(format!("machine {i} out of range")));
    }
    let mut lp = LinearProgram::new(Sense::Max);
    let mut x_var = vec![vec![None; n]; m];
    for &i in s {
        for j in 0..n {
            if inst.p_within(i, j, t).is_some() {
                x_var[i][j] = Some(lp.add_var(format!("x{i}_{j}"), 1.0, 0.0, 1.0)?);
            }
        }
    }
    for j in 0..n {
        let row: Vec<(usize, f64)> = (0..m).filter_map(|i| x_var[i][j].map(|v| (v, 1.0))).collect();
        if row.len() > 1 {
            lp.add_constraint(row, Relation::Le, 1.0)?;
        }
    }
    for &i in s {
        let row: Vec<(usize, f64)> = (0..n)
            .filter_map(|j| x_var[i][j].map(|v| (v, inst.p(i, j).unwrap_or(0.0))))
            .filter(|(_, p)| *p != 0.0)
            .collect();
        if !row.is_empty() {
            lp.add_constraint(row, Relation::Le, t)?;
        }
    }
    Ok(CoverageLp { lp, x_var })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartialGapSolution {
    /// Extent to which each job is scheduled.
    pub y: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub objective: f64,
}

#[derive(Debug, Clone)]
pub struct PartialGapLp {
    pub lp: LinearProgram,
    y_var: Vec<usize>,
    x_var: Vec<Vec<Option<usize>>>,
}

impl PartialGapLp {
    pub fn solve(&self) -> Result<Option<PartialGapSolution>> {
        let sol = match self.lp.solve()? {
            LpOutcome::Optimal(s) => s,
            LpOutcome::Infeasible => return Ok(None),
            LpOutcome::Unbounded => return Err(Error::Invariant("partial GAP LP reported unbounded".into())),
        };
        let y = self.y_var.iter().map(|&v| sol.values[v]).collect();
        let x = self
            .x_var
            .iter()
            .map(|row| row.iter().map(|v| v.map_or(0.0, |v| sol.values[v])).collect())
            .collect();
        Ok(Some(PartialGapSolution { y, x, objective: sol.objective }))
    }
}

/// Profit-constrained assignment LP. With a cost budget the program is a
/// pure feasibility problem; without one it minimises assignment cost.
pub fn build_partial_gap_lp(inst: &Instance, t: f64, profit_target: f64, cost_budget: Option<f64>) -> Result<PartialGapLp> {
    let profits = inst
        .profits()
        .ok_or_else(|| Error::Parameter("instance carries no profits".into()))?
        .to_vec();
    if inst.assignment_costs().is_none() {
        return Err(Error::Parameter("instance carries no assignment costs".into()));
    }
    let (m, n) = (inst.m(), inst.n());
    let minimise = cost_budget.is_none();
    let mut lp = LinearProgram::new(Sense::Min);
    let y_var: Vec<usize> = (0..n).map(|j| lp.add_var(format!("z{j}"), 0.0, 0.0, 1.0)).collect::<Result<_>>()?;
    let mut x_var = vec![vec![None; n]; m];
    for i in 0..m {
        for j in 0..n {
            if inst.p_within(i, j, t).is_some() {
                let c = if minimise { inst.c(i, j) } else { 0.0 };
                x_var[i][j] = Some(lp.add_var(format!("x{i}_{j}"), c, 0.0, 1.0)?);
            }
        }
    }
    lp.add_constraint(y_var.iter().zip(&profits).map(|(&v, &p)| (v, p)).collect(), Relation::Ge, profit_target)?;
    for j in 0..n {
        let mut row: Vec<(usize, f64)> = (0..m).filter_map(|i| x_var[i][j].map(|v| (v, 1.0))).collect();
        row.push((y_var[j], -1.0));
        lp.add_constraint(row, Relation::Eq, 0.0)?;
    }
    if let Some(budget) = cost_budget {
        let row = (0..m)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter_map(|(i, j)| x_var[i][j].map(|v| (v, inst.c(i, j))))
            .collect();
        lp.add_constraint(row, Relation::Le, budget)?;
    }
    for i in 0..m {
        let row: Vec<(usize, f64)> = (0..n)
            .filter_map(|j| x_var[i][j].map(|v| (v, inst.p(i, j).unwrap_or(0.0))))
            .filter(|(_, p)| *p != 0.0)
            .collect();
        if !row.is_empty() {
            lp.add_constraint(row, Relation::Le, t)?;
        }
    }
    Ok(PartialGapLp { lp, y_var, x_var })
}
