//! Exact answers on small instances by exhaustive search.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{metrics, pareto_filter, Instance, ParetoPoint, Schedule};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleLimits {
    pub max_machines: usize,
    /// Bound on `m^n` (or `(m+1)^n` when drops are allowed).
    pub max_leaves: f64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self { max_machines: 12, max_leaves: 1e8 }
    }
}

impl OracleLimits {
    fn check(&self, m: usize, choices: usize, n: usize) -> Result<()> {
        if m > self.max_machines {
            return Err(Error::LimitExceeded { what: "machine count", size: m as f64, limit: self.max_machines as f64 });
        }
        let leaves = libm::pow(choices as f64, n as f64);
        if leaves > self.max_leaves {
            return Err(Error::LimitExceeded { what: "assignment space", size: leaves, limit: self.max_leaves });
        }
        Ok(())
    }
}

struct Search<'a> {
    inst: &'a Instance,
    machines: Vec<usize>,
    /// Jobs in branching order, hardest first.
    jobs: Vec<usize>,
    /// `twin[k]`: earlier position in `machines` with the same column.
    twin: Vec<Option<usize>>,
    loads: Vec<f64>,
    choice: Vec<usize>,
    best: f64,
    best_choice: Option<Vec<usize>>,
}

impl Search<'_> {
    fn dfs(&mut self, depth: usize, span: f64) {
        if depth == self.jobs.len() {
            self.best = span;
            self.best_choice = Some(self.choice.clone());
            return;
        }
        let j = self.jobs[depth];
        for k in 0..self.machines.len() {
            let Some(p) = self.inst.p(self.machines[k], j) else { continue };
            // identical empty machines are interchangeable
            if self.loads[k] == 0.0 && self.twin[k].is_some_and(|t| self.loads[t] == 0.0) {
                continue;
            }
            let load = self.loads[k] + p;
            if load >= self.best {
                continue;
            }
            self.loads[k] = load;
            self.choice[depth] = k;
            self.dfs(depth + 1, span.max(load));
            self.loads[k] -= p;
        }
    }
}

/// Smallest makespan using only `machines`, strictly below `bound`.
fn min_makespan(inst: &Instance, machines: &[usize], bound: f64) -> Option<(f64, Schedule)> {
    let n = inst.n();
    if (0..n).any(|j| machines.iter().all(|&i| inst.p(i, j).is_none())) {
        return None;
    }
    let mut jobs: Vec<usize> = (0..n).collect();
    let hardest = |j: usize| machines.iter().filter_map(|&i| inst.p(i, j)).fold(0.0, f64::max);
    jobs.sort_by(|&a, &b| hardest(b).total_cmp(&hardest(a)).then(a.cmp(&b)));
    let twin = (0..machines.len())
        .map(|k| (0..k).find(|&t| (0..n).all(|j| inst.p(machines[t], j) == inst.p(machines[k], j))))
        .collect();
    let mut s = Search {
        inst,
        machines: machines.to_vec(),
        jobs,
        twin,
        loads: vec![0.0; machines.len()],
        choice: vec![0; n],
        best: bound,
        best_choice: None,
    };
    s.dfs(0, 0.0);
    let choice = s.best_choice?;
    let mut sched = Schedule::new();
    sched.active = machines.iter().copied().collect();
    for (d, &j) in s.jobs.iter().enumerate() {
        sched.assign.insert(j, machines[choice[d]]);
    }
    Some((s.best, sched))
}

/// Every non-dominated (activation cost, makespan) pair with a witness.
/// Subsets are visited by cost, so a subset only counts when it beats the
/// makespan of everything at most as expensive.
pub fn exact_frontier(inst: &Instance, limits: OracleLimits) -> Result<Vec<ParetoPoint>> {
    let (m, n) = (inst.m(), inst.n());
    limits.check(m, m, n)?;
    let cost_of = |mask: u32| (0..m).filter(|i| mask >> i & 1 == 1).map(|i| inst.cost(i)).sum::<f64>();
    let mut masks: Vec<u32> = (1..1u32 << m).collect();
    masks.sort_by(|&a, &b| cost_of(a).total_cmp(&cost_of(b)).then(a.count_ones().cmp(&b.count_ones())).then(a.cmp(&b)));
    let mut best = f64::INFINITY;
    let mut points = Vec::new();
    if n == 0 {
        let empty = Schedule::new();
        return Ok(vec![ParetoPoint { activation_cost: 0.0, makespan: 0.0, witness: empty }]);
    }
    for mask in masks {
        let machines: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
        if let Some((span, witness)) = min_makespan(inst, &machines, best) {
            best = span;
            let met = metrics(inst, &witness)?;
            points.push(ParetoPoint { activation_cost: met.activation_cost, makespan: met.makespan, witness });
        }
    }
    Ok(pareto_filter(points))
}

/// Cheapest frontier point with makespan at most `t`.
pub fn min_cost_at(frontier: &[ParetoPoint], t: f64) -> Option<&ParetoPoint> {
    frontier.iter().filter(|p| p.makespan <= t + 1e-9).min_by(|a, b| a.activation_cost.total_cmp(&b.activation_cost))
}

/// Which costs count toward the partial-GAP objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapCost {
    Assignment,
    ActivationAndAssignment,
}

/// Least cost of scheduling jobs of total profit at least `profit_target`
/// with every load at most `t`; the rest are dropped. `None` if no choice
/// reaches the target.
pub fn exact_partial_gap(
    inst: &Instance,
    t: f64,
    profit_target: f64,
    cost: GapCost,
    limits: OracleLimits,
) -> Result<Option<(f64, Schedule)>> {
    let (m, n) = (inst.m(), inst.n());
    limits.check(m, m + 1, n)?;
    let profits: Vec<f64> = (0..n).map(|j| inst.profit(j)).collect();
    // profit still obtainable from jobs depth.. on
    let mut rest = vec![0.0; n + 1];
    for j in (0..n).rev() {
        rest[j] = rest[j + 1] + profits[j];
    }
    struct St<'a> {
        inst: &'a Instance,
        t: f64,
        target: f64,
        cost: GapCost,
        rest: Vec<f64>,
        loads: Vec<f64>,
        used: Vec<usize>,
        choice: Vec<Option<usize>>,
        best: f64,
        best_choice: Option<Vec<Option<usize>>>,
    }
    fn go(s: &mut St<'_>, j: usize, profit: f64, spent: f64) {
        if profit + s.rest[j] < s.target - 1e-9 || spent >= s.best {
            return;
        }
        if j == s.choice.len() {
            s.best = spent;
            s.best_choice = Some(s.choice.clone());
            return;
        }
        s.choice[j] = None;
        go(s, j + 1, profit, spent);
        for i in 0..s.loads.len() {
            let Some(p) = s.inst.p(i, j) else { continue };
            if s.loads[i] + p > s.t + 1e-9 {
                continue;
            }
            let mut extra = s.inst.c(i, j);
            if s.cost == GapCost::ActivationAndAssignment && s.used[i] == 0 {
                extra += s.inst.cost(i);
            }
            s.loads[i] += p;
            s.used[i] += 1;
            s.choice[j] = Some(i);
            go(s, j + 1, profit + s.inst.profit(j), spent + extra);
            s.loads[i] -= p;
            s.used[i] -= 1;
        }
        s.choice[j] = None;
    }
    let mut s = St {
        inst,
        t,
        target: profit_target,
        cost,
        rest,
        loads: vec![0.0; m],
        used: vec![0; m],
        choice: vec![None; n],
        best: f64::INFINITY,
        best_choice: None,
    };
    go(&mut s, 0, 0.0, 0.0);
    let Some(choice) = s.best_choice else { return Ok(None) };
    let mut sched = Schedule::new();
    for (j, c) in choice.into_iter().enumerate() {
        match c {
            Some(i) => sched.place(j, i),
            None => {
                sched.dropped.insert(j);
            }
        }
    }
    Ok(Some((s.best, sched)))
}

/// Cheapest set of machines that can run every job in zero time.
pub fn exact_cover(inst: &Instance) -> Result<Option<(f64, Vec<usize>)>> {
    let (m, n) = (inst.m(), inst.n());
    const MAX: usize = 20;
    if m > MAX {
        return Err(Error::LimitExceeded { what: "machine count", size: m as f64, limit: MAX as f64 });
    }
    let covers: Vec<Vec<bool>> = (0..m).map(|i| (0..n).map(|j| inst.p(i, j) == Some(0.0)).collect()).collect();
    let mut best: Option<(f64, u32)> = None;
    for mask in 0..1u32 << m {
        let ok = (0..n).all(|j| (0..m).any(|i| mask >> i & 1 == 1 && covers[i][j]));
        if !ok {
            continue;
        }
        let c: f64 = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| inst.cost(i)).sum();
        if best.map_or(true, |(b, _)| c < b) {
            best = Some((c, mask));
        }
    }
    Ok(best.map(|(c, mask)| (c, (0..m).filter(|i| mask >> i & 1 == 1).collect())))
}

/// Least activation plus assignment cost with makespan at most `t`.
pub fn exact_joint_cost(inst: &Instance, t: f64, limits: OracleLimits) -> Result<Option<(f64, Schedule)>> {
    let (m, n) = (inst.m(), inst.n());
    limits.check(m, m, n)?;
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut loads = vec![0.0; m];
    let mut used = vec![0usize; m];
    let mut choice = vec![0usize; n];
    #[allow(clippy::too_many_arguments)]
    fn go(
        inst: &Instance,
        t: f64,
        j: usize,
        spent: f64,
        loads: &mut [f64],
        used: &mut [usize],
        choice: &mut [usize],
        best: &mut Option<(f64, Vec<usize>)>,
    ) {
        if best.as_ref().is_some_and(|(b, _)| spent >= *b) {
            return;
        }
        if j == choice.len() {
            *best = Some((spent, choice.to_vec()));
            return;
        }
        for i in 0..loads.len() {
            let Some(p) = inst.p(i, j) else { continue };
            if loads[i] + p > t + 1e-9 {
                continue;
            }
            let extra = inst.c(i, j) + if used[i] == 0 { inst.cost(i) } else { 0.0 };
            loads[i] += p;
            used[i] += 1;
            choice[j] = i;
            go(inst, t, j + 1, spent + extra, loads, used, choice, best);
            loads[i] -= p;
            used[i] -= 1;
        }
    }
    go(inst, t, 0, 0.0, &mut loads, &mut used, &mut choice, &mut best);
    Ok(best.map(|(c, ch)| {
        let mut s = Schedule::new();
        for (j, i) in ch.into_iter().enumerate() {
            s.place(j, i);
        }
        (c, s)
    }))
}

/// Refuses with a size report when `inst` is beyond the frontier search.
pub fn frontier_guard(inst: &Instance, limits: OracleLimits) -> Result<()> {
    limits.check(inst.m(), inst.m(), inst.n()).map_err(|e| match e {
        Error::LimitExceeded { .. } => e,
        other => Error::Invariant(format!("{other}")),
    })
}
