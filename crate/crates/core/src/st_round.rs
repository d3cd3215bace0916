//! Machine-copy rounding of fractional assignments and dependent rounding on
//! bipartite graphs.
//!
//! Each machine's fractional jobs are laid out by non-increasing processing
//! time and cut into unit-weight copies. Any matching of jobs into copies
//! then loads a machine by at most its fractional load plus one job.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::error::{Error, Result};
use crate::linalg::{max_bipartite_matching_ordered, BipartiteGraph};
use crate::lp::{build_partial_gap_lp, PartialGapSolution, FEAS_TOL};
use crate::math;
use crate::model::{metrics, BoundCheck, Instance, Schedule};
use crate::rng::{self, SeededRng};

/// Weights at or below this are treated as absent.
const WEIGHT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CopyEdge {
    pub machine: usize,
    /// Zero-based copy number on the machine.
    pub copy: usize,
    pub job: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CopyGraph {
    /// Copies per machine.
    pub copies: Vec<usize>,
    /// Edges grouped by machine, then copy, then job order on the machine.
    pub edges: Vec<CopyEdge>,
    /// Per machine, its fractional jobs in the slicing order.
    pub order: Vec<Vec<usize>>,
    n: usize,
}

impl CopyGraph {
    pub fn copy_weight(&self, machine: usize, copy: usize) -> f64 {
        self.edges.iter().filter(|e| e.machine == machine && e.copy == copy).map(|e| e.weight).sum()
    }

    pub fn job_weight(&self, job: usize) -> f64 {
        self.edges.iter().filter(|e| e.job == job).map(|e| e.weight).sum()
    }

    /// Flat index of a copy: copies of machine 0 first.
    pub fn copy_index(&self, machine: usize, copy: usize) -> usize {
        self.copies[..machine].iter().sum::<usize>() + copy
    }

    /// Inverse of [`CopyGraph::copy_index`].
    pub fn copy_at(&self, mut flat: usize) -> (usize, usize) {
        for (i, &c) in self.copies.iter().enumerate() {
            if flat < c {
                return (i, flat);
            }
            flat -= c;
        }
        panic!("copy index out of range")
    }

    pub fn total_copies(&self) -> usize {
        self.copies.iter().sum()
    }

    /// Jobs on the left, copies on the right; a job split over two copies
    /// of one machine gets two edges.
    pub fn bipartite(&self) -> Result<BipartiteGraph> {
        let edges = self.edges.iter().map(|e| (e.job, self.copy_index(e.machine, e.copy), Some(e.weight))).collect();
        BipartiteGraph::new(self.n, self.total_copies(), edges)
    }

    pub fn dump(&self) -> String {
        let mut s = String::new();
        for e in &self.edges {
            let _ = writeln!(s, "  machine {} copy {} job {} weight {}", e.machine, e.copy, e.job, e.weight);
        }
        s
    }
}

/// Slices every machine's row of `x` into unit copies. Ties in processing
/// time keep job order.
pub fn build_copy_graph(x: &[Vec<f64>], inst: &Instance) -> Result<CopyGraph> {
    let (m, n) = (inst.m(), inst.n());
    if x.len() != m || x.iter().any(|r| r.len() != n) {
        return Err(Error::Structural("assignment matrix has wrong shape".into()));
    }
    if x.iter().flatten().any(|v| !(-1e-9..=1.0 + 1e-9).contains(v)) {
        return Err(Error::Precondition("assignment values must lie in [0, 1]".into()));
    }
    let mut copies = vec![0; m];
    let mut edges = Vec::new();
    let mut order = vec![Vec::new(); m];
    for i in 0..m {
        let mut jobs: Vec<usize> = (0..n).filter(|&j| x[i][j] > WEIGHT_TOL).collect();
        let p = |j: usize| inst.p(i, j).unwrap_or(0.0);
        jobs.sort_by(|&a, &b| p(b).total_cmp(&p(a)).then(a.cmp(&b)));
        let z: f64 = jobs.iter().map(|&j| x[i][j]).sum();
        let count = math::ceil(z - 1e-9).max(0.0) as usize;
        copies[i] = count;
        let mut start = 0.0;
        for &j in &jobs {
            let end = start + x[i][j];
            let mut s = math::floor(start) as usize;
            while (s as f64) < end - WEIGHT_TOL {
                let lo = f64::max(start, s as f64);
                let hi = f64::min(end, (s + 1) as f64);
                let w = hi - lo;
                if w > WEIGHT_TOL {
                    let copy = s.min(count.saturating_sub(1));
                    match edges.last_mut() {
                        Some(CopyEdge { machine, copy: c, job, weight }) if *machine == i && *c == copy && *job == j => {
                            *weight += w
                        }
                        _ => edges.push(CopyEdge { machine: i, copy, job: j, weight: w }),
                    }
                }
                s += 1;
            }
            start = end;
        }
        order[i] = jobs;
    }
    Ok(CopyGraph { copies, edges, order, n })
}

/// An integral matching of jobs to machine copies.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RoundedMatching {
    /// job -> (machine, copy)
    pub assignment: BTreeMap<usize, (usize, usize)>,
}

impl RoundedMatching {
    pub fn schedule(&self) -> Schedule {
        let mut s = Schedule::new();
        for (&j, &(i, _)) in &self.assignment {
            s.place(j, i);
        }
        s
    }
}

/// Checks that every machine of `sched` carries at most `t` plus its
/// largest assigned job.
pub fn check_copy_load(inst: &Instance, sched: &Schedule, t: f64) -> Result<()> {
    let loads = sched.loads(inst)?;
    for (i, jobs) in sched.jobs_by_machine(inst.m()).iter().enumerate() {
        let pmax = math::max_or_zero(jobs.iter().map(|&j| inst.p(i, j).unwrap_or(0.0)));
        if loads[i] > t + pmax + 1e-6 * f64::max(1.0, t) {
            return Err(Error::Invariant(format!("machine {i} load {} exceeds {t} + {pmax}", loads[i])));
        }
    }
    Ok(())
}

/// Rounds a fractional assignment with per-job totals at most 1 and loads at
/// most `t` to an integral matching in the copy graph. Jobs that are fully
/// assigned fractionally are matched first and must all be matched.
pub fn st_round(x: &[Vec<f64>], inst: &Instance, t: f64) -> Result<RoundedMatching> {
    let (m, n) = (inst.m(), inst.n());
    let cg = build_copy_graph(x, inst)?;
    let totals: Vec<f64> = (0..n).map(|j| (0..m).map(|i| x[i][j]).sum()).collect();
    if let Some(j) = (0..n).find(|&j| totals[j] > 1.0 + FEAS_TOL) {
        return Err(Error::Precondition(format!("job {j} has total {}", totals[j])));
    }
    for i in 0..m {
        let mut load = 0.0;
        for j in 0..n {
            if x[i][j] > WEIGHT_TOL {
                let p = inst
                    .p_within(i, j, t)
                    .ok_or_else(|| Error::Precondition(format!("x[{i}][{j}] > 0 on a pair longer than {t}")))?;
                load += p * x[i][j];
            }
        }
        if load > t + FEAS_TOL * f64::max(1.0, t) {
            return Err(Error::Precondition(format!("machine {i} fractional load {load} exceeds {t}")));
        }
    }
    let g = cg.bipartite()?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| totals[b].total_cmp(&totals[a]).then(a.cmp(&b)));
    let matched = max_bipartite_matching_ordered(&g, &order);
    let mut out = RoundedMatching::default();
    for j in 0..n {
        match matched[j] {
            Some(r) => {
                out.assignment.insert(j, cg.copy_at(r));
            }
            None if totals[j] > 1.0 - FEAS_TOL => {
                return Err(Error::Invariant(format!(
                    "job {j} is fully assigned but unmatched\ncopy graph:\n{}",
                    cg.dump()
                )));
            }
            None => {}
        }
    }
    check_copy_load(inst, &out.schedule(), t)?;
    Ok(out)
}

/// Dependent rounding of the edge values of `g` (all must be present and in
/// `[0, 1]`). Every edge keeps its marginal, and every vertex ends with
/// degree equal to the floor or ceiling of its fractional degree.
pub fn dependent_round(g: &BipartiteGraph, seed: u64) -> Result<Vec<bool>> {
    let mut rng = rng::from_seed(seed);
    let mut x: Vec<f64> = Vec::with_capacity(g.edges().len());
    for &(l, r, v) in g.edges() {
        let v = v.ok_or_else(|| Error::Parameter(format!("edge ({l}, {r}) has no value")))?;
        if !(-1e-9..=1.0 + 1e-9).contains(&v) {
            return Err(Error::Parameter(format!("edge ({l}, {r}) value {v} outside [0, 1]")));
        }
        x.push(v.clamp(0.0, 1.0));
    }
    snap(&mut x);
    // vertices: left l -> l, right r -> left_count + r
    let nl = g.left_count();
    let nodes = nl + g.right_count();
    let ends: Vec<(usize, usize)> = g.edges().iter().map(|&(l, r, _)| (l, nl + r)).collect();
    loop {
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes];
        for (e, &(a, b)) in ends.iter().enumerate() {
            if is_frac(x[e]) {
                adj[a].push(e);
                adj[b].push(e);
            }
        }
        let Some(start) = (0..nodes).find(|&v| adj[v].len() == 1).or_else(|| (0..nodes).find(|&v| !adj[v].is_empty()))
        else {
            break;
        };
        let walk = find_walk(start, &adj, &ends);
        step(&mut x, &walk, &mut rng);
    }
    Ok(x.iter().map(|v| *v >= 0.5).collect())
}

fn is_frac(v: f64) -> bool {
    v > 0.0 && v < 1.0
}

fn snap(x: &mut [f64]) {
    for v in x.iter_mut() {
        if *v < 1e-9 {
            *v = 0.0;
        } else if *v > 1.0 - 1e-9 {
            *v = 1.0;
        }
    }
}

/// Walks from `start` along unused fractional edges until it either closes
/// a cycle (returned alone) or gets stuck (a maximal path).
fn find_walk(start: usize, adj: &[Vec<usize>], ends: &[(usize, usize)]) -> Vec<usize> {
    let mut path_nodes = vec![start];
    let mut path_edges: Vec<usize> = Vec::new();
    let mut pos: BTreeMap<usize, usize> = BTreeMap::from([(start, 0)]);
    let mut cur = start;
    loop {
        let came = path_edges.last().copied();
        let next = adj[cur].iter().copied().filter(|&e| Some(e) != came).min();
        let Some(e) = next else { return path_edges };
        let (a, b) = ends[e];
        let other = if a == cur { b } else { a };
        path_edges.push(e);
        if let Some(&k) = pos.get(&other) {
            return path_edges.split_off(k);
        }
        pos.insert(other, path_nodes.len());
        path_nodes.push(other);
        cur = other;
    }
}

/// Alternating `+/-` move along `walk` to the first boundary, picking the
/// direction so that every edge keeps its expectation.
fn step(x: &mut [f64], walk: &[usize], rng: &mut SeededRng) {
    let sign = |k: usize| if k % 2 == 0 { 1.0 } else { -1.0 };
    let mut alpha = f64::INFINITY;
    let mut beta = f64::INFINITY;
    for (k, &e) in walk.iter().enumerate() {
        if sign(k) > 0.0 {
            alpha = alpha.min(1.0 - x[e]);
            beta = beta.min(x[e]);
        } else {
            alpha = alpha.min(x[e]);
            beta = beta.min(1.0 - x[e]);
        }
    }
    let t = if rng::bernoulli(rng, beta / (alpha + beta)) { alpha } else { -beta };
    for (k, &e) in walk.iter().enumerate() {
        x[e] += sign(k) * t;
    }
    snap(x);
    // the binding coordinates must land exactly on a bound
    let hit = walk.iter().any(|&e| !is_frac(x[e]));
    if !hit {
        let (k, _) = walk
            .iter()
            .enumerate()
            .map(|(k, &e)| (k, f64::min(x[e], 1.0 - x[e])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let e = walk[k];
        x[e] = if x[e] < 0.5 { 0.0 } else { 1.0 };
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PartialGapOptions {
    /// With equal profits, convert the fractional matching directly by a
    /// minimum-cost matching of the needed size instead of rounding randomly.
    pub deterministic_equal_profit: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartialGapOutcome {
    pub schedule: Schedule,
    pub lp: PartialGapSolution,
    pub checks: Vec<BoundCheck>,
}

/// Schedules jobs of total expected profit at least `profit_target` with
/// expected assignment cost at most `cost_budget` and makespan at most `2t`.
pub fn partial_gap(inst: &Instance, t: f64, profit_target: f64, cost_budget: f64, seed: u64) -> Result<PartialGapOutcome> {
    partial_gap_with(inst, t, profit_target, cost_budget, seed, PartialGapOptions::default())
}

pub fn partial_gap_with(
    inst: &Instance,
    t: f64,
    profit_target: f64,
    cost_budget: f64,
    seed: u64,
    opts: PartialGapOptions,
) -> Result<PartialGapOutcome> {
    let lp = build_partial_gap_lp(inst, t, profit_target, Some(cost_budget))?.solve()?.ok_or(Error::Infeasible)?;
    let cg = build_copy_graph(&lp.x, inst)?;
    let g = cg.bipartite()?;
    let profits = inst.profits().unwrap_or(&[]);
    let equal = profits.windows(2).all(|w| w[0] == w[1]);
    let chosen: Vec<bool> = if opts.deterministic_equal_profit && equal && !profits.is_empty() {
        let unit = profits[0];
        let need = if unit > 0.0 { math::ceil(profit_target / unit - 1e-9).max(0.0) as usize } else { 0 };
        let costs: Vec<f64> = cg.edges.iter().map(|e| inst.c(e.machine, e.job)).collect();
        min_cost_matching(&g, &costs, need)?
    } else {
        dependent_round(&g, seed)?
    };
    let mut sched = Schedule::new();
    for (k, e) in cg.edges.iter().enumerate() {
        if chosen[k] {
            if sched.assign.contains_key(&e.job) {
                return Err(Error::Invariant(format!("job {} matched twice", e.job)));
            }
            sched.place(e.job, e.machine);
        }
    }
    sched.dropped = (0..inst.n()).filter(|j| !sched.assign.contains_key(j)).collect();
    sched.validate(inst)?;
    check_copy_load(inst, &sched, t)?;
    let met = metrics(inst, &sched)?;
    let checks = vec![BoundCheck::at_most("makespan", 2.0 * t, met.makespan, 1e-6)];
    Ok(PartialGapOutcome { schedule: sched, lp, checks })
}

/// Minimum-cost matching with exactly `k` edges by successive shortest
/// augmenting paths (Bellman-Ford on the residual graph).
pub fn min_cost_matching(g: &BipartiteGraph, costs: &[f64], k: usize) -> Result<Vec<bool>> {
    let nl = g.left_count();
    let edges = g.edges();
    let mut used = vec![false; edges.len()];
    let mut left_free = vec![true; nl];
    let mut right_free = vec![true; g.right_count()];
    for _ in 0..k {
        // node ids: left l, right nl + r; distances from free left vertices
        let nodes = nl + g.right_count();
        let mut dist = vec![f64::INFINITY; nodes];
        let mut via: Vec<Option<usize>> = vec![None; nodes];
        for l in 0..nl {
            if left_free[l] {
                dist[l] = 0.0;
            }
        }
        for _ in 0..nodes {
            let mut changed = false;
            for (e, &(l, r, _)) in edges.iter().enumerate() {
                let rn = nl + r;
                if !used[e] && dist[l] + costs[e] < dist[rn] - 1e-12 {
                    dist[rn] = dist[l] + costs[e];
                    via[rn] = Some(e);
                    changed = true;
                }
                if used[e] && dist[rn] - costs[e] < dist[l] - 1e-12 {
                    dist[l] = dist[rn] - costs[e];
                    via[l] = Some(e);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let target = (0..g.right_count())
            .filter(|&r| right_free[r] && dist[nl + r].is_finite())
            .min_by(|&a, &b| dist[nl + a].total_cmp(&dist[nl + b]).then(a.cmp(&b)))
            .ok_or(Error::Infeasible)?;
        right_free[target] = false;
        let mut node = nl + target;
        let mut hops = 0;
        while let Some(e) = via[node] {
            hops += 1;
            if hops > edges.len() + 1 {
                return Err(Error::Invariant("cycle in matching residual graph".into()));
            }
            let (l, r, _) = edges[e];
            if node == nl + r {
                used[e] = true;
                node = l;
            } else {
                used[e] = false;
                node = nl + r;
            }
        }
        left_free[node] = false;
    }
    Ok(used)
}
