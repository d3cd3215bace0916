use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::error::{Error, Result};
use crate::lp::FEAS_TOL;
use crate::model::Instance;

/// Values within this distance of 0, 1 or an edge's upper box are snapped.
pub const SNAP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Setup,
    Transform,
    CycleBreak,
    Relax,
    RoundG2,
    RoundG1,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Setup => "setup",
            Stage::Transform => "transform",
            Stage::CycleBreak => "cycle_break",
            Stage::Relax => "relax",
            Stage::RoundG2 => "round_g2",
            Stage::RoundG1 => "round_g1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reason {
    /// Value reached 0 and the edge left the graph.
    Deleted,
    /// Value reached the box `ybar_i / gamma` and the edge moved to G2.
    Frozen,
    /// Value was already at least `ybar_i / gamma` at setup.
    Large,
    /// Zero processing time: moved to G2 with weight `ybar_i`.
    ZeroTime,
    /// Job placed integrally on the machine.
    Assigned,
    /// Edge dropped by the side split.
    Split,
    /// All G1 and G2 values doubled after a cycle edge was deleted.
    Doubled,
}

impl Reason {
    pub fn as_str(self) -> &'static str {
        match self {
            Reason::Deleted => "deleted",
            Reason::Frozen => "frozen",
            Reason::Large => "large",
            Reason::ZeroTime => "zero_time",
            Reason::Assigned => "assigned",
            Reason::Split => "split",
            Reason::Doubled => "doubled",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MigrationEvent {
    pub stage: Stage,
    pub edge: (usize, usize),
    pub old: f64,
    pub new: f64,
    pub reason: Reason,
}

/// State of the dependent rounding between the LP and the final schedule.
///
/// Keys are `(machine, job)`. `g1` holds the still-moving values `X_ij`,
/// `g2` the frozen weights `w_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkingGraphs {
    pub g1: BTreeMap<(usize, usize), f64>,
    pub g2: BTreeMap<(usize, usize), f64>,
    pub ybar: Vec<f64>,
    pub budgets: Vec<f64>,
    pub gamma: f64,
    pub assigned: BTreeMap<usize, usize>,
    pub opened: BTreeSet<usize>,
    /// Machines with `ybar_i = 0`.
    pub removed: BTreeSet<usize>,
    /// Jobs that received a zero-time bump; their totals may exceed 1.
    pub bumped: BTreeSet<usize>,
    /// Per-machine load of the LP solution the rounding started from.
    pub start_loads: Vec<f64>,
    pub events: Vec<MigrationEvent>,
    pub steps: usize,
}

impl WorkingGraphs {
    pub fn upper(&self, i: usize) -> f64 {
        self.ybar[i] / self.gamma
    }

    pub(crate) fn log(&mut self, stage: Stage, edge: (usize, usize), old: f64, new: f64, reason: Reason) {
        self.events.push(MigrationEvent { stage, edge, old, new, reason });
    }

    /// Value of an original edge in the current state: its G1 value, its G2
    /// weight, 1 if the job was placed on that machine, else 0.
    pub fn edge_value(&self, i: usize, j: usize) -> f64 {
        if let Some(v) = self.g1.get(&(i, j)) {
            return *v;
        }
        if let Some(w) = self.g2.get(&(i, j)) {
            return *w;
        }
        match self.assigned.get(&j) {
            Some(&m) if m == i => 1.0,
            _ => 0.0,
        }
    }

    /// Fractional plus integral load of machine `i`.
    pub fn load(&self, inst: &Instance, i: usize) -> f64 {
        let p = |j: usize| inst.p(i, j).unwrap_or(0.0);
        let frac: f64 = self
            .g1
            .range((i, 0)..(i + 1, 0))
            .chain(self.g2.range((i, 0)..(i + 1, 0)))
            .map(|(&(_, j), &v)| p(j) * v)
            .sum();
        let integral: f64 = self.assigned.iter().filter(|(_, &m)| m == i).map(|(&j, _)| p(j)).sum();
        frac + integral
    }

    /// Total assignment of job `j` over G1, G2 and integral placement.
    pub fn job_total(&self, j: usize) -> f64 {
        if self.assigned.contains_key(&j) {
            return 1.0;
        }
        self.g1
            .iter()
            .chain(self.g2.iter())
            .filter(|(&(_, jj), _)| jj == j)
            .map(|(_, v)| *v)
            .sum()
    }

    pub fn g1_jobs(&self) -> BTreeSet<usize> {
        self.g1.keys().map(|&(_, j)| j).collect()
    }

    pub fn g1_machines(&self) -> BTreeSet<usize> {
        self.g1.keys().map(|&(i, _)| i).collect()
    }

    /// The invariants maintained while G1 and G2 are being formed:
    /// open box for G1 values with positive times, budgeted loads, G2 weights
    /// at least `ybar / gamma`, and unit job totals.
    pub fn check_invariants(&self, inst: &Instance) -> Result<()> {
        for (&(i, j), &x) in &self.g1 {
            let p = inst.p(i, j).unwrap_or(0.0);
            if !(x > 0.0 && x < self.upper(i)) || p <= 0.0 {
                return Err(Error::Invariant(format!(
                    "G1 edge ({i}, {j}) has X = {x}, box (0, {}), p = {p}\n{}",
                    self.upper(i),
                    self.dump()
                )));
            }
        }
        for (&(i, j), &w) in &self.g2 {
            if w < self.upper(i) - SNAP_TOL || w > 1.0 + SNAP_TOL {
                return Err(Error::Invariant(format!("G2 edge ({i}, {j}) has weight {w}\n{}", self.dump())));
            }
        }
        for i in 0..self.ybar.len() {
            let t = self.budgets[i];
            let load = self.load(inst, i);
            if load > t * self.ybar[i] + FEAS_TOL * f64::max(t, 1.0) {
                return Err(Error::Invariant(format!(
                    "machine {i} load {load} exceeds {}\n{}",
                    t * self.ybar[i],
                    self.dump()
                )));
            }
        }
        for j in 0..inst.n() {
            let total = self.job_total(j);
            let low = total < 1.0 - FEAS_TOL;
            let high = total > 1.0 + FEAS_TOL && !self.bumped.contains(&j);
            if low || high {
                return Err(Error::Invariant(format!("job {j} total {total}\n{}", self.dump())));
            }
        }
        Ok(())
    }

    /// Cycle-free check on G1.
    pub fn g1_is_forest(&self) -> bool {
        let mut uf = UnionFind::new(self.ybar.len() + self.max_job() + 1);
        let m = self.ybar.len();
        self.g1.keys().all(|&(i, j)| uf.union(i, m + j))
    }

    fn max_job(&self) -> usize {
        self.g1.keys().chain(self.g2.keys()).map(|&(_, j)| j).max().unwrap_or(0)
    }

    /// Plain-text state listing for error reports.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "ybar = {:?}, gamma = {}", self.ybar, self.gamma);
        for (&(i, j), v) in &self.g1 {
            let _ = writeln!(s, "  G1 ({i}, {j}) = {v}");
        }
        for (&(i, j), v) in &self.g2 {
            let _ = writeln!(s, "  G2 ({i}, {j}) = {v}");
        }
        let _ = writeln!(s, "  assigned = {:?}", self.assigned);
        s
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, mut a: usize) -> usize {
        while self.parent[a] != a {
            self.parent[a] = self.parent[self.parent[a]];
            a = self.parent[a];
        }
        a
    }

    /// Joins the sets; false when they were already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Node of the bipartite support graph: machines sort before jobs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Node {
    M(usize),
    J(usize),
}

/// Adjacency lists of an edge set keyed by `(machine, job)`.
pub(crate) fn adjacency<'a>(edges: impl Iterator<Item = &'a (usize, usize)>) -> BTreeMap<Node, Vec<Node>> {
    let mut adj: BTreeMap<Node, Vec<Node>> = BTreeMap::new();
    for &(i, j) in edges {
        adj.entry(Node::M(i)).or_default().push(Node::J(j));
        adj.entry(Node::J(j)).or_default().push(Node::M(i));
    }
    for list in adj.values_mut() {
        list.sort_unstable();
    }
    adj
}

/// Connected components in order of their lowest node; each is sorted.
pub(crate) fn components(adj: &BTreeMap<Node, Vec<Node>>) -> Vec<Vec<Node>> {
    let mut seen: BTreeSet<Node> = BTreeSet::new();
    let mut out = Vec::new();
    for &start in adj.keys() {
        if seen.contains(&start) {
            continue;
        }
        let mut comp = vec![start];
        seen.insert(start);
        let mut k = 0;
        while k < comp.len() {
            let v = comp[k];
            for &u in &adj[&v] {
                if seen.insert(u) {
                    comp.push(u);
                }
            }
            k += 1;
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}
