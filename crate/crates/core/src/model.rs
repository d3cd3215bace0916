//! Instances, schedules, metrics and instance generators.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::math;
use crate::rng;

/// Relative tolerance used when checking the related-machines invariant
/// `p_ij = p_j / s_i`.
pub const SPEED_REL_TOL: f64 = 1e-9;

/// A machine-activation instance. Immutable after construction.
///
/// `p[i][j] == None` marks job `j` as unable to run on machine `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    costs: Vec<f64>,
    p: Vec<Vec<Option<f64>>>,
    assign_costs: Option<Vec<Vec<f64>>>,
    profits: Option<Vec<f64>>,
    release: Option<Vec<Vec<f64>>>,
    speeds: Option<Vec<f64>>,
}

fn check_matrix(name: &str, mat: &[Vec<f64>], m: usize, n: usize) -> Result<()> {
    if mat.len() != m || mat.iter().any(|row| row.len() != n) {
        return Err(Error::Structural(format!("{name} must be {m}x{n}")));
    }
    if mat.iter().flatten().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Parameter(format!("{name} entries must be finite and nonnegative")));
    }
    Ok(())
}

impl Instance {
    /// Builds an instance from activation costs and the `m x n` processing
    /// time matrix.
    pub fn new(costs: Vec<f64>, p: Vec<Vec<Option<f64>>>) -> Result<Self> {
        let m = costs.len();
        if p.len() != m {
            return Err(Error::Structural(format!(
                "processing-time matrix has {} rows for {m} machines",
                p.len()
            )));
        }
        let n = p.first().map_or(0, Vec::len);
        if p.iter().any(|row| row.len() != n) {
            return Err(Error::Structural("processing-time rows differ in length".into()));
        }
        if let Some(i) = costs.iter().position(|a| !a.is_finite() || *a < 0.0) {
            return Err(Error::Parameter(format!("activation cost of machine {i} must be >= 0")));
        }
        for (i, row) in p.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if let Some(v) = v {
                    if !v.is_finite() || *v < 0.0 {
                        return Err(Error::Parameter(format!("p[{i}][{j}] = {v} is not a valid time")));
                    }
                }
            }
        }
        for j in 0..n {
            if (0..m).all(|i| p[i][j].is_none()) {
                return Err(Error::Parameter(format!("job {j} cannot run on any machine")));
            }
        }
        Ok(Self { costs, p, assign_costs: None, profits: None, release: None, speeds: None })
    }

    pub fn with_assignment_costs(mut self, c: Vec<Vec<f64>>) -> Result<Self> {
        check_matrix("assignment-cost matrix", &c, self.m(), self.n())?;
        self.assign_costs = Some(c);
        Ok(self)
    }

    pub fn with_profits(mut self, profits: Vec<f64>) -> Result<Self> {
        if profits.len() != self.n() {
            return Err(Error::Structural(format!("{} profits for {} jobs", profits.len(), self.n())));
        }
        if profits.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Parameter("profits must be finite and nonnegative".into()));
        }
        self.profits = Some(profits);
        Ok(self)
    }

    pub fn with_release_times(mut self, r: Vec<Vec<f64>>) -> Result<Self> {
        check_matrix("release-time matrix", &r, self.m(), self.n())?;
        self.release = Some(r);
        Ok(self)
    }

    /// Attaches machine speeds and checks that the processing times are of
    /// the related form `p_ij = p_j / s_i`.
    pub fn with_speeds(mut self, speeds: Vec<f64>) -> Result<Self> {
        if speeds.len() != self.m() {
            return Err(Error::Structural(format!("{} speeds for {} machines", speeds.len(), self.m())));
        }
        if speeds.iter().any(|s| !s.is_finite() || *s <= 0.0) {
            return Err(Error::Parameter("speeds must be positive".into()));
        }
        for j in 0..self.n() {
            let mut size = None;
            for (i, s) in speeds.iter().enumerate() {
                let pij = self.p[i][j].ok_or_else(|| {
                    Error::Parameter(format!("related instance has infeasible pair ({i}, {j})"))
                })?;
                let pj = pij * s;
                match size {
                    None => size = Some(pj),
                    Some(p0) => {
                        if math::abs(pj - p0) > SPEED_REL_TOL * f64::max(1.0, math::abs(p0)) {
                            return Err(Error::Parameter(format!(
                                "job {j}: p_ij * s_i differs across machines ({p0} vs {pj})"
                            )));
                        }
                    }
                }
            }
        }
        self.speeds = Some(speeds);
        Ok(self)
    }

    /// Machine count.
    pub fn m(&self) -> usize {
        self.costs.len()
    }

    /// Job count.
    pub fn n(&self) -> usize {
        self.p.first().map_or(0, Vec::len)
    }

    pub fn cost(&self, i: usize) -> f64 {
        self.costs[i]
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn p(&self, i: usize, j: usize) -> Option<f64> {
        self.p[i][j]
    }

    pub fn p_matrix(&self) -> &[Vec<Option<f64>>] {
        &self.p
    }

    /// `p_ij` when the pair is feasible and fits within `budget`.
    pub fn p_within(&self, i: usize, j: usize, budget: f64) -> Option<f64> {
        self.p[i][j].filter(|v| *v <= budget)
    }

    pub fn assignment_costs(&self) -> Option<&[Vec<f64>]> {
        self.assign_costs.as_deref()
    }

    /// `c_ij`, or zero when the instance carries no assignment costs.
    pub fn c(&self, i: usize, j: usize) -> f64 {
        self.assign_costs.as_ref().map_or(0.0, |c| c[i][j])
    }

    pub fn profits(&self) -> Option<&[f64]> {
        self.profits.as_deref()
    }

    pub fn profit(&self, j: usize) -> f64 {
        self.profits.as_ref().map_or(0.0, |p| p[j])
    }

    pub fn release_times(&self) -> Option<&[Vec<f64>]> {
        self.release.as_deref()
    }

    pub fn release(&self, i: usize, j: usize) -> f64 {
        self.release.as_ref().map_or(0.0, |r| r[i][j])
    }

    pub fn speeds(&self) -> Option<&[f64]> {
        self.speeds.as_deref()
    }

    pub fn is_related(&self) -> bool {
        self.speeds.is_some()
    }

    /// Per-job processing requirement `p_j` in related mode.
    pub fn job_sizes(&self) -> Option<Vec<f64>> {
        let s = self.speeds.as_ref()?;
        Some((0..self.n()).map(|j| self.p[0][j].unwrap_or(0.0) * s[0]).collect())
    }

    /// `max_j min_i p_ij`: no schedule beats this makespan.
    pub fn makespan_lower_bound(&self) -> f64 {
        (0..self.n()).map(|j| self.min_time(j)).fold(0.0, f64::max)
    }

    /// `sum_j min_i p_ij`: every job on its fastest machine achieves this.
    pub fn makespan_upper_bound(&self) -> f64 {
        (0..self.n()).map(|j| self.min_time(j)).sum()
    }

    fn min_time(&self, j: usize) -> f64 {
        (0..self.m()).filter_map(|i| self.p[i][j]).fold(f64::INFINITY, f64::min)
    }

    /// A copy with one extra machine appended.
    pub(crate) fn with_extra_machine(
        &self,
        cost: f64,
        p_row: Vec<Option<f64>>,
        c_row: Option<Vec<f64>>,
    ) -> Instance {
        let mut out = self.clone();
        out.costs.push(cost);
        out.p.push(p_row);
        if let Some(c) = out.assign_costs.as_mut() {
            c.push(c_row.unwrap_or_else(|| vec![0.0; self.n()]));
        }
        if let Some(r) = out.release.as_mut() {
            r.push(vec![0.0; self.n()]);
        }
        out.speeds = None;
        out
    }
}

/// A (possibly partial) schedule: the activated machines, a job-to-machine
/// map and the jobs that were dropped.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Schedule {
    pub active: BTreeSet<usize>,
    pub assign: BTreeMap<usize, usize>,
    pub dropped: BTreeSet<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleMetrics {
    pub makespan: f64,
    pub activation_cost: f64,
    pub assignment_cost: f64,
    pub profit: f64,
}

impl Schedule {
    pub fn new() -> Self {
        Self::default()
    }

    /// Assigns `job` to `machine` and activates the machine.
    pub fn place(&mut self, job: usize, machine: usize) {
        self.active.insert(machine);
        self.assign.insert(job, machine);
    }

    /// Checks the partition and activity invariants against `inst`.
    pub fn validate(&self, inst: &Instance) -> Result<()> {
        self.check_indices(inst)?;
        for (&j, &i) in &self.assign {
            if !self.active.contains(&i) {
                return Err(Error::Structural(format!("job {j} assigned to inactive machine {i}")));
            }
            if self.dropped.contains(&j) {
                return Err(Error::Structural(format!("job {j} both assigned and dropped")));
            }
        }
        for j in 0..inst.n() {
            if !self.assign.contains_key(&j) && !self.dropped.contains(&j) {
                return Err(Error::Structural(format!("job {j} neither assigned nor dropped")));
            }
        }
        Ok(())
    }

    fn check_indices(&self, inst: &Instance) -> Result<()> {
        if let Some(i) = self.active.iter().find(|&&i| i >= inst.m()) {
            return Err(Error::Structural(format!("machine {i} out of range")));
        }
        for (&j, &i) in &self.assign {
            if j >= inst.n() || i >= inst.m() {
                return Err(Error::Structural(format!("assignment {j} -> {i} out of range")));
            }
            if inst.p(i, j).is_none() {
                return Err(Error::Structural(format!("job {j} cannot run on machine {i}")));
            }
        }
        if let Some(j) = self.dropped.iter().find(|&&j| j >= inst.n()) {
            return Err(Error::Structural(format!("dropped job {j} out of range")));
        }
        Ok(())
    }

    /// Load per machine (length `m`); unassigned machines carry zero.
    pub fn loads(&self, inst: &Instance) -> Result<Vec<f64>> {
        self.check_indices(inst)?;
        let mut loads = vec![0.0; inst.m()];
        for (&j, &i) in &self.assign {
            loads[i] += inst.p(i, j).unwrap_or(0.0);
        }
        Ok(loads)
    }

    /// Jobs assigned to each machine, in increasing job order.
    pub fn jobs_by_machine(&self, m: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); m];
        for (&j, &i) in &self.assign {
            if i < m {
                out[i].push(j);
            }
        }
        out
    }
}

/// Makespan, activation cost, assignment cost and profit of `sched`.
pub fn metrics(inst: &Instance, sched: &Schedule) -> Result<ScheduleMetrics> {
    let loads = sched.loads(inst)?;
    let makespan = sched.active.iter().map(|&i| loads[i]).fold(0.0, f64::max);
    let activation_cost = sched.active.iter().map(|&i| inst.cost(i)).sum();
    let assignment_cost = sched.assign.iter().map(|(&j, &i)| inst.c(i, j)).sum();
    let profit = sched.assign.keys().map(|&j| inst.profit(j)).sum();
    Ok(ScheduleMetrics { makespan, activation_cost, assignment_cost, profit })
}

/// One point of an (activation cost, makespan) trade-off with a schedule
/// that attains it.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoPoint {
    pub activation_cost: f64,
    pub makespan: f64,
    pub witness: Schedule,
}

impl ParetoPoint {
    pub fn dominates(&self, other: &ParetoPoint) -> bool {
        self.activation_cost <= other.activation_cost
            && self.makespan <= other.makespan
            && (self.activation_cost < other.activation_cost || self.makespan < other.makespan)
    }
}

/// Keeps the non-dominated points, sorted by increasing cost. Of several
/// identical points the first one survives.
pub fn pareto_filter(mut points: Vec<ParetoPoint>) -> Vec<ParetoPoint> {
    // stable sort keeps the earliest of identical points first
    points.sort_by(|a, b| {
        a.activation_cost
            .total_cmp(&b.activation_cost)
            .then(a.makespan.total_cmp(&b.makespan))
    });
    let mut out: Vec<ParetoPoint> = Vec::new();
    for pt in points {
        match out.last() {
            Some(last) if pt.makespan >= last.makespan => {}
            _ => out.push(pt),
        }
    }
    out
}

/// One asserted guarantee of an algorithm run: the claimed upper (or lower)
/// limit, what was observed, and whether it held.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub name: String,
    pub claimed: f64,
    pub observed: f64,
    pub pass: bool,
}

impl BoundCheck {
    /// `observed <= claimed + tol`.
    pub fn at_most(name: &str, claimed: f64, observed: f64, tol: f64) -> Self {
        // `+ 0.0` turns a negative zero into zero so reports never print `-0.0`.
        Self { name: name.into(), claimed: claimed + 0.0, observed: observed + 0.0, pass: observed <= claimed + tol }
    }

    /// `observed >= claimed - tol`.
    pub fn at_least(name: &str, claimed: f64, observed: f64, tol: f64) -> Self {
        Self { name: name.into(), claimed: claimed + 0.0, observed: observed + 0.0, pass: observed >= claimed - tol }
    }
}

impl Schedule {
    /// Deactivates machines that received no job.
    pub fn close_idle(&mut self) {
        let used: BTreeSet<usize> = self.assign.values().copied().collect();
        self.active.retain(|i| used.contains(i));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    Unrelated,
    Related,
    Restricted,
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Profile::Unrelated => "unrelated",
            Profile::Related => "related",
            Profile::Restricted => "restricted",
        })
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unrelated" => Ok(Profile::Unrelated),
            "related" => Ok(Profile::Related),
            "restricted" => Ok(Profile::Restricted),
            other => Err(Error::Parameter(format!("unknown profile {other:?}"))),
        }
    }
}

/// The integrality-gap family: `m - 1` unit-cost machines on which every job
/// takes `t`, and one machine of cost `r` on which every job takes `t / m`.
/// There are `m` jobs.
pub fn gen_gap_instance(m: usize, r: f64, t: f64) -> Result<Instance> {
    if m < 2 {
        return Err(Error::Parameter(format!("gap instance needs m >= 2, got {m}")));
    }
    if !(r > m as f64) {
        return Err(Error::Parameter(format!("gap instance needs R > m, got R = {r}")));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Parameter(format!("gap instance needs T > 0, got {t}")));
    }
    let mut costs = vec![1.0; m - 1];
    costs.push(r);
    let mut p = vec![vec![Some(t); m]; m - 1];
    p.push(vec![Some(t / m as f64); m]);
    Instance::new(costs, p)
}

/// Encodes a set-cover instance: one unit-cost machine per set, one job per
/// element, `p = 0` when the element is in the set and infeasible otherwise.
/// Elements are `0..universe`.
pub fn gen_setcover_instance(sets: &[Vec<usize>], universe: usize) -> Result<Instance> {
    let mut p = vec![vec![None; universe]; sets.len()];
    for (i, set) in sets.iter().enumerate() {
        for &e in set {
            if e >= universe {
                return Err(Error::Parameter(format!("element {e} outside universe of size {universe}")));
            }
            p[i][e] = Some(0.0);
        }
    }
    if let Some(e) = (0..universe).find(|&e| p.iter().all(|row| row[e].is_none())) {
        return Err(Error::Parameter(format!("element {e} is not covered by any set")));
    }
    Instance::new(vec![1.0; sets.len()], p)
}

const RANDOM_MAX_COST: u32 = 10;
const RANDOM_MAX_TIME: u32 = 20;
const RANDOM_SPEEDS: [f64; 3] = [1.0, 2.0, 4.0];

/// A seeded random instance. Costs and processing requirements are small
/// integers; related speeds are powers of two so `p_j / s_i` is exact.
pub fn gen_random_instance(seed: u64, n: usize, m: usize, profile: Profile) -> Result<Instance> {
    if n == 0 || m == 0 {
        return Err(Error::Parameter("random instance needs n, m >= 1".into()));
    }
    let mut rng = rng::from_seed(seed);
    let costs: Vec<f64> = (0..m).map(|_| rng.gen_range(1..=RANDOM_MAX_COST) as f64).collect();
    match profile {
        Profile::Unrelated => {
            let p = (0..m)
                .map(|_| (0..n).map(|_| Some(rng.gen_range(1..=RANDOM_MAX_TIME) as f64)).collect())
                .collect();
            Instance::new(costs, p)
        }
        Profile::Related => {
            let sizes: Vec<f64> = (0..n).map(|_| rng.gen_range(1..=RANDOM_MAX_TIME) as f64).collect();
            let speeds: Vec<f64> =
                (0..m).map(|_| RANDOM_SPEEDS[rng.gen_range(0..RANDOM_SPEEDS.len())]).collect();
            let p = speeds.iter().map(|s| sizes.iter().map(|pj| Some(pj / s)).collect()).collect();
            Instance::new(costs, p)?.with_speeds(speeds)
        }
        Profile::Restricted => {
            let sizes: Vec<f64> = (0..n).map(|_| rng.gen_range(1..=RANDOM_MAX_TIME) as f64).collect();
            let mut p: Vec<Vec<Option<f64>>> = (0..m)
                .map(|_| sizes.iter().map(|&pj| rng.gen_bool(0.5).then_some(pj)).collect())
                .collect();
            for (j, &pj) in sizes.iter().enumerate() {
                if p.iter().all(|row| row[j].is_none()) {
                    let i = rng.gen_range(0..m);
                    p[i][j] = Some(pj);
                }
            }
            Instance::new(costs, p)
        }
    }
}

/// Adds seeded integer assignment costs in `0..=max_cost`.
pub fn add_random_assignment_costs(inst: Instance, seed: u64, max_cost: u32) -> Result<Instance> {
    let mut rng = rng::from_seed(seed);
    let c = (0..inst.m())
        .map(|_| (0..inst.n()).map(|_| rng.gen_range(0..=max_cost) as f64).collect())
        .collect();
    inst.with_assignment_costs(c)
}

/// Adds seeded integer profits in `1..=max_profit`.
pub fn add_random_profits(inst: Instance, seed: u64, max_profit: u32) -> Result<Instance> {
    let mut rng = rng::from_seed(seed);
    let profits = (0..inst.n()).map(|_| rng.gen_range(1..=max_profit) as f64).collect();
    inst.with_profits(profits)
}

/// Adds seeded integer release times in `0..=max_release`.
pub fn add_random_release_times(inst: Instance, seed: u64, max_release: u32) -> Result<Instance> {
    let mut rng = rng::from_seed(seed);
    let r = (0..inst.m())
        .map(|_| (0..inst.n()).map(|_| rng.gen_range(0..=max_release) as f64).collect())
        .collect();
    inst.with_release_times(r)
}

/// A seeded random set system over `universe` elements with `sets` sets in
/// which every element is covered.
pub fn gen_random_set_system(seed: u64, universe: usize, sets: usize) -> Vec<Vec<usize>> {
    let mut rng = rng::from_seed(seed);
    let mut out: Vec<Vec<usize>> =
        (0..sets).map(|_| (0..universe).filter(|_| rng.gen_bool(0.35)).collect()).collect();
    for e in 0..universe {
        if sets > 0 && out.iter().all(|s| !s.contains(&e)) {
            let i = rng.gen_range(0..sets);
            out[i].push(e);
            out[i].sort_unstable();
        }
    }
    out
}

/// Short human-readable description, used in error dumps.
pub fn describe(inst: &Instance) -> String {
    format!("instance(m={}, n={}, related={})", inst.m(), inst.n(), inst.is_related())
}
