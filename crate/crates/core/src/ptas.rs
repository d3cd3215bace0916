//! Related machines with activation costs: a configuration-graph PTAS.
//!
//! Job sizes are rounded onto a grid that is geometric across scales and
//! uniform inside one. A set of rounded jobs is summarized by a scale `w` (a
//! power of two) and counts over the grid points `i d^2 w` for
//! `lambda < i <= lambda^2`, plus a bucket `n_lambda` that measures the small
//! jobs in units of `d w`. Machines are layered slowest first and a schedule
//! is a path whose `i`-th vertex summarizes the jobs on the first `i`
//! machines.
//!
//! All grid arithmetic is done in integers: one unit is `d^2 2^base` for a
//! base exponent below every scale that can occur.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::error::{Error, Result};
use crate::math;
use crate::model::{metrics, BoundCheck, Instance, Schedule};

/// Refuse graphs with more distinct configurations than this.
pub const VERTEX_LIMIT: usize = 20_000;
const SUBSET_SUM_LIMIT: usize = 1 << 20;
const SHIFT_LIMIT: u32 = 100;
const LAMBDA_LIMIT: u32 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PtasParams {
    lambda: u32,
}

impl PtasParams {
    /// `lambda = 1/d`; must be even and at least 2.
    pub fn new(lambda: u32) -> Result<Self> {
        if lambda < 2 || lambda % 2 != 0 || lambda > LAMBDA_LIMIT {
            return Err(Error::Parameter(format!("lambda must be even in 2..={LAMBDA_LIMIT}, got {lambda}")));
        }
        Ok(Self { lambda })
    }

    /// Smallest even `lambda` with `(1 + d) / (1 - d) <= 1 + epsilon`.
    pub fn from_epsilon(epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::Parameter(format!("epsilon must be positive, got {epsilon}")));
        }
        let raw = math::ceil((2.0 + epsilon) / epsilon - 1e-12);
        if raw > LAMBDA_LIMIT as f64 {
            return Err(Error::Parameter(format!("epsilon {epsilon} needs lambda {raw}")));
        }
        let mut lambda = (raw as u32).max(2);
        if lambda % 2 == 1 {
            lambda += 1;
        }
        Self::new(lambda)
    }

    pub fn lambda(&self) -> u32 {
        self.lambda
    }

    pub fn delta(&self) -> f64 {
        1.0 / self.lambda as f64
    }

    /// `(1 + d) / (1 - d)`.
    pub fn ratio(&self) -> f64 {
        let d = self.delta();
        (1.0 + d) / (1.0 - d)
    }

    /// Length of a count vector: indices `lambda..=lambda^2`.
    pub fn classes(&self) -> usize {
        let l = self.lambda as usize;
        l * l - l + 1
    }

    fn lam(&self) -> u128 {
        self.lambda as u128
    }

    fn lam_sq(&self) -> u128 {
        self.lam() * self.lam()
    }
}

/// `r(p) = i d^2 2^e`, returned as `(i, e)` with `lambda < i <= 2 lambda`.
pub fn round_parts(p: f64, params: &PtasParams) -> Result<(u64, i32)> {
    if !(p.is_finite() && p > 0.0) {
        return Err(Error::Parameter(format!("job size must be positive, got {p}")));
    }
    let lam = params.lambda as f64;
    // p > d 2^e  <=>  p lambda > 2^e
    let t = p * lam;
    if !t.is_normal() {
        return Err(Error::Parameter(format!("job size {p} out of range")));
    }
    let mut e = math::ceil(math::log2(t)) as i32 - 1;
    while math::ldexp(1.0, e + 1) < t {
        e += 1;
    }
    while math::ldexp(1.0, e) >= t {
        e -= 1;
    }
    let i = math::ceil(math::ldexp(p * lam * lam, -e)) as u64;
    let l = params.lambda as u64;
    if i <= l || i > 2 * l {
        return Err(Error::Invariant(format!("grid index {i} for size {p} outside ({l}, {}]", 2 * l)));
    }
    Ok((i, e))
}

/// Rounded size `r(p)`: the smallest grid point at or above `p` on `p`'s own
/// scale. `p <= r(p) < (1 + d) p`.
pub fn round_size(p: f64, params: &PtasParams) -> Result<f64> {
    let (i, e) = round_parts(p, params)?;
    let r = math::ldexp(i as f64, e) / (params.lambda as f64 * params.lambda as f64);
    debug_assert!(r >= p * (1.0 - 1e-12) && r < (1.0 + params.delta()) * p, "sandwich fails at {p}: {r}");
    Ok(r)
}

/// Summary of a job set: scale exponent (`None` for the empty set) and counts
/// `n[k - lambda]` for `k = lambda..=lambda^2`; `n[0]` is the small-job bucket.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    pub scale: Option<i32>,
    pub n: Vec<u64>,
}

impl Configuration {
    pub fn empty(params: &PtasParams) -> Self {
        Self { scale: None, n: vec![0; params.classes()] }
    }

    pub fn is_empty(&self) -> bool {
        self.scale.is_none()
    }

    /// `w`, zero for the empty configuration.
    pub fn w(&self) -> f64 {
        self.scale.map_or(0.0, |e| math::ldexp(1.0, e))
    }

    /// `n_k` for `lambda <= k <= lambda^2`.
    pub fn count(&self, params: &PtasParams, k: u32) -> u64 {
        self.n[(k - params.lambda) as usize]
    }
}

/// Integer grid with unit `d^2 2^base`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Units {
    params: PtasParams,
    base: i32,
}

impl Units {
    /// Leaves room below `min_exp` for every scale a set containing a job of
    /// that exponent can take.
    fn below(params: PtasParams, min_exp: i32) -> Self {
        let headroom = 32 - (params.lambda - 1).leading_zeros() as i32;
        Self { params, base: min_exp - headroom - 2 }
    }

    fn shift(&self, e: i32) -> Result<u32> {
        let s = e - self.base;
        if s < 1 || s as u32 > SHIFT_LIMIT {
            return Err(Error::LimitExceeded { what: "size range", size: s as f64, limit: SHIFT_LIMIT as f64 });
        }
        Ok(s as u32)
    }

    fn job(&self, i: u64, e: i32) -> Result<u128> {
        Ok((i as u128) << self.shift(e)?)
    }

    /// `r` of a size given in units. Needs `x > lambda`, which holds for every
    /// grid point of a scale above the base.
    fn round(&self, x: u128) -> Result<u128> {
        let lam = self.params.lam();
        if x <= lam {
            return Err(Error::Invariant(format!("size {x} below the unit grid")));
        }
        let mut g = 0u32;
        while x > lam << (g + 1) {
            g += 1;
        }
        let i = (x + (1u128 << g) - 1) >> g;
        Ok(i << g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct RJob {
    size: f64,
    q: u128,
}

impl RJob {
    /// `p > d 2^e`.
    fn large(&self, lambda: u32, e: i32) -> bool {
        self.size * lambda as f64 > math::ldexp(1.0, e)
    }
}

fn rounded_jobs(sizes: &[f64], params: &PtasParams) -> Result<(Units, Vec<RJob>)> {
    let parts = sizes.iter().map(|&p| round_parts(p, params)).collect::<Result<Vec<_>>>()?;
    let min_exp = parts.iter().map(|&(_, e)| e).min().unwrap_or(0);
    let units = Units::below(*params, min_exp);
    let jobs = sizes
        .iter()
        .zip(&parts)
        .map(|(&size, &(i, e))| Ok(RJob { size, q: units.job(i, e)? }))
        .collect::<Result<Vec<_>>>()?;
    Ok((units, jobs))
}

/// Smallest `s` with `lambda^2 2^s >= q`.
fn scale_for(params: &PtasParams, q: u128) -> u32 {
    let mut s = 0;
    while params.lam_sq() << s < q {
        s += 1;
    }
    s
}

fn principal_of<'a>(units: &Units, jobs: impl IntoIterator<Item = &'a RJob>) -> Result<Configuration> {
    let params = &units.params;
    let jobs: Vec<&RJob> = jobs.into_iter().collect();
    let Some(maxq) = jobs.iter().map(|j| j.q).max() else {
        return Ok(Configuration::empty(params));
    };
    let s = scale_for(params, maxq);
    let e = units.base + s as i32;
    units.shift(e)?;
    let lam = params.lam();
    let mut n = vec![0u64; params.classes()];
    let mut small: u128 = 0;
    for j in jobs {
        if j.large(params.lambda, e) {
            let k = j.q >> s;
            if (k << s) != j.q || k <= lam || k > params.lam_sq() {
                return Err(Error::Invariant(format!("job of {} units off the grid at scale {e}", j.q)));
            }
            n[(k - lam) as usize] += 1;
        } else {
            small += j.q;
        }
    }
    let d = lam << s;
    n[0] = small.div_ceil(d) as u64;
    Ok(Configuration { scale: Some(e), n })
}

/// Principal configuration of a multiset of job sizes: the smallest scale
/// that represents it, large jobs counted per grid point, small ones
/// bucketed with a ceiling.
pub fn principal_config(sizes: &[f64], params: &PtasParams) -> Result<Configuration> {
    let (units, jobs) = rounded_jobs(sizes, params)?;
    principal_of(&units, &jobs)
}

/// Scaled vector plus the other admissible bucket value (equal to the
/// chosen one when the bucket sum is an exact multiple).
fn scale_vec(units: &Units, cfg: &Configuration, to: i32) -> Result<(Vec<u64>, u64)> {
    let params = &units.params;
    let mut out = vec![0u64; params.classes()];
    let Some(e) = cfg.scale else {
        return Ok((out, 0));
    };
    if to < e {
        return Err(Error::Parameter(format!("cannot scale from 2^{e} down to 2^{to}")));
    }
    let (s, s2) = (units.shift(e)?, units.shift(to)?);
    let lam = params.lam();
    let d2 = lam << s2;
    let mut small: u128 = 0;
    for (idx, &cnt) in cfg.n.iter().enumerate() {
        if cnt == 0 {
            continue;
        }
        let x = (lam + idx as u128) << s;
        let r = units.round(x)?;
        if x > d2 {
            let k = r >> s2;
            if (k << s2) != r || k > params.lam_sq() {
                return Err(Error::Precondition(format!("class {} does not rescale onto the grid", lam + idx as u128)));
            }
            out[(k - lam) as usize] += cnt;
        } else {
            small += cnt as u128 * r;
        }
    }
    let (fl, rem) = (small / d2, small % d2);
    // nearest multiple, ties toward the smaller one
    let near = if 2 * rem > d2 { fl + 1 } else { fl };
    let other = if rem == 0 { fl } else if near == fl { fl + 1 } else { fl };
    out[0] = near as u64;
    Ok((out, other as u64))
}

/// Vector of the synthetic job set of `cfg` at scale `2^to` (`to >=` the
/// scale of `cfg`), bucket rounded to the nearest value with ties going down.
pub fn scale_config(cfg: &Configuration, to: i32, params: &PtasParams) -> Result<Vec<u64>> {
    if cfg.n.len() != params.classes() {
        return Err(Error::Structural(format!("vector of length {} for lambda {}", cfg.n.len(), params.lambda)));
    }
    let e = cfg.scale.unwrap_or(to);
    let units = Units { params: *params, base: e.min(to) - 2 };
    Ok(scale_vec(&units, cfg, to)?.0)
}

/// Every principal configuration of a subset of `jobs`, empty one first.
fn enumerate_configs(units: &Units, jobs: &[RJob]) -> Result<Vec<Configuration>> {
    let params = &units.params;
    let lam = params.lam();
    let mut found: BTreeSet<Configuration> = BTreeSet::new();
    let scales: BTreeSet<u32> = jobs.iter().map(|j| scale_for(params, j.q)).collect();
    for &s in &scales {
        let e = units.base + s as i32;
        units.shift(e)?;
        let (wq, d) = (params.lam_sq() << s, lam << s);
        let mut avail: BTreeMap<usize, u64> = BTreeMap::new();
        let mut sums: BTreeSet<(u128, bool)> = BTreeSet::from([(0, false)]);
        for j in jobs.iter().filter(|j| j.q <= wq) {
            let top = 2 * j.q > wq;
            if j.large(params.lambda, e) {
                let k = j.q >> s;
                if (k << s) != j.q || k <= lam {
                    return Err(Error::Invariant(format!("job of {} units off the grid at scale {e}", j.q)));
                }
                *avail.entry((k - lam) as usize).or_default() += 1;
            } else {
                let more: Vec<(u128, bool)> = sums.iter().map(|&(v, t)| (v + j.q, t || top)).collect();
                sums.extend(more);
                if sums.len() > SUBSET_SUM_LIMIT {
                    return Err(Error::LimitExceeded {
                        what: "small-job subset sums",
                        size: sums.len() as f64,
                        limit: SUBSET_SUM_LIMIT as f64,
                    });
                }
            }
        }
        let buckets: BTreeSet<(u64, bool)> = sums.iter().map(|&(v, t)| (v.div_ceil(d) as u64, t)).collect();
        let slots: Vec<(usize, u64)> = avail.into_iter().collect();
        let mut counts = vec![0u64; slots.len()];
        loop {
            let top_large = slots
                .iter()
                .zip(&counts)
                .any(|(&(idx, _), &c)| c > 0 && 2 * (lam + idx as u128) > params.lam_sq());
            let mut n = vec![0u64; params.classes()];
            for (&(idx, _), &c) in slots.iter().zip(&counts) {
                n[idx] = c;
            }
            for &(b, top_small) in &buckets {
                if top_large || top_small {
                    let mut v = n.clone();
                    v[0] = b;
                    found.insert(Configuration { scale: Some(e), n: v });
                }
            }
            if found.len() > VERTEX_LIMIT {
                return Err(Error::LimitExceeded {
                    what: "configuration graph",
                    size: found.len() as f64,
                    limit: VERTEX_LIMIT as f64,
                });
            }
            // mixed-radix increment
            let mut pos = 0;
            while pos < counts.len() && counts[pos] == slots[pos].1 {
                counts[pos] = 0;
                pos += 1;
            }
            if pos == counts.len() {
                break;
            }
            counts[pos] += 1;
        }
    }
    let mut out = vec![Configuration::empty(params)];
    out.extend(found);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigEdge {
    /// Layer of the head; the edge belongs to machine `order[layer - 1]`.
    pub layer: usize,
    pub from: usize,
    pub to: usize,
    /// Rounded size added to the machine.
    pub load: f64,
    /// `load / speed`.
    pub length: f64,
    pub cost: f64,
}

/// Layered configuration graph. Vertex ids index `configs`; id 0 is the
/// empty configuration.
#[derive(Debug, Clone)]
pub struct ConfigGraph {
    pub params: PtasParams,
    pub configs: Vec<Configuration>,
    pub sink: usize,
    /// Machines slowest first, ties by index.
    pub order: Vec<usize>,
    /// Vertices alive at each layer `0..=m`, after pruning those that miss
    /// the sink.
    pub layers: Vec<Vec<usize>>,
    pub edges: Vec<ConfigEdge>,
    units: Units,
    jobs: Vec<RJob>,
}

/// Rounded size (in `d^2 w'` units) that moving from `u` to `v` adds, if the
/// move is an edge. Equal configurations give `Some(0)`.
fn transition(units: &Units, u: &Configuration, v: &Configuration, scaled: &mut BTreeMap<i32, (Vec<u64>, u64)>) -> Result<Option<u128>> {
    if u == v {
        return Ok(Some(0));
    }
    let Some(e2) = v.scale else {
        return Ok(None);
    };
    if u.scale.is_some_and(|e| e > e2) {
        return Ok(None);
    }
    if !scaled.contains_key(&e2) {
        scaled.insert(e2, scale_vec(units, u, e2)?);
    }
    let (nn, other) = &scaled[&e2];
    let lam = units.params.lam();
    let mut large: u128 = 0;
    for idx in 1..nn.len() {
        if nn[idx] > v.n[idx] {
            return Ok(None);
        }
        large += (lam + idx as u128) * (v.n[idx] - nn[idx]) as u128;
    }
    // either admissible bucket value may be used
    for b in [nn[0], *other] {
        if b > v.n[0] {
            continue;
        }
        let total = large + lam * (v.n[0] - b) as u128;
        if 3 * total >= units.params.lam_sq() {
            return Ok(Some(total));
        }
    }
    Ok(None)
}

pub fn build_config_graph(inst: &Instance, params: &PtasParams) -> Result<ConfigGraph> {
    let speeds = inst.speeds().ok_or_else(|| Error::Parameter("configuration graph needs machine speeds".into()))?;
    let sizes = inst.job_sizes().unwrap_or_default();
    let (units, jobs) = rounded_jobs(&sizes, params)?;
    let configs = enumerate_configs(&units, &jobs)?;
    let full = principal_of(&units, &jobs)?;
    let sink = configs
        .iter()
        .position(|c| *c == full)
        .ok_or_else(|| Error::Invariant("principal configuration of all jobs not enumerated".into()))?;
    let mut order: Vec<usize> = (0..inst.m()).collect();
    order.sort_by(|&a, &b| speeds[a].total_cmp(&speeds[b]).then(a.cmp(&b)));

    // successor lists with added rounded size, computed on demand
    let mut succ: BTreeMap<usize, Vec<(usize, u128)>> = BTreeMap::new();
    let m = inst.m();
    let mut reach: Vec<BTreeSet<usize>> = vec![BTreeSet::from([0])];
    for _ in 0..m {
        let mut next = BTreeSet::new();
        for &u in reach.last().unwrap() {
            if !succ.contains_key(&u) {
                let mut scaled = BTreeMap::new();
                let mut out = Vec::new();
                for (v, cv) in configs.iter().enumerate() {
                    if let Some(l) = transition(&units, &configs[u], cv, &mut scaled)? {
                        out.push((v, l));
                    }
                }
                succ.insert(u, out);
            }
            next.extend(succ[&u].iter().map(|&(v, _)| v));
        }
        reach.push(next);
    }

    let mut alive: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); m + 1];
    if reach[m].contains(&sink) {
        alive[m].insert(sink);
    }
    for layer in (0..m).rev() {
        let keep: BTreeSet<usize> = reach[layer]
            .iter()
            .copied()
            .filter(|u| succ.get(u).is_some_and(|s| s.iter().any(|(v, _)| alive[layer + 1].contains(v))))
            .collect();
        alive[layer] = keep;
    }

    let lam_sq = params.lambda as f64 * params.lambda as f64;
    let mut edges = Vec::new();
    for layer in 1..=m {
        let machine = order[layer - 1];
        for &u in &alive[layer - 1] {
            for &(v, l) in &succ[&u] {
                if !alive[layer].contains(&v) {
                    continue;
                }
                let load = if u == v { 0.0 } else { l as f64 * configs[v].w() / lam_sq };
                let cost = if u == v { 0.0 } else { inst.cost(machine) };
                edges.push(ConfigEdge { layer, from: u, to: v, load, length: load / speeds[machine], cost });
            }
        }
    }
    let layers = alive.into_iter().map(|s| s.into_iter().collect()).collect();
    Ok(ConfigGraph { params: *params, configs, sink, order, layers, edges, units, jobs })
}

/// Vertex sequence over layers `0..=m` with its longest edge and total cost.
#[derive(Debug, Clone, PartialEq)]
pub struct PtasPath {
    pub vertices: Vec<usize>,
    pub bottleneck: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, Copy)]
struct Label {
    bottleneck: f64,
    cost: f64,
    vertex: usize,
    prev: usize,
}

impl ConfigGraph {
    pub fn machines(&self) -> usize {
        self.order.len()
    }

    fn layer_edges(&self, layer: usize) -> impl Iterator<Item = &ConfigEdge> {
        self.edges.iter().filter(move |e| e.layer == layer)
    }

    /// Paths that are Pareto-optimal in (bottleneck, cost), by increasing
    /// bottleneck. Sweeping every threshold over this list is the same as
    /// deleting long edges and solving a cheapest path for each threshold.
    pub fn pareto_paths(&self) -> Vec<PtasPath> {
        let m = self.machines();
        if self.layers[m].is_empty() {
            return Vec::new();
        }
        let mut labels: Vec<Vec<Label>> = vec![vec![Label { bottleneck: 0.0, cost: 0.0, vertex: 0, prev: usize::MAX }]];
        for layer in 1..=m {
            let mut by_vertex: BTreeMap<usize, Vec<Label>> = BTreeMap::new();
            for e in self.layer_edges(layer) {
                for (idx, lb) in labels[layer - 1].iter().enumerate().filter(|(_, lb)| lb.vertex == e.from) {
                    by_vertex.entry(e.to).or_default().push(Label {
                        bottleneck: lb.bottleneck.max(e.length),
                        cost: lb.cost + e.cost,
                        vertex: e.to,
                        prev: idx,
                    });
                }
            }
            let mut next = Vec::new();
            for (_, mut ls) in by_vertex {
                ls.sort_by(|a, b| a.bottleneck.total_cmp(&b.bottleneck).then(a.cost.total_cmp(&b.cost)));
                let mut best = f64::INFINITY;
                for lb in ls {
                    if lb.cost < best {
                        best = lb.cost;
                        next.push(lb);
                    }
                }
            }
            labels.push(next);
        }
        let mut out = Vec::new();
        for (idx, lb) in labels[m].iter().enumerate().filter(|(_, lb)| lb.vertex == self.sink) {
            let mut vertices = vec![0; m + 1];
            let mut cur = idx;
            for layer in (0..=m).rev() {
                let l = labels[layer][cur];
                vertices[layer] = l.vertex;
                cur = l.prev;
            }
            out.push(PtasPath { vertices, bottleneck: lb.bottleneck, cost: lb.cost });
        }
        out
    }

    /// Cheapest source-to-sink path using only edges of length at most
    /// `t_sharp`. Ties go to the smaller bottleneck, then the lower vertex
    /// ids.
    pub fn min_cost_within(&self, t_sharp: f64) -> Option<PtasPath> {
        let m = self.machines();
        // best (cost, bottleneck, predecessor) per vertex and layer
        let mut best: Vec<BTreeMap<usize, (f64, f64, usize)>> = vec![BTreeMap::from([(0, (0.0, 0.0, usize::MAX))])];
        for layer in 1..=m {
            let mut cur: BTreeMap<usize, (f64, f64, usize)> = BTreeMap::new();
            for e in self.layer_edges(layer).filter(|e| e.length <= t_sharp) {
                let Some(&(c, b, _)) = best[layer - 1].get(&e.from) else { continue };
                let cand = (c + e.cost, b.max(e.length), e.from);
                let better = match cur.get(&e.to) {
                    None => true,
                    Some(&(c0, b0, p0)) => {
                        cand.0 < c0 || (cand.0 == c0 && (cand.1 < b0 || (cand.1 == b0 && cand.2 < p0)))
                    }
                };
                if better {
                    cur.insert(e.to, cand);
                }
            }
            best.push(cur);
        }
        let &(cost, bottleneck, _) = best[m].get(&self.sink)?;
        let mut vertices = vec![0; m + 1];
        let mut v = self.sink;
        for layer in (0..=m).rev() {
            vertices[layer] = v;
            v = best[layer][&v].2;
        }
        Some(PtasPath { vertices, bottleneck, cost })
    }

    pub fn edge(&self, layer: usize, from: usize, to: usize) -> Option<&ConfigEdge> {
        self.layer_edges(layer).find(|e| e.from == from && e.to == to)
    }
}

/// Turns a path into an assignment. Each non-equal edge opens its machine
/// and takes jobs realizing the count difference: exact counts for the
/// large grid points, small jobs largest first while the bucket has room.
/// The edge into the sink takes everything left.
pub fn extract_assignment(g: &ConfigGraph, path: &PtasPath) -> Result<Schedule> {
    let m = g.machines();
    if path.vertices.len() != m + 1 || path.vertices[0] != 0 || path.vertices[m] != g.sink {
        return Err(Error::Precondition(format!("path {:?} does not run source to sink", path.vertices)));
    }
    let lambda = g.params.lambda;
    let lam = g.params.lam();
    let n = g.jobs.len();
    let mut taken = vec![false; n];
    let mut sched = Schedule::new();
    let mut at_sink = false;
    for layer in 1..=m {
        let (u, v) = (path.vertices[layer - 1], path.vertices[layer]);
        if u == v {
            continue;
        }
        if at_sink || g.edge(layer, u, v).is_none() {
            return Err(Error::Precondition(format!("no edge {u} -> {v} at layer {layer}")));
        }
        let machine = g.order[layer - 1];
        sched.active.insert(machine);
        let cfg = &g.configs[v];
        let mut chosen = Vec::new();
        if v == g.sink {
            chosen.extend((0..n).filter(|&j| !taken[j]));
            at_sink = true;
        } else {
            let e = cfg.scale.ok_or_else(|| Error::Invariant("edge into the empty configuration".into()))?;
            let s = g.units.shift(e)?;
            for idx in 1..cfg.n.len() {
                let q = (lam + idx as u128) << s;
                let on_point = |j: usize| g.jobs[j].q == q && g.jobs[j].large(lambda, e);
                let have = (0..n).filter(|&j| taken[j] && on_point(j)).count() as u64;
                let want = cfg.n[idx];
                if have > want {
                    return Err(Error::Invariant(format!("layer {layer}: {have} jobs already at grid point {idx}, vertex allows {want}")));
                }
                let pick: Vec<usize> = (0..n).filter(|&j| !taken[j] && on_point(j)).take((want - have) as usize).collect();
                if (pick.len() as u64) < want - have {
                    return Err(Error::Invariant(format!("layer {layer}: grid point {idx} short of jobs")));
                }
                chosen.extend(pick);
            }
            let cap = cfg.n[0] as u128 * (lam << s);
            let mut sum: u128 = (0..n).filter(|&j| taken[j] && !g.jobs[j].large(lambda, e)).map(|j| g.jobs[j].q).sum();
            let mut small: Vec<usize> = (0..n).filter(|&j| !taken[j] && !g.jobs[j].large(lambda, e)).collect();
            small.sort_by_key(|&j| (Reverse(g.jobs[j].q), j));
            for j in small {
                if sum + g.jobs[j].q <= cap {
                    sum += g.jobs[j].q;
                    chosen.push(j);
                }
            }
        }
        for j in chosen {
            taken[j] = true;
            sched.assign.insert(j, machine);
        }
    }
    if let Some(j) = (0..n).find(|&j| !taken[j]) {
        return Err(Error::Invariant(format!("job {j} left over after the sink")));
    }
    Ok(sched)
}

/// Makespan guesses `lb (1 + d)^k` up to the first one at or above `ub`,
/// with `lb = max p_j / max s_i` and `ub = sum p_j / min s_i`.
pub fn t_grid(inst: &Instance, params: &PtasParams) -> Result<Vec<f64>> {
    let speeds = inst.speeds().ok_or_else(|| Error::Parameter("grid needs machine speeds".into()))?;
    let sizes = inst.job_sizes().unwrap_or_default();
    let smax = speeds.iter().copied().fold(0.0, f64::max);
    let smin = speeds.iter().copied().fold(f64::INFINITY, f64::min);
    let lb = math::max_or_zero(sizes.iter().copied()) / smax;
    let ub = sizes.iter().sum::<f64>() / smin;
    let mut out = vec![lb];
    let mut t = lb;
    while t < ub && lb > 0.0 {
        t *= 1.0 + params.delta();
        out.push(t);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct PtasOutcome {
    pub schedule: Schedule,
    pub params: PtasParams,
    pub path: PtasPath,
    /// `(bottleneck, cost)` of every Pareto path.
    pub frontier: Vec<(f64, f64)>,
    pub checks: Vec<BoundCheck>,
}

/// Smallest-bottleneck path whose cost fits `budget` (any cost when `None`),
/// turned into a schedule.
pub fn ptas_solve(inst: &Instance, budget: Option<f64>, epsilon: f64) -> Result<PtasOutcome> {
    let params = PtasParams::from_epsilon(epsilon)?;
    let g = build_config_graph(inst, &params)?;
    let paths = g.pareto_paths();
    let path = paths
        .iter()
        .find(|p| budget.map_or(true, |a| p.cost <= a + 1e-9))
        .cloned()
        .ok_or(Error::Infeasible)?;
    let schedule = extract_assignment(&g, &path)?;
    schedule.validate(inst)?;
    let met = metrics(inst, &schedule)?;
    let checks = vec![
        BoundCheck::at_most("makespan", path.bottleneck / (1.0 - params.delta()), met.makespan, 1e-9),
        BoundCheck::at_most("cost_gap", 0.0, math::abs(met.activation_cost - path.cost), 1e-9),
    ];
    let frontier = paths.iter().map(|p| (p.bottleneck, p.cost)).collect();
    Ok(PtasOutcome { schedule, params, path, frontier, checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{gen_random_instance, Profile};

    fn related(costs: Vec<f64>, speeds: Vec<f64>, sizes: &[f64]) -> Instance {
        let p = speeds.iter().map(|s| sizes.iter().map(|pj| Some(pj / s)).collect()).collect();
        Instance::new(costs, p).unwrap().with_speeds(speeds).unwrap()
    }

    #[test]
    fn lambda_from_epsilon() {
        assert_eq!(PtasParams::from_epsilon(0.5).unwrap().lambda(), 6);
        assert_eq!(PtasParams::from_epsilon(2.0).unwrap().lambda(), 2);
        assert_eq!(PtasParams::from_epsilon(1.0).unwrap().lambda(), 4);
        assert!(PtasParams::new(3).is_err());
        for eps in [0.1, 0.3, 0.5, 1.0, 3.0] {
            assert!(PtasParams::from_epsilon(eps).unwrap().ratio() <= 1.0 + eps + 1e-12);
        }
    }

    #[test]
    fn round_size_half() {
        let p = PtasParams::new(2).unwrap();
        assert_eq!(round_parts(1.0, &p).unwrap(), (4, 0));
        assert_eq!(round_size(1.0, &p).unwrap(), 1.0);
        assert!(round_size(0.0, &p).is_err());
        assert!(round_size(-1.0, &p).is_err());
    }

    #[test]
    fn round_size_sandwich_small_grid() {
        let p = PtasParams::new(6).unwrap();
        for k in 1..200 {
            let x = k as f64 * 0.37;
            let r = round_size(x, &p).unwrap();
            assert!(x <= r && r < (1.0 + p.delta()) * x, "{x} -> {r}");
        }
    }

    #[test]
    fn principal_empty_and_unit() {
        let p = PtasParams::new(2).unwrap();
        assert_eq!(principal_config(&[], &p).unwrap(), Configuration::empty(&p));
        let c = principal_config(&[1.0], &p).unwrap();
        // r(1) = 1 = 4 d^2 w at w = 1
        assert_eq!(c.scale, Some(0));
        assert_eq!(c.n, vec![0, 0, 1]);
    }

    #[test]
    fn principal_buckets_small_jobs() {
        let p = PtasParams::new(2).unwrap();
        // one job of 4 sets w = 4; the 1s are small (<= d w = 2): bucket ceil(3 / 2)
        let c = principal_config(&[4.0, 1.0, 1.0, 1.0], &p).unwrap();
        assert_eq!(c.scale, Some(2));
        assert_eq!(c.n, vec![2, 0, 1]);
    }

    #[test]
    fn scale_identity_and_zero() {
        let p = PtasParams::new(6).unwrap();
        let c = principal_config(&[7.0, 3.0, 2.5, 0.4], &p).unwrap();
        let e = c.scale.unwrap();
        assert_eq!(scale_config(&c, e, &p).unwrap(), c.n);
        let z = Configuration { scale: Some(e), n: vec![0; p.classes()] };
        assert_eq!(scale_config(&z, e + 3, &p).unwrap(), z.n);
        assert!(scale_config(&c, e - 1, &p).is_err());
    }

    #[test]
    fn scale_up_one_level() {
        let p = PtasParams::new(2).unwrap();
        // at w = 1: classes 3 (0.75) and 4 (1.0), bucket 1 (0.5)
        let c = Configuration { scale: Some(0), n: vec![1, 1, 1] };
        // at w = 2 (d w = 1): everything is small; r(0.75) = 0.75, r(1) = 1,
        // r(0.5) = 0.5, total 2.25 -> nearest multiple of 1 is 2
        assert_eq!(scale_config(&c, 1, &p).unwrap(), vec![2, 0, 0]);
    }

    #[test]
    fn single_machine_path() {
        let inst = related(vec![3.0], vec![2.0], &[1.0, 2.0, 3.0]);
        let out = ptas_solve(&inst, None, 0.5).unwrap();
        assert_eq!(out.schedule.active, BTreeSet::from([0]));
        let met = metrics(&inst, &out.schedule).unwrap();
        assert_eq!(met.activation_cost, 3.0);
        assert_eq!(met.makespan, 3.0);
    }

    #[test]
    fn self_edges_everywhere() {
        let inst = related(vec![1.0, 1.0], vec![1.0, 1.0], &[1.0, 1.0, 1.0]);
        let p = PtasParams::new(2).unwrap();
        let g = build_config_graph(&inst, &p).unwrap();
        for layer in 1..=2 {
            for &v in &g.layers[layer] {
                if g.layers[layer - 1].contains(&v) {
                    let e = g.edge(layer, v, v).unwrap();
                    assert_eq!((e.cost, e.length), (0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn pareto_matches_threshold_search() {
        for seed in 0..6 {
            let inst = gen_random_instance(seed, 6, 3, Profile::Related).unwrap();
            let g = build_config_graph(&inst, &PtasParams::new(4).unwrap()).unwrap();
            let paths = g.pareto_paths();
            assert!(!paths.is_empty());
            for w in paths.windows(2) {
                assert!(w[0].bottleneck < w[1].bottleneck && w[0].cost > w[1].cost);
            }
            for p in &paths {
                let q = g.min_cost_within(p.bottleneck).unwrap();
                assert_eq!(q.cost, p.cost);
                let s = extract_assignment(&g, p).unwrap();
                s.validate(&inst).unwrap();
                assert_eq!(metrics(&inst, &s).unwrap().activation_cost, p.cost);
            }
        }
    }

    #[test]
    fn not_related_is_rejected() {
        let inst = Instance::new(vec![1.0], vec![vec![Some(1.0)]]).unwrap();
        assert!(matches!(build_config_graph(&inst, &PtasParams::new(2).unwrap()), Err(Error::Parameter(_))));
    }

    #[test]
    fn budget_too_small_is_infeasible() {
        let inst = related(vec![5.0, 6.0], vec![1.0, 2.0], &[1.0, 2.0]);
        assert!(matches!(ptas_solve(&inst, Some(4.0), 0.5), Err(Error::Infeasible)));
        let out = ptas_solve(&inst, Some(5.0), 0.5).unwrap();
        assert_eq!(out.schedule.active, BTreeSet::from([0]));
    }
}
