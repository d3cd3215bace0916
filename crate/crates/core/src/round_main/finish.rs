use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::graphs::{adjacency, components, Node, Reason, Stage, WorkingGraphs, SNAP_TOL};
use crate::error::{Error, Result};
use crate::math;
use crate::model::Instance;
use crate::rng::{self, SeededRng};

/// Result of the side split.
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub g1_jobs: BTreeSet<usize>,
    pub g2_jobs: BTreeSet<usize>,
    /// `T'_i`: surviving G1 load divided by `ybar_i`.
    pub t_g1: Vec<f64>,
    /// `T''_i`: surviving G2 load divided by `ybar_i`.
    pub t_g2: Vec<f64>,
}

/// Keeps each unassigned job on one side only: G2 when its G2 weight is at
/// least `1/delta` (ties go to G2), G1 otherwise.
pub fn relax_split(wg: &mut WorkingGraphs, inst: &Instance, delta: f64) -> Split {
    let mut g2_sum: BTreeMap<usize, f64> = BTreeMap::new();
    let mut jobs: BTreeSet<usize> = BTreeSet::new();
    for (&(_, j), &w) in &wg.g2 {
        *g2_sum.entry(j).or_default() += w;
        jobs.insert(j);
    }
    jobs.extend(wg.g1.keys().map(|e| e.1));
    let mut split = Split {
        g1_jobs: BTreeSet::new(),
        g2_jobs: BTreeSet::new(),
        t_g1: vec![0.0; wg.ybar.len()],
        t_g2: vec![0.0; wg.ybar.len()],
    };
    for j in jobs {
        if wg.assigned.contains_key(&j) {
            continue;
        }
        let to_g2 = g2_sum.get(&j).copied().unwrap_or(0.0) >= 1.0 / delta - SNAP_TOL;
        let side = if to_g2 { &mut wg.g1 } else { &mut wg.g2 };
        let drop: Vec<((usize, usize), f64)> = side.iter().filter(|(e, _)| e.1 == j).map(|(e, v)| (*e, *v)).collect();
        for (e, _) in &drop {
            side.remove(e);
        }
        for (e, v) in drop {
            wg.log(Stage::Relax, e, v, 0.0, Reason::Split);
        }
        if to_g2 {
            split.g2_jobs.insert(j);
        } else {
            split.g1_jobs.insert(j);
        }
    }
    for i in 0..wg.ybar.len() {
        if wg.ybar[i] <= 0.0 {
            continue;
        }
        let p = |j: usize| inst.p(i, j).unwrap_or(0.0);
        let l1: f64 = wg.g1.range((i, 0)..(i + 1, 0)).map(|(&(_, j), v)| p(j) * v).sum();
        let l2: f64 = wg.g2.range((i, 0)..(i + 1, 0)).map(|(&(_, j), v)| p(j) * v).sum();
        split.t_g1[i] = l1 / wg.ybar[i];
        split.t_g2[i] = l2 / wg.ybar[i];
    }
    split
}

/// Integral decisions made by a rounding stage.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StageResult {
    pub opened: BTreeSet<usize>,
    pub assign: BTreeMap<usize, usize>,
}

fn cover_sets(wg: &WorkingGraphs, jobs: &BTreeSet<usize>) -> BTreeMap<usize, BTreeSet<usize>> {
    let mut sets: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for &(i, j) in wg.g2.keys() {
        if jobs.contains(&j) {
            sets.entry(i).or_default().insert(j);
        }
    }
    sets
}

/// Checks that `Y_i = min(1, delta ybar_i)` covers every G2-side job.
pub fn check_fractional_cover(wg: &WorkingGraphs, jobs: &BTreeSet<usize>, delta: f64) -> Result<()> {
    for &j in jobs {
        let cover: f64 = wg
            .g2
            .keys()
            .filter(|e| e.1 == j)
            .map(|e| f64::min(1.0, delta * wg.ybar[e.0]))
            .sum();
        if cover < 1.0 - 1e-7 {
            return Err(Error::Invariant(format!("G2 job {j} is covered only {cover}\n{}", wg.dump())));
        }
    }
    Ok(())
}

/// Weighted greedy set cover with zero weight for open machines; each job
/// goes to the machine that first covers it.
fn greedy_cover(
    inst: &Instance,
    sets: &BTreeMap<usize, BTreeSet<usize>>,
    uncovered: &mut BTreeSet<usize>,
    open: &BTreeSet<usize>,
    out: &mut StageResult,
) -> Result<()> {
    while !uncovered.is_empty() {
        // (machine, coverage, weight) with the best coverage per weight
        let mut best: Option<(usize, usize, f64)> = None;
        for (&i, set) in sets {
            let cov = set.intersection(uncovered).count();
            if cov == 0 {
                continue;
            }
            let w = if open.contains(&i) || out.opened.contains(&i) { 0.0 } else { inst.cost(i) };
            let better = match best {
                None => true,
                Some((_, bc, bw)) => (cov as f64 * bw).total_cmp(&(bc as f64 * w)) == Ordering::Greater,
            };
            if better {
                best = Some((i, cov, w));
            }
        }
        let (i, _, _) = best.ok_or_else(|| {
            Error::Invariant(format!("G2 jobs {uncovered:?} have no covering machine"))
        })?;
        out.opened.insert(i);
        let newly: Vec<usize> = sets[&i].intersection(uncovered).copied().collect();
        for j in newly {
            uncovered.remove(&j);
            out.assign.insert(j, i);
        }
    }
    Ok(())
}

/// Rounds the G2 side as set cover: deterministic weighted greedy, or with
/// `rng` given, independent rounds with `min(1, Y_i)` followed by greedy
/// repair.
pub fn round_g2(
    wg: &WorkingGraphs,
    inst: &Instance,
    split: &Split,
    delta: f64,
    rng: Option<&mut SeededRng>,
) -> Result<StageResult> {
    check_fractional_cover(wg, &split.g2_jobs, delta)?;
    let sets = cover_sets(wg, &split.g2_jobs);
    let mut uncovered = split.g2_jobs.clone();
    let mut out = StageResult::default();
    if let Some(rng) = rng {
        let rounds = math::ceil(math::ln(inst.n().max(1) as f64)) as usize + 2;
        for _ in 0..rounds {
            for (&i, set) in &sets {
                let y = f64::min(1.0, delta * wg.ybar[i]);
                if rng::bernoulli(rng, y) {
                    out.opened.insert(i);
                    for &j in set {
                        if uncovered.remove(&j) {
                            out.assign.insert(j, i);
                        }
                    }
                }
            }
        }
    }
    greedy_cover(inst, &sets, &mut uncovered, &wg.opened, &mut out)?;
    Ok(out)
}

/// Facility-location style greedy for the assignment-cost variant: repeatedly
/// open the machine and cheapest prefix of its uncovered G2 jobs with the
/// least cost per covered job.
pub fn round_g2_facility(wg: &WorkingGraphs, inst: &Instance, split: &Split) -> Result<StageResult> {
    let sets = cover_sets(wg, &split.g2_jobs);
    let mut uncovered = split.g2_jobs.clone();
    let mut out = StageResult::default();
    while !uncovered.is_empty() {
        // (ratio, machine, k)
        let mut best: Option<(f64, usize, usize)> = None;
        for (&i, set) in &sets {
            let mut jobs: Vec<usize> = set.intersection(&uncovered).copied().collect();
            if jobs.is_empty() {
                continue;
            }
            jobs.sort_by(|&a, &b| inst.c(i, a).total_cmp(&inst.c(i, b)).then(a.cmp(&b)));
            let f = if wg.opened.contains(&i) || out.opened.contains(&i) { 0.0 } else { inst.cost(i) };
            let mut total = f;
            for (k, &j) in jobs.iter().enumerate() {
                total += inst.c(i, j);
                let ratio = total / (k + 1) as f64;
                if best.map_or(true, |(r, _, _)| ratio < r) {
                    best = Some((ratio, i, k + 1));
                }
            }
        }
        let (_, i, k) = best.ok_or_else(|| Error::Invariant(format!("G2 jobs {uncovered:?} have no facility")))?;
        let mut jobs: Vec<usize> = sets[&i].intersection(&uncovered).copied().collect();
        jobs.sort_by(|&a, &b| inst.c(i, a).total_cmp(&inst.c(i, b)).then(a.cmp(&b)));
        out.opened.insert(i);
        for &j in &jobs[..k] {
            uncovered.remove(&j);
            out.assign.insert(j, i);
        }
    }
    Ok(out)
}

/// How a star picks its machine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StarRule {
    /// An open member if any, else the cheapest activation cost.
    Activation,
    /// Least `c_ij` plus the activation cost when still closed; an empty star
    /// falls back to the job's tree parent.
    Joint,
}

/// Rounds the G1 forest. Trees are rooted at their lowest node and handled
/// bottom-up: a job whose tree parent is a machine goes there when its value
/// is at least `1/eta`, and otherwise loses that edge. Each remaining job
/// picks one machine among its children.
pub fn round_g1(
    wg: &WorkingGraphs,
    inst: &Instance,
    eta: f64,
    rule: StarRule,
    already_open: &BTreeSet<usize>,
) -> Result<StageResult> {
    let adj = adjacency(wg.g1.keys());
    let mut out = StageResult::default();
    let is_open = |i: usize, out: &StageResult| already_open.contains(&i) || out.opened.contains(&i);
    for comp in components(&adj) {
        let root = comp[0];
        let mut parent: BTreeMap<Node, Node> = BTreeMap::new();
        let mut order = vec![root];
        let mut k = 0;
        while k < order.len() {
            let v = order[k];
            for &u in &adj[&v] {
                if u != root && !parent.contains_key(&u) {
                    parent.insert(u, v);
                    order.push(u);
                }
            }
            k += 1;
        }
        for &v in order.iter().rev() {
            let Node::J(j) = v else { continue };
            if let Some(&Node::M(i)) = parent.get(&v) {
                if wg.g1[&(i, j)] >= 1.0 / eta - SNAP_TOL {
                    out.opened.insert(i);
                    out.assign.insert(j, i);
                    continue;
                }
            }
            let members: Vec<usize> = adj[&v]
                .iter()
                .filter_map(|u| match u {
                    Node::M(i) if parent.get(u) == Some(&v) => Some(*i),
                    _ => None,
                })
                .collect();
            let pick = match rule {
                StarRule::Activation => members.iter().copied().find(|&i| is_open(i, &out)).or_else(|| {
                    members.iter().copied().min_by(|&a, &b| inst.cost(a).total_cmp(&inst.cost(b)).then(a.cmp(&b)))
                }),
                StarRule::Joint => {
                    let price = |i: usize| inst.c(i, j) + if is_open(i, &out) { 0.0 } else { inst.cost(i) };
                    let fallback = match parent.get(&v) {
                        Some(&Node::M(i)) => Some(i),
                        _ => None,
                    };
                    members
                        .iter()
                        .copied()
                        .min_by(|&a, &b| price(a).total_cmp(&price(b)).then(a.cmp(&b)))
                        .or(fallback)
                }
            };
            let i = pick.ok_or_else(|| Error::Invariant(format!("star of job {j} has no machine\n{}", wg.dump())))?;
            out.opened.insert(i);
            out.assign.insert(j, i);
        }
    }
    Ok(out)
}
