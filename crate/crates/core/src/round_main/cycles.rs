use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;

use super::graphs::{adjacency, components, Node, Reason, Stage, WorkingGraphs};
use super::transform::{apply_cycle_step, step_bounds};
use crate::error::{Error, Result};
use crate::model::Instance;

/// The unique cycle of some G1 component, as a closed walk
/// `v0, v1, .., v_{k-1}` starting at its lowest machine and continuing to
/// that machine's lower job neighbour. `None` once G1 is a forest.
pub(crate) fn find_cycle(wg: &WorkingGraphs) -> Result<Option<Vec<Node>>> {
    let adj = adjacency(wg.g1.keys());
    for comp in components(&adj) {
        let edges: usize = comp.iter().map(|v| adj[v].len()).sum::<usize>() / 2;
        if edges > comp.len() {
            return Err(Error::Invariant(format!(
                "G1 component with {} nodes and {edges} edges has more than one cycle\n{}",
                comp.len(),
                wg.dump()
            )));
        }
        if edges < comp.len() {
            continue;
        }
        // strip leaves; what survives is the cycle
        let mut deg: BTreeMap<Node, usize> = comp.iter().map(|v| (*v, adj[v].len())).collect();
        let mut stack: Vec<Node> = comp.iter().copied().filter(|v| deg[v] == 1).collect();
        let mut gone: BTreeSet<Node> = BTreeSet::new();
        while let Some(v) = stack.pop() {
            if !gone.insert(v) {
                continue;
            }
            for u in &adj[&v] {
                if gone.contains(u) {
                    continue;
                }
                let d = deg.get_mut(u).unwrap();
                *d -= 1;
                if *d == 1 {
                    stack.push(*u);
                }
            }
        }
        let on_cycle: BTreeSet<Node> = comp.iter().copied().filter(|v| !gone.contains(v)).collect();
        let v0 = *on_cycle.iter().next().ok_or_else(|| Error::Invariant("empty cycle".into()))?;
        let mut walk = Vec::with_capacity(on_cycle.len());
        walk.push(v0);
        let mut prev = v0;
        let mut cur = *adj[&v0].iter().find(|u| on_cycle.contains(u)).unwrap();
        while cur != v0 {
            walk.push(cur);
            let next = *adj[&cur].iter().find(|u| on_cycle.contains(u) && **u != prev).unwrap();
            prev = cur;
            cur = next;
        }
        return Ok(Some(walk));
    }
    Ok(None)
}

fn edge_of(a: Node, b: Node) -> (usize, usize) {
    match (a, b) {
        (Node::M(i), Node::J(j)) | (Node::J(j), Node::M(i)) => (i, j),
        _ => unreachable!("support graph is bipartite"),
    }
}

/// Increments along the cycle edges `e_t = (v_{t-1}, v_t)` with `mu_1 = 1`,
/// keeping every job total and every machine load other than `v0`'s fixed.
/// Returns the edges, the increments, and the resulting load change on `v0`.
pub(crate) fn cycle_direction(walk: &[Node], inst: &Instance) -> (Vec<(usize, usize)>, Vec<f64>, f64) {
    let k = walk.len();
    let edges: Vec<(usize, usize)> = (0..k).map(|t| edge_of(walk[t], walk[(t + 1) % k])).collect();
    let p = |e: (usize, usize)| inst.p(e.0, e.1).unwrap_or(0.0);
    let mut mu = Vec::with_capacity(k);
    mu.push(1.0);
    for t in 1..k {
        let prev = mu[t - 1];
        let next = match walk[t] {
            Node::J(_) => -prev,
            Node::M(_) => -p(edges[t - 1]) * prev / p(edges[t]),
        };
        mu.push(next);
    }
    let kappa = p(edges[0]) + p(edges[k - 1]) * mu[k - 1];
    (edges, mu, kappa)
}

/// Removes every G1 cycle by moving along cycle directions that never raise
/// the load of the cycle's anchor machine.
pub fn break_cycles(wg: &mut WorkingGraphs, inst: &Instance) -> Result<()> {
    while let Some(walk) = find_cycle(wg)? {
        let (edges, mu, kappa) = cycle_direction(&walk, inst);
        let x: Vec<f64> = edges.iter().map(|e| wg.g1[e]).collect();
        let upper: Vec<f64> = edges.iter().map(|e| wg.upper(e.0)).collect();
        let ((alpha, hit_plus), (beta, hit_minus)) = step_bounds(&x, &mu, &upper);
        let (t, hits) = if kappa < 0.0 { (alpha, hit_plus) } else { (-beta, hit_minus) };
        if !t.is_finite() || hits.is_empty() {
            return Err(Error::Invariant(format!("cycle step has no boundary\n{}", wg.dump())));
        }
        apply_cycle_step(wg, &edges, &mu, t, &hits);
    }
    Ok(())
}

/// Cycle removal for the assignment-cost variant: the largest edge of each
/// cycle is committed when it is at least 1/2 and deleted otherwise. If any
/// edge was deleted, every fractional value and every `ybar_i` is doubled
/// once at the end.
pub fn break_cycles_joint(wg: &mut WorkingGraphs) -> Result<()> {
    let mut deleted = false;
    while let Some(walk) = find_cycle(wg)? {
        let k = walk.len();
        let mut best: Option<((usize, usize), f64)> = None;
        for t in 0..k {
            let e = edge_of(walk[t], walk[(t + 1) % k]);
            let x = wg.g1[&e];
            best = match best {
                Some((be, bx)) if bx > x || (bx == x && be < e) => Some((be, bx)),
                _ => Some((e, x)),
            };
        }
        let ((i, j), x) = best.unwrap();
        if x >= 0.5 {
            wg.opened.insert(i);
            wg.assigned.insert(j, i);
            let drop: Vec<(usize, usize)> = wg.g1.keys().chain(wg.g2.keys()).copied().filter(|e| e.1 == j).collect();
            for e in drop {
                let old = wg.g1.remove(&e).or_else(|| wg.g2.remove(&e)).unwrap_or(0.0);
                let new = if e.0 == i { 1.0 } else { 0.0 };
                let reason = if e.0 == i { Reason::Assigned } else { Reason::Deleted };
                wg.log(Stage::CycleBreak, e, old, new, reason);
            }
        } else {
            wg.g1.remove(&(i, j));
            wg.log(Stage::CycleBreak, (i, j), x, 0.0, Reason::Deleted);
            deleted = true;
        }
    }
    if deleted {
        let keys: Vec<(usize, usize)> = wg.g1.keys().chain(wg.g2.keys()).copied().collect();
        for e in keys {
            let slot = match wg.g1.get_mut(&e) {
                Some(v) => v,
                None => wg.g2.get_mut(&e).unwrap(),
            };
            let old = *slot;
            *slot = 2.0 * old;
            wg.log(Stage::CycleBreak, e, old, 2.0 * old, Reason::Doubled);
        }
        for y in wg.ybar.iter_mut() {
            *y *= 2.0;
        }
    }
    Ok(())
}
