//! Iterated independent rounding of the activation LP.
//!
//! Each round opens machine `i` with probability `ybar_i`, scales the open
//! machine's share of every residual job to `xbar_ij / ybar_i`, raises those
//! shares uniformly until the machine's fractional load reaches its budget or
//! every share is 1, and assigns each job independently with its share. The
//! process repeats on the unassigned jobs.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lp::FractionalSolution;
use crate::math;
use crate::model::{Instance, Schedule};
use crate::rng::{self, SeededRng};

#[derive(Debug, Clone, PartialEq)]
pub struct SimpleRoundTrace {
    pub iterations: usize,
    /// Accepted `(job, machine)` pairs per round, after duplicates are
    /// resolved toward the lowest machine index.
    pub per_iteration_assignments: Vec<Vec<(usize, usize)>>,
    /// Set when the round cap was hit and the leftovers were placed on their
    /// cheapest feasible machine.
    pub forced: bool,
    pub schedule: Schedule,
}

/// Round cap: `10 * ceil(ln n) + 10`.
pub fn iteration_cap(n: usize) -> usize {
    10 * math::ceil(math::ln(n.max(1) as f64)) as usize + 10
}

/// Uniformly raises `x` (entries in `[0, 1]`) at a common rate, freezing
/// entries that reach 1, until `sum p_k x_k` reaches `budget` or all entries
/// are 1. Exact event-driven version of the continuous process.
pub fn water_fill(x: &mut [f64], p: &[f64], budget: f64) {
    let mut load: f64 = x.iter().zip(p).map(|(a, b)| a * b).sum();
    loop {
        let open: Vec<usize> = (0..x.len()).filter(|&k| x[k] < 1.0).collect();
        if open.is_empty() {
            return;
        }
        let slack = budget - load;
        if slack <= 1e-12 * f64::max(budget, 1.0) {
            return;
        }
        let rate: f64 = open.iter().map(|&k| p[k]).sum();
        let to_cap = open.iter().map(|&k| 1.0 - x[k]).fold(f64::INFINITY, f64::min);
        let step = if rate > 0.0 { f64::min(to_cap, slack / rate) } else { to_cap };
        for &k in &open {
            x[k] = if 1.0 - x[k] <= step + 1e-15 { 1.0 } else { x[k] + step };
        }
        load = x.iter().zip(p).map(|(a, b)| a * b).sum();
        if step < to_cap {
            return;
        }
    }
}

pub fn simple_round(frac: &FractionalSolution, inst: &Instance, seed: u64) -> Result<SimpleRoundTrace> {
    frac.check(inst)?;
    let (m, n) = (inst.m(), inst.n());
    let mut rng = rng::from_seed(seed);
    let mut residual: Vec<bool> = vec![true; n];
    let mut remaining = n;
    let mut sched = Schedule::new();
    let mut per_iter = Vec::new();
    let cap = iteration_cap(n);
    let mut iterations = 0;

    while remaining > 0 && iterations < cap {
        iterations += 1;
        let accepted = one_round(frac, inst, &residual, &mut rng);
        let mut this_round = Vec::new();
        for (j, i) in accepted {
            residual[j] = false;
            remaining -= 1;
            sched.place(j, i);
            this_round.push((j, i));
        }
        per_iter.push(this_round);
    }

    let forced = remaining > 0;
    for j in (0..n).filter(|&j| residual[j]) {
        let i = (0..m)
            .filter(|&i| inst.p_within(i, j, frac.budgets[i]).is_some())
            .min_by(|&a, &b| inst.cost(a).total_cmp(&inst.cost(b)).then(a.cmp(&b)))
            .ok_or_else(|| Error::Precondition(alloc::format!("job {j} has no machine within budget")))?;
        sched.place(j, i);
    }
    Ok(SimpleRoundTrace { iterations, per_iteration_assignments: per_iter, forced, schedule: sched })
}

/// One round over the residual jobs. Returns job -> machine with the lowest
/// accepting machine kept.
fn one_round(
    frac: &FractionalSolution,
    inst: &Instance,
    residual: &[bool],
    rng: &mut SeededRng,
) -> BTreeMap<usize, usize> {
    let (m, n) = (inst.m(), inst.n());
    let opened: Vec<usize> = (0..m).filter(|&i| rng::bernoulli(rng, frac.y[i])).collect();
    let mut out = BTreeMap::new();
    for i in opened {
        let jobs: Vec<usize> = (0..n).filter(|&j| residual[j] && frac.x[i][j] > 0.0).collect();
        if jobs.is_empty() {
            continue;
        }
        let mut x: Vec<f64> = jobs.iter().map(|&j| f64::min(1.0, frac.x[i][j] / frac.y[i])).collect();
        let p: Vec<f64> = jobs.iter().map(|&j| inst.p(i, j).unwrap_or(0.0)).collect();
        water_fill(&mut x, &p, frac.budgets[i]);
        for (k, &j) in jobs.iter().enumerate() {
            if rng::bernoulli(rng, x[k]) {
                out.entry(j).or_insert(i);
            }
        }
    }
    out
}
