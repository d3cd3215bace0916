//! Greedy machine selection over fractional coverage.
//!
//! `f(S)` is the largest number of jobs that machines in `S` can process
//! fractionally within makespan `T`. Machines are added by best coverage gain
//! per unit of activation cost until `f(S) > n - 1`; the fractional
//! assignment is then rounded through machine copies, which at most doubles
//! the makespan.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lp::build_coverage_lp;
use crate::model::{metrics, BoundCheck, Instance, Schedule};
use crate::st_round::st_round;

/// Gains at or below this count as no progress.
pub const GAIN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pick {
    pub machine: usize,
    pub gain: f64,
    /// `gain / a_i`; infinite for zero-cost machines.
    pub ratio: f64,
    pub f_after: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyTrace {
    /// Zero-cost machines opened before the loop.
    pub preopened: Vec<usize>,
    pub picks: Vec<Pick>,
    pub final_f: f64,
    /// Coverage-optimal fractional assignment on the chosen set.
    pub x: Vec<Vec<f64>>,
    pub schedule: Schedule,
    pub checks: Vec<BoundCheck>,
}

impl GreedyTrace {
    /// Machines chosen by the greedy, in order.
    pub fn chosen(&self) -> Vec<usize> {
        self.preopened.iter().copied().chain(self.picks.iter().map(|p| p.machine)).collect()
    }
}

/// `f(S)` at makespan `t`.
pub fn coverage(inst: &Instance, s: &BTreeSet<usize>, t: f64) -> Result<f64> {
    if s.is_empty() {
        return Ok(0.0);
    }
    Ok(build_coverage_lp(inst, s, t)?.solve()?.0)
}

pub fn greedy_schedule(inst: &Instance, t: f64) -> Result<GreedyTrace> {
    let (m, n) = (inst.m(), inst.n());
    let target = n as f64 - 1.0 + GAIN_TOL;
    let mut s: BTreeSet<usize> = (0..m).filter(|&i| inst.cost(i) == 0.0).collect();
    let preopened: Vec<usize> = s.iter().copied().collect();
    let mut f = coverage(inst, &s, t)?;
    let mut picks = Vec::new();
    while f <= target {
        let mut best: Option<Pick> = None;
        for i in (0..m).filter(|i| !s.contains(i)) {
            let mut with = s.clone();
            with.insert(i);
            let fi = coverage(inst, &with, t)?;
            let gain = fi - f;
            let ratio = gain / inst.cost(i);
            if best.map_or(true, |b| ratio > b.ratio) {
                best = Some(Pick { machine: i, gain, ratio, f_after: fi });
            }
        }
        let pick = match best {
            Some(p) if p.gain > GAIN_TOL => p,
            _ => return Err(Error::Infeasible),
        };
        s.insert(pick.machine);
        f = pick.f_after;
        picks.push(pick);
    }

    let x = if s.is_empty() { vec![vec![0.0; n]; m] } else { build_coverage_lp(inst, &s, t)?.solve()?.1 };
    let matching = st_round(&x, inst, t)?;
    if matching.assignment.len() != n {
        let missing: Vec<usize> = (0..n).filter(|j| !matching.assignment.contains_key(j)).collect();
        return Err(Error::Invariant(format!("copy matching leaves jobs {missing:?} unassigned at f = {f}")));
    }
    let mut schedule = matching.schedule();
    schedule.close_idle();
    schedule.validate(inst)?;
    let met = metrics(inst, &schedule)?;
    let checks = vec![BoundCheck::at_most("makespan", 2.0 * t, met.makespan, 1e-6)];
    Ok(GreedyTrace { preopened, picks, final_f: f, x, schedule, checks })
}
