//! Release times and outliers on top of the dependent-rounding pipeline.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lp::build_activation_lp_filtered;
use crate::math;
use crate::model::{metrics, BoundCheck, Instance, Schedule};
use crate::round_main::{round_fractional, MainOptions, MainOutcome};

#[derive(Debug, Clone, PartialEq)]
pub struct ReleaseOutcome {
    pub main: MainOutcome,
    /// Per machine, its jobs by release time then index.
    pub order: Vec<Vec<usize>>,
    /// Per machine, the finish time of the replayed timeline.
    pub completion: Vec<f64>,
    pub checks: Vec<BoundCheck>,
}

impl ReleaseOutcome {
    pub fn schedule(&self) -> &Schedule {
        &self.main.schedule
    }

    pub fn horizon(&self) -> f64 {
        math::max_or_zero(self.completion.iter().copied())
    }
}

/// Whether pair `(i, j)` survives the release filter at `t`.
pub fn release_allows(inst: &Instance, i: usize, j: usize, t: f64) -> bool {
    match inst.p(i, j) {
        Some(p) => inst.release(i, j) + p <= t,
        None => false,
    }
}

/// Start each job at the later of its release time and the previous finish.
pub fn replay(inst: &Instance, machine: usize, jobs: &[usize]) -> f64 {
    let mut clock: f64 = 0.0;
    for &j in jobs {
        clock = clock.max(inst.release(machine, j)) + inst.p(machine, j).unwrap_or(0.0);
    }
    clock
}

/// Drops pairs with `r_ij + p_ij > t` from the LP, rounds, and runs each
/// machine's jobs in release order.
pub fn round_with_release(inst: &Instance, t: f64, epsilon: f64, seed: u64) -> Result<ReleaseOutcome> {
    if inst.release_times().is_none() {
        return Err(Error::Parameter("instance carries no release times".into()));
    }
    let budgets = vec![t; inst.m()];
    let frac = build_activation_lp_filtered(inst, &budgets, false, |i, j| release_allows(inst, i, j, t))?
        .solve()?
        .ok_or(Error::Infeasible)?;
    let main = round_fractional(&frac, inst, epsilon, seed, MainOptions::default())?;
    let mut order = main.schedule.jobs_by_machine(inst.m());
    for (i, jobs) in order.iter_mut().enumerate() {
        jobs.sort_by(|&a, &b| inst.release(i, a).total_cmp(&inst.release(i, b)).then(a.cmp(&b)));
    }
    let completion: Vec<f64> = order.iter().enumerate().map(|(i, jobs)| replay(inst, i, jobs)).collect();
    let horizon = math::max_or_zero(completion.iter().copied());
    let mut checks = main.checks.clone();
    checks.push(BoundCheck::at_most("completion", (3.0 + epsilon) * t, horizon, 1e-6));
    Ok(ReleaseOutcome { main, order, completion, checks })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OutlierOptions {
    /// Put the most profitable dropped job back on the real machine with the
    /// least added cost.
    pub repair: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutlierOutcome {
    /// Schedule over the real machines; dropped jobs are listed as such.
    pub schedule: Schedule,
    /// Run on the instance with the dummy machine appended.
    pub main: MainOutcome,
    pub dropped_profit: f64,
    /// Job moved back by the repair step.
    pub repaired: Option<usize>,
    pub checks: Vec<BoundCheck>,
}

pub fn round_with_outliers(inst: &Instance, t: f64, epsilon: f64, drop_budget: f64, seed: u64) -> Result<OutlierOutcome> {
    round_with_outliers_opts(inst, t, epsilon, drop_budget, seed, OutlierOptions::default())
}

/// Adds a free dummy machine on which job `j` takes `pi_j` time and whose
/// budget is `drop_budget`; jobs landing there are dropped.
pub fn round_with_outliers_opts(
    inst: &Instance,
    t: f64,
    epsilon: f64,
    drop_budget: f64,
    seed: u64,
    opts: OutlierOptions,
) -> Result<OutlierOutcome> {
    let profits = inst.profits().ok_or_else(|| Error::Parameter("instance carries no profits".into()))?;
    if !(drop_budget.is_finite() && drop_budget >= 0.0) {
        return Err(Error::Parameter(format!("drop budget must be nonnegative, got {drop_budget}")));
    }
    let m = inst.m();
    let aug = inst.with_extra_machine(0.0, profits.iter().map(|&p| Some(p)).collect(), None);
    let mut budgets = vec![t; m];
    budgets.push(drop_budget);
    let frac = build_activation_lp_filtered(&aug, &budgets, false, |_, _| true)?.solve()?.ok_or(Error::Infeasible)?;
    let main = round_fractional(&frac, &aug, epsilon, seed, MainOptions::default())?;

    let mut schedule = Schedule::new();
    for (&j, &i) in &main.schedule.assign {
        if i == m {
            schedule.dropped.insert(j);
        } else {
            schedule.place(j, i);
        }
    }
    let mut repaired = None;
    if opts.repair {
        let best = schedule
            .dropped
            .iter()
            .copied()
            .max_by(|&a, &b| profits[a].total_cmp(&profits[b]).then(b.cmp(&a)));
        if let Some(j) = best {
            let extra = |i: usize| inst.c(i, j) + if schedule.active.contains(&i) { 0.0 } else { inst.cost(i) };
            let target = (0..m)
                .filter(|&i| inst.p_within(i, j, t).is_some())
                .min_by(|&a, &b| extra(a).total_cmp(&extra(b)).then(a.cmp(&b)));
            if let Some(i) = target {
                schedule.dropped.remove(&j);
                schedule.place(j, i);
                repaired = Some(j);
            }
        }
    }
    schedule.validate(inst)?;
    let met = metrics(inst, &schedule)?;
    let dropped_profit: f64 = schedule.dropped.iter().map(|&j| profits[j]).sum();
    let max_pi = math::max_or_zero(profits.iter().copied());
    let span = if repaired.is_some() { 3.0 + epsilon } else { 2.0 + epsilon };
    let mut checks: Vec<BoundCheck> = main.checks.iter().filter(|c| c.name != "makespan").cloned().collect();
    checks.push(BoundCheck::at_most("makespan", span * t, met.makespan, 1e-6));
    checks.push(BoundCheck::at_most("dropped_profit", (1.0 + epsilon) * drop_budget + max_pi, dropped_profit, 1e-6));
    Ok(OutlierOutcome { schedule, main, dropped_profit, repaired, checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::round_main::round_activation;

    fn base() -> Instance {
        Instance::new(vec![2.0, 3.0], vec![vec![Some(2.0), Some(3.0), Some(1.0)], vec![Some(1.0), Some(2.0), Some(2.0)]])
            .unwrap()
    }

    #[test]
    fn zero_release_matches_plain_run() {
        let inst = base().with_release_times(vec![vec![0.0; 3]; 2]).unwrap();
        let a = round_with_release(&inst, 4.0, 1.0, 7).unwrap();
        let b = round_activation(&inst, 4.0, 1.0, 7).unwrap();
        assert_eq!(a.main.schedule, b.schedule);
    }

    #[test]
    fn late_release_everywhere_is_infeasible() {
        let inst = base().with_release_times(vec![vec![0.0, 2.0, 0.0], vec![0.0, 3.0, 0.0]]).unwrap();
        assert!(matches!(round_with_release(&inst, 4.0, 1.0, 0), Err(Error::Infeasible)));
    }

    #[test]
    fn replay_waits_for_release() {
        let inst = base().with_release_times(vec![vec![5.0, 0.0, 1.0], vec![0.0; 3]]).unwrap();
        assert_eq!(replay(&inst, 0, &[2, 0]), 7.0);
    }

    #[test]
    fn generous_drop_budget_closes_everything() {
        let inst = base().with_profits(vec![1.0, 1.0, 1.0]).unwrap();
        let out = round_with_outliers(&inst, 4.0, 1.0, 3.0, 0).unwrap();
        assert!(out.schedule.active.is_empty());
        assert_eq!(out.dropped_profit, 3.0);
        assert!(out.checks.iter().all(|c| c.pass));
    }

    #[test]
    fn zero_drop_budget_drops_nothing() {
        let inst = base().with_profits(vec![1.0, 2.0, 3.0]).unwrap();
        let out = round_with_outliers(&inst, 4.0, 1.0, 0.0, 0).unwrap();
        assert!(out.schedule.dropped.is_empty());
    }

    #[test]
    fn repair_lifts_most_profitable_job() {
        let inst = base().with_profits(vec![1.0, 1.0, 1.0]).unwrap();
        let out = round_with_outliers_opts(&inst, 4.0, 1.0, 3.0, 0, OutlierOptions { repair: true }).unwrap();
        assert_eq!(out.repaired, Some(0));
        assert_eq!(out.schedule.dropped.len(), 2);
    }
}
