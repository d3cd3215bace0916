//! Dependent rounding of the activation LP with a `(2 + eps)` makespan
//! guarantee, and the variant that also pays per-pair assignment costs.
//!
//! Stages: setup strips closed machines and sorts edges into the moving
//! graph G1 and the frozen graph G2; randomized kernel steps on G1 until its
//! tight system is determined; cycle removal; a per-job side split; set-cover
//! rounding of the G2 side; star rounding of the G1 forest.

mod cycles;
mod finish;
mod graphs;
mod transform;

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

pub use cycles::{break_cycles, break_cycles_joint};
pub use finish::{
    check_fractional_cover, relax_split, round_g1, round_g2, round_g2_facility, Split, StageResult, StarRule,
};
pub use graphs::{MigrationEvent, Reason, Stage, WorkingGraphs, SNAP_TOL};
pub use transform::{rand_step, rand_step_along, StepResult};

use crate::error::{Error, Result};
use crate::lp::{build_activation_assignment_lp, build_activation_lp, FractionalSolution};
use crate::math;
use crate::model::{metrics, BoundCheck, Instance, Schedule};
use crate::rng::{self, SeededRng};

/// Regression constant for the assignment-cost variant: observed total cost
/// stays within this multiple of `(ln(n + m) + 1)` times the LP optimum on the
/// seeded test suites (measured worst case 0.40).
pub const JOINT_COST_CONSTANT: f64 = 1.0;

/// Knobs of the pipeline, all derived from `epsilon` and `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MainParams {
    pub epsilon: f64,
    pub zeta: f64,
    /// Freezing threshold divisor: edges move to G2 at `ybar_i / gamma`.
    pub gamma: f64,
    /// Star threshold: a job goes to its tree parent at value `1/eta`.
    pub eta: f64,
    /// Side split threshold `1/delta`.
    pub delta: f64,
    /// `ln n + 1`.
    pub log_term: f64,
}

impl MainParams {
    pub fn new(epsilon: f64, n: usize) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::Parameter(format!("epsilon must be positive, got {epsilon}")));
        }
        let zeta = 1.0 / epsilon;
        let log_term = math::ln_plus_one(n);
        let gamma = 1.0 + epsilon;
        let delta = (1.0 + zeta) * (1.0 + 1.0 / math::sqrt(log_term));
        let p = MainParams { epsilon, zeta, gamma, eta: gamma, delta, log_term };
        if p.star_mass() <= 0.0 || p.eta < p.gamma {
            return Err(Error::Invariant(format!("inconsistent parameters {p:?}")));
        }
        Ok(p)
    }

    /// `1 - 1/delta - 1/eta`, the value every G1 star keeps.
    pub fn star_mass(&self) -> f64 {
        1.0 - 1.0 / self.delta - 1.0 / self.eta
    }

    /// The activation-cost factor claimed against the LP optimum.
    pub fn cost_factor(&self) -> f64 {
        2.0 * (1.0 + self.zeta) * self.log_term
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MainOptions {
    /// Round G2 with independent rounds plus greedy repair instead of the
    /// deterministic greedy.
    pub randomized_g2: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MainOutcome {
    pub schedule: Schedule,
    pub frac: FractionalSolution,
    pub params: MainParams,
    /// Final state, including the migration log.
    pub graphs: WorkingGraphs,
    pub split: Split,
    pub checks: Vec<BoundCheck>,
}

impl MainOutcome {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Setup plus the randomized transform.
pub fn transform(frac: &FractionalSolution, inst: &Instance, params: &MainParams, seed: u64) -> Result<WorkingGraphs> {
    transform_observed(frac, inst, params, seed, &mut |_| {})
}

/// [`transform`] with a callback on the state after setup and after each
/// step.
pub fn transform_observed(
    frac: &FractionalSolution,
    inst: &Instance,
    params: &MainParams,
    seed: u64,
    observe: &mut dyn FnMut(&WorkingGraphs),
) -> Result<WorkingGraphs> {
    let mut rng = rng::from_seed(seed);
    run_transform(frac, inst, params, &mut rng, observe)
}

fn run_transform(
    frac: &FractionalSolution,
    inst: &Instance,
    params: &MainParams,
    rng: &mut SeededRng,
    observe: &mut dyn FnMut(&WorkingGraphs),
) -> Result<WorkingGraphs> {
    let mut wg = transform::setup(frac, inst, params.gamma)?;
    transform::run_transform(&mut wg, inst, rng, observe)?;
    Ok(wg)
}

/// Solves the activation LP at makespan `t` on every machine and rounds it.
pub fn round_activation(inst: &Instance, t: f64, epsilon: f64, seed: u64) -> Result<MainOutcome> {
    round_activation_budgets(inst, &vec![t; inst.m()], epsilon, seed, MainOptions::default())
}

/// Per-machine budgets version of [`round_activation`].
pub fn round_activation_budgets(
    inst: &Instance,
    budgets: &[f64],
    epsilon: f64,
    seed: u64,
    opts: MainOptions,
) -> Result<MainOutcome> {
    let frac = build_activation_lp(inst, budgets)?.solve()?.ok_or(Error::Infeasible)?;
    round_fractional(&frac, inst, epsilon, seed, opts)
}

/// Rounds a given activation-LP solution (its `budgets` are the per-machine
/// makespan targets).
pub fn round_fractional(
    frac: &FractionalSolution,
    inst: &Instance,
    epsilon: f64,
    seed: u64,
    opts: MainOptions,
) -> Result<MainOutcome> {
    let params = MainParams::new(epsilon, inst.n())?;
    let mut rng = rng::from_seed(seed);
    let mut wg = run_transform(frac, inst, &params, &mut rng, &mut |_| {})?;
    break_cycles(&mut wg, inst)?;
    let split = relax_split(&mut wg, inst, params.delta);
    let g2 = round_g2(&wg, inst, &split, params.delta, if opts.randomized_g2 { Some(&mut rng) } else { None })?;
    let mut open: BTreeSet<usize> = wg.opened.clone();
    open.extend(g2.opened.iter().copied());
    let g1 = round_g1(&wg, inst, params.eta, StarRule::Activation, &open)?;
    let schedule = assemble(inst, &wg, &[&g2, &g1])?;

    let mut checks = stage_checks(inst, &split, &params, &g2, &g1);
    let m = metrics(inst, &schedule)?;
    let t_max = math::max_or_zero(frac.budgets.iter().copied());
    checks.push(BoundCheck::at_most("makespan", (2.0 + epsilon) * t_max, m.makespan, 1e-6));
    checks.push(BoundCheck::at_most(
        "activation_cost",
        params.cost_factor() * frac.objective,
        m.activation_cost,
        1e-6,
    ));
    let loads = schedule.loads(inst)?;
    let by_machine = schedule.jobs_by_machine(inst.m());
    for i in 0..inst.m() {
        let pmax = math::max_or_zero(by_machine[i].iter().map(|&j| inst.p(i, j).unwrap_or(0.0)));
        let limit = params.gamma * frac.budgets[i] + pmax;
        if loads[i] > limit + 1e-6 * f64::max(1.0, frac.budgets[i]) {
            return Err(Error::Invariant(format!(
                "machine {i} load {} exceeds {limit}\n{}",
                loads[i],
                wg.dump()
            )));
        }
    }
    Ok(MainOutcome { schedule, frac: frac.clone(), params, graphs: wg, split, checks })
}

/// The assignment-cost variant at makespan `t`.
pub fn round_activation_assignment(inst: &Instance, t: f64, epsilon: f64, seed: u64) -> Result<MainOutcome> {
    let frac = build_activation_assignment_lp(inst, t)?.solve()?.ok_or(Error::Infeasible)?;
    let params = MainParams::new(epsilon, inst.n())?;
    let mut rng = rng::from_seed(seed);
    let mut wg = run_transform(&frac, inst, &params, &mut rng, &mut |_| {})?;
    break_cycles_joint(&mut wg)?;
    let split = relax_split(&mut wg, inst, params.delta);
    let g2 = round_g2_facility(&wg, inst, &split)?;
    let mut open: BTreeSet<usize> = wg.opened.clone();
    open.extend(g2.opened.iter().copied());
    let g1 = round_g1(&wg, inst, params.eta, StarRule::Joint, &open)?;
    let schedule = assemble(inst, &wg, &[&g2, &g1])?;

    let m = metrics(inst, &schedule)?;
    let scale = math::ln(inst.n().max(1) as f64 + inst.m() as f64) + 1.0;
    let checks = vec![
        BoundCheck::at_most("makespan", (3.0 + epsilon) * t, m.makespan, 1e-6),
        BoundCheck::at_most(
            "total_cost",
            JOINT_COST_CONSTANT * scale * frac.objective,
            m.activation_cost + m.assignment_cost,
            1e-6,
        ),
    ];
    Ok(MainOutcome { schedule, frac, params, graphs: wg, split, checks })
}

fn assemble(inst: &Instance, wg: &WorkingGraphs, stages: &[&StageResult]) -> Result<Schedule> {
    let mut s = Schedule::new();
    for (&j, &i) in &wg.assigned {
        s.place(j, i);
    }
    for st in stages {
        for (&j, &i) in &st.assign {
            if s.assign.contains_key(&j) {
                return Err(Error::Invariant(format!("job {j} rounded twice")));
            }
            s.place(j, i);
        }
    }
    if let Some(j) = (0..inst.n()).find(|j| !s.assign.contains_key(j)) {
        return Err(Error::Invariant(format!("job {j} left unassigned\n{}", wg.dump())));
    }
    s.close_idle();
    s.validate(inst)?;
    Ok(s)
}

/// Stage-wise load bounds: the G2 side adds at most `gamma T''_i` and the G1
/// side at most `eta T'_i` plus one job.
fn stage_checks(
    inst: &Instance,
    split: &Split,
    params: &MainParams,
    g2: &StageResult,
    g1: &StageResult,
) -> Vec<BoundCheck> {
    let mut l2 = vec![0.0; inst.m()];
    let mut l1 = vec![0.0; inst.m()];
    let mut p1 = vec![0.0f64; inst.m()];
    for (&j, &i) in &g2.assign {
        l2[i] += inst.p(i, j).unwrap_or(0.0);
    }
    for (&j, &i) in &g1.assign {
        let p = inst.p(i, j).unwrap_or(0.0);
        l1[i] += p;
        p1[i] = p1[i].max(p);
    }
    let mut worst2 = (0.0, 0.0, f64::NEG_INFINITY);
    let mut worst1 = (0.0, 0.0, f64::NEG_INFINITY);
    for i in 0..inst.m() {
        let c2 = params.gamma * split.t_g2[i];
        if l2[i] - c2 > worst2.2 {
            worst2 = (c2, l2[i], l2[i] - c2);
        }
        let c1 = params.eta * split.t_g1[i] + p1[i];
        if l1[i] - c1 > worst1.2 {
            worst1 = (c1, l1[i], l1[i] - c1);
        }
    }
    vec![
        BoundCheck::at_most("g2_load", worst2.0, worst2.1, 1e-6),
        BoundCheck::at_most("g1_load", worst1.0, worst1.1, 1e-6),
    ]
}
