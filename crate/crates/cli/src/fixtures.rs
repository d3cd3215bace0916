//! Seeded instance families shared by `compare`, the golden files and the
//! acceptance run.

use machact::lp::{build_activation_lp, FractionalSolution};
use machact::model::{
    add_random_assignment_costs, add_random_profits, gen_gap_instance, gen_random_instance, gen_random_set_system,
    gen_setcover_instance, Profile,
};
use machact::rng;
use machact::round_simple::simple_round;
use machact::Instance;

use crate::error::CliResult;

/// 30 unrelated instances with `3 <= n <= 8`, `2 <= m <= 5`.
pub fn unrelated_suite() -> Vec<Instance> {
    (0..30u64)
        .map(|seed| {
            let n = 3 + (seed % 6) as usize;
            let m = 2 + (seed % 4) as usize;
            gen_random_instance(seed, n, m, Profile::Unrelated).expect("valid generator arguments")
        })
        .collect()
}

/// 20 related instances with `4 <= n <= 8`, `2 <= m <= 4`.
pub fn related_suite() -> Vec<Instance> {
    (0..20u64)
        .map(|seed| {
            let n = 4 + (seed % 5) as usize;
            let m = 2 + (seed % 3) as usize;
            gen_random_instance(1000 + seed, n, m, Profile::Related).expect("valid generator arguments")
        })
        .collect()
}

/// 10 set systems: 6 sets over 8 elements.
pub fn setcover_suite() -> Vec<Instance> {
    (0..10u64)
        .map(|seed| gen_setcover_instance(&gen_random_set_system(seed, 8, 6), 8).expect("every element is covered"))
        .collect()
}

pub fn gap_fixture() -> Instance {
    gen_gap_instance(4, 100.0, 12.0).expect("valid gap arguments")
}

/// The partial-GAP instance with its makespan `t`, profit target and cost
/// budget.
#[derive(Debug, Clone)]
pub struct PartialGapFixture {
    pub inst: Instance,
    pub t: f64,
    pub pi_target: f64,
    pub cost_budget: f64,
}

pub fn partial_gap_fixture() -> PartialGapFixture {
    let inst = gen_random_instance(21, 6, 3, Profile::Unrelated).expect("valid generator arguments");
    let inst = add_random_profits(inst, 22, 9).expect("sizes match");
    let inst = add_random_assignment_costs(inst, 23, 6).expect("sizes match");
    let total: f64 = inst.profits().map_or(0.0, |p| p.iter().sum());
    PartialGapFixture { inst, t: 20.0, pi_target: 0.6 * total, cost_budget: 12.0 }
}

/// Instance and makespan guess on which the simple-rounding load constant is
/// measured.
pub fn simple_load_case() -> (Instance, f64) {
    let inst = gen_random_instance(11, 8, 4, Profile::Unrelated).expect("valid generator arguments");
    let t = inst.makespan_upper_bound() / 3.0;
    (inst, t)
}

pub const SIMPLE_LOAD_RUNS: u64 = 500;

/// Largest `max load / (T ln n)` seen over seeds `0..runs`.
pub fn measure_simple_load_constant(runs: u64) -> CliResult<f64> {
    let (inst, t) = simple_load_case();
    let frac = build_activation_lp(&inst, &vec![t; inst.m()])?.solve()?.ok_or(machact::Error::Infeasible)?;
    let scale = t * (inst.n() as f64).ln();
    let mut worst: f64 = 0.0;
    for seed in 0..runs {
        let tr = simple_round(&frac, &inst, seed)?;
        let loads = tr.schedule.loads(&inst)?;
        worst = worst.max(loads.iter().copied().fold(0.0, f64::max) / scale);
    }
    Ok(worst)
}

/// A dense feasible fractional point: every pair carries mass, openings are
/// random in `[0.6, 1]` and each budget is the machine's load over its
/// opening. Unlike LP vertices these leave the transform room to move.
pub fn dense_fractional(seed: u64) -> (Instance, FractionalSolution) {
    let n = 4 + (seed % 4) as usize;
    let m = 2 + (seed % 3) as usize;
    let inst = gen_random_instance(seed, n, m, Profile::Unrelated).expect("valid generator arguments");
    let mut r = rng::from_seed(seed ^ 0x5eed);
    let w: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| 0.2 + 0.8 * rng::unit(&mut r)).collect()).collect();
    let x: Vec<Vec<f64>> =
        (0..m).map(|i| (0..n).map(|j| w[i][j] / (0..m).map(|k| w[k][j]).sum::<f64>()).collect()).collect();
    let y: Vec<f64> = (0..m)
        .map(|i| f64::max(0.6 + 0.4 * rng::unit(&mut r), x[i].iter().copied().fold(0.0, f64::max)))
        .collect();
    let time = |i: usize, j: usize| inst.p(i, j).unwrap_or(0.0);
    let budgets: Vec<f64> = (0..m)
        .map(|i| {
            let load: f64 = (0..n).map(|j| x[i][j] * time(i, j)).sum();
            let pmax = (0..n).map(|j| time(i, j)).fold(0.0, f64::max);
            f64::max(load / y[i], pmax)
        })
        .collect();
    let objective = y.iter().zip(inst.costs()).map(|(y, c)| y * c).sum();
    (inst, FractionalSolution { y, x, objective, budgets })
}
