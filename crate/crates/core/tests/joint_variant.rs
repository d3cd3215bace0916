mod common;

use common::lp_case;
use machact::lp::build_activation_assignment_lp;
use machact::model::{add_random_assignment_costs, metrics};
use machact::oracle::{exact_joint_cost, OracleLimits};
use machact::round_main::{round_activation_assignment, JOINT_COST_CONSTANT};

#[test]
fn joint_cost_within_regression_constant() {
    let mut worst_cost: f64 = 0.0;
    let mut worst_span: f64 = 0.0;
    for seed in 0..30u64 {
        let (inst, t, _) = lp_case(seed);
        let inst = add_random_assignment_costs(inst, seed + 70, 5).unwrap();
        let lp = build_activation_assignment_lp(&inst, t).unwrap().solve().unwrap().unwrap();
        if let Some((opt, _)) = exact_joint_cost(&inst, t, OracleLimits::default()).unwrap() {
            assert!(lp.objective <= opt + 1e-6, "seed {seed}: LP {} above integral {opt}", lp.objective);
        }
        for run in 0..5 {
            let out = round_activation_assignment(&inst, t, 0.5, seed * 10 + run).unwrap();
            let met = metrics(&inst, &out.schedule).unwrap();
            let scale = ((inst.n() + inst.m()) as f64).ln() + 1.0;
            let ratio = (met.activation_cost + met.assignment_cost) / (scale * lp.objective);
            worst_cost = worst_cost.max(ratio);
            worst_span = worst_span.max(met.makespan / t);
            assert!(ratio <= JOINT_COST_CONSTANT, "seed {seed}: ratio {ratio}");
            assert!(met.makespan <= 3.5 * t + 1e-6, "seed {seed}");
        }
    }
    println!("worst joint cost ratio {worst_cost:.4}, worst makespan / T {worst_span:.4}");
}
