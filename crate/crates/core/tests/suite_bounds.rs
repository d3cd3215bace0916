use std::collections::BTreeSet;

use machact::greedy::greedy_schedule;
use machact::lp::build_activation_lp;
use machact::math::ln_plus_one;
use machact::model::{gen_gap_instance, gen_random_instance, gen_random_set_system, gen_setcover_instance, metrics, Instance, Profile};
use machact::oracle::{exact_cover, exact_frontier, OracleLimits};
use machact::round_main::round_activation;

fn unrelated_suite() -> Vec<Instance> {
    (0..30u64)
        .map(|seed| {
            let n = 3 + (seed % 6) as usize;
            let m = 2 + (seed % 4) as usize;
            gen_random_instance(seed, n, m, Profile::Unrelated).unwrap()
        })
        .collect()
}

#[test]
fn main_rounding_against_frontier() {
    for (k, inst) in unrelated_suite().iter().enumerate() {
        for pt in exact_frontier(inst, OracleLimits::default()).unwrap() {
            let lp = build_activation_lp(inst, &vec![pt.makespan; inst.m()]).unwrap().solve().unwrap().unwrap();
            assert!(lp.objective <= pt.activation_cost + 1e-6);
            for eps in [0.5, 1.0] {
                let out = round_activation(inst, pt.makespan, eps, k as u64).unwrap();
                let met = metrics(inst, &out.schedule).unwrap();
                assert!(met.makespan <= (2.0 + eps) * pt.makespan + 1e-6, "instance {k}");
                let bound = 2.0 * (1.0 + 1.0 / eps) * ln_plus_one(inst.n()) * lp.objective;
                assert!(met.activation_cost <= bound + 1e-6, "instance {k}: {} > {bound}", met.activation_cost);
            }
        }
    }
}

#[test]
fn greedy_against_frontier() {
    let mut worst: f64 = 0.0;
    for (k, inst) in unrelated_suite().iter().enumerate() {
        for pt in exact_frontier(inst, OracleLimits::default()).unwrap() {
            let tr = greedy_schedule(inst, pt.makespan).unwrap();
            let met = metrics(inst, &tr.schedule).unwrap();
            assert!(met.makespan <= 2.0 * pt.makespan + 1e-6, "instance {k}");
            let bound = ln_plus_one(inst.n()) * pt.activation_cost;
            assert!(met.activation_cost <= bound + 1e-6, "instance {k}: {} > {bound}", met.activation_cost);
            worst = worst.max(met.activation_cost / pt.activation_cost);
        }
    }
    println!("worst greedy cost ratio {worst:.3}");
}

#[test]
fn greedy_on_set_cover() {
    for seed in 0..10u64 {
        let sets = gen_random_set_system(seed, 8, 6);
        let inst = gen_setcover_instance(&sets, 8).unwrap();
        let (opt, _) = exact_cover(&inst).unwrap().unwrap();
        let tr = greedy_schedule(&inst, 0.0).unwrap();
        let met = metrics(&inst, &tr.schedule).unwrap();
        assert!(met.activation_cost <= ln_plus_one(inst.n()) * opt + 1e-6);
        assert_eq!(met.makespan, 0.0);
        let chosen: BTreeSet<usize> = tr.chosen().into_iter().collect();
        assert!(tr.schedule.active.is_subset(&chosen));
    }
}

#[test]
fn gap_fixture() {
    let inst = gen_gap_instance(4, 100.0, 12.0).unwrap();
    let lp = build_activation_lp(&inst, &[12.0; 4]).unwrap().solve().unwrap().unwrap();
    println!("gap LP {}", lp.objective);
    assert!((25.0..=29.0).contains(&lp.objective), "{}", lp.objective);
    let f = exact_frontier(&inst, OracleLimits::default()).unwrap();
    let best = f.iter().filter(|p| p.makespan <= 12.0).map(|p| p.activation_cost).fold(f64::INFINITY, f64::min);
    assert_eq!(best, 100.0);
}
