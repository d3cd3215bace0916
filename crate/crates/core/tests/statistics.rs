mod common;

use common::{dense_case, mean_se};
use machact::linalg::{BipartiteGraph, DenseMatrix};
use machact::lp::build_activation_lp;
use machact::model::{add_random_assignment_costs, add_random_profits, gen_random_instance, metrics, Profile};
use machact::rng;
use machact::round_main::{rand_step, rand_step_along, transform, MainParams};
use machact::round_simple::simple_round;
use machact::st_round::{dependent_round, partial_gap};

#[test]
fn rand_step_two_coordinates() {
    let a = DenseMatrix::from_rows(&[vec![1.0, 1.0]]).unwrap();
    let mut rng = rng::from_seed(1);
    let trials = 10_000;
    let mut first = 0;
    for _ in 0..trials {
        let out = rand_step(&a, &[0.3, 0.7], &[1.0], &[1.0, 1.0], &mut rng).unwrap();
        match (out.x[0], out.x[1]) {
            (x, y) if x == 1.0 && y == 0.0 => first += 1,
            (x, y) if x == 0.0 && y == 1.0 => {}
            other => panic!("unexpected outcome {other:?}"),
        }
    }
    let freq = first as f64 / trials as f64;
    assert!((freq - 0.3).abs() <= 0.02, "{freq}");
}

#[test]
fn rand_step_is_unbiased() {
    // two equalities in four unknowns
    let a = DenseMatrix::from_rows(&[vec![1.0, 1.0, 1.0, 0.0], vec![2.0, 0.0, 1.0, 3.0]]).unwrap();
    let x = [0.2, 0.5, 0.3, 0.4];
    let b = a.mul_vec(&x);
    let upper = [1.0, 0.8, 0.9, 1.0];
    let mut rng = rng::from_seed(2);
    let samples: Vec<Vec<f64>> =
        (0..5000).map(|_| rand_step(&a, &x, &b, &upper, &mut rng).unwrap().x).collect();
    for k in 0..4 {
        let col: Vec<f64> = samples.iter().map(|s| s[k]).collect();
        let (mean, se) = mean_se(&col);
        assert!((mean - x[k]).abs() <= 3.0 * se + 1e-12, "coordinate {k}: {mean} vs {}", x[k]);
    }
    for s in &samples {
        let ax = a.mul_vec(s);
        assert!(ax.iter().zip(&b).all(|(u, v)| (u - v).abs() <= 1e-7));
    }
}

#[test]
fn rand_step_ignores_direction_scale() {
    let x = [0.25, 0.5, 0.25];
    let r = [1.0, -2.0, 1.0];
    let r3: Vec<f64> = r.iter().map(|v| v * 3.0).collect();
    let upper = [1.0; 3];
    for seed in 0..200 {
        let a = rand_step_along(&x, &r, &upper, &mut rng::from_seed(seed)).unwrap();
        let b = rand_step_along(&x, &r3, &upper, &mut rng::from_seed(seed)).unwrap();
        assert_eq!(a.plus, b.plus);
        for k in 0..3 {
            assert!((a.x[k] - b.x[k]).abs() <= 1e-12);
        }
    }
}

#[test]
fn transform_preserves_marginals() {
    // no zero times in this family, so every edge value is a martingale
    let (inst, frac) = dense_case(2);
    let params = MainParams::new(1.0, inst.n()).unwrap();
    assert!(transform(&frac, &inst, &params, 0).unwrap().steps > 0);
    let runs = 2000;
    let mut vals = vec![vec![Vec::with_capacity(runs); inst.n()]; inst.m()];
    for seed in 0..runs as u64 {
        let wg = transform(&frac, &inst, &params, seed).unwrap();
        for i in 0..inst.m() {
            for j in 0..inst.n() {
                vals[i][j].push(wg.edge_value(i, j));
            }
        }
    }
    for i in 0..inst.m() {
        for j in 0..inst.n() {
            let (mean, se) = mean_se(&vals[i][j]);
            assert!((mean - frac.x[i][j]).abs() <= 3.0 * se + 1e-9, "edge ({i}, {j}): {mean} vs {}", frac.x[i][j]);
        }
    }
}

fn frequencies(g: &BipartiteGraph, trials: u64) -> Vec<f64> {
    let mut hits = vec![0u64; g.edges().len()];
    for seed in 0..trials {
        for (e, &on) in dependent_round(g, seed).unwrap().iter().enumerate() {
            hits[e] += on as u64;
        }
    }
    hits.iter().map(|&h| h as f64 / trials as f64).collect()
}

#[test]
fn dependent_round_two_edges() {
    let g = BipartiteGraph::new(1, 2, vec![(0, 0, Some(0.3)), (0, 1, Some(0.7))]).unwrap();
    for seed in 0..500 {
        let out = dependent_round(&g, seed).unwrap();
        assert_eq!(out.iter().filter(|&&b| b).count(), 1);
    }
    let f = frequencies(&g, 10_000);
    assert!((f[0] - 0.3).abs() <= 0.02 && (f[1] - 0.7).abs() <= 0.02, "{f:?}");
}

#[test]
fn dependent_round_four_cycle() {
    let g = BipartiteGraph::new(2, 2, vec![(0, 0, Some(0.5)), (0, 1, Some(0.5)), (1, 0, Some(0.5)), (1, 1, Some(0.5))])
        .unwrap();
    let mut diag = 0;
    let trials = 10_000;
    for seed in 0..trials {
        let out = dependent_round(&g, seed).unwrap();
        match out.as_slice() {
            [true, false, false, true] => diag += 1,
            [false, true, true, false] => {}
            other => panic!("not a perfect matching: {other:?}"),
        }
    }
    let f = diag as f64 / trials as f64;
    assert!((f - 0.5).abs() <= 0.03, "{f}");
}

#[test]
fn dependent_round_degrees_and_correlation() {
    // job 0 and job 1 share right vertex 0
    let edges = vec![
        (0, 0, Some(0.4)),
        (0, 1, Some(0.6)),
        (1, 0, Some(0.5)),
        (1, 2, Some(0.5)),
        (2, 1, Some(0.3)),
        (2, 2, Some(0.2)),
    ];
    let g = BipartiteGraph::new(3, 3, edges.clone()).unwrap();
    let trials = 10_000u64;
    let mut both = 0u64;
    let mut hits = vec![0u64; edges.len()];
    for seed in 0..trials {
        let out = dependent_round(&g, seed).unwrap();
        for v in 0..3 {
            let frac_l: f64 = edges.iter().filter(|e| e.0 == v).map(|e| e.2.unwrap()).sum();
            let deg_l = edges.iter().zip(&out).filter(|(e, &o)| e.0 == v && o).count() as f64;
            assert!(deg_l == frac_l.floor() || deg_l == frac_l.ceil(), "left {v}: {deg_l} vs {frac_l}");
            let frac_r: f64 = edges.iter().filter(|e| e.1 == v).map(|e| e.2.unwrap()).sum();
            let deg_r = edges.iter().zip(&out).filter(|(e, &o)| e.1 == v && o).count() as f64;
            assert!(deg_r == frac_r.floor() || deg_r == frac_r.ceil(), "right {v}: {deg_r} vs {frac_r}");
        }
        both += (out[0] && out[2]) as u64;
        for (e, &o) in out.iter().enumerate() {
            hits[e] += o as u64;
        }
    }
    for (e, &(_, _, x)) in edges.iter().enumerate() {
        let f = hits[e] as f64 / trials as f64;
        assert!((f - x.unwrap()).abs() <= 0.02, "edge {e}: {f}");
    }
    assert!(both as f64 / trials as f64 <= 0.4 * 0.5 + 0.02);
}

#[test]
fn simple_rounding_iterations_and_misses() {
    let inst = gen_random_instance(11, 8, 4, Profile::Unrelated).unwrap();
    let t = inst.makespan_upper_bound() / 3.0;
    let frac = build_activation_lp(&inst, &[t; 4]).unwrap().solve().unwrap().unwrap();
    let runs = 500;
    let mut iters = 0usize;
    for seed in 0..runs {
        let tr = simple_round(&frac, &inst, seed).unwrap();
        tr.schedule.validate(&inst).unwrap();
        iters += tr.iterations;
    }
    let mean = iters as f64 / runs as f64;
    assert!(mean <= 2.0 * 8f64.ln() + 2.0, "{mean}");

    let trials = 2000;
    let mut missed = vec![0u64; inst.n()];
    for seed in 0..trials {
        let tr = simple_round(&frac, &inst, 10_000 + seed).unwrap();
        let first: Vec<usize> = tr.per_iteration_assignments[0].iter().map(|&(j, _)| j).collect();
        for j in 0..inst.n() {
            missed[j] += !first.contains(&j) as u64;
        }
    }
    for (j, &k) in missed.iter().enumerate() {
        let f = k as f64 / trials as f64;
        assert!(f <= (-1f64).exp() + 0.05, "job {j}: {f}");
    }
}

#[test]
fn partial_gap_expectations() {
    let inst = gen_random_instance(21, 6, 3, Profile::Unrelated).unwrap();
    let inst = add_random_profits(inst, 22, 9).unwrap();
    let inst = add_random_assignment_costs(inst, 23, 6).unwrap();
    let t = 20.0;
    let total: f64 = inst.profits().unwrap().iter().sum();
    let pi = 0.6 * total;
    let c = 12.0;
    let (mut costs, mut profits) = (Vec::new(), Vec::new());
    for seed in 0..1000 {
        let out = partial_gap(&inst, t, pi, c, seed).unwrap();
        let met = metrics(&inst, &out.schedule).unwrap();
        assert!(met.makespan <= 2.0 * t + 1e-6, "seed {seed}");
        costs.push(met.assignment_cost);
        profits.push(met.profit);
    }
    let (mc, sc) = mean_se(&costs);
    let (mp, sp) = mean_se(&profits);
    assert!(mc <= c + 3.0 * sc, "cost {mc} +- {sc}");
    assert!(mp >= pi - 3.0 * sp, "profit {mp} +- {sp}");
}
