#![allow(dead_code)]

use machact::lp::{build_activation_lp, FractionalSolution};
use machact::model::{gen_random_instance, Instance, Profile};
use machact::rng;

/// Seeded unrelated instance with a makespan guess at which the activation
/// LP is feasible, and the LP solution there.
pub fn lp_case(seed: u64) -> (Instance, f64, FractionalSolution) {
    let n = 4 + (seed % 5) as usize;
    let m = 2 + (seed % 4) as usize;
    let inst = gen_random_instance(seed, n, m, Profile::Unrelated).unwrap();
    let mut t = f64::max(inst.makespan_lower_bound(), inst.makespan_upper_bound() / m as f64);
    loop {
        if let Some(frac) = build_activation_lp(&inst, &vec![t; m]).unwrap().solve().unwrap() {
            return (inst, t, frac);
        }
        t *= 1.25;
    }
}

/// A dense feasible fractional solution: every pair carries mass, openings
/// are random in `[0.6, 1]` and each budget is the machine's load over its
/// opening. Vertex LP solutions are usually already determined, so the
/// transform has nothing to move; these are not.
pub fn dense_case(seed: u64) -> (Instance, FractionalSolution) {
    let n = 4 + (seed % 4) as usize;
    let m = 2 + (seed % 3) as usize;
    let inst = gen_random_instance(seed, n, m, Profile::Unrelated).unwrap();
    let mut r = rng::from_seed(seed ^ 0x5eed);
    let w: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| 0.2 + 0.8 * rng::unit(&mut r)).collect()).collect();
    let x: Vec<Vec<f64>> =
        (0..m).map(|i| (0..n).map(|j| w[i][j] / (0..m).map(|k| w[k][j]).sum::<f64>()).collect()).collect();
    let y: Vec<f64> = (0..m)
        .map(|i| f64::max(0.6 + 0.4 * rng::unit(&mut r), x[i].iter().copied().fold(0.0, f64::max)))
        .collect();
    let budgets: Vec<f64> = (0..m)
        .map(|i| {
            let load: f64 = (0..n).map(|j| x[i][j] * inst.p(i, j).unwrap()).sum();
            let pmax = (0..n).map(|j| inst.p(i, j).unwrap()).fold(0.0, f64::max);
            f64::max(load / y[i], pmax)
        })
        .collect();
    let objective = y.iter().zip(inst.costs()).map(|(y, c)| y * c).sum();
    let frac = FractionalSolution { y, x, objective, budgets };
    frac.check(&inst).unwrap();
    (inst, frac)
}

/// Mean and standard error of a sample.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}
