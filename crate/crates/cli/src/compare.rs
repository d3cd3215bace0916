//! Ratio tables against an exact frontier.

use machact::greedy::greedy_schedule;
use machact::lp::build_activation_lp;
use machact::model::metrics;
use machact::ptas::ptas_solve;
use machact::round_main::{round_activation, MainParams};
use machact::{Instance, ParetoPoint};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::io::instance_hash;
use crate::solve::Algo;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub algo: Algo,
    pub a_star: f64,
    pub t_star: f64,
    /// Activation-LP optimum at `t_star`.
    pub lp_cost: f64,
    /// `a_star / lp_cost`.
    pub integrality_gap: f64,
    pub cost: f64,
    pub makespan: f64,
    pub cost_ratio: f64,
    pub makespan_ratio: f64,
    pub cost_bound: f64,
    pub makespan_bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub instance_hash: String,
    pub epsilon: f64,
    pub seed: u64,
    pub rows: Vec<CompareRow>,
    pub pass: bool,
}

fn ratio(x: f64, base: f64) -> f64 {
    if base == 0.0 {
        if x == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        x / base
    }
}

/// Algorithms with an oracle-relative guarantee.
pub const COMPARABLE: [Algo; 3] = [Algo::Main, Algo::Greedy, Algo::Ptas];

/// Runs each algorithm at every frontier point. The PTAS gets `a_star` as
/// its budget; the others get `t_star` as the makespan guess.
pub fn compare(inst: &Instance, frontier: &[ParetoPoint], algos: &[Algo], epsilon: f64, seed: u64) -> CliResult<CompareReport> {
    if let Some(a) = algos.iter().find(|a| !COMPARABLE.contains(a)) {
        return Err(CliError::Usage(format!("compare supports main, greedy and ptas, not {}", a.name())));
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(CliError::Usage(format!("--epsilon must be positive, got {epsilon}")));
    }
    let log_term = 1.0 + (inst.n().max(1) as f64).ln();
    let tol = 1e-6;
    let mut rows = Vec::new();
    for pt in frontier {
        let (a_star, t_star) = (pt.activation_cost, pt.makespan);
        let lp = build_activation_lp(inst, &vec![t_star; inst.m()])?
            .solve()?
            .ok_or_else(|| CliError::Golden(format!("LP infeasible at frontier makespan {t_star}")))?;
        for &algo in algos {
            let (schedule, cost_bound, makespan_bound, cost_limit) = match algo {
                Algo::Main => {
                    let out = round_activation(inst, t_star, epsilon, seed)?;
                    let factor = MainParams::new(epsilon, inst.n())?.cost_factor();
                    (out.schedule, factor, 2.0 + epsilon, factor * lp.objective)
                }
                Algo::Greedy => {
                    let tr = greedy_schedule(inst, t_star)?;
                    (tr.schedule, log_term, 2.0, log_term * a_star)
                }
                Algo::Ptas => {
                    let out = ptas_solve(inst, Some(a_star), epsilon)?;
                    (out.schedule, 1.0, 1.0 + epsilon, a_star)
                }
                _ => unreachable!("filtered above"),
            };
            let met = metrics(inst, &schedule)?;
            let pass = met.activation_cost <= cost_limit + tol && met.makespan <= makespan_bound * t_star + tol;
            rows.push(CompareRow {
                algo,
                a_star,
                t_star,
                lp_cost: lp.objective,
                integrality_gap: ratio(a_star, lp.objective),
                cost: met.activation_cost,
                makespan: met.makespan,
                cost_ratio: ratio(met.activation_cost, a_star),
                makespan_ratio: ratio(met.makespan, t_star),
                cost_bound,
                makespan_bound,
                pass,
            });
        }
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(CompareReport { instance_hash: instance_hash(inst), epsilon, seed, rows, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::gap_fixture;
    use machact::oracle::{exact_frontier, OracleLimits};

    #[test]
    fn gap_table_shows_the_gap() {
        let inst = gap_fixture();
        let f = exact_frontier(&inst, OracleLimits::default()).unwrap();
        let rep = compare(&inst, &f, &[Algo::Main, Algo::Greedy], 1.0, 0).unwrap();
        assert!(rep.pass);
        let at12: Vec<&CompareRow> = rep.rows.iter().filter(|r| r.t_star == 12.0).collect();
        assert_eq!(at12.len(), 2);
        assert_eq!(at12[0].a_star, 100.0);
        assert!(at12[0].lp_cost <= 29.0 && at12[0].integrality_gap >= 100.0 / 29.0);
    }

    #[test]
    fn rejects_uncomparable_algorithms() {
        let inst = gap_fixture();
        assert!(matches!(compare(&inst, &[], &[Algo::Simple], 1.0, 0), Err(CliError::Usage(_))));
    }
}
