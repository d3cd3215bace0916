use std::path::PathBuf;

use machact::greedy::greedy_schedule;
use machact::model::metrics;
use machact::oracle::{exact_frontier, OracleLimits};
use machact_cli::golden::{
    check_golden, load_constants, load_covers, load_frontier, PartialGapDoc, CONSTANTS, COVERS, GAP_FRONTIER,
    PARTIAL_GAP, RANDOM_FRONTIER,
};
use machact_cli::io::{instance_hash, read_text};

fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

#[test]
fn committed_files_match_a_fresh_run() {
    let stale = check_golden(&dir()).unwrap();
    assert!(stale.is_empty(), "stale golden files {stale:?}; rerun `machact golden`");
}

#[test]
fn frontier_witnesses_recompute_exactly() {
    for name in [RANDOM_FRONTIER, GAP_FRONTIER] {
        let (inst, points) = load_frontier(&dir().join(name)).unwrap().decode().unwrap();
        assert!(!points.is_empty());
        for (k, p) in points.iter().enumerate() {
            p.witness.validate(&inst).unwrap();
            let met = metrics(&inst, &p.witness).unwrap();
            assert_eq!((met.activation_cost, met.makespan), (p.activation_cost, p.makespan), "{name} point {k}");
            for q in &points {
                assert!(!q.dominates(p), "{name}: point {k} is dominated");
            }
        }
    }
}

#[test]
fn gap_frontier_has_machine_b_at_t() {
    let (_, points) = load_frontier(&dir().join(GAP_FRONTIER)).unwrap().decode().unwrap();
    let best_at_12 = points.iter().filter(|p| p.makespan <= 12.0).map(|p| p.activation_cost).fold(f64::INFINITY, f64::min);
    assert_eq!(best_at_12, 100.0);
    assert!(points.iter().any(|p| (p.activation_cost, p.makespan) == (2.0, 24.0)));
}

#[test]
fn tampered_header_is_refused() {
    let mut g = load_frontier(&dir().join(RANDOM_FRONTIER)).unwrap();
    g.instance.machines[0].cost += 1.0;
    assert!(g.decode().is_err());
}

#[test]
fn greedy_within_log_factor_of_golden_covers() {
    let covers = load_covers(&dir().join(COVERS)).unwrap();
    assert_eq!(covers.len(), 10);
    for c in covers {
        let inst = c.instance.to_instance().unwrap();
        assert_eq!(instance_hash(&inst), c.instance_hash);
        let tr = greedy_schedule(&inst, 0.0).unwrap();
        let met = metrics(&inst, &tr.schedule).unwrap();
        assert!(met.activation_cost <= (1.0 + (inst.n() as f64).ln()) * c.cost + 1e-6);
        assert!(met.activation_cost >= c.cost);
    }
}

#[test]
fn partial_gap_witness_meets_target() {
    let doc: PartialGapDoc = serde_json::from_str(&read_text(&dir().join(PARTIAL_GAP)).unwrap()).unwrap();
    let inst = doc.instance.to_instance().unwrap();
    let s = doc.witness.to_schedule();
    s.validate(&inst).unwrap();
    let met = metrics(&inst, &s).unwrap();
    assert!(met.profit >= doc.pi_target - 1e-9);
    assert!(met.makespan <= doc.t);
    assert_eq!(met.assignment_cost, doc.exact_cost);
}

#[test]
fn constants_are_sane() {
    let c = load_constants(&dir().join(CONSTANTS)).unwrap();
    assert_eq!(c.joint_cost_constant, machact::round_main::JOINT_COST_CONSTANT);
    assert!(c.simple_load_constant > 0.0 && c.simple_load_constant.is_finite());
    assert_eq!(c.simple_load_runs, machact_cli::fixtures::SIMPLE_LOAD_RUNS);
}

#[test]
fn random_frontier_matches_oracle() {
    let (inst, points) = load_frontier(&dir().join(RANDOM_FRONTIER)).unwrap().decode().unwrap();
    assert_eq!(exact_frontier(&inst, OracleLimits::default()).unwrap(), points);
}
