//! Golden files: exact oracle answers frozen next to the instance they
//! belong to, keyed by the instance hash.

use std::path::Path;

use machact::model::{gen_random_instance, Profile};
use machact::oracle::{exact_cover, exact_frontier, exact_partial_gap, GapCost, OracleLimits};
use machact::round_main::JOINT_COST_CONSTANT;
use machact::{Instance, ParetoPoint};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::fixtures::{gap_fixture, measure_simple_load_constant, partial_gap_fixture, setcover_suite, SIMPLE_LOAD_RUNS};
use crate::io::{instance_hash, pretty_json, read_text, write_text, InstanceDoc, ScheduleDoc};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointDoc {
    pub activation_cost: f64,
    pub makespan: f64,
    pub witness: ScheduleDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenFrontier {
    pub instance_hash: String,
    pub instance: InstanceDoc,
    pub frontier: Vec<PointDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverDoc {
    pub instance_hash: String,
    pub instance: InstanceDoc,
    pub cost: f64,
    pub sets: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialGapDoc {
    pub instance_hash: String,
    pub instance: InstanceDoc,
    #[serde(rename = "T")]
    pub t: f64,
    pub pi_target: f64,
    pub cost_budget: f64,
    /// Least assignment cost reaching the profit target within `T`.
    pub exact_cost: f64,
    pub witness: ScheduleDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    /// Cost multiple for the assignment-cost variant.
    pub joint_cost_constant: f64,
    /// Largest `max load / (T ln n)` over the seeded simple-rounding runs.
    pub simple_load_constant: f64,
    pub simple_load_runs: u64,
}

impl GoldenFrontier {
    pub fn new(inst: &Instance, frontier: &[ParetoPoint]) -> Self {
        GoldenFrontier {
            instance_hash: instance_hash(inst),
            instance: InstanceDoc::from_instance(inst),
            frontier: frontier
                .iter()
                .map(|p| PointDoc {
                    activation_cost: p.activation_cost,
                    makespan: p.makespan,
                    witness: ScheduleDoc::from_schedule(&p.witness),
                })
                .collect(),
        }
    }

    /// The instance and its frontier, after checking the hash header.
    pub fn decode(&self) -> CliResult<(Instance, Vec<ParetoPoint>)> {
        let inst = self.instance.to_instance()?;
        let hash = instance_hash(&inst);
        if hash != self.instance_hash {
            return Err(CliError::Golden(format!("header hash {} but instance hashes to {hash}", self.instance_hash)));
        }
        let points = self
            .frontier
            .iter()
            .map(|p| ParetoPoint { activation_cost: p.activation_cost, makespan: p.makespan, witness: p.witness.to_schedule() })
            .collect();
        Ok((inst, points))
    }
}

pub fn load_frontier(path: &Path) -> CliResult<GoldenFrontier> {
    serde_json::from_str(&read_text(path)?).map_err(|e| CliError::Json { what: path.display().to_string(), source: e })
}

pub fn load_covers(path: &Path) -> CliResult<Vec<CoverDoc>> {
    serde_json::from_str(&read_text(path)?).map_err(|e| CliError::Json { what: path.display().to_string(), source: e })
}

pub fn load_constants(path: &Path) -> CliResult<Constants> {
    serde_json::from_str(&read_text(path)?).map_err(|e| CliError::Json { what: path.display().to_string(), source: e })
}

pub const RANDOM_FRONTIER: &str = "frontier_random_s1_n6_m3.json";
pub const GAP_FRONTIER: &str = "frontier_gap_m4_r100_t12.json";
pub const COVERS: &str = "covers.json";
pub const PARTIAL_GAP: &str = "partial_gap_n6_m3.json";
pub const CONSTANTS: &str = "constants.json";

/// Every golden file as `(name, contents)`, recomputed from scratch.
pub fn golden_files() -> CliResult<Vec<(&'static str, String)>> {
    let limits = OracleLimits::default();
    let mut out = Vec::new();

    let random = gen_random_instance(1, 6, 3, Profile::Unrelated)?;
    out.push((RANDOM_FRONTIER, pretty_json(&GoldenFrontier::new(&random, &exact_frontier(&random, limits)?))?));
    let gap = gap_fixture();
    out.push((GAP_FRONTIER, pretty_json(&GoldenFrontier::new(&gap, &exact_frontier(&gap, limits)?))?));

    let mut covers = Vec::new();
    for inst in setcover_suite() {
        let (cost, sets) = exact_cover(&inst)?.ok_or(machact::Error::Infeasible)?;
        covers.push(CoverDoc { instance_hash: instance_hash(&inst), instance: InstanceDoc::from_instance(&inst), cost, sets });
    }
    out.push((COVERS, pretty_json(&covers)?));

    let fx = partial_gap_fixture();
    let (exact_cost, witness) =
        exact_partial_gap(&fx.inst, fx.t, fx.pi_target, GapCost::Assignment, limits)?.ok_or(machact::Error::Infeasible)?;
    out.push((
        PARTIAL_GAP,
        pretty_json(&PartialGapDoc {
            instance_hash: instance_hash(&fx.inst),
            instance: InstanceDoc::from_instance(&fx.inst),
            t: fx.t,
            pi_target: fx.pi_target,
            cost_budget: fx.cost_budget,
            exact_cost,
            witness: ScheduleDoc::from_schedule(&witness),
        })?,
    ));

    let constants = Constants {
        joint_cost_constant: JOINT_COST_CONSTANT,
        simple_load_constant: measure_simple_load_constant(SIMPLE_LOAD_RUNS)?,
        simple_load_runs: SIMPLE_LOAD_RUNS,
    };
    out.push((CONSTANTS, pretty_json(&constants)?));
    Ok(out)
}

pub fn write_golden(dir: &Path) -> CliResult<Vec<&'static str>> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let files = golden_files()?;
    for (name, text) in &files {
        write_text(&dir.join(name), text)?;
    }
    Ok(files.into_iter().map(|(n, _)| n).collect())
}

/// Names of files in `dir` that are missing or differ from a fresh run.
pub fn check_golden(dir: &Path) -> CliResult<Vec<&'static str>> {
    let mut stale = Vec::new();
    for (name, text) in golden_files()? {
        match std::fs::read_to_string(dir.join(name)) {
            Ok(old) if old == text => {}
            _ => stale.push(name),
        }
    }
    Ok(stale)
}
