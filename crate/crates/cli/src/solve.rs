//! Running one algorithm on one instance and turning the outcome into a
//! report, a trial table or a makespan sweep.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use clap::ValueEnum;
use machact::extensions::{round_with_outliers, round_with_release};
use machact::greedy::greedy_schedule;
use machact::lp::build_activation_lp;
use machact::model::{metrics, BoundCheck};
use machact::ptas::{build_config_graph, extract_assignment, ptas_solve, PtasParams};
use machact::round_main::{round_activation, round_activation_assignment, MainOutcome, MainParams};
use machact::round_simple::{iteration_cap, simple_round};
use machact::st_round::partial_gap;
use machact::{Instance, Schedule};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::io::{canonical_json, instance_hash, ScheduleDoc};

/// Grid factor of `--sweep`.
pub const SWEEP_FACTOR: f64 = 1.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algo {
    Simple,
    Main,
    MainAssign,
    Greedy,
    Ptas,
    PartialGap,
    Outliers,
    Release,
}

impl Algo {
    pub const ALL: [Algo; 8] = [
        Algo::Simple,
        Algo::Main,
        Algo::MainAssign,
        Algo::Greedy,
        Algo::Ptas,
        Algo::PartialGap,
        Algo::Outliers,
        Algo::Release,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algo::Simple => "simple",
            Algo::Main => "main",
            Algo::MainAssign => "main-assign",
            Algo::Greedy => "greedy",
            Algo::Ptas => "ptas",
            Algo::PartialGap => "partial-gap",
            Algo::Outliers => "outliers",
            Algo::Release => "release",
        }
    }

    /// The PTAS can pick its own trade-off; everything else needs `T`.
    pub fn needs_t(self) -> bool {
        self != Algo::Ptas
    }

    pub fn randomized(self) -> bool {
        !matches!(self, Algo::Greedy | Algo::Ptas)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveParams {
    pub algo: Algo,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    pub epsilon: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pi_target: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost_budget: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drop_budget: Option<f64>,
    pub seed: u64,
}

impl SolveParams {
    pub fn new(algo: Algo, t: Option<f64>) -> Self {
        SolveParams { algo, t, epsilon: 1.0, pi_target: None, cost_budget: None, drop_budget: None, seed: 0 }
    }

    /// Flag combinations that can never work for the chosen algorithm.
    pub fn check(&self) -> CliResult<()> {
        let need = |v: Option<f64>, flag: &str| -> CliResult<()> {
            v.map(|_| ()).ok_or_else(|| CliError::Usage(format!("--algo {} needs {flag}", self.algo.name())))
        };
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(CliError::Usage(format!("--epsilon must be positive, got {}", self.epsilon)));
        }
        if let Some(t) = self.t {
            if !(t.is_finite() && t >= 0.0) {
                return Err(CliError::Usage(format!("--T must be a nonnegative number, got {t}")));
            }
        }
        for (v, flag) in [(self.pi_target, "--pi-target"), (self.cost_budget, "--cost-budget"), (self.drop_budget, "--drop-budget")] {
            if let Some(v) = v {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(CliError::Usage(format!("{flag} must be a nonnegative number, got {v}")));
                }
            }
        }
        match self.algo {
            Algo::PartialGap => {
                need(self.pi_target, "--pi-target")?;
                need(self.cost_budget, "--cost-budget")
            }
            Algo::Outliers => need(self.drop_budget, "--drop-budget"),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Ok,
    Infeasible,
    BoundViolation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundDoc {
    pub name: String,
    pub claimed: f64,
    pub observed: f64,
    pub pass: bool,
}

impl From<&BoundCheck> for BoundDoc {
    fn from(c: &BoundCheck) -> Self {
        BoundDoc { name: c.name.clone(), claimed: c.claimed, observed: c.observed, pass: c.pass }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricsDoc {
    pub makespan: f64,
    pub activation_cost: f64,
    pub assignment_cost: f64,
    pub profit: f64,
}

/// One line of the migration trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceLine {
    pub stage: &'static str,
    pub edge: (usize, usize),
    pub old: f64,
    pub new: f64,
    pub reason: &'static str,
}

/// Outcome of a single run.
#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    /// `None` when the LP (or the configuration graph) has no solution.
    pub schedule: Option<Schedule>,
    pub checks: Vec<BoundCheck>,
    /// Algorithm-specific numbers: LP value, iteration count and the like.
    pub details: BTreeMap<String, Value>,
    pub trace: Vec<TraceLine>,
}

impl Run {
    fn infeasible() -> Self {
        Run { schedule: None, checks: Vec::new(), details: BTreeMap::new(), trace: Vec::new() }
    }

    pub fn status(&self) -> Status {
        if self.schedule.is_none() {
            Status::Infeasible
        } else if self.checks.iter().all(|c| c.pass) {
            Status::Ok
        } else {
            Status::BoundViolation
        }
    }
}

fn trace_of(out: &MainOutcome) -> Vec<TraceLine> {
    out.graphs
        .events
        .iter()
        .map(|e| TraceLine { stage: e.stage.as_str(), edge: e.edge, old: e.old, new: e.new, reason: e.reason.as_str() })
        .collect()
}

fn require_t(p: &SolveParams) -> CliResult<f64> {
    p.t.ok_or_else(|| CliError::Usage(format!("--algo {} needs --T or --sweep", p.algo.name())))
}

/// Runs the algorithm once with `seed` in place of `p.seed`.
pub fn run_once(inst: &Instance, p: &SolveParams, seed: u64) -> CliResult<Run> {
    p.check()?;
    match run_inner(inst, p, seed) {
        Err(CliError::Core(machact::Error::Infeasible)) => Ok(Run::infeasible()),
        other => other,
    }
}

fn run_inner(inst: &Instance, p: &SolveParams, seed: u64) -> CliResult<Run> {
    let eps = p.epsilon;
    let mut details = BTreeMap::new();
    let (schedule, checks, trace) = match p.algo {
        Algo::Simple => {
            let t = require_t(p)?;
            let frac = build_activation_lp(inst, &vec![t; inst.m()])?.solve()?.ok_or(machact::Error::Infeasible)?;
            let tr = simple_round(&frac, inst, seed)?;
            details.insert("lp_objective".into(), json!(frac.objective));
            details.insert("iterations".into(), json!(tr.iterations));
            details.insert("forced".into(), json!(tr.forced));
            let cap = iteration_cap(inst.n());
            let checks = vec![BoundCheck::at_most("iterations", cap as f64, tr.iterations as f64, 0.0)];
            (tr.schedule, checks, Vec::new())
        }
        Algo::Main => {
            let out = round_activation(inst, require_t(p)?, eps, seed)?;
            details.insert("lp_objective".into(), json!(out.frac.objective));
            (out.schedule.clone(), out.checks.clone(), trace_of(&out))
        }
        Algo::MainAssign => {
            let out = round_activation_assignment(inst, require_t(p)?, eps, seed)?;
            details.insert("lp_objective".into(), json!(out.frac.objective));
            (out.schedule.clone(), out.checks.clone(), trace_of(&out))
        }
        Algo::Greedy => {
            let tr = greedy_schedule(inst, require_t(p)?)?;
            details.insert("chosen".into(), json!(tr.chosen()));
            details.insert("final_f".into(), json!(tr.final_f));
            (tr.schedule, tr.checks, Vec::new())
        }
        Algo::Ptas => {
            let params = PtasParams::from_epsilon(eps)?;
            details.insert("lambda".into(), json!(params.lambda()));
            match p.t {
                Some(t) => {
                    let (s, checks, bottleneck, cost) = ptas_at(inst, t, eps)?;
                    details.insert("bottleneck".into(), json!(bottleneck));
                    details.insert("path_cost".into(), json!(cost));
                    (s, checks, Vec::new())
                }
                None => {
                    let out = ptas_solve(inst, p.cost_budget, eps)?;
                    details.insert("bottleneck".into(), json!(out.path.bottleneck));
                    details.insert("path_cost".into(), json!(out.path.cost));
                    details.insert("frontier".into(), json!(out.frontier));
                    (out.schedule, out.checks, Vec::new())
                }
            }
        }
        Algo::PartialGap => {
            let (pi, c) = (p.pi_target.unwrap_or(0.0), p.cost_budget.unwrap_or(0.0));
            let out = partial_gap(inst, require_t(p)?, pi, c, seed)?;
            details.insert("lp_objective".into(), json!(out.lp.objective));
            details.insert("lp_extent".into(), json!(out.lp.y));
            (out.schedule, out.checks, Vec::new())
        }
        Algo::Outliers => {
            let out = round_with_outliers(inst, require_t(p)?, eps, p.drop_budget.unwrap_or(0.0), seed)?;
            details.insert("lp_objective".into(), json!(out.main.frac.objective));
            details.insert("dropped_profit".into(), json!(out.dropped_profit));
            let trace = trace_of(&out.main);
            (out.schedule, out.checks, trace)
        }
        Algo::Release => {
            let out = round_with_release(inst, require_t(p)?, eps, seed)?;
            details.insert("lp_objective".into(), json!(out.main.frac.objective));
            details.insert("completion".into(), json!(out.completion));
            details.insert("horizon".into(), json!(out.horizon()));
            let trace = trace_of(&out.main);
            (out.main.schedule, out.checks, trace)
        }
    };
    Ok(Run { schedule: Some(schedule), checks, details, trace })
}

/// Cheapest configuration path whose edges all fit `(1 + eps)(1 - d) t`.
/// Extraction stretches a path by at most `1 / (1 - d)`, so the schedule
/// has makespan at most `(1 + eps) t`.
pub fn ptas_at(inst: &Instance, t: f64, epsilon: f64) -> CliResult<(Schedule, Vec<BoundCheck>, f64, f64)> {
    let params = PtasParams::from_epsilon(epsilon)?;
    let g = build_config_graph(inst, &params)?;
    let limit = (1.0 + epsilon) * (1.0 - params.delta()) * t;
    let path = g.min_cost_within(limit * (1.0 + 1e-12)).ok_or(machact::Error::Infeasible)?;
    let s = extract_assignment(&g, &path)?;
    s.validate(inst)?;
    let met = metrics(inst, &s)?;
    let checks = vec![
        BoundCheck::at_most("makespan", (1.0 + epsilon) * t, met.makespan, 1e-9),
        BoundCheck::at_most("cost_gap", 0.0, (met.activation_cost - path.cost).abs(), 1e-9),
    ];
    Ok((s, checks, path.bottleneck, path.cost))
}

/// Parameters derived from `epsilon` that the bound checks depend on.
pub fn derived_params(inst: &Instance, p: &SolveParams) -> CliResult<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    match p.algo {
        Algo::Main | Algo::MainAssign | Algo::Outliers | Algo::Release => {
            // outliers run on the instance plus one dummy machine; n is unchanged
            let mp = MainParams::new(p.epsilon, inst.n())?;
            out.insert("zeta".into(), mp.zeta);
            out.insert("delta".into(), mp.delta);
            out.insert("eta".into(), mp.eta);
            out.insert("gamma".into(), mp.gamma);
            out.insert("log_term".into(), mp.log_term);
            out.insert("cost_factor".into(), mp.cost_factor());
        }
        Algo::Ptas => {
            let pp = PtasParams::from_epsilon(p.epsilon)?;
            out.insert("lambda".into(), pp.lambda() as f64);
            out.insert("delta".into(), pp.delta());
            out.insert("ratio".into(), pp.ratio());
        }
        Algo::Simple => {
            out.insert("iteration_cap".into(), iteration_cap(inst.n()) as f64);
        }
        Algo::Greedy => {
            out.insert("cost_factor".into(), 1.0 + (inst.n().max(1) as f64).ln());
        }
        Algo::PartialGap => {
            out.insert("makespan_factor".into(), 2.0);
        }
    }
    Ok(out)
}

fn metrics_doc(inst: &Instance, s: &Schedule) -> CliResult<MetricsDoc> {
    let m = metrics(inst, s)?;
    Ok(MetricsDoc {
        makespan: m.makespan,
        activation_cost: m.activation_cost,
        assignment_cost: m.assignment_cost,
        profit: m.profit,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRow {
    pub trial: usize,
    pub seed: u64,
    pub cost: Option<f64>,
    pub makespan: Option<f64>,
    pub profit: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialSummary {
    pub count: usize,
    pub feasible: usize,
    pub failures: usize,
    pub mean_cost: f64,
    pub se_cost: f64,
    pub mean_profit: f64,
    pub se_profit: f64,
    pub mean_makespan: f64,
    pub max_makespan: f64,
}

/// Mean and standard error; `(0, 0)` for an empty sample.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

impl TrialSummary {
    pub fn of(rows: &[TrialRow]) -> Self {
        let costs: Vec<f64> = rows.iter().filter_map(|r| r.cost).collect();
        let profits: Vec<f64> = rows.iter().filter_map(|r| r.profit).collect();
        let spans: Vec<f64> = rows.iter().filter_map(|r| r.makespan).collect();
        let (mean_cost, se_cost) = mean_se(&costs);
        let (mean_profit, se_profit) = mean_se(&profits);
        TrialSummary {
            count: rows.len(),
            feasible: costs.len(),
            failures: rows.iter().filter(|r| !r.pass).count(),
            mean_cost,
            se_cost,
            mean_profit,
            se_profit,
            mean_makespan: mean_se(&spans).0,
            max_makespan: spans.iter().copied().fold(0.0, f64::max),
        }
    }
}

/// Seeds `seed, seed + 1, ..`; cost is activation plus assignment cost.
pub fn run_trials(inst: &Instance, p: &SolveParams, trials: usize) -> CliResult<Vec<TrialRow>> {
    let mut rows = Vec::with_capacity(trials);
    for k in 0..trials {
        let seed = p.seed.wrapping_add(k as u64);
        let run = run_once(inst, p, seed)?;
        let met = match &run.schedule {
            Some(s) => Some(metrics_doc(inst, s)?),
            None => None,
        };
        rows.push(TrialRow {
            trial: k,
            seed,
            cost: met.map(|m| m.activation_cost + m.assignment_cost),
            makespan: met.map(|m| m.makespan),
            profit: met.map(|m| m.profit),
            pass: run.status() != Status::BoundViolation,
        });
    }
    Ok(rows)
}

pub const CSV_HEADER: &str = "trial,seed,cost,makespan,profit,pass";

/// Infeasible trials leave the numeric cells empty.
pub fn trials_csv(rows: &[TrialRow]) -> String {
    let cell = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{},{}", r.trial, r.seed, cell(r.cost), cell(r.makespan), cell(r.profit), r.pass);
    }
    out
}

/// `lb * 1.05^k` below `ub`, then `ub`. A zero lower bound starts at the
/// smallest positive processing time instead, after a leading zero.
pub fn sweep_grid(inst: &Instance) -> Vec<f64> {
    let ub = inst.makespan_upper_bound();
    let mut lb = inst.makespan_lower_bound();
    let mut out = Vec::new();
    if lb <= 0.0 {
        out.push(0.0);
        lb = inst.p_matrix().iter().flatten().flatten().copied().filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min);
        if !lb.is_finite() {
            return out;
        }
    }
    let mut t = lb;
    while t < ub {
        out.push(t);
        t *= SWEEP_FACTOR;
    }
    out.push(ub);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(rename = "T")]
    pub t: f64,
    pub status: Status,
    pub activation_cost: Option<f64>,
    pub makespan: Option<f64>,
    /// Cheapest schedule found at this or any smaller guess: a schedule valid
    /// for a tighter guess is valid here too.
    pub best_cost: Option<f64>,
    pub best_makespan: Option<f64>,
}

pub fn run_sweep(inst: &Instance, p: &SolveParams) -> CliResult<Vec<SweepRow>> {
    let mut rows: Vec<SweepRow> = Vec::new();
    let mut best: Option<(f64, f64)> = None;
    for t in sweep_grid(inst) {
        let pt = SolveParams { t: Some(t), ..p.clone() };
        let run = run_once(inst, &pt, p.seed)?;
        let met = match &run.schedule {
            Some(s) => Some(metrics_doc(inst, s)?),
            None => None,
        };
        if let Some(m) = met {
            if best.map_or(true, |(c, _)| m.activation_cost < c) {
                best = Some((m.activation_cost, m.makespan));
            }
        }
        rows.push(SweepRow {
            t,
            status: run.status(),
            activation_cost: met.map(|m| m.activation_cost),
            makespan: met.map(|m| m.makespan),
            best_cost: best.map(|b| b.0),
            best_makespan: best.map(|b| b.1),
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub instance_hash: String,
    pub algo: Algo,
    pub status: Status,
    pub params: SolveParams,
    pub derived: BTreeMap<String, f64>,
    pub schedule: Option<ScheduleDoc>,
    pub metrics: Option<MetricsDoc>,
    pub asserted_bounds: Vec<BoundDoc>,
    pub details: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<TrialSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Vec<SweepRow>>,
}

impl Report {
    pub fn to_json(&self) -> CliResult<String> {
        crate::io::pretty_json(self)
    }

    /// One line per failed bound, for the exit-1 diff.
    pub fn violations(&self) -> Vec<String> {
        self.asserted_bounds
            .iter()
            .filter(|b| !b.pass)
            .map(|b| format!("{}: claimed {} observed {} (excess {})", b.name, b.claimed, b.observed, b.observed - b.claimed))
            .collect()
    }
}

/// Everything `solve` produces: the report plus the optional side outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutput {
    pub report: Report,
    pub trial_rows: Vec<TrialRow>,
    pub trace: Vec<TraceLine>,
}

impl SolveOutput {
    pub fn trace_jsonl(&self) -> CliResult<String> {
        let mut out = String::new();
        for line in &self.trace {
            out.push_str(&canonical_json(line)?);
            out.push('\n');
        }
        Ok(out)
    }
}

/// A single run (plus `trials - 1` reseeded repeats), or a sweep over the
/// makespan grid when `sweep` is set.
pub fn solve(inst: &Instance, p: &SolveParams, trials: usize, sweep: bool) -> CliResult<SolveOutput> {
    p.check()?;
    if sweep && p.t.is_some() {
        return Err(CliError::Usage("--T and --sweep are exclusive".into()));
    }
    if !sweep && p.t.is_none() && p.algo.needs_t() {
        return Err(CliError::Usage(format!("--algo {} needs --T or --sweep", p.algo.name())));
    }
    if trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let derived = derived_params(inst, p)?;
    let hash = instance_hash(inst);

    if sweep {
        let rows = run_sweep(inst, p)?;
        let status = if rows.iter().any(|r| r.status == Status::BoundViolation) {
            Status::BoundViolation
        } else if rows.iter().all(|r| r.status == Status::Infeasible) {
            Status::Infeasible
        } else {
            Status::Ok
        };
        let report = Report {
            instance_hash: hash,
            algo: p.algo,
            status,
            params: p.clone(),
            derived,
            schedule: None,
            metrics: None,
            asserted_bounds: Vec::new(),
            details: BTreeMap::new(),
            trials: None,
            sweep: Some(rows),
        };
        return Ok(SolveOutput { report, trial_rows: Vec::new(), trace: Vec::new() });
    }

    let run = run_once(inst, p, p.seed)?;
    let (schedule, metrics) = match &run.schedule {
        Some(s) => (Some(ScheduleDoc::from_schedule(s)), Some(metrics_doc(inst, s)?)),
        None => (None, None),
    };
    let mut status = run.status();
    let (trial_rows, summary) = if trials > 1 {
        let rows = run_trials(inst, p, trials)?;
        let summary = TrialSummary::of(&rows);
        if summary.failures > 0 {
            status = Status::BoundViolation;
        }
        (rows, Some(summary))
    } else {
        (Vec::new(), None)
    };
    let report = Report {
        instance_hash: hash,
        algo: p.algo,
        status,
        params: p.clone(),
        derived,
        schedule,
        metrics,
        asserted_bounds: run.checks.iter().map(BoundDoc::from).collect(),
        details: run.details,
        trials: summary,
        sweep: None,
    };
    Ok(SolveOutput { report, trial_rows, trace: run.trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use machact::model::{gen_random_instance, gen_setcover_instance, Profile};

    #[test]
    fn grid_is_geometric_and_ends_at_upper_bound() {
        let inst = gen_random_instance(2, 5, 3, Profile::Unrelated).unwrap();
        let g = sweep_grid(&inst);
        assert_eq!(g[0], inst.makespan_lower_bound());
        assert_eq!(*g.last().unwrap(), inst.makespan_upper_bound());
        for w in g.windows(2).take(g.len() - 2) {
            assert!((w[1] / w[0] - SWEEP_FACTOR).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_of_set_cover_is_zero() {
        let inst = gen_setcover_instance(&[vec![0, 1], vec![1]], 2).unwrap();
        assert_eq!(sweep_grid(&inst), vec![0.0]);
    }

    #[test]
    fn usage_errors() {
        let inst = gen_random_instance(2, 3, 2, Profile::Unrelated).unwrap();
        let p = SolveParams::new(Algo::Main, None);
        assert!(matches!(solve(&inst, &p, 1, false), Err(CliError::Usage(_))));
        let p = SolveParams::new(Algo::PartialGap, Some(10.0));
        assert!(matches!(solve(&inst, &p, 1, false), Err(CliError::Usage(_))));
        let p = SolveParams { epsilon: 0.0, ..SolveParams::new(Algo::Main, Some(10.0)) };
        assert!(matches!(solve(&inst, &p, 1, false), Err(CliError::Usage(_))));
        let p = SolveParams::new(Algo::Main, Some(10.0));
        assert!(matches!(solve(&inst, &p, 1, true), Err(CliError::Usage(_))));
        assert!(matches!(solve(&inst, &p, 0, false), Err(CliError::Usage(_))));
    }

    #[test]
    fn tiny_t_reports_infeasible() {
        let inst = gen_random_instance(2, 3, 2, Profile::Unrelated).unwrap();
        let out = solve(&inst, &SolveParams::new(Algo::Main, Some(0.5)), 1, false).unwrap();
        assert_eq!(out.report.status, Status::Infeasible);
        assert!(out.report.schedule.is_none());
    }

    #[test]
    fn csv_layout() {
        let rows = vec![
            TrialRow { trial: 0, seed: 5, cost: Some(3.0), makespan: Some(2.5), profit: Some(0.0), pass: true },
            TrialRow { trial: 1, seed: 6, cost: None, makespan: None, profit: None, pass: true },
        ];
        assert_eq!(trials_csv(&rows), "trial,seed,cost,makespan,profit,pass\n0,5,3,2.5,0,true\n1,6,,,,true\n");
    }

    #[test]
    fn derived_parameters_for_main() {
        let inst = gen_random_instance(2, 3, 2, Profile::Unrelated).unwrap();
        let d = derived_params(&inst, &SolveParams { epsilon: 0.5, ..SolveParams::new(Algo::Main, Some(1.0)) }).unwrap();
        assert_eq!(d["zeta"], 2.0);
        assert_eq!(d["gamma"], 1.5);
        assert_eq!(d["eta"], 1.5);
        assert!(d.contains_key("delta"));
    }
}
