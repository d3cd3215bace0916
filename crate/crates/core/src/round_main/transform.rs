use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::graphs::{Reason, Stage, WorkingGraphs, SNAP_TOL};
use crate::error::{Error, Result};
use crate::linalg::{null_space_vector, DenseMatrix};
use crate::lp::{FractionalSolution, FEAS_TOL};
use crate::math;
use crate::model::Instance;
use crate::rng::{self, SeededRng};

/// Outcome of one randomized step along a kernel direction.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub x: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    /// Whether the `+alpha` branch was taken.
    pub plus: bool,
}

/// Largest `t >= 0` with `x + t r` inside `[0, upper]`, and the indices that
/// attain it.
fn max_step(x: &[f64], r: &[f64], upper: &[f64]) -> (f64, Vec<usize>) {
    let mut best = f64::INFINITY;
    let mut hits = Vec::new();
    for k in 0..x.len() {
        let t = if r[k] > 0.0 {
            (upper[k] - x[k]) / r[k]
        } else if r[k] < 0.0 {
            x[k] / -r[k]
        } else {
            continue;
        };
        let t = f64::max(t, 0.0);
        if t < best * (1.0 - 1e-12) {
            best = t;
            hits.clear();
            hits.push(k);
        } else if t <= best * (1.0 + 1e-12) {
            hits.push(k);
        }
    }
    (best, hits)
}

/// Moves `x` along `r` or `-r` to the boundary of the box `[0, upper]`:
/// `x + alpha r` with probability `beta / (alpha + beta)`, otherwise
/// `x - beta r`. Coordinates that land on the boundary are set to it
/// exactly.
pub fn rand_step_along(x: &[f64], r: &[f64], upper: &[f64], rng: &mut SeededRng) -> Result<StepResult> {
    if r.iter().all(|v| *v == 0.0) {
        return Err(Error::Precondition("zero step direction".into()));
    }
    let neg: Vec<f64> = r.iter().map(|v| -v).collect();
    let (alpha, hit_plus) = max_step(x, r, upper);
    let (beta, hit_minus) = max_step(x, &neg, upper);
    if !(alpha > 0.0 && beta > 0.0) || !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::Invariant(format!(
            "no two-sided step: alpha = {alpha}, beta = {beta}, x = {x:?}, r = {r:?}"
        )));
    }
    let plus = rng::bernoulli(rng, beta / (alpha + beta));
    let (t, dir, hits) = if plus { (alpha, r, hit_plus) } else { (beta, &neg[..], hit_minus) };
    let mut out: Vec<f64> = x.iter().zip(dir).map(|(a, d)| a + t * d).collect();
    for k in hits {
        out[k] = if dir[k] > 0.0 { upper[k] } else { 0.0 };
    }
    for k in 0..out.len() {
        if out[k] < SNAP_TOL {
            out[k] = 0.0;
        } else if math::abs(out[k] - upper[k]) < SNAP_TOL {
            out[k] = upper[k];
        }
    }
    Ok(StepResult { x: out, alpha, beta, plus })
}

/// One randomized step for the system `A x = b` with boxes `[0, upper]`.
/// The direction is the kernel vector from [`null_space_vector`].
pub fn rand_step(
    a: &DenseMatrix,
    x: &[f64],
    b: &[f64],
    upper: &[f64],
    rng: &mut SeededRng,
) -> Result<StepResult> {
    let ax = a.mul_vec(x);
    let scale = f64::max(1.0, a.norm_inf());
    if ax.iter().zip(b).any(|(l, r)| math::abs(l - r) > FEAS_TOL * scale) {
        return Err(Error::Precondition("rand_step called with A x != b".into()));
    }
    let r = null_space_vector(a).ok_or_else(|| Error::Precondition("system is determined".into()))?;
    rand_step_along(x, &r, upper, rng)
}

/// Round one: drop closed machines and zero edges, place integral jobs, and
/// sort the remaining edges into G1 and G2.
pub(crate) fn setup(frac: &FractionalSolution, inst: &Instance, gamma: f64) -> Result<WorkingGraphs> {
    frac.check(inst)?;
    let (m, n) = (inst.m(), inst.n());
    let mut ybar = frac.y.clone();
    let mut wg = WorkingGraphs {
        g1: BTreeMap::new(),
        g2: BTreeMap::new(),
        ybar: Vec::new(),
        budgets: frac.budgets.clone(),
        gamma,
        assigned: BTreeMap::new(),
        opened: BTreeSet::new(),
        removed: BTreeSet::new(),
        bumped: BTreeSet::new(),
        start_loads: vec![0.0; m],
        events: Vec::new(),
        steps: 0,
    };
    for i in 0..m {
        if ybar[i] <= SNAP_TOL {
            ybar[i] = 0.0;
            wg.removed.insert(i);
        } else if ybar[i] >= 1.0 - SNAP_TOL {
            ybar[i] = 1.0;
            wg.opened.insert(i);
        }
        wg.start_loads[i] = (0..n).map(|j| frac.x[i][j] * inst.p(i, j).unwrap_or(0.0)).sum();
    }
    wg.ybar = ybar;
    for j in 0..n {
        if let Some(i) = (0..m).find(|&i| frac.x[i][j] >= 1.0 - SNAP_TOL) {
            wg.assigned.insert(j, i);
            wg.opened.insert(i);
            wg.log(Stage::Setup, (i, j), frac.x[i][j], 1.0, Reason::Assigned);
            continue;
        }
        for i in 0..m {
            let x = frac.x[i][j];
            if x <= SNAP_TOL || wg.removed.contains(&i) {
                continue;
            }
            let p = inst.p(i, j).unwrap_or(0.0);
            if p == 0.0 {
                wg.g2.insert((i, j), wg.ybar[i]);
                wg.bumped.insert(j);
                wg.log(Stage::Setup, (i, j), x, wg.ybar[i], Reason::ZeroTime);
            } else if x >= wg.upper(i) - SNAP_TOL {
                wg.g2.insert((i, j), x);
                wg.log(Stage::Setup, (i, j), x, x, Reason::Large);
            } else {
                wg.g1.insert((i, j), x);
            }
        }
    }
    Ok(wg)
}

/// The tight system over the current G1 edges: one row per job with a G1
/// edge (its G1 total) and one per machine with a G1 edge (its G1 load).
pub(crate) fn linear_system(wg: &WorkingGraphs, inst: &Instance) -> (Vec<(usize, usize)>, DenseMatrix, Vec<f64>) {
    let edges: Vec<(usize, usize)> = wg.g1.keys().copied().collect();
    let jobs: Vec<usize> = wg.g1_jobs().into_iter().collect();
    let machines: Vec<usize> = wg.g1_machines().into_iter().collect();
    let mut a = DenseMatrix::zeros(jobs.len() + machines.len(), edges.len());
    let mut b = vec![0.0; jobs.len() + machines.len()];
    for (c, &(i, j)) in edges.iter().enumerate() {
        let x = wg.g1[&(i, j)];
        let rj = jobs.binary_search(&j).unwrap_or(0);
        let ri = jobs.len() + machines.binary_search(&i).unwrap_or(0);
        let p = inst.p(i, j).unwrap_or(0.0);
        a.set(rj, c, 1.0);
        a.set(ri, c, p);
        b[rj] += x;
        b[ri] += p * x;
    }
    (edges, a, b)
}

/// Applies one step's values to G1 and migrates edges that reached a bound.
fn apply(wg: &mut WorkingGraphs, edges: &[(usize, usize)], values: &[f64], stage: Stage) {
    for (k, &e) in edges.iter().enumerate() {
        let old = wg.g1[&e];
        let v = values[k];
        let up = wg.upper(e.0);
        if v <= 0.0 {
            wg.g1.remove(&e);
            wg.log(stage, e, old, 0.0, Reason::Deleted);
        } else if v >= up {
            wg.g1.remove(&e);
            wg.g2.insert(e, up);
            wg.log(stage, e, old, up, Reason::Frozen);
        } else {
            wg.g1.insert(e, v);
        }
    }
}

/// Runs randomized steps until the G1 system is determined. `observe` sees
/// the state after setup and after every step.
pub(crate) fn run_transform(
    wg: &mut WorkingGraphs,
    inst: &Instance,
    rng: &mut SeededRng,
    observe: &mut dyn FnMut(&WorkingGraphs),
) -> Result<()> {
    observe(wg);
    loop {
        if wg.g1.is_empty() {
            return Ok(());
        }
        let (edges, a, _) = linear_system(wg, inst);
        let Some(r) = null_space_vector(&a) else { return Ok(()) };
        let x: Vec<f64> = edges.iter().map(|e| wg.g1[e]).collect();
        let upper: Vec<f64> = edges.iter().map(|e| wg.upper(e.0)).collect();
        let step = rand_step_along(&x, &r, &upper, rng).map_err(|e| match e {
            Error::Invariant(msg) => Error::Invariant(format!("{msg}\nsystem:\n{a:?}\nstate:\n{}", wg.dump())),
            other => other,
        })?;
        apply(wg, &edges, &step.x, Stage::Transform);
        wg.steps += 1;
        observe(wg);
    }
}

/// Cycle step shared with cycle breaking: apply `x + t d` along a cycle.
pub(crate) fn apply_cycle_step(wg: &mut WorkingGraphs, edges: &[(usize, usize)], dir: &[f64], t: f64, hits: &[usize]) {
    let mut values: Vec<f64> = edges.iter().zip(dir).map(|(e, d)| wg.g1[e] + t * d).collect();
    for &k in hits {
        values[k] = if t * dir[k] > 0.0 { wg.upper(edges[k].0) } else { 0.0 };
    }
    for (k, e) in edges.iter().enumerate() {
        let up = wg.upper(e.0);
        if values[k] < SNAP_TOL {
            values[k] = 0.0;
        } else if math::abs(values[k] - up) < SNAP_TOL {
            values[k] = up;
        }
    }
    apply(wg, edges, &values, Stage::CycleBreak);
}

pub(crate) fn step_bounds(x: &[f64], d: &[f64], upper: &[f64]) -> ((f64, Vec<usize>), (f64, Vec<usize>)) {
    let neg: Vec<f64> = d.iter().map(|v| -v).collect();
    (max_step(x, d, upper), max_step(x, &neg, upper))
}
