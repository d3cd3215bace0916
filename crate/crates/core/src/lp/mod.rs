//! Linear programs: a small dense simplex solver and the builders for the
//! scheduling relaxations.

mod builders;
mod simplex;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::error::{Error, Result};
use crate::math;

pub use builders::{
    build_activation_assignment_lp, build_activation_lp, build_activation_lp_filtered,
    build_coverage_lp, build_partial_gap_lp, ActivationLp, CoverageLp, FractionalSolution,
    PartialGapLp, PartialGapSolution,
};

/// Primal feasibility tolerance.
pub const FEAS_TOL: f64 = 1e-7;
/// Reduced-cost tolerance for optimality.
pub const OPT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

/// One constraint row, stored sparsely as `(variable, coefficient)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    sense: Sense,
    objective: Vec<f64>,
    constraints: Vec<Constraint>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub values: Vec<f64>,
    pub objective: f64,
    /// Row duals of the minimisation form (a max problem is negated first).
    pub duals: Vec<f64>,
    /// Duals of the finite upper bounds, as `(variable, dual)`.
    pub bound_duals: Vec<(usize, f64)>,
    /// Dual objective evaluated at the final basis, in the caller's sense.
    pub dual_objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(self) -> Option<LpSolution> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            _ => None,
        }
    }
}

impl LinearProgram {
    pub fn new(sense: Sense) -> Self {
        Self { sense, objective: Vec::new(), constraints: Vec::new(), lo: Vec::new(), hi: Vec::new(), names: Vec::new() }
    }

    /// Adds a variable with objective coefficient `cost` and bounds
    /// `[lo, hi]`; `hi` may be infinite. Returns its index.
    pub fn add_var(&mut self, name: impl Into<String>, cost: f64, lo: f64, hi: f64) -> Result<usize> {
        if !cost.is_finite() || !lo.is_finite() || hi.is_nan() || lo > hi {
            return Err(Error::Parameter(format!("bad variable: cost {cost}, bounds [{lo}, {hi}]")));
        }
        self.objective.push(cost);
        self.lo.push(lo);
        self.hi.push(hi);
        self.names.push(name.into());
        Ok(self.objective.len() - 1)
    }

    pub fn add_constraint(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) -> Result<()> {
        if !rhs.is_finite() || coeffs.iter().any(|(v, a)| *v >= self.num_vars() || !a.is_finite()) {
            return Err(Error::Parameter(format!("bad constraint row with rhs {rhs}")));
        }
        self.constraints.push(Constraint { coeffs, relation, rhs });
        Ok(())
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn bounds(&self, v: usize) -> (f64, f64) {
        (self.lo[v], self.hi[v])
    }

    /// Solves the program. Infeasible and unbounded programs are ordinary
    /// outcomes; `Err` means the solver broke its own postcondition.
    pub fn solve(&self) -> Result<LpOutcome> {
        simplex::solve(self)
    }

    /// Checks every row and bound at `x` within the feasibility tolerance
    /// scaled by the row magnitude.
    pub fn check_feasible(&self, x: &[f64]) -> Result<()> {
        for (v, &val) in x.iter().enumerate() {
            if val < self.lo[v] - FEAS_TOL || val > self.hi[v] + FEAS_TOL {
                return Err(Error::Invariant(format!("{} = {val} outside bounds", self.names[v])));
            }
        }
        for (k, con) in self.constraints.iter().enumerate() {
            let lhs: f64 = con.coeffs.iter().map(|&(v, a)| a * x[v]).sum();
            let scale = con.coeffs.iter().fold(1.0, |m, &(v, a)| f64::max(m, math::abs(a * x[v])));
            let tol = FEAS_TOL * f64::max(scale, math::abs(con.rhs));
            let ok = match con.relation {
                Relation::Le => lhs <= con.rhs + tol,
                Relation::Ge => lhs >= con.rhs - tol,
                Relation::Eq => math::abs(lhs - con.rhs) <= tol,
            };
            if !ok {
                return Err(Error::Invariant(format!("row {k} violated: {lhs} vs {}", con.rhs)));
            }
        }
        Ok(())
    }

    /// Plain-text listing of the program, one row per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let sense = match self.sense {
            Sense::Min => "min",
            Sense::Max => "max",
        };
        let _ = write!(out, "{sense}");
        for (v, c) in self.objective.iter().enumerate() {
            if *c != 0.0 {
                let _ = write!(out, " {c:+} {}", self.names[v]);
            }
        }
        out.push('\n');
        for con in &self.constraints {
            for &(v, a) in &con.coeffs {
                let _ = write!(out, "{a:+} {} ", self.names[v]);
            }
            let rel = match con.relation {
                Relation::Le => "<=",
                Relation::Eq => "=",
                Relation::Ge => ">=",
            };
            let _ = writeln!(out, "{rel} {}", con.rhs);
        }
        for v in 0..self.num_vars() {
            let _ = writeln!(out, "{} <= {} <= {}", self.lo[v], self.names[v], self.hi[v]);
        }
        out
    }

    pub fn var_names(&self) -> &[String] {
        &self.names
    }
}
