//! Machine-activation scheduling.
//!
//! Given jobs, machines with activation costs and per-pair processing times,
//! pick a set of machines to power on and assign every job to one of them so
//! that both the activation cost and the makespan stay close to the best
//! achievable trade-off.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is pure
//! computation; file formats, golden files and the command-line front end
//! live in the `machact-cli` crate.
//!
//! Module map:
//!
//! * [`model`] - instances, schedules, metrics and instance generators.
//! * [`linalg`] - dense elimination, null spaces and bipartite matching.
//! * [`lp`] - a dense two-phase simplex solver plus the LP builders.
//! * [`round_simple`] - iterative independent rounding.
//! * [`round_main`] - the dependent-rounding pipeline with the
//!   (2+eps)-makespan guarantee, and its assignment-cost variant.
//! * [`greedy`] - submodular greedy over fractional coverage.
//! * [`st_round`] - machine-copy rounding and bipartite dependent rounding.
//! * [`extensions`] - release times and outliers.
//! * [`ptas`] - the configuration-graph scheme for related machines.
//! * [`oracle`] - brute-force ground truth for small instances.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod error;
pub mod math;
pub mod rng;

pub mod extensions;
pub mod greedy;
pub mod linalg;
pub mod lp;
pub mod model;
pub mod oracle;
pub mod ptas;
pub mod round_main;
pub mod round_simple;
pub mod st_round;

pub use error::{Error, Result};
pub use model::{Instance, ParetoPoint, Profile, Schedule, ScheduleMetrics};
