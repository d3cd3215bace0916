//! File formats, golden files and the command-line front end for
//! [`machact`].
//!
//! * [`io`] - instance and schedule JSON, canonical encoding, hashing.
//! * [`solve`] - one algorithm run turned into a report, trial table or sweep.
//! * [`compare`] - ratio tables against an exact frontier.
//! * [`golden`] - frozen oracle answers.
//! * [`fixtures`] - the seeded instance families used by the above.

pub mod compare;
mod error;
pub mod fixtures;
pub mod golden;
pub mod io;
pub mod solve;

pub use error::{CliError, CliResult};
