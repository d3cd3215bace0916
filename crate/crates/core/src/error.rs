use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An index or dimension does not fit the instance.
    Structural(String),
    /// A caller-supplied parameter is out of range.
    Parameter(String),
    /// An input does not satisfy the operation's precondition.
    Precondition(String),
    /// No solution exists at the requested makespan guess / budgets.
    Infeasible,
    /// A brute-force oracle refused because the instance is too large.
    LimitExceeded { what: &'static str, size: f64, limit: f64 },
    /// An internal invariant failed. Carries a dump of the offending state.
    Invariant(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Structural(msg) => write!(f, "structural error: {msg}"),
            Error::Parameter(msg) => write!(f, "parameter error: {msg}"),
            Error::Precondition(msg) => write!(f, "precondition violated: {msg}"),
            Error::Infeasible => f.write_str("infeasible"),
            Error::LimitExceeded { what, size, limit } => {
                write!(f, "{what} too large: {size} exceeds limit {limit}")
            }
            Error::Invariant(msg) => write!(f, "invariant violated: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
