use std::fmt;
use std::path::PathBuf;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or flag combinations.
    Usage(String),
    Io { path: PathBuf, source: std::io::Error },
    Json { what: String, source: serde_json::Error },
    /// A document parsed but does not describe a valid instance or schedule.
    Format(String),
    Core(machact::Error),
    /// A golden file disagrees with a fresh computation.
    Golden(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    /// Process exit code: 2 for anything the caller can fix by changing the
    /// invocation or its inputs, 1 for internal failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } | CliError::Json { .. } | CliError::Format(_) => 2,
            CliError::Core(machact::Error::Parameter(_) | machact::Error::LimitExceeded { .. }) => 2,
            CliError::Core(_) | CliError::Golden(_) => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage: {msg}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Json { what, source } => write!(f, "{what}: {source}"),
            CliError::Format(msg) => write!(f, "bad document: {msg}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Golden(msg) => write!(f, "golden mismatch: {msg}"),
        }
    }
}

impl std::error::Error for CliError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            CliError::Io { source, .. } => Some(source),
            CliError::Json { source, .. } => Some(source),
            CliError::Core(e) => Some(e),
            _ => None,
        }
    }
}

impl From<machact::Error> for CliError {
    fn from(e: machact::Error) -> Self {
        CliError::Core(e)
    }
}
