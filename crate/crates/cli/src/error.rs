use std::fmt;
use std::path::Path;

/// Failure of a CLI run, carrying its process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Malformed or invalid configuration, arguments or input file (exit 2).
    Config(String),
    /// A solver failed to produce a result (exit 3).
    Numerical(String),
    /// The core refused an inadmissible or degenerate request (exit 4).
    Refused(String),
    /// Reading or writing files (exit 1).
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Refused(_) => 4,
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Refused(m) => write!(f, "refused: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<gravwave::Error> for CliError {
    fn from(e: gravwave::Error) -> Self {
        use gravwave::Error as E;
        match e {
            E::Inadmissible(_) | E::Refused(_) | E::DirichletSpectrum { .. } => CliError::Refused(e.to_string()),
            E::InvalidArgument(_) => CliError::Config(e.to_string()),
            E::NonzeroMean { .. } | E::Integration { .. } | E::Singular(_) | E::NoConvergence { .. } | E::InsufficientPoints(_) => {
                CliError::Numerical(e.to_string())
            }
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
