use std::fmt;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// The three quantities that must stay positive for a state to be admissible,
/// stored as `f64` so errors are not generic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Margins {
    pub min_k: f64,
    pub min_stagnation: f64,
    pub min_head: f64,
}

impl fmt::Display for Margins {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "min K = {:e}, min signed (S dA/dy + lambda) = {:e}, min (q + lambda^2/2 - g w) = {:e}",
            self.min_k, self.min_stagnation, self.min_head
        )
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{op} requires zero mean input (mean = {mean:e})")]
    NonzeroMean { op: &'static str, mean: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("integration produced a non-finite state at y = {y}")]
    Integration { y: f64 },
    #[error("state is not admissible: {0}")]
    Inadmissible(Margins),
    #[error("singular linear system: {0}")]
    Singular(String),
    #[error("Newton did not converge in {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("lambda = {lambda} lies on the Dirichlet spectrum at mu = 0")]
    DirichletSpectrum { lambda: f64 },
    #[error("refused: {0}")]
    Refused(String),
    #[error("insufficient points: {0}")]
    InsufficientPoints(String),
}
