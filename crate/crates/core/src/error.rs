use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid mesh parameters: {0}")]
    InvalidMesh(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("design field out of range: value {value} at dof {dof}")]
    DesignOutOfRange { dof: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("no Dirichlet nodes carry the tag {0}")]
    NoDirichletNodes(String),

    #[error("pseudo-time march diverged at step {step} (norm growth {growth:e})")]
    Diverged { step: usize, growth: f64 },

    #[error("reaction coefficient k_v vanishes; the mixture optimum is undefined")]
    DegenerateReaction,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
