use thiserror::Error;

/// Errors raised by the pursuit kernels, loops and file formats.
#[derive(Debug, Error)]
pub enum PursuitError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("atom is numerically dependent on the current span (|psi|^2 = {norm_sq:e}, threshold {threshold:e})")]
    DependentAtom { norm_sq: f64, threshold: f64 },

    #[error("index {index} out of range for {len} selected atoms")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("no admissible atom remains in the dictionary")]
    Exhausted,

    #[error("decomposition holds no atoms")]
    EmptyDecomposition,

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("gram matrix is numerically singular (pivot ratio {pivot_ratio:e})")]
    IllConditioned { pivot_ratio: f64 },

    #[error("empty specification: {0}")]
    EmptySpec(&'static str),

    #[error("invalid signal: {0}")]
    InvalidSignal(String),

    #[error("invalid dictionary: {0}")]
    InvalidDictionary(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("artifact does not match the supplied signal and dictionary: {0}")]
    ArtifactMismatch(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl PursuitError {
    /// True for failures of the numerical pipeline itself, as opposed to bad
    /// input or I/O.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            PursuitError::DependentAtom { .. }
                | PursuitError::Exhausted
                | PursuitError::EmptyDecomposition
                | PursuitError::Infeasible(_)
                | PursuitError::IllConditioned { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, PursuitError>;
