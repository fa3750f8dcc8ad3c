use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid composite space: {0}")]
    InvalidSpace(String),

    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian (max |M - M^dag| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid quantum state: {0}")]
    InvalidState(String),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unrecognized field factor in term {term}: {reason}")]
    UnrecognizedFieldFactor { term: usize, reason: String },

    #[error(
        "truncation overflow: population {population:e} in the top {top_k} Fock levels at t = {time} \
         (raise n_cut)"
    )]
    TruncationOverflow { population: f64, top_k: usize, time: f64 },

    #[error("numerical guard tripped ({guard}): {detail}")]
    NumericalGuard { guard: &'static str, detail: String },

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("linear algebra failure: {0}")]
    Linalg(String),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}
