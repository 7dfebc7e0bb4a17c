use thiserror::Error;

/// Errors produced anywhere in the simulation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("operators live on different bases ({left} vs {right})")]
    BasisMismatch { left: String, right: String },

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("steady state is not unique: {0}")]
    DegenerateSteadyState(String),

    #[error("singular parameter point: intermediate {name} vanishes (|{name}| = {modulus:e})")]
    SingularParameter { name: &'static str, modulus: f64 },

    #[error("correlation undefined: mean photon number {n1:e} is below threshold")]
    UndefinedCorrelation { n1: f64 },

    #[error("not found: {0}")]
    NotFound(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Failures of the numerics, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NumericalFailure(_)
                | Error::DegenerateSteadyState(_)
                | Error::SingularParameter { .. }
                | Error::UndefinedCorrelation { .. }
                | Error::NotFound(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
