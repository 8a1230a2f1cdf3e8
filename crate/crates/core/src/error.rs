use thiserror::Error;

use crate::flow::FlowState;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate curve: segment {segment} has zero length")]
    DegenerateCurve { segment: usize },

    #[error("curve needs at least {required} vertices, got {found}")]
    TooFewVertices { required: usize, found: usize },

    #[error("elliptic modulus must lie in [0, 1), got {0}")]
    InvalidModulus(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parameterization validation failed: {0}")]
    ParameterizationValidation(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("multiplier undefined: bending energy {energy:e} is too small")]
    MultiplierUndefined { energy: f64 },

    #[error("time step fell below dt_min at t = {}", state.time)]
    Stiffness { state: Box<FlowState> },

    #[error("length constraint multiplier could not be found: {0}")]
    Constraint(String),

    #[error("singular linear system at pivot {pivot}")]
    DegenerateGeometry { pivot: usize },

    #[error("well-prepared datum construction failed: {reason} (deficit {deficit:e})")]
    ConstructionFailure { reason: String, deficit: f64 },

    #[error("incompatible initial datum: {0}")]
    Incompatible(String),

    #[error("configuration error: {}", .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "))]
    Config(Vec<crate::runner::config::FieldError>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
