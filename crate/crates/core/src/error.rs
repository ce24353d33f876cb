use std::path::PathBuf;

/// Errors produced by scenario handling, network construction and the solver.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("scenario error at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("unit mismatch at `{path}`: expected {expected}, found `{found}`")]
    UnitMismatch {
        path: String,
        expected: &'static str,
        found: String,
    },

    #[error("edge `{edge}` references unknown node `{node}`")]
    DanglingReference { edge: String, node: String },

    #[error("conversion edge `{conversion}`: {message}")]
    InvalidConversion { conversion: String, message: String },

    #[error("gas node `{node}` is not connected to any source")]
    DisconnectedGas { node: String },

    #[error("power network component containing bus `{bus}` has no slack bus")]
    MissingSlack { bus: String },

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-positive density {value} on edge `{edge}` at grid point {point}")]
    NonPositiveDensity { edge: String, point: usize, value: f64 },

    #[error("pressure {pressure_bar} bar is outside the validity range of the pressure law")]
    PressureOutOfRange { pressure_bar: f64 },

    #[error("singular Jacobian: {0}")]
    SingularJacobian(String),

    #[error(
        "Newton did not converge after {iterations} iterations (residual {residual:.3e}); worst equations: {worst}"
    )]
    NewtonFailed {
        iterations: usize,
        residual: f64,
        worst: String,
    },

    #[error("time step {step} (t = {time_h:.4} h) failed: {source}")]
    StepFailed {
        step: usize,
        time_h: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("stationary initialization failed: {0}")]
    Initialization(Box<Error>),

    #[error("{format} import: {message}")]
    Import { format: &'static str, message: String },

    #[error("mismatched results: {0}")]
    Mismatch(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
