use thiserror::Error;

/// Errors raised anywhere in the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {re} + {im}i is not strictly inside the unit disk")]
    OutsideDisk { re: f64, im: f64 },

    #[error("map is not a unit-determinant disk isometry (|a|^2 - |b|^2 = {det})")]
    InvalidIsometry { det: f64 },

    #[error("degenerate chord: endpoints coincide")]
    DegenerateChord,

    #[error("chords lie on a common geodesic and overlap")]
    NonTransversalOverlap,

    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),

    #[error("point reduction did not terminate after {0} steps")]
    ReductionDivergence(usize),

    #[error("point lies outside the fundamental polygon")]
    OutsidePolygon,

    #[error("trajectory hit a polygon vertex at time {time}")]
    VertexHit { time: f64 },

    #[error("time {time} outside [0, {total}]")]
    TimeOutOfRange { time: f64, total: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("kernel configuration error: {0}")]
    Configuration(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("unknown surface `{0}`")]
    UnknownSurface(String),

    #[error("replica {replica} aborted after {retries} vertex-hit retries")]
    TooManyRetries { replica: usize, retries: usize },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
