use thiserror::Error;

/// Reasons a room description is rejected at load time.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RoomError {
    #[error("boundary needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("non-finite coordinate in {0}")]
    NonFinite(String),
    #[error("boundary edge {0} has coincident endpoints")]
    DegenerateEdge(usize),
    #[error("boundary encloses zero area")]
    ZeroArea,
    #[error("boundary is not simple: edges {0} and {1} intersect")]
    SelfIntersecting(usize, usize),
    #[error("obstacle `{0}`: footprint min must be strictly less than max on both axes")]
    InvalidFootprint(String),
    #[error("obstacle `{0}`: height must be positive")]
    NonPositiveHeight(String),
    #[error("obstacle `{0}`: footprint is not inside the boundary polygon")]
    ObstacleOutsideBoundary(String),
    #[error("duplicate hazard id `{0}`")]
    DuplicateId(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid room: {0}")]
    Room(#[from] RoomError),
    #[error("degenerate bearing: target coincides with the observer position")]
    DegenerateBearing,
    #[error("time step must be positive, got {0}")]
    NonPositiveDt(f64),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("need at least 4 samples for a boxplot, got {0}")]
    TooFewSamples(usize),
    #[error("invalid sample {value} at index {index}: speeds must be finite and non-negative")]
    InvalidSample { index: usize, value: f64 },
    #[error("invalid gait parameters: {0}")]
    Gait(String),
    #[error("line {line}: timestamp {t} does not increase (previous {prev})")]
    NonMonotonic { line: usize, t: f64, prev: f64 },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("empty trace")]
    EmptyTrace,
    #[error("unknown session `{0}`")]
    UnknownSession(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
