use thiserror::Error;

pub type Result<T, E = AtlasError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum AtlasError {
    #[error("no points")]
    NoPoints,

    #[error("empty samples")]
    EmptySamples,

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degenerate landmarks in chart {chart}: rank {rank} < d = {d}")]
    DegenerateLandmarks { chart: usize, rank: usize, d: usize },

    #[error("chart {chart}: {source}")]
    Chart {
        chart: usize,
        #[source]
        source: Box<AtlasError>,
    },

    #[error("learning failed on {} chart(s): {}", .0.len(), join_errors(.0))]
    Charts(Vec<AtlasError>),

    #[error("non-finite state at step {step}")]
    NonFinite { step: usize },

    #[error("empty image")]
    EmptyImage,

    #[error("no region visits")]
    NoRegionVisits,

    #[error("time slice mismatch: {left} vs {right}")]
    SliceMismatch { left: usize, right: usize },

    #[error("unknown system `{0}`")]
    UnknownSystem(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn join_errors(errors: &[AtlasError]) -> String {
    errors
        .iter()
        .map(|e| e.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

impl AtlasError {
    pub fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        AtlasError::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }

    /// Process exit code: 3 for numerical failures, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            AtlasError::DegenerateLandmarks { .. }
            | AtlasError::NonFinite { .. }
            | AtlasError::EmptyImage
            | AtlasError::Charts(_) => 3,
            AtlasError::Chart { source, .. } => source.exit_code(),
            _ => 2,
        }
    }
}
