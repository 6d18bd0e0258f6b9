use std::path::PathBuf;

/// Errors produced across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("input shape mismatch: expected {expected}, got {got}")]
    InputShape { expected: usize, got: usize },

    #[error("stale forward cache: computed at parameter version {cache}, network is at {network}")]
    StaleCache { cache: u64, network: u64 },

    #[error("training diverged at epoch {epoch}: {reason}")]
    TrainingDivergence { epoch: usize, reason: String },

    #[error("empty batch")]
    EmptyBatch,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("architecture mismatch: {0}")]
    ArchitectureMismatch(String),

    #[error("degenerate treatment: {0}")]
    DegenerateTreatment(String),

    #[error("degenerate arm: {arm} has {count} samples, need more than {required}")]
    DegenerateArm {
        arm: &'static str,
        count: usize,
        required: usize,
    },

    #[error("identity violated: {what} differs by {gap:e}")]
    IdentityViolation { what: &'static str, gap: f64 },

    #[error("invalid perturbation: perturbed propensity {value} outside [{lo}, {hi}]")]
    InvalidPerturbation { value: f64, lo: f64, hi: f64 },

    #[error("overlap failure: treatment residual second moment {0:e} below threshold")]
    Overlap(f64),

    #[error("split error: {0}")]
    Split(String),

    #[error("schema error at row {row}: {message}")]
    Schema { row: usize, message: String },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("ensemble member {index}: {source}")]
    Member {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
