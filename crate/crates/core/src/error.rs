use thiserror::Error;

pub type Result<T> = std::result::Result<T, QslError>;

#[derive(Debug, Error)]
pub enum QslError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid too coarse: j_max = {j_max} (need at least 2)")]
    GridTooCoarse { j_max: i64 },

    #[error("{what} index {index} out of range (limit {limit})")]
    OutOfRange {
        what: &'static str,
        index: usize,
        limit: usize,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("time step {dt:e} violates band CFL bound {bound:e} for band {band}")]
    Cfl { dt: f64, bound: f64, band: usize },

    #[error("metric not uniformly elliptic: minimum eigenvalue {min_eig} < 1/2")]
    Ellipticity { min_eig: f64 },

    #[error("non-finite value produced at step {step}")]
    NonFinite { step: usize },

    #[error("smallness violated: {what} = {value} exceeds {limit}")]
    Smallness {
        what: &'static str,
        value: f64,
        limit: f64,
    },

    #[error("Picard iteration failed to contract at iterate {iterate}: ratios {ratios:?}")]
    Contraction { iterate: usize, ratios: Vec<f64> },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("bad field file: {0}")]
    Format(String),

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
