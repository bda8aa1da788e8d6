use thiserror::Error;

/// Everything that can go wrong in the lab, from bad input to solver failure.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unknown flux label `{0}`")]
    UnknownFlux(String),

    #[error(
        "Newton iteration did not converge after {iterations} iterations (last residual {residual:.3e}) at p = {p}"
    )]
    NonConvergence { p: f64, iterations: usize, residual: f64 },

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("profile not positive: min value {min:.3e} at cell {cell} ({what})")]
    NotPositive { what: &'static str, cell: usize, min: f64 },

    #[error("family not monotone in p: profiles {lower} and {upper} cross at cell {cell}")]
    NotMonotone { lower: usize, upper: usize, cell: usize },

    #[error("value {value} at cell {cell} lies outside the family bracket [{lo}, {hi}]; widen the family")]
    OutOfRange { cell: usize, value: f64, lo: f64, hi: f64 },

    #[error("time step {dt:.3e} exceeds the CFL bound {bound:.3e}")]
    Cfl { dt: f64, bound: f64 },

    #[error("perturbation mass in the edge buffer is {fraction:.3e} of the total (limit {limit:.1e})")]
    EdgeBuffer { fraction: f64, limit: f64 },

    #[error("Picard iteration left the ball of radius {radius:.3e} (sup norm {norm:.3e}); reduce t")]
    PicardDivergence { norm: f64, radius: f64 },

    #[error("already converged: {0}")]
    Converged(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;

impl LabError {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
