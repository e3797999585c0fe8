use thiserror::Error;

pub type Result<T, E = CbxError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CbxError {
    /// A configuration value violates its contract. `key` names the offending field.
    #[error("invalid configuration `{key}`: {reason}")]
    Config { key: String, reason: String },

    /// The objective returned NaN or an infinity.
    #[error("objective returned non-finite value {value} for point {index}")]
    Evaluation { index: usize, value: f64 },

    /// An input vector handed to a numerical routine was not finite.
    #[error("non-finite input at index {index}")]
    NonFiniteInput { index: usize },

    /// A particle left the finite reals during an update.
    #[error("non-finite particle position after iteration {iteration} (particle {particle})")]
    NonFinitePosition { iteration: u64, particle: usize },

    #[error("matrix is not symmetric: max |C_ij - C_ji| = {asymmetry:e}")]
    Asymmetric { asymmetry: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A benchmark run failed; `seed` identifies the run.
    #[error("run with seed {seed} failed: {source}")]
    Run {
        seed: u64,
        #[source]
        source: Box<CbxError>,
    },
}

impl CbxError {
    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        CbxError::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by configuration rather than by the numerics.
    pub fn is_config(&self) -> bool {
        match self {
            CbxError::Config { .. } => true,
            CbxError::Run { source, .. } => source.is_config(),
            _ => false,
        }
    }
}
