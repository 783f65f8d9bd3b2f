use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two objects that must live on the same grid do not.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Successive quadrature refinements disagree by more than the tolerance.
    #[error("quadrature did not converge for {what}: refinements differ by {rel_diff:.3e} (tolerance {tol:.1e})")]
    Accuracy {
        what: String,
        rel_diff: f64,
        tol: f64,
    },

    #[error("numerical divergence at fine step {step}: {detail}")]
    Divergence { step: usize, detail: String },

    /// Configuration rejected before any computation started.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Parameters violate a hypothesis of the statement a study reproduces.
    #[error("inadmissible parameters, violates {hypothesis}: {detail}")]
    Admissibility {
        hypothesis: &'static str,
        detail: String,
    },

    #[error("config not found: {0}")]
    ConfigNotFound(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
