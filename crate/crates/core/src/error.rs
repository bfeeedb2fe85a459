use thiserror::Error;

/// Errors produced by the integrator library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ErknError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported phi order {0} (supported: 0..=3)")]
    UnsupportedOrder(usize),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("index error: {0}")]
    Index(String),

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("coefficient singularity at xi = {xi}: |{coefficient}| below {threshold:e}")]
    Singularity {
        xi: f64,
        coefficient: &'static str,
        threshold: f64,
    },

    #[error("numerical solution diverged at step {step}")]
    Divergence { step: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for ErknError {
    fn from(e: std::io::Error) -> Self {
        ErknError::Io(e.to_string())
    }
}

pub type Result<T, E = ErknError> = std::result::Result<T, E>;
