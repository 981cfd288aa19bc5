use thiserror::Error;

/// Errors raised by the numerical kernels and the experiment drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point outside the closed domain: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("integrand is not finite at node {node:?}")]
    SingularIntegrand { node: Vec<f64> },

    #[error(
        "gram matrix is not numerically positive definite: smallest scaled pivot {smallest_pivot:e} at index {index}"
    )]
    Conditioning { smallest_pivot: f64, index: usize },

    #[error("monomial {exponent:?} is not in the truncated basis")]
    Degree { exponent: Vec<u32> },

    #[error("annulus {{{level} < psi < {level} + 1}} reaches the domain boundary")]
    Range { level: f64 },

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Conditioning { .. } | Error::SingularIntegrand { .. } | Error::Divergent(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
