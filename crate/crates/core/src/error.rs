use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("pencil zE - A is singular at z = {re}{im:+}i")]
    SingularPencil { re: f64, im: f64 },

    #[error("pencil is not causal")]
    NotCausal,

    #[error("pencil is numerically irregular")]
    Irregular,

    #[error("no certificate found: {0}")]
    Infeasible(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid alpha path: {0}")]
    InvalidAlphaPath(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
