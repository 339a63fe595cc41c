use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parity error: {0}")]
    Parity(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("size error: {0}")]
    Size(String),

    #[error("singular endpoint t = {0}")]
    SingularEndpoint(f64),

    #[error("root bracket error: {0}")]
    RootBracket(String),

    #[error("no nontrivial root: beta = {beta} is not above beta_c = {beta_c}")]
    NoNontrivialRoot { beta: f64, beta_c: f64 },

    #[error("quantity undefined at the critical point: {0}")]
    UndefinedAtCriticality(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("table mismatch: {0}")]
    Consistency(String),

    #[error("cache file {path}: {reason}")]
    Cache { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
