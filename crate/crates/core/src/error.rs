use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("integer overflow computing {what}")]
    Overflow { what: String },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("positivity violation: coefficient a[{k}][{j}] = {value} is negative")]
    Positivity { k: usize, j: usize, value: f64 },

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("no table entry for k = {k}, t = {t}")]
    Lookup { k: usize, t: f64 },

    #[error("fit error: {0}")]
    Fit(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
