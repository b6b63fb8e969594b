use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix is not in SL(2,R): det = {det}")]
    InvalidMatrix { det: f64 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("insufficient precision: {0}")]
    Precision(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("energy {energy} is too close to an eigenvalue (|W| = {wronskian:e})")]
    NearEigenvalue { energy: f64, wronskian: f64 },

    #[error("eigenfunction norm underflowed at E = {0}")]
    Underflow(f64),

    #[error("no eigenvalues in [{0}, {1}]")]
    EmptyProjection(f64, f64),

    #[error("numerical consistency error: {0}")]
    Consistency(String),

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;
