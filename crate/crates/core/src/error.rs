use thiserror::Error;

pub type Result<T> = std::result::Result<T, LcrError>;

/// Broad failure class, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Numeric,
}

#[derive(Debug, Error)]
pub enum LcrError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("invalid tau {tau} for axis length {len}")]
    InvalidTau { tau: usize, len: usize },

    #[error("invalid missing rate {0}: must lie in [0, 1)")]
    InvalidRate(f64),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("variant {variant} expects a rank-{expected} grid, got rank {actual}")]
    ConfigRankMismatch {
        variant: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("input contains a non-finite value at flat index {0}")]
    NonFiniteInput(usize),

    #[error("imaginary residue {residue:.3e} exceeds 1e-6 of the real magnitude {real_max:.3e}")]
    ImaginaryResidueTooLarge { residue: f64, real_max: f64 },

    #[error("every actual value is zero; MAPE is undefined")]
    AllActualsZero,

    #[error("evaluation set is empty")]
    EmptyEvaluationSet,

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("ragged input: {0}")]
    Shape(String),

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("image error: {0}")]
    Image(#[from] image::ImageError),
}

impl LcrError {
    pub fn class(&self) -> ErrorClass {
        use LcrError::*;
        match self {
            InvalidTau { .. } | InvalidRate(_) | InvalidConfig(_) | ConfigRankMismatch { .. } => {
                ErrorClass::Config
            }
            ImaginaryResidueTooLarge { .. } | AllActualsZero => ErrorClass::Numeric,
            ShapeMismatch(_) | InvalidShape(_) | NonFiniteInput(_) | EmptyEvaluationSet
            | Parse { .. } | Shape(_) | UnsupportedFormat(_) | Io(_) | Json(_) | Image(_) => {
                ErrorClass::Data
            }
        }
    }
}
