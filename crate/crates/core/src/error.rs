use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum KqpdError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("amplitudes not normalized: |{name}|^2 sum = {norm}")]
    NotNormalized { name: &'static str, norm: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not a valid {kind}: {reason}")]
    InvalidMatrix { kind: &'static str, reason: String },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("imaginary residue {0:e} exceeds tolerance")]
    ImaginaryResidue(f64),

    #[error("measured density negative beyond rounding: {0:e}")]
    NegativeDensity(f64),

    #[error("record is empty")]
    EmptyRecord,

    #[error("wrong record: expected {expected}, got {found}")]
    WrongRecord { expected: String, found: String },

    #[error("rejection sampler acceptance rate {rate:.4} below 1%")]
    LowAcceptance { rate: f64 },

    #[error("duplicate trial seed {0}")]
    DuplicateSeed(u64),

    #[error("every quadrature node was removed by the cutoff")]
    AllNodesCut,

    #[error("config error: {0}")]
    Config(String),

    #[error("malformed record file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl KqpdError {
    /// Errors that stem from numerics rather than user input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            KqpdError::Eigen(_)
                | KqpdError::ImaginaryResidue(_)
                | KqpdError::NegativeDensity(_)
                | KqpdError::LowAcceptance { .. }
                | KqpdError::AllNodesCut
        )
    }
}

pub type Result<T> = std::result::Result<T, KqpdError>;
