use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("operation not supported for this model: {0}")]
    UnsupportedModel(String),

    #[error("sector dimension {dim} exceeds the cap of {cap}")]
    CapExceeded { dim: usize, cap: usize },

    #[error("sector incompatible with the Hamiltonian: {0}")]
    SectorIncompatible(String),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid site selection: {0}")]
    InvalidSites(String),

    #[error("charge {0} is not realizable in this basis")]
    UnrealizableCharge(String),

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("energy {energy} lies within {distance:e} of the spectrum of QHQ")]
    SingularResolvent { energy: f64, distance: f64 },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("symmetry violated: {0}")]
    SymmetryViolation(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
