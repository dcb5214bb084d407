use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus must be at least 2, got {0}")]
    InvalidModulus(u64),

    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u64, u64),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("matrix is not invertible (determinant {0} is not a unit)")]
    NotInvertible(u64),

    #[error("degenerate pairing: Gram determinant {0} is not a unit")]
    DegeneratePairing(u64),

    #[error("space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("cycle is not homogeneous of dimension {0}")]
    NotHomogeneous(usize),

    #[error("cdmin is undefined for the zero projector")]
    ZeroProjector,

    #[error("descent step ({step}) failed: {detail}")]
    StepFailure { step: char, detail: String },

    #[error("rationality audit failed: {cycle} is not in the {label}-rational structure")]
    RationalityFailure { cycle: String, label: String },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("instance has no `{0}` block")]
    MissingBlock(&'static str),

    #[error("unknown name `{0}`")]
    UnknownName(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
