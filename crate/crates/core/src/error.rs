use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    /// An expression node could not be evaluated at the given argument.
    #[error("domain error in `{node}` at u = {at}")]
    Domain { node: String, at: f64 },

    #[error("sample points are not distinct")]
    DegenerateSampling,

    #[error("inconsistent nullity: {0}")]
    InconsistentNullity(String),

    #[error("hypothesis violated at w = {w}: {reason}")]
    HypothesisViolated { w: f64, reason: String },

    #[error("profile has no tail below the decay threshold")]
    InsufficientTail,

    #[error("forbidden exponent alpha = {0}")]
    ForbiddenExponent(f64),

    #[error("no real amplitude: A^2(beta+1)(beta+2) = {0} is negative")]
    NegativeBase(f64),

    #[error("step size underflow at z = {z}")]
    StepSizeUnderflow { z: f64 },

    #[error("trajectory is not from the alpha = 2 power reduction")]
    WrongCase,

    #[error("z = {z} outside trajectory span [{lo}, {hi}]")]
    OutOfRange { z: f64, lo: f64, hi: f64 },

    #[error("y' changes sign near z = {z}")]
    NonMonotone { z: f64 },

    #[error("unstable step at t = {t}: {reason}")]
    UnstableStep { t: f64, reason: String },

    #[error("transformed support [{lo}, {hi}] leaves the periodic cell [0, {len}]")]
    WindowExceeded { lo: f64, hi: f64, len: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Syntax { .. } => "SyntaxError",
            Error::UnknownIdentifier { .. } => "UnknownIdentifier",
            Error::Domain { .. } => "DomainError",
            Error::DegenerateSampling => "DegenerateSampling",
            Error::InconsistentNullity(_) => "InconsistentNullity",
            Error::HypothesisViolated { .. } => "HypothesisViolated",
            Error::InsufficientTail => "InsufficientTail",
            Error::ForbiddenExponent(_) => "ForbiddenExponent",
            Error::NegativeBase(_) => "NegativeBase",
            Error::StepSizeUnderflow { .. } => "StepSizeUnderflow",
            Error::WrongCase => "WrongCase",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::NonMonotone { .. } => "NonMonotone",
            Error::UnstableStep { .. } => "UnstableStep",
            Error::WindowExceeded { .. } => "WindowExceeded",
            Error::InvalidArgument(_) => "InvalidArgument",
        }
    }
}
