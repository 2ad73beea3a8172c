use thiserror::Error;

/// Errors raised by the arithmetic layers and the lifting engine.
///
/// Obstructions are not errors: a lift that cannot proceed is reported through
/// [`crate::hensel::ObstructionReport`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands belong to different contexts")]
    ContextMismatch,
    #[error("field has no automorphism")]
    NoAutomorphism,
    #[error("field has no derivation")]
    NoDerivation,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("invalid context: {0}")]
    InvalidContext(String),
    #[error("polynomials are not coprime")]
    NotCoprime,
    #[error("target degree {target} must be below {bound}")]
    DegreeTooLarge { target: usize, bound: usize },
    #[error("unsupported field: {0}")]
    UnsupportedField(String),
    #[error("element is not a unit")]
    NotAUnit,
    #[error("polynomial is not in m^{required}[x] (coefficient valuation floor {floor})")]
    NotInIdealPower { floor: usize, required: usize },
    #[error("reduction of f does not equal f1*f2")]
    ResidueFactorizationMismatch,
    #[error("residue value is not a simple root")]
    NotASimpleRoot,
    #[error("product of blocks does not equal the reduction of f")]
    BlockProductMismatch,
    #[error("search space of {size} candidates exceeds the limit of {limit}")]
    SearchSpaceTooLarge { size: u128, limit: u128 },
    #[error("polynomial must be monic")]
    NotMonic,
    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(position: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            position,
            message: message.into(),
        }
    }
}
