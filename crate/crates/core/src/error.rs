use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not an odd prime")]
    BadPrime(u64),
    #[error("finite-field characteristic {0} equals the residue characteristic")]
    EllEqualsP(u64),
    #[error("insufficient extension: {0}")]
    InsufficientExtension(String),
    #[error("root of unity of order {0} is not realizable in this ring")]
    UnrealizableOrder(u64),
    #[error("zero argument")]
    ZeroArgument,
    #[error("element is not invertible")]
    NotUnit,
    #[error("singular matrix {0}")]
    Singular(String),
    #[error("lattice inclusion fails: {0}")]
    NotContained(String),
    #[error("table blow-up: {size} cosets exceeds cap {cap}")]
    BlowUp { size: u128, cap: u64 },
    #[error("matrix is not symplectic")]
    NotSymplectic,
    #[error("element outside Omega: {0}")]
    NotInOmega(String),
    #[error("degenerate quadratic form")]
    Degenerate,
    #[error("Weil factor did not stabilize by lambda = {0}")]
    NonStabilization(i64),
    #[error("operators are not proportional: {0}")]
    NotProportional(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::BlowUp { .. } | Error::NonStabilization(_) | Error::InsufficientExtension(_) => 3,
            Error::NotProportional(_) => 1,
            _ => 2,
        }
    }
}
