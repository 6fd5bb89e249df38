use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("base {0} is too small (need at least 2)")]
    InvalidBase(u32),
    #[error("digit {digit} is not a nonzero digit in base {base}")]
    InvalidDigit { digit: u32, base: u32 },
    #[error("length {0} is too short for a repdigit (need at least 2 digits)")]
    InvalidLength(u32),
    #[error("modulus {modulus} is outside the supported range [2, {ceiling}]")]
    ModulusOutOfRange { modulus: u64, ceiling: u64 },
    #[error("residue r = {0} must be 0, 1 or 2")]
    InvalidResidue(u32),
    #[error("invalid family: {0}")]
    InvalidFamily(String),
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("bound rejected: {0}")]
    BoundTooLarge(String),
}

pub type Result<T> = std::result::Result<T, Error>;
