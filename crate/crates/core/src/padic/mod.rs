//! Fixed-precision arithmetic over Q_p, its quadratic extensions and the biquadratic tower.

mod ext;
mod hensel;
mod prime;
mod scalar;
mod square;

pub use ext::{Ext, ExtKind, ExtensionDescriptor, Level, Tower};
pub use hensel::{hensel_root, poly_eval};
pub use prime::PrimeContext;
pub use scalar::{Padic, EXACT};
pub use square::{sqrt, sqrt_in_tower, square_class, ClassLabel, SquareClass};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PadicError {
    #[error("invalid context: {0}")]
    InvalidContext(String),
    #[error("division by exact zero")]
    DivisionByZero,
    #[error("division by a scalar whose known digits are all zero")]
    DivisionByInexactZero,
    #[error("level mismatch: {0}")]
    LevelMismatch(String),
    #[error("zero has no square class")]
    ZeroHasNoClass,
    #[error("Hensel condition failed: {0}")]
    HenselConditionFailed(String),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("not a square (class {0})")]
    NonSquare(SquareClass),
    #[error("not a square in E")]
    NonSquareInE,
    #[error("polynomial coefficients are not integral")]
    NonIntegral,
    #[error("operation unsupported at level {0:?}")]
    UnsupportedLevel(Level),
}

/// Residue of an integer in [0, p).
pub(crate) fn residue_u32(x: &num_bigint::BigInt, p: u32) -> u32 {
    use num_integer::Integer;
    use num_traits::ToPrimitive;
    x.mod_floor(&num_bigint::BigInt::from(p)).to_u32().unwrap()
}
