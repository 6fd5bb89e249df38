//! Perfect squares that are sums of two repdigits.
//!
//! The crate reproduces a complete classification pipeline: quadratic-residue
//! tables modulo powers of ten, congruence elimination of repdigit families,
//! reduction of the remaining families to Mordell curves `y² = x³ + N`,
//! exhaustive enumeration of small cases, and identity checks in other bases.

pub mod arith;
pub mod classifier;
mod decimal;
pub mod error;
pub mod golden;
pub mod mordell;
pub mod multibase;
pub mod residue;

pub use arith::{is_perfect_square, isqrt, repdigit_value, Natural, Repdigit};
pub use classifier::{enumerate_solutions, Solution};
pub use error::{Error, Result};
pub use mordell::{IntegerPoint, MordellInstance};
pub use residue::{CaseFamily, Certificate, SieveReport, SquaresMod};
