//! Exact arithmetic in cyclotomic fields Q(zeta_m), plus a complex
//! embedding with tracked error bounds.
//!
//! [`CycNumber`] is the value type for every Gauss sum, character value,
//! and epsilon-matrix entry in this crate: all of them are Z-linear
//! combinations of roots of unity and are computed without rounding.
//! [`ComplexApprox`] exists only to cross-check exact identities
//! numerically and to drive the theta transformation-law checks.

mod complex;
mod cyclotomic;

pub use complex::{principal_sqrt, ComplexApprox};
pub use cyclotomic::CycNumber;

/// Errors from exact or embedded arithmetic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExactError {
    /// Inversion of zero in a cyclotomic field.
    DivisionByZero,
    /// principal square root of a value on (or indistinguishable from)
    /// the closed negative real axis.
    BranchCut,
}

impl std::fmt::Display for ExactError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExactError::DivisionByZero => write!(f, "division by zero in cyclotomic field"),
            ExactError::BranchCut => write!(
                f,
                "principal square root undefined: argument on the negative real axis within error bound"
            ),
        }
    }
}

impl std::error::Error for ExactError {}
