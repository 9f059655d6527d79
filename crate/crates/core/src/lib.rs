//! Exact-arithmetic machinery for Fourier-coefficient verification of
//! Siegel and Jacobi form data.
//!
//! The crate is organized around five subsystems:
//!
//! - [`exactarith`]: exact cyclotomic field arithmetic (the value type for
//!   all Gauss sums and character values) plus a controlled-precision
//!   complex embedding.
//! - [`quadform`]: half-integral symmetric matrices: content, discriminant,
//!   fundamentality, coset enumeration, and odd-prime local normalization.
//! - [`charsums`]: Dirichlet characters and generalized quadratic Gauss
//!   sums, with the closed-form identities checked exactly against direct
//!   summation.
//! - [`epsmat`]: construction of the epsilon matrices of root-of-unity
//!   entries and exact rank verification over cyclotomic fields.
//! - [`jacobi`]: q-expansions with rational exponent offsets, theta series
//!   and their transformation laws, theta decomposition, the twisted
//!   Eichler--Zagier map, sieve/rescale operators, and the
//!   fundamental-coefficient hunt.
//!
//! All coefficient data is exact rational; floating point appears only in
//! the numerical theta-law checks, and always with an explicit error bound.

pub mod arith;
pub mod charsums;
pub mod epsmat;
pub mod exactarith;
pub mod jacobi;
pub mod quadform;

pub(crate) mod intmat;

pub use exactarith::{ComplexApprox, CycNumber};
pub use quadform::{HalfIntegralMatrix, UnimodularMatrix};

/// Exact rational scalar used for every coefficient in the crate.
pub type Rat = num_rational::BigRational;
/// Arbitrary-precision integer used for matrix entries and coset data.
pub type Int = num_bigint::BigInt;
