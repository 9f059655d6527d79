//! Jacobi and Siegel coefficient data: q-expansions with rational
//! exponent offsets, theta series and their transformation-law checks,
//! theta decomposition, the twisted Eichler--Zagier map, sieve/rescale
//! operators with level bookkeeping, Fourier--Jacobi extraction,
//! Taylor-slice coefficients, and the fundamental-coefficient hunt.

pub mod forms;
pub mod io;
pub mod qexp;
pub mod theta;

pub use forms::{HuntOutcome, HuntTrace, JacobiFormData, SiegelFormData};
pub use qexp::{ExpansionMeta, QExpansion, SieveBranch, SieveStep};

/// Errors across the Jacobi data pipelines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JacobiError {
    /// an operation that needs integer exponents got a nonzero offset
    NonzeroOffset,
    /// offsets of two expansions disagree
    OffsetMismatch,
    /// rescale asked for a prime not dividing every exponent
    ExponentNotDivisible(u64),
    /// rescale asked for a prime not dividing the level
    LevelNotDivisible(u64),
    /// scaled exponent failed to be a nonnegative integer
    NonIntegralExponent,
    /// a coefficient record violates positive semi-definiteness
    NotPositiveSemidefinite,
    /// two representatives of one coset class carry different values
    ConflictingCoefficient,
    /// a record lands beyond the declared truncation bound
    BeyondTruncation,
    /// quadratic-form level errors bubbled up
    Quad(crate::quadform::QuadError),
    /// Eichler--Zagier map needs a scalar odd prime index
    IndexNotOddPrime,
    /// Eichler--Zagier map needs gcd(2p, N) = 1
    LevelSharesIndex,
    /// Eichler--Zagier twist character must have conductor 1 or p
    BadTwistConductor,
    /// Eichler--Zagier twist character must be real-valued
    TwistNotReal,
    /// Fourier--Jacobi extraction needs genus >= 2 and matching sizes
    GenusTooSmall,
    SizeMismatch,
    /// theta evaluation outside the upper half-plane
    NotUpperHalfPlane,
    /// no positive lower bound for the lattice tail was certifiable
    TailBoundUnavailable,
    /// branch-cut failure inside the half-integral slash cocycle
    Exact(crate::exactarith::ExactError),
}

impl std::fmt::Display for JacobiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        use JacobiError::*;
        match self {
            NonzeroOffset => write!(f, "operation requires integer exponents (offset 0)"),
            OffsetMismatch => write!(f, "exponent offsets disagree"),
            ExponentNotDivisible(p) => {
                write!(f, "rescale by {p}: some exponent is not divisible by {p}")
            }
            LevelNotDivisible(p) => write!(f, "rescale by {p}: level is not divisible by {p}"),
            NonIntegralExponent => write!(f, "scaled exponent is not a nonnegative integer"),
            NotPositiveSemidefinite => {
                write!(f, "coefficient record violates positive semi-definiteness")
            }
            ConflictingCoefficient => {
                write!(f, "conflicting coefficients for one coset class")
            }
            BeyondTruncation => write!(f, "record lands beyond the truncation bound"),
            Quad(e) => write!(f, "{e}"),
            IndexNotOddPrime => write!(f, "index must be a scalar odd prime"),
            LevelSharesIndex => write!(f, "level must be coprime to 2p"),
            BadTwistConductor => write!(f, "twist character conductor must be 1 or p"),
            TwistNotReal => write!(f, "twist character must be real-valued"),
            GenusTooSmall => write!(f, "Fourier--Jacobi extraction needs genus >= 2"),
            SizeMismatch => write!(f, "block size mismatch"),
            NotUpperHalfPlane => write!(f, "tau must have positive imaginary part"),
            TailBoundUnavailable => {
                write!(f, "no positive tail bound certifiable for this index")
            }
            Exact(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for JacobiError {}

impl From<crate::quadform::QuadError> for JacobiError {
    fn from(e: crate::quadform::QuadError) -> Self {
        JacobiError::Quad(e)
    }
}

impl From<crate::exactarith::ExactError> for JacobiError {
    fn from(e: crate::exactarith::ExactError) -> Self {
        JacobiError::Exact(e)
    }
}
