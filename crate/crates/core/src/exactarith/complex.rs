//! Complex values with tracked absolute error bounds.
//!
//! Used for the numerical side of the theta transformation-law checks and
//! for cross-checking exact cyclotomic identities. Bounds are deliberately
//! generous: they only need to stay finite and honest, never tight.

use super::ExactError;

/// A complex number known to within `err_bound` in absolute value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexApprox {
    pub re: f64,
    pub im: f64,
    /// Guaranteed bound on |stored - true|.
    pub err_bound: f64,
}

const EPS: f64 = f64::EPSILON;

impl ComplexApprox {
    pub fn new(re: f64, im: f64, err_bound: f64) -> Self {
        debug_assert!(err_bound.is_finite() && err_bound >= 0.0);
        ComplexApprox { re, im, err_bound }
    }

    pub fn exact(re: f64, im: f64) -> Self {
        ComplexApprox {
            re,
            im,
            err_bound: 0.0,
        }
    }

    pub fn zero() -> Self {
        ComplexApprox::exact(0.0, 0.0)
    }

    pub fn abs(&self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn add(&self, other: &ComplexApprox) -> ComplexApprox {
        let re = self.re + other.re;
        let im = self.im + other.im;
        let round = (re.abs() + im.abs()) * EPS;
        ComplexApprox::new(re, im, self.err_bound + other.err_bound + round)
    }

    pub fn sub(&self, other: &ComplexApprox) -> ComplexApprox {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> ComplexApprox {
        ComplexApprox::new(
            self.re * s,
            self.im * s,
            self.err_bound * s.abs() + (self.abs() * s.abs()) * 2.0 * EPS,
        )
    }

    pub fn mul(&self, other: &ComplexApprox) -> ComplexApprox {
        let re = self.re * other.re - self.im * other.im;
        let im = self.re * other.im + self.im * other.re;
        let a = self.abs();
        let b = other.abs();
        let err = a * other.err_bound
            + b * self.err_bound
            + self.err_bound * other.err_bound
            + (a * b) * 8.0 * EPS;
        ComplexApprox::new(re, im, err)
    }

    pub fn div(&self, other: &ComplexApprox) -> Result<ComplexApprox, ExactError> {
        let d = other.re * other.re + other.im * other.im;
        let b = other.abs();
        if b <= other.err_bound || d == 0.0 {
            return Err(ExactError::DivisionByZero);
        }
        let re = (self.re * other.re + self.im * other.im) / d;
        let im = (self.im * other.re - self.re * other.im) / d;
        let a = self.abs();
        // |delta(a/b)| <= da/|b| + |a| db/|b|^2, inflated for the rounding
        // of the divisions and for the uncertainty of |b| itself.
        let denom = b - other.err_bound;
        let err = self.err_bound / denom + a * other.err_bound / (denom * denom)
            + (a / denom) * 8.0 * EPS;
        Ok(ComplexApprox::new(re, im, err))
    }

    /// Distance to another approximate value, ignoring both error bounds.
    pub fn dist(&self, other: &ComplexApprox) -> f64 {
        (self.re - other.re).hypot(self.im - other.im)
    }

    /// e^{2 pi i w} for w = self, with propagated error.
    pub fn exp_2pi_i(&self) -> ComplexApprox {
        // e^{2 pi i (x + iy)} = e^{-2 pi y} (cos 2 pi x + i sin 2 pi x)
        let two_pi = 2.0 * std::f64::consts::PI;
        let mag = (-two_pi * self.im).exp();
        let re = mag * (two_pi * self.re).cos();
        let im = mag * (two_pi * self.re).sin();
        // |d/dw e^{2 pi i w}| = 2 pi |e^{2 pi i w}|
        let err = mag * (two_pi * self.err_bound).min(2.0) * 1.5 + mag * 8.0 * EPS
            + mag * two_pi * (self.re.abs() + self.im.abs()) * 4.0 * EPS;
        ComplexApprox::new(re, im, err)
    }

    pub fn powi(&self, n: i32) -> Result<ComplexApprox, ExactError> {
        let mut out = ComplexApprox::exact(1.0, 0.0);
        for _ in 0..n.unsigned_abs() {
            out = out.mul(self);
        }
        if n < 0 {
            out = ComplexApprox::exact(1.0, 0.0).div(&out)?;
        }
        Ok(out)
    }
}

impl std::fmt::Display for ComplexApprox {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.im >= 0.0 {
            write!(f, "{:.7} + {:.7}i", self.re, self.im)
        } else {
            write!(f, "{:.7} - {:.7}i", self.re, -self.im)
        }
    }
}

/// Principal square root: defined on arguments off the closed negative real
/// axis, returning the root with nonnegative real part.
pub fn principal_sqrt(z: &ComplexApprox) -> Result<ComplexApprox, ExactError> {
    let r = z.abs();
    if r <= z.err_bound {
        // indistinguishable from 0, which sits on the branch cut boundary
        return Err(ExactError::BranchCut);
    }
    if z.re <= 0.0 && z.im.abs() <= z.err_bound {
        return Err(ExactError::BranchCut);
    }
    let theta = z.im.atan2(z.re);
    let sr = r.sqrt();
    let re = sr * (theta / 2.0).cos();
    let im = sr * (theta / 2.0).sin();
    // |d sqrt / dz| = 1 / (2 sqrt|z|) near z, inflated by the uncertainty.
    let err = z.err_bound / (2.0 * (r - z.err_bound).sqrt()) + sr * 8.0 * EPS;
    Ok(ComplexApprox::new(re, im, err))
}
