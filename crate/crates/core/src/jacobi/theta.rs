//! Numerical evaluation of the theta series Theta_{mu,T} and two-sided
//! checks of its transformation laws under the half-integral slash.
//!
//! Everything exact stays exact: phases like exp(T^{-1}[mu/2]) are built
//! from the rational value and embedded with a tracked bound. Floating
//! point enters only through the truncated lattice sum, whose tail is
//! bounded by Gaussian decay from a certified lower bound on the smallest
//! eigenvalue of T.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use super::JacobiError;
use crate::exactarith::{principal_sqrt, ComplexApprox, CycNumber};
use crate::intmat;
use crate::quadform::HalfIntegralMatrix;

/// Plain complex arithmetic for the inner summation loop.
#[derive(Clone, Copy, Debug)]
pub struct C64 {
    pub re: f64,
    pub im: f64,
}

impl C64 {
    pub fn new(re: f64, im: f64) -> Self {
        C64 { re, im }
    }

    pub fn zero() -> Self {
        C64::new(0.0, 0.0)
    }

    fn add(self, o: C64) -> C64 {
        C64::new(self.re + o.re, self.im + o.im)
    }

    fn mul(self, o: C64) -> C64 {
        C64::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }

    fn scale(self, s: f64) -> C64 {
        C64::new(self.re * s, self.im * s)
    }

    fn div(self, o: C64) -> C64 {
        let d = o.re * o.re + o.im * o.im;
        C64::new(
            (self.re * o.re + self.im * o.im) / d,
            (self.im * o.re - self.re * o.im) / d,
        )
    }

    fn abs(self) -> f64 {
        self.re.hypot(self.im)
    }

    /// e^{2 pi i self}
    fn exp_2pi_i(self) -> C64 {
        let mag = (-2.0 * std::f64::consts::PI * self.im).exp();
        let arg = 2.0 * std::f64::consts::PI * self.re;
        C64::new(mag * arg.cos(), mag * arg.sin())
    }
}

/// A certified positive lower bound for the smallest eigenvalue of T:
/// exact closed forms for sizes 1 and 2, Gershgorin discs above that.
fn lambda_min_lower(t: &HalfIntegralMatrix) -> Result<f64, JacobiError> {
    let n = t.size();
    let g = |i: usize, j: usize| -> f64 {
        t.gram()[i][j].to_f64().expect("gram entry fits f64") / 2.0
    };
    let raw = match n {
        1 => g(0, 0),
        2 => {
            let (a, b, c) = (g(0, 0), g(0, 1), g(1, 1));
            (a + c - ((a - c).powi(2) + 4.0 * b * b).sqrt()) / 2.0
        }
        _ => {
            let mut best = f64::INFINITY;
            for i in 0..n {
                let mut row = g(i, i);
                for j in 0..n {
                    if j != i {
                        row -= g(i, j).abs();
                    }
                }
                best = best.min(row);
            }
            best
        }
    };
    let safe = raw * (1.0 - 1e-9) - 1e-12;
    if safe <= 0.0 {
        return Err(JacobiError::TailBoundUnavailable);
    }
    Ok(safe)
}

fn mu_tilde(t: &HalfIntegralMatrix, mu: &[BigInt]) -> Vec<f64> {
    // (2T)^{-1} mu = adj(gram) mu / det(gram)
    let adj = intmat::adjugate(t.gram());
    let det = intmat::det(t.gram());
    let detf = det.to_f64().unwrap();
    intmat::mat_vec(&adj, mu)
        .iter()
        .map(|x| x.to_f64().unwrap() / detf)
        .collect()
}

/// Upper bound for the sum of |terms| with ||l||_inf > radius.
fn tail_bound(
    t: &HalfIntegralMatrix,
    mu: &[BigInt],
    tau_im: f64,
    z_im: &[f64],
    radius: u32,
) -> Result<f64, JacobiError> {
    let n = t.size();
    let lambda = lambda_min_lower(t)?;
    let mt = mu_tilde(t, mu);
    let m0 = mt.iter().map(|x| x * x).sum::<f64>().sqrt();
    // c = || T Im(z) ||_2
    let mut c = 0.0f64;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += t.gram()[i][j].to_f64().unwrap() / 2.0 * z_im[j];
        }
        c += row * row;
    }
    let c = c.sqrt();
    let mut tail = 0.0f64;
    let mut prev = f64::INFINITY;
    let mut k = radius as f64 + 1.0;
    for _ in 0..100_000 {
        let dist = k - m0;
        if dist <= 0.0 {
            // radius does not yet clear the shifted lattice point
            tail = f64::INFINITY;
            break;
        }
        let count = (2.0 * k + 1.0).powi(n as i32) - (2.0 * k - 1.0).powi(n as i32);
        let term = count
            * (-2.0 * std::f64::consts::PI * tau_im * lambda * dist * dist
                + 4.0 * std::f64::consts::PI * c * dist)
                .exp();
        tail += term;
        if term < 1e-300 {
            break;
        }
        if term <= prev / 2.0 && term < tail * 1e-6 {
            // remaining terms are dominated by a geometric series
            tail += term;
            break;
        }
        prev = term;
        k += 1.0;
    }
    Ok(tail)
}

/// Smallest radius whose tail bound is below the target.
pub fn radius_for_tail(
    t: &HalfIntegralMatrix,
    mu: &[BigInt],
    tau_im: f64,
    z_im: &[f64],
    target: f64,
) -> Result<u32, JacobiError> {
    for radius in 1..=400u32 {
        let tb = tail_bound(t, mu, tau_im, z_im, radius)?;
        if tb <= target {
            return Ok(radius);
        }
    }
    Err(JacobiError::TailBoundUnavailable)
}

/// Theta_{mu,T}(tau, z) truncated over ||l||_inf <= radius, with the
/// stated tail bound folded into the error. The inputs tau and z are
/// taken as exact f64 values; callers holding perturbed arguments go
/// through `theta_eval_perturbed`.
pub fn theta_eval(
    t: &HalfIntegralMatrix,
    mu: &[BigInt],
    tau: C64,
    z: &[C64],
    radius: u32,
) -> Result<ComplexApprox, JacobiError> {
    theta_eval_perturbed(t, mu, tau, z, radius, 0.0, 0.0)
}

/// As `theta_eval`, with stated absolute uncertainties on tau and on each
/// z coordinate folded into the bound through the term derivatives.
pub fn theta_eval_perturbed(
    t: &HalfIntegralMatrix,
    mu: &[BigInt],
    tau: C64,
    z: &[C64],
    radius: u32,
    tau_err: f64,
    z_err: f64,
) -> Result<ComplexApprox, JacobiError> {
    let n = t.size();
    if mu.len() != n || z.len() != n {
        return Err(JacobiError::SizeMismatch);
    }
    if tau.im <= 0.0 {
        return Err(JacobiError::NotUpperHalfPlane);
    }
    if !t.is_positive_definite() {
        return Err(JacobiError::Quad(
            crate::quadform::QuadError::NotPositiveDefinite,
        ));
    }
    let mt = mu_tilde(t, mu);
    let gram: Vec<Vec<f64>> = t
        .gram()
        .iter()
        .map(|row| row.iter().map(|x| x.to_f64().unwrap()).collect())
        .collect();

    let z_im: Vec<f64> = z.iter().map(|v| v.im).collect();
    let tail = tail_bound(t, mu, tau.im, &z_im, radius)?;

    let b = radius as i64;
    let mut ell = vec![-b; n];
    let mut sum = C64::zero();
    let mut abs_sum = 0.0f64;
    let mut scale_sum = 0.0f64;
    let mut deriv_sum = 0.0f64;
    let mut terms = 0u64;
    loop {
        // x = l + mu~, w = T[x] tau + 2 z T x
        let x: Vec<f64> = (0..n).map(|i| ell[i] as f64 + mt[i]).collect();
        let mut txq = 0.0f64; // T[x]
        let mut tx = vec![0.0f64; n]; // (T x)_i
        for i in 0..n {
            for j in 0..n {
                tx[i] += gram[i][j] / 2.0 * x[j];
            }
            txq += x[i] * tx[i];
        }
        let mut ztx = C64::zero();
        let mut tx_abs = 0.0f64;
        for i in 0..n {
            ztx = ztx.add(z[i].scale(tx[i]));
            tx_abs += tx[i].abs();
        }
        let w = tau.scale(txq).add(ztx.scale(2.0));
        let term = w.exp_2pi_i();
        sum = sum.add(term);
        let tm = term.abs();
        abs_sum += tm;
        scale_sum += tm * (1.0 + w.abs());
        // |d term / d tau| = 2 pi |T[x]| |term|, similarly in each z_i
        deriv_sum += tm
            * 2.0
            * std::f64::consts::PI
            * (txq.abs() * tau_err + 2.0 * tx_abs * z_err);
        terms += 1;

        // odometer over the box
        let mut i = n;
        loop {
            if i == 0 {
                let eps = f64::EPSILON;
                // per-term phase rounding, left-to-right accumulation,
                // and input perturbation through the derivatives
                let round = scale_sum * eps * 16.0 * (n * n + 4) as f64
                    + abs_sum * eps * (terms as f64 + 4.0)
                    + deriv_sum;
                return Ok(ComplexApprox::new(sum.re, sum.im, tail + round));
            }
            i -= 1;
            ell[i] += 1;
            if ell[i] <= b {
                break;
            }
            ell[i] = -b;
        }
    }
}

/// (Theta_mu |_{n/2, T} g)(tau, z) for g = (a, b, c, d) in SL_2(Z): the
/// transformed theta value times (c tau + d)^{-n/2} (principal root) and
/// the index exponential factor. The truncation radius for the moved
/// point is chosen internally against `tail_target`.
#[allow(clippy::too_many_arguments)]
pub fn slash_theta(
    t: &HalfIntegralMatrix,
    mu: &[BigInt],
    g: (i64, i64, i64, i64),
    tau: C64,
    z: &[C64],
    tail_target: f64,
) -> Result<ComplexApprox, JacobiError> {
    let (a, b, c, d) = g;
    assert_eq!(a * d - b * c, 1, "slash needs an SL_2(Z) element");
    let n = t.size();
    let j0 = tau.scale(c as f64).add(C64::new(d as f64, 0.0));
    let new_tau = tau.scale(a as f64).add(C64::new(b as f64, 0.0)).div(j0);
    let new_z: Vec<C64> = z.iter().map(|v| v.div(j0)).collect();

    let new_z_im: Vec<f64> = new_z.iter().map(|v| v.im).collect();
    let radius = radius_for_tail(t, mu, new_tau.im, &new_z_im, tail_target)?;
    // rounding of the Moebius action feeds the evaluation as an input
    // perturbation
    let eps = f64::EPSILON;
    let tau_err = (1.0 + new_tau.abs()) * 8.0 * eps;
    let z_err = z
        .iter()
        .map(|v| (1.0 + v.div(j0).abs()) * 8.0 * eps)
        .fold(0.0f64, f64::max);
    let theta = theta_eval_perturbed(t, mu, new_tau, &new_z, radius, tau_err, z_err)?;

    // (c tau + d)^{-n/2} via the principal square root
    let j0a = ComplexApprox::new(j0.re, j0.im, 1e-14 * j0.abs());
    let root = principal_sqrt(&j0a)?;
    let autom = root.powi(-(n as i32))?;

    // exp(-2 pi i c (z T z^t) / (c tau + d))
    let gram: Vec<Vec<f64>> = t
        .gram()
        .iter()
        .map(|row| row.iter().map(|x| x.to_f64().unwrap()).collect())
        .collect();
    let mut ztz = C64::zero();
    for i in 0..n {
        for j in 0..n {
            ztz = ztz.add(z[i].mul(z[j]).scale(gram[i][j] / 2.0));
        }
    }
    let w = ztz.scale(-(c as f64)).div(j0);
    let wa = ComplexApprox::new(w.re, w.im, 1e-13 * (1.0 + w.abs()));
    let index_factor = wa.exp_2pi_i();

    Ok(theta.mul(&autom).mul(&index_factor))
}

/// Outcome of a two-sided transformation-law comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LawCheck {
    /// deviation within tol plus both propagated error bounds
    pub pass: bool,
    /// |lhs - rhs|
    pub deviation: f64,
    /// sum of the propagated error bounds of the two sides
    pub err_total: f64,
    /// tol plus err_total
    pub allowed: f64,
}

fn compare(lhs: &ComplexApprox, rhs: &ComplexApprox, tol: f64) -> LawCheck {
    let deviation = lhs.dist(rhs);
    let err_total = lhs.err_bound + rhs.err_bound;
    let allowed = tol + err_total;
    LawCheck {
        pass: deviation <= allowed,
        deviation,
        err_total,
        allowed,
    }
}

/// e^{2 pi i q} for exact rational q, embedded with a tracked bound.
fn rational_phase(q: &BigRational) -> ComplexApprox {
    let den = q.denom().to_u32().expect("phase denominator fits u32");
    let num = (q.numer() % BigInt::from(den)).to_i64().unwrap();
    CycNumber::root_of_unity(num, den).embed()
}

/// Translation law: Theta_mu(tau + 1, z) = exp(T^{-1}[mu/2]) Theta_mu.
pub fn theta_t_law_check(
    t: &HalfIntegralMatrix,
    mu: &[BigInt],
    tau: C64,
    z: &[C64],
    tol: f64,
    tail_target: f64,
) -> Result<LawCheck, JacobiError> {
    let lhs = slash_theta(t, mu, (1, 1, 0, 1), tau, z, tail_target)?;
    let phase = rational_phase(&t.inv_form_value(mu)?);
    let z_im: Vec<f64> = z.iter().map(|v| v.im).collect();
    let radius = radius_for_tail(t, mu, tau.im, &z_im, tail_target)?;
    let rhs = theta_eval(t, mu, tau, z, radius)?.mul(&phase);
    Ok(compare(&lhs, &rhs, tol))
}

/// Inversion law: Theta_mu |_{n/2,T} S equals
/// det(2T)^{-1/2} i^{-n/2} sum_nu exp(-nu^t (2T)^{-1} mu) Theta_nu.
pub fn theta_s_law_check(
    t: &HalfIntegralMatrix,
    mu: &[BigInt],
    tau: C64,
    z: &[C64],
    tol: f64,
    tail_target: f64,
) -> Result<LawCheck, JacobiError> {
    let lhs = slash_theta(t, mu, (0, -1, 1, 0), tau, z, tail_target)?;

    let n = t.size();
    let det = intmat::det(t.gram());
    let det_f = det.to_f64().unwrap();
    let scale = 1.0 / det_f.sqrt();
    // i^{-n/2} = e^{-i pi n / 4}
    let angle = -(std::f64::consts::PI) * n as f64 / 4.0;
    let root_i = ComplexApprox::new(angle.cos(), angle.sin(), 4.0 * f64::EPSILON);

    let adj = intmat::adjugate(t.gram());
    let z_im: Vec<f64> = z.iter().map(|v| v.im).collect();
    let mut acc = ComplexApprox::zero();
    for nu in t.cosets()? {
        // nu^t (2T)^{-1} mu = nu^t adj(gram) mu / det(gram)
        let mut num = BigInt::from(0);
        for i in 0..n {
            for j in 0..n {
                num += &nu[i] * &adj[i][j] * &mu[j];
            }
        }
        let phase = rational_phase(&(-BigRational::new(num, det.clone())));
        let radius = radius_for_tail(t, &nu, tau.im, &z_im, tail_target)?;
        let theta_nu = theta_eval(t, &nu, tau, z, radius)?;
        acc = acc.add(&phase.mul(&theta_nu));
    }
    let rhs = acc.scale(scale).mul(&root_i);
    Ok(compare(&lhs, &rhs, tol))
}
