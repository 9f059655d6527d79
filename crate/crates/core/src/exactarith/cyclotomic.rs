//! Elements of Q(zeta_m) in the power basis 1, zeta, ..., zeta^{phi(m)-1},
//! reduced modulo the m-th cyclotomic polynomial.
//!
//! Canonical form makes equality a coefficient-vector comparison, which the
//! exact rank computation requires. Arithmetic between values of different
//! orders lifts both to the lcm of the orders first.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{ComplexApprox, ExactError};
use crate::arith::{euler_phi, lcm};

/// Per-order data: the cyclotomic polynomial and reductions of small powers.
struct CycCtx {
    phi: usize,
    /// Monic integer coefficients of Phi_order, ascending degree, length phi+1.
    min_poly: Vec<BigInt>,
    /// Same coefficients in i64 (they are tiny for every order we touch).
    min_poly_i64: Vec<i64>,
    /// powers[j] = x^j mod Phi_order, for j in 0..max(2*phi-1, order+1).
    powers: Vec<Vec<BigInt>>,
}

static CTX_CACHE: OnceLock<Mutex<HashMap<u32, Arc<CycCtx>>>> = OnceLock::new();

/// Exact division of integer polynomials by a monic divisor.
fn poly_div_exact_int(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    debug_assert!(den.last().map(|c| c.is_one()).unwrap_or(false));
    let mut rem: Vec<BigInt> = num.to_vec();
    let dn = den.len() - 1;
    let qn = rem.len() - 1 - dn;
    let mut quot = vec![BigInt::zero(); qn + 1];
    for k in (0..=qn).rev() {
        let c = std::mem::take(&mut rem[k + dn]);
        if !c.is_zero() {
            for (i, d) in den.iter().enumerate().take(dn) {
                rem[k + i] -= &c * d;
            }
        }
        quot[k] = c;
    }
    debug_assert!(rem.iter().all(|c| c.is_zero()), "division not exact");
    quot
}

/// Cyclotomic polynomials for all divisors of m, computed bottom-up.
fn cyclotomic_polys_upto(m: u32) -> HashMap<u32, Vec<BigInt>> {
    let mut table: HashMap<u32, Vec<BigInt>> = HashMap::new();
    for d in crate::arith::divisors(m as u64) {
        let d = d as u32;
        // x^d - 1
        let mut num = vec![BigInt::zero(); d as usize + 1];
        num[0] = -BigInt::one();
        num[d as usize] = BigInt::one();
        let mut quot = num;
        for e in crate::arith::divisors(d as u64) {
            let e = e as u32;
            if e < d {
                quot = poly_div_exact_int(&quot, &table[&e]);
            }
        }
        table.insert(d, quot);
    }
    table
}

impl CycCtx {
    fn new(order: u32) -> Self {
        let phi = euler_phi(order as u64) as usize;
        let min_poly = cyclotomic_polys_upto(order).remove(&order).unwrap();
        debug_assert_eq!(min_poly.len(), phi + 1);
        let min_poly_i64: Vec<i64> = min_poly
            .iter()
            .map(|c| c.to_i64().expect("cyclotomic coefficients are small"))
            .collect();
        let max_pow = std::cmp::max(2 * phi, order as usize + 1);
        let mut powers: Vec<Vec<BigInt>> = Vec::with_capacity(max_pow);
        let mut cur = vec![BigInt::zero(); phi];
        cur[0] = BigInt::one();
        powers.push(cur.clone());
        for _ in 1..max_pow {
            // multiply by x, then reduce the top coefficient against Phi.
            let top = cur[phi - 1].clone();
            for k in (1..phi).rev() {
                cur[k] = cur[k - 1].clone();
            }
            cur[0] = BigInt::zero();
            if !top.is_zero() {
                for k in 0..phi {
                    cur[k] -= &top * &min_poly[k];
                }
            }
            powers.push(cur.clone());
        }
        CycCtx {
            phi,
            min_poly,
            min_poly_i64,
            powers,
        }
    }
}

fn ctx(order: u32) -> Arc<CycCtx> {
    let cache = CTX_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry(order)
        .or_insert_with(|| Arc::new(CycCtx::new(order)))
        .clone()
}

/// An exact element of the cyclotomic field Q(zeta_order).
///
/// Coefficients live in the power basis after reduction modulo the
/// order-th cyclotomic polynomial; the vector always has length
/// phi(order). Two values of different orders are equal iff they agree
/// after lifting both to Q(zeta_lcm).
#[derive(Clone)]
pub struct CycNumber {
    order: u32,
    coeffs: Vec<BigRational>,
}

impl CycNumber {
    fn from_raw(order: u32, coeffs: Vec<BigRational>) -> Self {
        debug_assert_eq!(coeffs.len(), euler_phi(order as u64) as usize);
        CycNumber { order, coeffs }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn zero() -> Self {
        CycNumber::from_raw(1, vec![BigRational::zero()])
    }

    pub fn one() -> Self {
        CycNumber::from_raw(1, vec![BigRational::one()])
    }

    pub fn from_int(n: i64) -> Self {
        CycNumber::from_raw(1, vec![BigRational::from_integer(BigInt::from(n))])
    }

    pub fn from_rational(q: BigRational) -> Self {
        CycNumber::from_raw(1, vec![q])
    }

    /// exp(2 pi i num/den), the canonical element zeta_den^num.
    pub fn root_of_unity(num: i64, den: u32) -> Self {
        assert!(den >= 1, "root_of_unity requires a positive denominator");
        let e = num.rem_euclid(den as i64) as usize;
        let c = ctx(den);
        let coeffs = c.powers[e]
            .iter()
            .map(|z| BigRational::from_integer(z.clone()))
            .collect();
        CycNumber::from_raw(den, coeffs)
    }

    /// Canonical value of sum_j counts[j] * zeta_order^j.
    pub fn from_exponent_counts(order: u32, counts: &[i64]) -> Self {
        assert_eq!(counts.len(), order as usize);
        let c = ctx(order);
        let mut out = vec![BigInt::zero(); c.phi];
        for (j, &n) in counts.iter().enumerate() {
            if n == 0 {
                continue;
            }
            let nb = BigInt::from(n);
            for (k, pk) in c.powers[j].iter().enumerate() {
                out[k] += &nb * pk;
            }
        }
        CycNumber::from_raw(
            order,
            out.into_iter().map(BigRational::from_integer).collect(),
        )
    }

    /// Fast zero test for sum_j counts[j] * zeta_order^j without building
    /// any rationals: reduce modulo Phi_order in i128, falling back to
    /// exact BigInt arithmetic if the reduction would overflow.
    pub fn exponent_counts_are_zero(order: u32, counts: &[i64]) -> bool {
        assert_eq!(counts.len(), order as usize);
        let c = ctx(order);
        let phi = c.phi;
        if counts.len() <= phi {
            // order is 1 or 2: the vector is already in the basis.
            return counts.iter().all(|&x| x == 0);
        }
        let mut v: Vec<i128> = counts.iter().map(|&x| x as i128).collect();
        let mut overflow = false;
        'reduce: for j in (phi..v.len()).rev() {
            let top = v[j];
            if top == 0 {
                continue;
            }
            for k in 0..phi {
                let m = c.min_poly_i64[k] as i128;
                if m == 0 {
                    continue;
                }
                match top.checked_mul(m).and_then(|t| v[j - phi + k].checked_sub(t)) {
                    Some(nv) => v[j - phi + k] = nv,
                    None => {
                        overflow = true;
                        break 'reduce;
                    }
                }
            }
            v[j] = 0;
        }
        if !overflow {
            return v[..phi].iter().all(|&x| x == 0);
        }
        CycNumber::from_exponent_counts(order, counts).is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.as_rational().map(|q| q.is_one()).unwrap_or(false)
    }

    /// Some(q) when the value lies in Q.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.coeffs[1..].iter().all(|c| c.is_zero()) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    /// Reinterpret the value in Q(zeta_new) for order | new.
    pub fn lift_to(&self, new_order: u32) -> CycNumber {
        if new_order == self.order {
            return self.clone();
        }
        assert_eq!(new_order % self.order, 0, "lift target must be a multiple");
        let c = ctx(new_order);
        let step = (new_order / self.order) as usize;
        let mut out = vec![BigRational::zero(); c.phi];
        for (j, q) in self.coeffs.iter().enumerate() {
            if q.is_zero() {
                continue;
            }
            for (k, pk) in c.powers[j * step].iter().enumerate() {
                if !pk.is_zero() {
                    out[k] += q * BigRational::from_integer(pk.clone());
                }
            }
        }
        CycNumber::from_raw(new_order, out)
    }

    fn common_order(&self, other: &CycNumber) -> (CycNumber, CycNumber) {
        if self.order == other.order {
            (self.clone(), other.clone())
        } else {
            let l = lcm(self.order as u64, other.order as u64) as u32;
            (self.lift_to(l), other.lift_to(l))
        }
    }

    pub fn neg_value(&self) -> CycNumber {
        CycNumber::from_raw(self.order, self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn add_value(&self, other: &CycNumber) -> CycNumber {
        let (a, b) = self.common_order(other);
        let coeffs = a
            .coeffs
            .iter()
            .zip(b.coeffs.iter())
            .map(|(x, y)| x + y)
            .collect();
        CycNumber::from_raw(a.order, coeffs)
    }

    pub fn sub_value(&self, other: &CycNumber) -> CycNumber {
        self.add_value(&other.neg_value())
    }

    pub fn mul_value(&self, other: &CycNumber) -> CycNumber {
        let (a, b) = self.common_order(other);
        let c = ctx(a.order);
        let phi = c.phi;
        let mut conv = vec![BigRational::zero(); 2 * phi - 1];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if !y.is_zero() {
                    conv[i + j] += x * y;
                }
            }
        }
        let mut out: Vec<BigRational> = conv[..phi].to_vec();
        for (j, q) in conv.iter().enumerate().skip(phi) {
            if q.is_zero() {
                continue;
            }
            for (k, pk) in c.powers[j].iter().enumerate() {
                if !pk.is_zero() {
                    out[k] += q * BigRational::from_integer(pk.clone());
                }
            }
        }
        CycNumber::from_raw(a.order, out)
    }

    pub fn scale(&self, q: &BigRational) -> CycNumber {
        CycNumber::from_raw(self.order, self.coeffs.iter().map(|c| c * q).collect())
    }

    /// Multiplicative inverse via the extended Euclidean algorithm against
    /// the minimal polynomial.
    pub fn inv(&self) -> Result<CycNumber, ExactError> {
        if self.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        if let Some(q) = self.as_rational() {
            return Ok(CycNumber::from_rational(q.recip()).lift_to(self.order));
        }
        let c = ctx(self.order);
        // Bezout over Q[x]: u*self + v*Phi = gcd = nonzero constant.
        let phi_poly: Vec<BigRational> = c
            .min_poly
            .iter()
            .map(|z| BigRational::from_integer(z.clone()))
            .collect();
        let mut r0 = phi_poly;
        let mut r1 = trim(self.coeffs.clone());
        let mut u0: Vec<BigRational> = vec![];
        let mut u1: Vec<BigRational> = vec![BigRational::one()];
        while !r1.is_empty() {
            let (q, r) = poly_divmod(&r0, &r1);
            let u2 = poly_sub(&u0, &poly_mul(&q, &u1));
            r0 = r1;
            r1 = r;
            u0 = u1;
            u1 = u2;
        }
        // r0 is the gcd: a nonzero constant since Phi is irreducible and
        // self is a nonzero element of degree < deg Phi.
        debug_assert_eq!(r0.len(), 1);
        let g = r0[0].clone();
        let mut coeffs = vec![BigRational::zero(); c.phi];
        for (i, q) in u0.iter().enumerate() {
            coeffs[i] = q / &g;
        }
        Ok(CycNumber::from_raw(self.order, coeffs))
    }

    pub fn pow(&self, k: i64) -> Result<CycNumber, ExactError> {
        if k < 0 {
            return self.inv()?.pow(-k);
        }
        let mut result = CycNumber::one();
        let mut base = self.clone();
        let mut e = k as u64;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_value(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_value(&base);
            }
        }
        Ok(result)
    }

    /// Complex conjugation: zeta^j -> zeta^{order-j}.
    pub fn conj(&self) -> CycNumber {
        let c = ctx(self.order);
        let m = self.order as usize;
        let mut out = vec![BigRational::zero(); c.phi];
        for (j, q) in self.coeffs.iter().enumerate() {
            if q.is_zero() {
                continue;
            }
            let e = (m - j) % m;
            for (k, pk) in c.powers[e].iter().enumerate() {
                if !pk.is_zero() {
                    out[k] += q * BigRational::from_integer(pk.clone());
                }
            }
        }
        CycNumber::from_raw(self.order, out)
    }

    /// Principal complex embedding zeta_m -> e^{2 pi i / m}, with a
    /// guaranteed absolute error bound accounting for the phi(m) rounded
    /// terms of the summation. Terms at quarter turns with exactly
    /// representable coefficients contribute no error at all.
    pub fn embed(&self) -> ComplexApprox {
        let m = self.order as u64;
        let eps = f64::EPSILON;
        let mut re = 0.0f64;
        let mut im = 0.0f64;
        let mut err = 0.0f64;
        let mut terms = 0u32;
        for (j, q) in self.coeffs.iter().enumerate() {
            if q.is_zero() {
                continue;
            }
            let (qf, conv_exact) = rational_to_f64(q);
            let angle = unit_angle(j as u64, m);
            let (c, s, angle_exact) = angle;
            re += qf * c;
            im += qf * s;
            terms += 1;
            if !(conv_exact && angle_exact) {
                // conversion (<= 4 ulp), trig of a rounded angle (<= 8 ulp),
                // and the product rounding itself.
                err += qf.abs() * 13.0 * eps;
            }
            if terms > 1 {
                // accumulation rounding after each addition
                err += (re.abs() + im.abs()) * eps;
            }
        }
        ComplexApprox::new(re, im, err)
    }
}

/// cos/sin of 2 pi j / m; the flag marks quarter turns, which are exact.
fn unit_angle(j: u64, m: u64) -> (f64, f64, bool) {
    let r = 4 * j % (4 * m);
    match r {
        0 => (1.0, 0.0, true),
        _ if r == m => (0.0, 1.0, true),
        _ if r == 2 * m => (-1.0, 0.0, true),
        _ if r == 3 * m => (0.0, -1.0, true),
        _ => {
            let theta = 2.0 * std::f64::consts::PI * (j as f64) / (m as f64);
            (theta.cos(), theta.sin(), false)
        }
    }
}

/// Convert to f64; the flag reports whether the conversion is exact.
fn rational_to_f64(q: &BigRational) -> (f64, bool) {
    let f = q.to_f64().unwrap_or_else(|| {
        let n = q.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = q.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    });
    let exact = f.is_finite() && BigRational::from_float(f).map(|r| r == *q).unwrap_or(false);
    (f, exact)
}

// --- dense Q[x] helpers for the inverse ---

fn trim(mut v: Vec<BigRational>) -> Vec<BigRational> {
    while v.last().map(|c| c.is_zero()).unwrap_or(false) {
        v.pop();
    }
    v
}

fn poly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

fn poly_sub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let n = std::cmp::max(a.len(), b.len());
    let mut out = vec![BigRational::zero(); n];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] -= y;
    }
    trim(out)
}

fn poly_divmod(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    debug_assert!(!b.is_empty());
    if a.len() < b.len() {
        return (vec![], a.to_vec());
    }
    let mut rem = a.to_vec();
    let lead = b.last().unwrap();
    let qn = a.len() - b.len();
    let mut quot = vec![BigRational::zero(); qn + 1];
    for k in (0..=qn).rev() {
        let c = &rem[k + b.len() - 1] / lead;
        if !c.is_zero() {
            for (i, bi) in b.iter().enumerate() {
                let t = &c * bi;
                rem[k + i] -= t;
            }
        }
        quot[k] = c;
    }
    (trim(quot), trim(rem))
}

impl PartialEq for CycNumber {
    fn eq(&self, other: &Self) -> bool {
        if self.order == other.order {
            return self.coeffs == other.coeffs;
        }
        let (a, b) = self.common_order(other);
        a.coeffs == b.coeffs
    }
}

impl Eq for CycNumber {}

impl fmt::Debug for CycNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cyc[{}]({})", self.order, self)
    }
}

impl fmt::Display for CycNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(q) = self.as_rational() {
            return write!(f, "{}", q);
        }
        let mut first = true;
        for (j, q) in self.coeffs.iter().enumerate() {
            if q.is_zero() {
                continue;
            }
            let mag = q.abs();
            if first {
                if q.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if q.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if j == 0 {
                write!(f, "{}", mag)?;
            } else {
                if !mag.is_one() {
                    write!(f, "{}*", mag)?;
                }
                if j == 1 {
                    write!(f, "z{}", self.order)?;
                } else {
                    write!(f, "z{}^{}", self.order, j)?;
                }
            }
        }
        Ok(())
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $imp:ident) => {
        impl $trait for &CycNumber {
            type Output = CycNumber;
            fn $method(self, rhs: &CycNumber) -> CycNumber {
                self.$imp(rhs)
            }
        }
        impl $trait for CycNumber {
            type Output = CycNumber;
            fn $method(self, rhs: CycNumber) -> CycNumber {
                self.$imp(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, add_value);
forward_binop!(Sub, sub, sub_value);
forward_binop!(Mul, mul, mul_value);

impl Neg for &CycNumber {
    type Output = CycNumber;
    fn neg(self) -> CycNumber {
        self.neg_value()
    }
}

impl Neg for CycNumber {
    type Output = CycNumber;
    fn neg(self) -> CycNumber {
        self.neg_value()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::SplitMix64;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    /// Independent reduction oracle: reduce an exponent-count vector by
    /// long division against a cyclotomic polynomial computed from scratch
    /// via the product formula over d-th roots of unity orders.
    fn oracle_reduce(order: u32, counts: &[i64]) -> Vec<BigRational> {
        // recompute Phi_order independently of the context cache path
        let table = cyclotomic_polys_upto(order);
        let phi_poly = &table[&order];
        let deg = phi_poly.len() - 1;
        let mut v: Vec<BigInt> = counts.iter().map(|&x| BigInt::from(x)).collect();
        for j in (deg..v.len()).rev() {
            let top = v[j].clone();
            if top.is_zero() {
                continue;
            }
            for k in 0..deg {
                let t = &top * &phi_poly[k];
                v[j - deg + k] -= t;
            }
            v[j] = BigInt::zero();
        }
        v.truncate(deg);
        v.into_iter().map(BigRational::from_integer).collect()
    }

    #[test]
    fn root_of_unity_identity_cases() {
        assert_eq!(CycNumber::root_of_unity(0, 1), CycNumber::one());
        assert_eq!(CycNumber::root_of_unity(1, 2), CycNumber::from_int(-1));
        assert_eq!(CycNumber::root_of_unity(5, 2), CycNumber::from_int(-1));
    }

    #[test]
    fn zeta3_satisfies_its_minimal_polynomial() {
        // reduce 1 + x + x^2 mod Phi_3 with the elimination oracle
        let expect = oracle_reduce(3, &[1, 1, 1]);
        assert!(expect.iter().all(|c| c.is_zero()));
        let z = CycNumber::root_of_unity(1, 3);
        let sum = CycNumber::one().add_value(&z).add_value(&z.mul_value(&z));
        assert!(sum.is_zero());
    }

    #[test]
    fn i_squared_is_minus_one() {
        let i = CycNumber::root_of_unity(1, 4);
        assert_eq!(i.mul_value(&i), CycNumber::from_int(-1));
    }

    #[test]
    fn inverse_roundtrip_one_plus_zeta5() {
        let x = CycNumber::one().add_value(&CycNumber::root_of_unity(1, 5));
        let inv = x.inv().unwrap();
        assert!(inv.mul_value(&x).is_one());
        assert_eq!(CycNumber::zero().inv(), Err(ExactError::DivisionByZero));
    }

    #[test]
    fn vanishing_sums_of_roots_of_unity() {
        for c in 2..=60u32 {
            let counts = vec![1i64; c as usize];
            let v = CycNumber::from_exponent_counts(c, &counts);
            assert!(v.is_zero(), "sum over Z/{c} should vanish");
            assert!(CycNumber::exponent_counts_are_zero(c, &counts));
            assert_eq!(v.coeffs().to_vec(), oracle_reduce(c, &counts));
        }
    }

    fn random_value(rng: &mut SplitMix64, order: u32) -> CycNumber {
        let phi = euler_phi(order as u64) as usize;
        let coeffs = (0..phi)
            .map(|_| rat(rng.range_i64(-6, 6), rng.range_i64(1, 4)))
            .collect();
        CycNumber::from_raw(order, coeffs)
    }

    #[test]
    fn field_axioms_random_orders() {
        let mut rng = SplitMix64::new(7);
        let orders = [1u32, 2, 3, 4, 5, 6, 8, 12, 15, 20, 24, 35, 60];
        for _ in 0..60 {
            let m1 = orders[rng.below(orders.len() as u64) as usize];
            let m2 = orders[rng.below(orders.len() as u64) as usize];
            let x = random_value(&mut rng, m1);
            let y = random_value(&mut rng, m2);
            let z = random_value(&mut rng, m1);
            let lhs = x.add_value(&y).mul_value(&z);
            let rhs = x.mul_value(&z).add_value(&y.mul_value(&z));
            assert_eq!(lhs, rhs);
            assert!(x.add_value(&x.neg_value()).is_zero());
            if !x.is_zero() {
                assert!(x.inv().unwrap().mul_value(&x).is_one());
            }
        }
    }

    #[test]
    fn canonical_form_stable_under_lift_and_rereduce() {
        let mut rng = SplitMix64::new(19);
        for &m in &[3u32, 5, 12, 15, 60] {
            let x = random_value(&mut rng, m);
            let lifted = x.lift_to(m * 2);
            assert_eq!(x, lifted);
            assert_eq!(lifted.lift_to(m * 4), x);
        }
    }

    #[test]
    fn embed_basic_values() {
        let e = CycNumber::from_int(-1).embed();
        assert!(e.err_bound < 1e-15);
        assert!((e.re + 1.0).abs() <= e.err_bound && e.im.abs() <= e.err_bound);

        // direct evaluation oracle: cos/sin(2 pi / 3)
        let z3 = CycNumber::root_of_unity(1, 3).embed();
        assert!((z3.re - (-0.5)).abs() <= z3.err_bound + 1e-15);
        assert!((z3.im - 0.866_025_403_784_438_6).abs() <= z3.err_bound + 1e-12);

        // 1 + 2*zeta_3 = i sqrt(3), by direct summation
        let v = CycNumber::from_int(1)
            .add_value(&CycNumber::root_of_unity(1, 3).scale(&rat(2, 1)));
        let ev = v.embed();
        assert!(ev.re.abs() <= ev.err_bound + 1e-12);
        assert!((ev.im - 3.0f64.sqrt()).abs() <= ev.err_bound + 1e-12);
    }

    #[test]
    fn embed_respects_arithmetic() {
        let mut rng = SplitMix64::new(23);
        let orders = [2u32, 3, 4, 5, 7, 9, 12, 16, 21, 40];
        for _ in 0..1000 {
            let m1 = orders[rng.below(orders.len() as u64) as usize];
            let m2 = orders[rng.below(orders.len() as u64) as usize];
            let x = random_value(&mut rng, m1);
            let y = random_value(&mut rng, m2);
            let exact = x.mul_value(&y).embed();
            let approx = x.embed().mul(&y.embed());
            let dist = ((exact.re - approx.re).powi(2) + (exact.im - approx.im).powi(2)).sqrt();
            assert!(
                dist <= exact.err_bound + approx.err_bound,
                "embedding drifted: {dist} > {} + {}",
                exact.err_bound,
                approx.err_bound
            );
        }
    }

    #[test]
    fn conjugation_against_exponent_remap() {
        let z = CycNumber::root_of_unity(3, 7);
        assert_eq!(z.conj(), CycNumber::root_of_unity(4, 7));
        let x = CycNumber::root_of_unity(1, 5).scale(&rat(2, 3));
        let prod = x.mul_value(&x.conj());
        assert_eq!(prod.as_rational(), Some(rat(4, 9)));
    }

    #[test]
    fn conjugation_is_a_ring_automorphism() {
        let mut rng = SplitMix64::new(29);
        for &m in &[3u32, 5, 8, 12, 21] {
            for _ in 0..15 {
                let x = random_value(&mut rng, m);
                let y = random_value(&mut rng, m);
                assert_eq!(x.mul_value(&y).conj(), x.conj().mul_value(&y.conj()));
                assert_eq!(x.add_value(&y).conj(), x.conj().add_value(&y.conj()));
                assert_eq!(x.conj().conj(), x);
                // embedding intertwines with complex conjugation
                let e = x.embed();
                let ec = x.conj().embed();
                assert!((e.re - ec.re).abs() <= e.err_bound + ec.err_bound + 1e-12);
                assert!((e.im + ec.im).abs() <= e.err_bound + ec.err_bound + 1e-12);
            }
        }
    }

    #[test]
    fn pow_handles_negative_exponents() {
        let z = CycNumber::root_of_unity(2, 9);
        assert_eq!(z.pow(-3).unwrap(), CycNumber::root_of_unity(-6, 9));
        assert_eq!(z.pow(0).unwrap(), CycNumber::one());
        let x = CycNumber::one().add_value(&CycNumber::root_of_unity(1, 7));
        assert!(x.pow(3).unwrap().mul_value(&x.pow(-3).unwrap()).is_one());
    }

    #[test]
    fn display_matches_expected_format() {
        let g = CycNumber::from_int(1)
            .add_value(&CycNumber::root_of_unity(1, 3).scale(&rat(2, 1)));
        assert_eq!(format!("{}", g), "1 + 2*z3");
        assert_eq!(format!("{}", CycNumber::zero()), "0");
        assert_eq!(format!("{}", CycNumber::from_rational(rat(-3, 4))), "-3/4");
    }
}
