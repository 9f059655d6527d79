//! Dirichlet characters (conductor, parity, the quadratic characters
//! eps_p) and exact generalized quadratic Gauss sums.
//!
//! Characters are stored by generator images on a fixed CRT decomposition
//! of (Z/N)^x, which gives O(1) evaluation through discrete-log tables and
//! exact conductor computation. Gauss sums are always computed by direct
//! summation as ground truth; the closed forms are verified against that,
//! never substituted silently.

use num_rational::BigRational;

use crate::arith::{
    crt, euler_phi, factorize, gcd, gcd_i, inv_mod, is_prime, kronecker, lcm, mod_pow,
    primitive_root, units_mod,
};
use crate::exactarith::CycNumber;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CharError {
    /// eps_p and legendre need an odd prime
    NotOddPrime,
    /// Kronecker character needs d = 0 or 1 mod 4, d != 0
    BadKroneckerDiscriminant,
    /// a label that cannot be parsed back into a character
    UnparsableLabel(String),
    /// parameters violating a gcd precondition of an identity check
    PreconditionViolated(&'static str),
}

impl std::fmt::Display for CharError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CharError::NotOddPrime => write!(f, "parameter must be an odd prime"),
            CharError::BadKroneckerDiscriminant => {
                write!(f, "Kronecker character needs d = 0 or 1 mod 4, d nonzero")
            }
            CharError::UnparsableLabel(s) => write!(f, "cannot parse character label '{s}'"),
            CharError::PreconditionViolated(which) => {
                write!(f, "precondition violated: {which}")
            }
        }
    }
}

impl std::error::Error for CharError {}

/// One generator of a cyclic factor of (Z/p^e)^x, with the character's
/// image on it recorded as an exponent: image = zeta_order^image_num.
#[derive(Debug, Clone, PartialEq, Eq)]
struct CharGen {
    base: u64,
    order: u64,
    image_num: u64,
}

/// The p^e part of the modulus, with discrete logs precomputed.
#[derive(Debug, Clone, PartialEq, Eq)]
struct CharComponent {
    pe: u64,
    gens: Vec<CharGen>,
    /// dlog[residue] = exponent tuple over gens; absent for non-units.
    dlog: Vec<Option<Vec<u64>>>,
}

fn build_dlog(pe: u64, gens: &[(u64, u64)]) -> Vec<Option<Vec<u64>>> {
    let mut table: Vec<Option<Vec<u64>>> = vec![None; pe as usize];
    // enumerate all products of generator powers
    let mut exps = vec![0u64; gens.len()];
    loop {
        let mut v: u64 = 1 % pe;
        for (k, &(g, _)) in gens.iter().enumerate() {
            v = v * mod_pow(g, exps[k], pe) % pe;
        }
        if table[v as usize].is_none() {
            table[v as usize] = Some(exps.clone());
        }
        // odometer over generator orders
        let mut k = gens.len();
        loop {
            if k == 0 {
                let filled = table.iter().filter(|x| x.is_some()).count() as u64;
                debug_assert_eq!(filled, euler_phi(pe));
                return table;
            }
            k -= 1;
            exps[k] += 1;
            if exps[k] < gens[k].1 {
                break;
            }
            exps[k] = 0;
        }
    }
}

/// Generators of (Z/p^e)^x: a single primitive root for odd p, the usual
/// {-1, 5} pair for 2^e with e >= 3, {-1} for 4, nothing for 2.
fn component_generators(p: u64, e: u32) -> Vec<(u64, u64)> {
    let pe = p.pow(e);
    if p == 2 {
        match e {
            1 => vec![],
            2 => vec![(3, 2)],
            _ => vec![(pe - 1, 2), (5, 1 << (e - 2))],
        }
    } else {
        vec![(primitive_root(p, e), euler_phi(pe))]
    }
}

/// A Dirichlet character mod N with pointwise evaluation into exact
/// cyclotomic numbers. chi(a) = 0 representationally for gcd(a, N) > 1.
#[derive(Debug, Clone)]
pub struct DirichletCharacter {
    modulus: u64,
    components: Vec<CharComponent>,
    label: String,
}

impl PartialEq for DirichletCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.modulus == other.modulus && self.components == other.components
    }
}

impl DirichletCharacter {
    fn build(modulus: u64, images: impl Fn(u64, u64, u64) -> u64, label: String) -> Self {
        assert!(modulus >= 1);
        let mut components = Vec::new();
        for (p, e) in factorize(modulus) {
            let pe = p.pow(e);
            let gen_specs = component_generators(p, e);
            let dlog = build_dlog(pe, &gen_specs);
            let gens = gen_specs
                .iter()
                .map(|&(g, ord)| CharGen {
                    base: g,
                    order: ord,
                    image_num: images(pe, g, ord) % ord,
                })
                .collect();
            components.push(CharComponent { pe, gens, dlog });
        }
        DirichletCharacter {
            modulus,
            components,
            label,
        }
    }

    pub fn trivial(modulus: u64) -> Self {
        Self::build(modulus, |_, _, _| 0, "trivial".to_string())
    }

    /// Legendre symbol (./p) as the primitive quadratic character mod p.
    pub fn legendre(p: u64) -> Result<Self, CharError> {
        if p == 2 || !is_prime(p) {
            return Err(CharError::NotOddPrime);
        }
        Ok(Self::build(
            p,
            |_, _, ord| ord / 2,
            format!("legendre:{p}"),
        ))
    }

    /// The character (d|.) attached to a discriminant d = 0, 1 mod 4,
    /// realized mod |d| via the Kronecker symbol.
    pub fn kronecker_char(d: i64) -> Result<Self, CharError> {
        if d == 0 || d.rem_euclid(4) > 1 {
            return Err(CharError::BadKroneckerDiscriminant);
        }
        let modulus = d.unsigned_abs();
        let chi = Self::build(
            modulus,
            |pe, g, ord| {
                // lift g to a residue mod `modulus` that is g at this
                // component and 1 elsewhere
                let other = modulus / pe;
                let lifted = if other == 1 { g } else { crt(g, pe, 1, other) };
                match kronecker(d, lifted as i64) {
                    1 => 0,
                    -1 => ord / 2,
                    v => panic!("kronecker symbol {v} at a unit"),
                }
            },
            format!("kronecker:{d}"),
        );
        // the generator images determine the character; confirm it agrees
        // with the symbol on every unit
        for a in units_mod(modulus) {
            let expect = kronecker(d, a as i64);
            let got = chi.eval_sign(a as i64).expect("real character");
            debug_assert_eq!(got, expect as i64, "kronecker mismatch at {a}");
        }
        Ok(chi)
    }

    /// The natural quadratic character attached to Q(sqrt(p)): the
    /// Kronecker character of the field discriminant, p for p = 1 mod 4
    /// and 4p otherwise.
    pub fn epsilon_p(p: u64) -> Result<Self, CharError> {
        if p == 2 || !is_prime(p) {
            return Err(CharError::NotOddPrime);
        }
        let d = if p % 4 == 1 { p as i64 } else { 4 * p as i64 };
        let mut chi = Self::kronecker_char(d)?;
        chi.label = format!("eps:{p}");
        Ok(chi)
    }

    /// Parse a label: atoms `trivial`, `legendre:p`, `eps:p`,
    /// `kronecker:d`, joined by `*`.
    pub fn from_label(label: &str) -> Result<Self, CharError> {
        let mut acc: Option<DirichletCharacter> = None;
        for atom in label.split('*') {
            let atom = atom.trim();
            let chi = if atom == "trivial" {
                DirichletCharacter::trivial(1)
            } else if let Some(p) = atom.strip_prefix("legendre:") {
                let p: u64 = p
                    .parse()
                    .map_err(|_| CharError::UnparsableLabel(label.to_string()))?;
                DirichletCharacter::legendre(p)?
            } else if let Some(p) = atom.strip_prefix("eps:") {
                let p: u64 = p
                    .parse()
                    .map_err(|_| CharError::UnparsableLabel(label.to_string()))?;
                DirichletCharacter::epsilon_p(p)?
            } else if let Some(d) = atom.strip_prefix("kronecker:") {
                let d: i64 = d
                    .parse()
                    .map_err(|_| CharError::UnparsableLabel(label.to_string()))?;
                DirichletCharacter::kronecker_char(d)?
            } else {
                return Err(CharError::UnparsableLabel(label.to_string()));
            };
            acc = Some(match acc {
                None => chi,
                Some(prev) => prev.mul(&chi),
            });
        }
        acc.ok_or_else(|| CharError::UnparsableLabel(label.to_string()))
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_trivial(&self) -> bool {
        self.components
            .iter()
            .all(|c| c.gens.iter().all(|g| g.image_num == 0))
    }

    /// chi(a) as an exponent (num, den) meaning zeta_den^num, or None for
    /// non-units.
    fn eval_exponent(&self, a: i64) -> Option<(u64, u64)> {
        let a = a.rem_euclid(self.modulus as i64) as u64;
        if self.modulus == 1 {
            return Some((0, 1));
        }
        if gcd(a, self.modulus) != 1 {
            return None;
        }
        let mut num: u64 = 0;
        let mut den: u64 = 1;
        for comp in &self.components {
            let r = (a % comp.pe) as usize;
            let exps = comp.dlog[r].as_ref().expect("unit residue");
            for (gen, &e) in comp.gens.iter().zip(exps) {
                // add image_num * e / order to the accumulated exponent
                let add_num = gen.image_num * e % gen.order;
                let l = lcm(den, gen.order);
                num = num * (l / den) + add_num * (l / gen.order);
                den = l;
                num %= den;
            }
        }
        let g = gcd(num, den).max(1);
        Some((num / g, den / g))
    }

    /// chi(a), with chi(a) = 0 for gcd(a, N) > 1.
    pub fn eval(&self, a: i64) -> CycNumber {
        match self.eval_exponent(a) {
            None => CycNumber::zero(),
            Some((num, den)) => CycNumber::root_of_unity(num as i64, den as u32),
        }
    }

    /// chi(a) as an integer in {-1, 0, 1}; None when the value is a
    /// nontrivial root of unity.
    pub fn eval_sign(&self, a: i64) -> Option<i64> {
        match self.eval_exponent(a) {
            None => Some(0),
            Some((num, den)) => {
                if num == 0 {
                    Some(1)
                } else if 2 * num == den {
                    Some(-1)
                } else {
                    None
                }
            }
        }
    }

    /// Every value of the character lies in {-1, 0, 1}.
    pub fn is_real(&self) -> bool {
        self.components
            .iter()
            .all(|c| c.gens.iter().all(|g| g.image_num == 0 || 2 * g.image_num == g.order))
    }

    /// chi(-1) as an exact sign.
    pub fn parity(&self) -> i64 {
        self.eval_sign(-1).expect("chi(-1) is +-1")
    }

    /// Smallest modulus through which the character factors, computed by
    /// testing divisors.
    pub fn conductor(&self) -> u64 {
        'next: for f in crate::arith::divisors(self.modulus) {
            // chi factors through f iff chi(a) = 1 whenever a = 1 mod f
            // and gcd(a, N) = 1
            let mut a = 1u64;
            while a < self.modulus.max(2) {
                if gcd(a, self.modulus) == 1 && self.eval_exponent(a as i64) != Some((0, 1)) {
                    continue 'next;
                }
                a += f;
            }
            return f;
        }
        self.modulus
    }

    /// Product character at the lcm of the moduli.
    pub fn mul(&self, other: &DirichletCharacter) -> DirichletCharacter {
        let l = lcm(self.modulus, other.modulus);
        let label = match (self.is_trivial(), other.is_trivial()) {
            (true, true) => "trivial".to_string(),
            (true, false) => other.label.clone(),
            (false, true) => self.label.clone(),
            (false, false) => format!("{}*{}", self.label, other.label),
        };
        DirichletCharacter::build(
            l,
            |pe, g, ord| {
                let other_mod = l / pe;
                let lifted = if other_mod == 1 {
                    g
                } else {
                    crt(g, pe, 1, other_mod)
                };
                let (n1, d1) = self
                    .eval_exponent(lifted as i64)
                    .expect("lifted generator is a unit");
                let (n2, d2) = other
                    .eval_exponent(lifted as i64)
                    .expect("lifted generator is a unit");
                // total exponent n1/d1 + n2/d2 as a multiple of 1/ord
                let dl = lcm(d1, d2);
                let num = (n1 * (dl / d1) + n2 * (dl / d2)) % dl;
                debug_assert_eq!(
                    ord % dl,
                    0,
                    "character value order must divide the generator order"
                );
                num * (ord / dl) % ord
            },
            label,
        )
    }
}

/// G(a, b, c) = sum_{t mod c} e^{2 pi i (a t^2 + b t) / c}, computed
/// exactly by direct summation into the exponent-count basis.
pub fn gauss_sum(a: i64, b: i64, c: u32) -> CycNumber {
    assert!(c >= 1);
    let m = c as i64;
    let mut counts = vec![0i64; c as usize];
    for t in 0..m {
        let e = ((a as i128 * t as i128 % m as i128 * t as i128 + b as i128 * t as i128)
            .rem_euclid(m as i128)) as usize;
        counts[e] += 1;
    }
    CycNumber::from_exponent_counts(c, &counts)
}

/// The Gauss-sum factorization used by the twisted Eichler--Zagier level
/// computation: G(-pN, 2(mu-eta), 4p) vanishes unless mu = eta mod p, in
/// which case it equals p * G(-N, 2(mu-eta)/p, 4). Both sides are computed
/// exactly; returns whether they agree.
pub fn gauss_factor_check(p: u64, n: i64, mu: i64, eta: i64) -> Result<bool, CharError> {
    if p == 2 || !is_prime(p) {
        return Err(CharError::NotOddPrime);
    }
    if gcd_i(n, 2 * p as i64) != 1 {
        return Err(CharError::PreconditionViolated("gcd(N, 2p) = 1"));
    }
    let lhs = gauss_sum(-(p as i64) * n, 2 * (mu - eta), 4 * p as u32);
    let rhs = if (mu - eta).rem_euclid(p as i64) != 0 {
        CycNumber::zero()
    } else {
        let q = BigRational::from_integer(num_bigint::BigInt::from(p));
        gauss_sum(-n, 2 * (mu - eta) / p as i64, 4).scale(&q)
    };
    Ok(lhs == rhs)
}

/// Completing the square: G(-Nm, 2(s-r)m, 4d) equals
/// G(-Nm, 0, 4d) * exp(m Nbar (s-r)^2 / (4d)), with Nbar the inverse of N
/// mod 4d. Both sides are evaluated exactly (the epsilon-matrix entry is
/// half of either side); returns whether they agree.
pub fn complete_square_check(m: i64, n: i64, d: u32, s: i64, r: i64) -> Result<bool, CharError> {
    let c = 4 * d;
    if gcd_i(n, c as i64) != 1 {
        return Err(CharError::PreconditionViolated("gcd(N, 4d) = 1"));
    }
    if gcd_i(m, c as i64) != 1 {
        return Err(CharError::PreconditionViolated("gcd(m, 4d) = 1"));
    }
    let nbar = inv_mod(n, c as u64).expect("N invertible mod 4d") as i64;
    let lhs = gauss_sum(-n * m, 2 * (s - r) * m, c);
    let phase = CycNumber::root_of_unity(
        (nbar as i128 * m as i128 * ((s - r) as i128).pow(2)).rem_euclid(c as i128) as i64,
        c,
    );
    let rhs = gauss_sum(-n * m, 0, c).mul_value(&phase);
    Ok(lhs == rhs)
}
