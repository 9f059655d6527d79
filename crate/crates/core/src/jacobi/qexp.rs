//! Formal one-variable Fourier series with a rational exponent offset
//! plus weight/level/character bookkeeping, and the sieve/rescale
//! operators acting on them.
//!
//! The exponent of the l-th stored coefficient is l + offset; offsets like
//! -T^{-1}[mu/2] come from theta components. All coefficients are exact
//! rationals. The meta block is bookkeeping only: it tracks the levels the
//! sieving lemmas assign, it never certifies modularity.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use super::JacobiError;
use crate::arith::{is_prime, is_squarefree};

/// Weight (doubled, so half-integral weights stay integral), level, and a
/// character label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpansionMeta {
    /// twice the weight: weight k - 1/2 is stored as 2k - 1
    pub weight2: i64,
    pub level: u64,
    /// character label; an opaque bookkeeping string
    pub character: String,
}

impl ExpansionMeta {
    pub fn new(weight2: i64, level: u64, character: impl Into<String>) -> Self {
        ExpansionMeta {
            weight2,
            level,
            character: character.into(),
        }
    }
}

/// Multiply a character label by eps_p, cancelling quadratic pairs.
pub fn label_times_eps(label: &str, p: u64) -> String {
    let eps = format!("eps:{p}");
    let mut atoms: Vec<&str> = label.split('*').filter(|a| *a != "trivial").collect();
    if let Some(pos) = atoms.iter().position(|a| *a == eps) {
        // eps_p is quadratic, so a second factor cancels the first
        atoms.remove(pos);
    } else {
        atoms.push(&eps);
    }
    if atoms.is_empty() {
        "trivial".to_string()
    } else {
        atoms.join("*")
    }
}

/// Which branch a sieve-chain step took.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SieveBranch {
    /// coefficients at p | n removed, level multiplied by p^2
    Sieve,
    /// exponents divided by p, level divided by p, character times eps_p
    Rescale,
}

impl std::fmt::Display for SieveBranch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SieveBranch::Sieve => write!(f, "sieve"),
            SieveBranch::Rescale => write!(f, "rescale"),
        }
    }
}

/// One recorded step of a sieve chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SieveStep {
    pub prime: u64,
    pub branch: SieveBranch,
    pub level_after: u64,
    pub character_after: String,
    /// cumulative exponent factor: final coefficients are a_f(ell * n)
    pub ell_after: u64,
}

/// A truncated formal series sum_l c_l q^{l + offset}, coefficients known
/// for 0 <= l < truncation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QExpansion {
    offset: BigRational,
    coeffs: BTreeMap<u64, BigRational>,
    truncation: u64,
    pub meta: ExpansionMeta,
}

impl QExpansion {
    pub fn new(offset: BigRational, truncation: u64, meta: ExpansionMeta) -> Self {
        QExpansion {
            offset,
            coeffs: BTreeMap::new(),
            truncation,
            meta,
        }
    }

    /// Integer-exponent expansion (offset zero).
    pub fn integral(truncation: u64, meta: ExpansionMeta) -> Self {
        Self::new(BigRational::zero(), truncation, meta)
    }

    pub fn offset(&self) -> &BigRational {
        &self.offset
    }

    pub fn truncation(&self) -> u64 {
        self.truncation
    }

    pub fn set_coeff(&mut self, l: u64, value: BigRational) {
        assert!(l < self.truncation, "exponent index beyond truncation");
        if value.is_zero() {
            self.coeffs.remove(&l);
        } else {
            self.coeffs.insert(l, value);
        }
    }

    pub fn coeff(&self, l: u64) -> BigRational {
        self.coeffs.get(&l).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Nonzero coefficients in ascending exponent-index order.
    pub fn iter(&self) -> impl Iterator<Item = (&u64, &BigRational)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// The actual exponent of index l, i.e. l + offset.
    pub fn exponent_of(&self, l: u64) -> BigRational {
        BigRational::from_integer(BigInt::from(l)) + &self.offset
    }

    /// Sum of two expansions with equal offsets; the truncation drops to
    /// the smaller bound.
    pub fn add(&self, other: &QExpansion) -> Result<QExpansion, JacobiError> {
        if self.offset != other.offset {
            return Err(JacobiError::OffsetMismatch);
        }
        let truncation = self.truncation.min(other.truncation);
        let mut out = QExpansion::new(self.offset.clone(), truncation, self.meta.clone());
        for (&l, v) in self.coeffs.iter().chain(other.coeffs.iter()) {
            if l >= truncation {
                continue;
            }
            let s = out.coeff(l) + v;
            out.set_coeff(l, s);
        }
        Ok(out)
    }

    pub fn map_scalar(&self, f: impl Fn(&BigRational) -> BigRational) -> QExpansion {
        let mut out = QExpansion::new(self.offset.clone(), self.truncation, self.meta.clone());
        for (&l, v) in &self.coeffs {
            out.set_coeff(l, f(v));
        }
        out
    }

    fn require_integral(&self) -> Result<(), JacobiError> {
        if !self.offset.is_zero() {
            return Err(JacobiError::NonzeroOffset);
        }
        Ok(())
    }

    /// Keep only coefficients with exponent coprime to p; level gains p^2.
    pub fn sieve_coprime(&self, p: u64) -> Result<QExpansion, JacobiError> {
        self.require_integral()?;
        debug_assert!(is_prime(p));
        let meta = ExpansionMeta {
            weight2: self.meta.weight2,
            level: self.meta.level * p * p,
            character: self.meta.character.clone(),
        };
        let mut out = QExpansion::integral(self.truncation, meta);
        for (&l, v) in &self.coeffs {
            if l % p != 0 {
                out.set_coeff(l, v.clone());
            }
        }
        Ok(out)
    }

    /// f(tau/p): exponents divided by p; requires every exponent and the
    /// level divisible by p. Level drops by p, character gains eps_p.
    pub fn rescale_down(&self, p: u64) -> Result<QExpansion, JacobiError> {
        self.require_integral()?;
        debug_assert!(is_prime(p));
        if self.coeffs.keys().any(|&l| l % p != 0) {
            return Err(JacobiError::ExponentNotDivisible(p));
        }
        if self.meta.level % p != 0 {
            return Err(JacobiError::LevelNotDivisible(p));
        }
        let meta = ExpansionMeta {
            weight2: self.meta.weight2,
            level: self.meta.level / p,
            character: label_times_eps(&self.meta.character, p),
        };
        let truncation = (self.truncation + p - 1) / p;
        let mut out = QExpansion::integral(truncation.max(1), meta);
        for (&l, v) in &self.coeffs {
            out.set_coeff(l / p, v.clone());
        }
        Ok(out)
    }

    /// Per prime, in order: rescale when the (nonempty) surviving support
    /// is entirely p-divisible, else sieve. Records each branch and the
    /// cumulative exponent factor ell with a_final(n) = a_initial(ell n).
    pub fn sieve_chain(
        &self,
        primes: &[u64],
    ) -> Result<(QExpansion, Vec<SieveStep>), JacobiError> {
        self.require_integral()?;
        let mut cur = self.clone();
        let mut steps = Vec::with_capacity(primes.len());
        let mut ell = 1u64;
        for &p in primes {
            let support_divisible =
                !cur.coeffs.is_empty() && cur.coeffs.keys().all(|&l| l % p == 0);
            let branch = if support_divisible {
                cur = cur.rescale_down(p)?;
                ell *= p;
                SieveBranch::Rescale
            } else {
                cur = cur.sieve_coprime(p)?;
                SieveBranch::Sieve
            };
            steps.push(SieveStep {
                prime: p,
                branch,
                level_after: cur.meta.level,
                character_after: cur.meta.character.clone(),
                ell_after: ell,
            });
        }
        Ok((cur, steps))
    }

    /// Exponents n with a(n) != 0, n odd and square-free, optionally
    /// filtered by coprimality to a given level.
    pub fn odd_squarefree_support(
        &self,
        coprime_to: Option<u64>,
    ) -> Result<Vec<u64>, JacobiError> {
        self.require_integral()?;
        let mut out: Vec<u64> = self
            .coeffs
            .keys()
            .copied()
            .filter(|&n| n % 2 == 1 && is_squarefree(n))
            .filter(|&n| match coprime_to {
                None => true,
                Some(m) => crate::arith::gcd(n, m) == 1,
            })
            .collect();
        out.sort_unstable();
        Ok(out)
    }

    /// f(factor * tau) at the coefficient level: exponent x becomes
    /// factor * x, which must come out a nonnegative integer for every
    /// stored coefficient. Used to clear rational offsets.
    pub fn scale_exponents(&self, factor: u64) -> Result<QExpansion, JacobiError> {
        assert!(factor >= 1);
        let fac = BigRational::from_integer(BigInt::from(factor));
        let top = (&fac * self.exponent_of(self.truncation)).ceil().to_integer();
        let truncation = top.to_u64().ok_or(JacobiError::NonIntegralExponent)?.max(1);
        let meta = ExpansionMeta {
            weight2: self.meta.weight2,
            level: self.meta.level * factor * factor,
            character: self.meta.character.clone(),
        };
        let mut out = QExpansion::integral(truncation, meta);
        for (&l, v) in &self.coeffs {
            let x = &fac * self.exponent_of(l);
            if !x.is_integer() || x.is_negative() {
                return Err(JacobiError::NonIntegralExponent);
            }
            let n = x.to_integer().to_u64().ok_or(JacobiError::NonIntegralExponent)?;
            out.set_coeff(n, v.clone());
        }
        Ok(out)
    }
}
