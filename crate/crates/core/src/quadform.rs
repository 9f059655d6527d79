//! Half-integral symmetric matrices: invariants, evaluation, block
//! decomposition, coset enumeration, odd-prime local normalization, and
//! the primitivity criterion for theta indices.
//!
//! A matrix T is stored via its integral double `gram = 2T`, which keeps
//! everything in integer arithmetic and turns the half-integrality
//! invariant into a parity check on the diagonal.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{divisors, is_prime, is_squarefree};
use crate::intmat::{self, Mat};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QuadError {
    ZeroMatrix,
    DimensionMismatch,
    NotSymmetric,
    OddDiagonal,
    NotPositiveDefinite,
    SizeTooSmall,
    /// local normalization asked for p = 2 or a composite p
    UnsupportedPrime,
    /// local normalization requires p to divide det(2T) exactly once
    PrimeMultiplicityNotOne,
    NotUnimodular,
    /// det(2T) odd for odd size, which half-integrality forbids
    ParityInvariantViolated,
}

impl std::fmt::Display for QuadError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let msg = match self {
            QuadError::ZeroMatrix => "operation undefined for the zero matrix",
            QuadError::DimensionMismatch => "vector or block dimension mismatch",
            QuadError::NotSymmetric => "gram matrix must be symmetric",
            QuadError::OddDiagonal => "gram matrix must have even diagonal",
            QuadError::NotPositiveDefinite => "matrix is not positive definite",
            QuadError::SizeTooSmall => "operation needs size at least 2",
            QuadError::UnsupportedPrime => "local normalization supports odd primes only",
            QuadError::PrimeMultiplicityNotOne => {
                "local normalization requires p || det(2T) exactly once"
            }
            QuadError::NotUnimodular => "matrix determinant is not +-1",
            QuadError::ParityInvariantViolated => "det(2T) must be even for odd size",
        };
        write!(f, "{msg}")
    }
}

impl std::error::Error for QuadError {}

/// An element of Lambda_n, stored through its integral double 2T.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfIntegralMatrix {
    n: usize,
    gram: Mat,
}

impl std::fmt::Debug for HalfIntegralMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "HalfIntegral(gram={:?})", self.gram)
    }
}

impl HalfIntegralMatrix {
    pub fn from_gram(gram: Mat) -> Result<Self, QuadError> {
        let n = gram.len();
        if n == 0 || gram.iter().any(|r| r.len() != n) {
            return Err(QuadError::DimensionMismatch);
        }
        for i in 0..n {
            for j in 0..n {
                if gram[i][j] != gram[j][i] {
                    return Err(QuadError::NotSymmetric);
                }
            }
            if (&gram[i][i] % 2i32) != BigInt::zero() {
                return Err(QuadError::OddDiagonal);
            }
        }
        Ok(HalfIntegralMatrix { n, gram })
    }

    pub fn from_gram_i64(rows: &[Vec<i64>]) -> Result<Self, QuadError> {
        Self::from_gram(intmat::from_i64(rows))
    }

    /// Scalar index t, i.e. the 1x1 matrix (t) with gram (2t).
    pub fn scalar(t: i64) -> Self {
        HalfIntegralMatrix {
            n: 1,
            gram: vec![vec![BigInt::from(2 * t)]],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn gram(&self) -> &Mat {
        &self.gram
    }

    /// Flat row-major gram entries: the canonical encoding used as a map key.
    pub fn key(&self) -> Vec<BigInt> {
        self.gram.iter().flatten().cloned().collect()
    }

    pub fn is_zero(&self) -> bool {
        self.gram.iter().flatten().all(|x| x.is_zero())
    }

    /// trace(T), an integer because the gram diagonal is even.
    pub fn trace(&self) -> BigInt {
        let s: BigInt = (0..self.n).map(|i| self.gram[i][i].clone()).sum();
        s / 2
    }

    /// The maximal integer c with T/c still half-integral.
    pub fn content(&self) -> Result<u64, QuadError> {
        if self.is_zero() {
            return Err(QuadError::ZeroMatrix);
        }
        let mut g = BigInt::zero();
        for x in self.gram.iter().flatten() {
            g = num_integer::Integer::gcd(&g, x);
        }
        let g = g.to_u64().expect("content fits u64");
        for c in divisors(g).into_iter().rev() {
            let ok = (0..self.n).all(|i| {
                let q = &self.gram[i][i] / BigInt::from(c);
                (&q % 2i32).is_zero()
            });
            if ok {
                return Ok(c);
            }
        }
        unreachable!("c = 1 always divides with even diagonal")
    }

    /// disc(T): det(2T) for even size, det(2T)/2 for odd size.
    pub fn discriminant(&self) -> Result<BigInt, QuadError> {
        let d = intmat::det(&self.gram);
        if self.n % 2 == 0 {
            Ok(d)
        } else {
            if (&d % 2i32) != BigInt::zero() {
                return Err(QuadError::ParityInvariantViolated);
            }
            Ok(d / 2)
        }
    }

    /// disc(T) odd and square-free. Fundamental T are automatically
    /// primitive.
    pub fn is_fundamental(&self) -> Result<bool, QuadError> {
        let d = self.discriminant()?;
        let d = match d.abs().to_u64() {
            Some(v) => v,
            None => return Ok(false),
        };
        Ok(d % 2 == 1 && is_squarefree(d))
    }

    /// T[x] = x^t T x, exact.
    pub fn evaluate(&self, x: &[BigInt]) -> Result<BigRational, QuadError> {
        if x.len() != self.n {
            return Err(QuadError::DimensionMismatch);
        }
        let mut acc = BigInt::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                acc += &x[i] * &self.gram[i][j] * &x[j];
            }
        }
        Ok(BigRational::new(acc, BigInt::from(2)))
    }

    pub fn evaluate_i64(&self, x: &[i64]) -> Result<BigRational, QuadError> {
        let v: Vec<BigInt> = x.iter().map(|&a| BigInt::from(a)).collect();
        self.evaluate(&v)
    }

    /// T^{-1}[x/2], the quantity whose denominator detects primitive theta
    /// indices. Equals x^t adj(2T) x / (2 det(2T)).
    pub fn inv_form_value(&self, x: &[BigInt]) -> Result<BigRational, QuadError> {
        if x.len() != self.n {
            return Err(QuadError::DimensionMismatch);
        }
        let adj = intmat::adjugate(&self.gram);
        let det = intmat::det(&self.gram);
        if det.is_zero() {
            return Err(QuadError::ZeroMatrix);
        }
        let mut acc = BigInt::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                acc += &x[i] * &adj[i][j] * &x[j];
            }
        }
        Ok(BigRational::new(acc, BigInt::from(2) * det))
    }

    /// Reduced denominator of T^{-1}[mu/2].
    pub fn mu_denominator(&self, mu: &[BigInt]) -> Result<BigInt, QuadError> {
        Ok(self.inv_form_value(mu)?.denom().clone())
    }

    /// mu is primitive when T^{-1}[mu/2] attains the maximal possible
    /// denominator: disc(T) for even size, 4 disc(T) for odd size.
    pub fn is_primitive_mu(&self, mu: &[BigInt]) -> Result<bool, QuadError> {
        let denom = self.mu_denominator(mu)?;
        let d = self.discriminant()?.abs();
        let target = if self.n % 2 == 0 { d } else { BigInt::from(4) * d };
        Ok(denom == target)
    }

    pub fn is_positive_definite(&self) -> bool {
        intmat::leading_principal_minors(&self.gram)
            .iter()
            .all(|m| m.is_positive())
    }

    pub fn is_positive_semidefinite(&self) -> bool {
        assert!(self.n <= 6, "PSD check by principal minors, sizes <= 6");
        intmat::all_principal_minors(&self.gram)
            .iter()
            .all(|m| !m.is_negative())
    }

    /// Split T = [[t, r/2], [r^t/2, Tt]] into the scalar corner, the
    /// integral row r, and the lower-right block.
    pub fn block_split(&self) -> Result<(BigInt, Vec<BigInt>, HalfIntegralMatrix), QuadError> {
        if self.n < 2 {
            return Err(QuadError::SizeTooSmall);
        }
        let t = &self.gram[0][0] / 2;
        let r: Vec<BigInt> = self.gram[0][1..].to_vec();
        let sub: Mat = self.gram[1..]
            .iter()
            .map(|row| row[1..].to_vec())
            .collect();
        Ok((t, r, HalfIntegralMatrix::from_gram(sub)?))
    }

    /// Inverse of block_split: assemble [[t, r/2], [r^t/2, block]].
    pub fn assemble_block(
        t: &BigInt,
        r: &[BigInt],
        block: &HalfIntegralMatrix,
    ) -> Result<HalfIntegralMatrix, QuadError> {
        if r.len() != block.n {
            return Err(QuadError::DimensionMismatch);
        }
        let n = block.n + 1;
        let mut gram = vec![vec![BigInt::zero(); n]; n];
        gram[0][0] = t * 2;
        for (j, rj) in r.iter().enumerate() {
            gram[0][j + 1] = rj.clone();
            gram[j + 1][0] = rj.clone();
        }
        for i in 0..block.n {
            for j in 0..block.n {
                gram[i + 1][j + 1] = block.gram[i][j].clone();
            }
        }
        HalfIntegralMatrix::from_gram(gram)
    }

    /// T scaled by a positive integer (gram scaled likewise).
    pub fn scale(&self, c: u64) -> HalfIntegralMatrix {
        let gram = self
            .gram
            .iter()
            .map(|row| row.iter().map(|x| x * BigInt::from(c)).collect())
            .collect();
        HalfIntegralMatrix { n: self.n, gram }
    }

    /// The half-integral action U^t T U.
    pub fn transform(&self, u: &UnimodularMatrix) -> Result<HalfIntegralMatrix, QuadError> {
        if u.n != self.n {
            return Err(QuadError::DimensionMismatch);
        }
        let ut = intmat::transpose(&u.entries);
        let gram = intmat::mat_mul(&intmat::mat_mul(&ut, &self.gram), &u.entries);
        HalfIntegralMatrix::from_gram(gram)
    }

    /// Representatives of Z^n / 2T Z^n in a deterministic order, computed
    /// from the Smith normal form of 2T. Exactly |det(2T)| classes.
    pub fn cosets(&self) -> Result<Vec<Vec<BigInt>>, QuadError> {
        let decomp = self.coset_decomposition()?;
        let count = decomp
            .diag
            .iter()
            .map(|d| d.to_u64().expect("coset count fits u64"))
            .product::<u64>();
        let mut out = Vec::with_capacity(count as usize);
        let mut c = vec![BigInt::zero(); self.n];
        loop {
            out.push(intmat::mat_vec(&decomp.u_inv, &c));
            // mixed-radix increment, last coordinate fastest
            let mut k = self.n;
            loop {
                if k == 0 {
                    return Ok(out);
                }
                k -= 1;
                c[k] += 1;
                if c[k] < decomp.diag[k] {
                    break;
                }
                c[k] = BigInt::zero();
            }
        }
    }

    /// Index of the class of r in the ordering produced by `cosets`.
    pub fn coset_index(&self, r: &[BigInt]) -> Result<usize, QuadError> {
        if r.len() != self.n {
            return Err(QuadError::DimensionMismatch);
        }
        let decomp = self.coset_decomposition()?;
        let ur = intmat::mat_vec(&decomp.u, r);
        let mut idx = BigInt::zero();
        for k in 0..self.n {
            let c = num_integer::Integer::mod_floor(&ur[k], &decomp.diag[k]);
            idx = idx * &decomp.diag[k] + c;
        }
        Ok(idx.to_usize().expect("coset index fits usize"))
    }

    fn coset_decomposition(&self) -> Result<CosetDecomposition, QuadError> {
        if !self.is_positive_definite() {
            return Err(QuadError::NotPositiveDefinite);
        }
        let (u, d, _v) = intmat::smith_normal_form(&self.gram);
        let diag: Vec<BigInt> = (0..self.n).map(|i| d[i][i].clone()).collect();
        let u_inv = intmat::unimodular_inverse(&u);
        Ok(CosetDecomposition { u, u_inv, diag })
    }

    /// Local normalization at an odd prime p dividing det(2T) exactly once:
    /// finds U in SL_n(Z) with U^t (2T) U congruent, mod p^f, to
    /// diag(u_1, ..., u_{n-1}, u_n p) with every u_i a unit mod p.
    pub fn local_normalize_odd(&self, p: u64, f: u32) -> Result<UnimodularMatrix, QuadError> {
        if p == 2 || !is_prime(p) {
            return Err(QuadError::UnsupportedPrime);
        }
        assert!(f >= 2, "normalization modulus must be at least p^2");
        let det = intmat::det(&self.gram);
        let pb = BigInt::from(p);
        if (&det % &pb).is_zero() {
            if ((&det / &pb) % &pb).is_zero() {
                return Err(QuadError::PrimeMultiplicityNotOne);
            }
        } else {
            return Err(QuadError::PrimeMultiplicityNotOne);
        }
        let q = pb.pow(f);
        let n = self.n;
        let mut a = self.gram.clone();
        let mut u = intmat::identity(n);
        let mut det_sign = 1i32;

        let unit = |x: &BigInt| !(x % &pb).is_zero();

        // symmetric congruence op: column dst += c * column src, and the
        // same on rows, tracked in u
        let col_add = |a: &mut Mat, u: &mut Mat, dst: usize, src: usize, c: &BigInt| {
            let n = a.len();
            for row in 0..n {
                let t = &a[row][src] * c;
                a[row][dst] += t;
            }
            for col in 0..n {
                let t = &a[src][col] * c;
                a[dst][col] += t;
            }
            for row in 0..u.len() {
                let t = &u[row][src] * c;
                u[row][dst] += t;
            }
        };

        for k in 0..n {
            // find a p-unit on the remaining diagonal
            let mut pivot = (k..n).find(|&i| unit(&a[i][i]));
            if pivot.is_none() {
                // create one from a unit off-diagonal entry: with p odd,
                // (e_i + e_j) gives diagonal a_ii + 2 a_ij + a_jj
                'outer: for i in k..n {
                    for j in k..n {
                        if i != j && unit(&a[i][j]) {
                            col_add(&mut a, &mut u, i, j, &BigInt::one());
                            pivot = Some(i);
                            break 'outer;
                        }
                    }
                }
            }
            let pivot = match pivot {
                Some(i) => i,
                // all remaining entries divisible by p: only legal at the
                // last slot, handled after the loop
                None => break,
            };
            if pivot != k {
                // swap columns (and rows) k <-> pivot
                for row in a.iter_mut() {
                    row.swap(k, pivot);
                }
                a.swap(k, pivot);
                for row in u.iter_mut() {
                    row.swap(k, pivot);
                }
                det_sign = -det_sign;
            }
            // clear the k-th row/column mod p^f
            let inv = mod_inverse_big(&a[k][k], &q).expect("pivot is a unit mod p^f");
            for j in k + 1..n {
                if num_integer::Integer::mod_floor(&a[k][j], &q).is_zero() {
                    continue;
                }
                let c = num_integer::Integer::mod_floor(&(-(&a[k][j]) * &inv), &q);
                col_add(&mut a, &mut u, j, k, &c);
            }
        }

        // exactly one diagonal entry is divisible by p; move it last
        let mut p_slot: Option<usize> = None;
        for i in 0..n {
            if !unit(&a[i][i]) {
                if p_slot.is_some() {
                    return Err(QuadError::PrimeMultiplicityNotOne);
                }
                p_slot = Some(i);
            }
        }
        let slot = p_slot.ok_or(QuadError::PrimeMultiplicityNotOne)?;
        if slot != n - 1 {
            for row in a.iter_mut() {
                row.swap(slot, n - 1);
            }
            a.swap(slot, n - 1);
            for row in u.iter_mut() {
                row.swap(slot, n - 1);
            }
            det_sign = -det_sign;
        }
        // p must divide the last entry exactly once
        let last = num_integer::Integer::mod_floor(&a[n - 1][n - 1], &q);
        if ((&last / &pb) % &pb).is_zero() {
            return Err(QuadError::PrimeMultiplicityNotOne);
        }
        if det_sign < 0 {
            // negating a column fixes det(U) = +1 without disturbing the
            // diagonal congruence
            for row in u.iter_mut() {
                let x = std::mem::take(&mut row[n - 1]);
                row[n - 1] = -x;
            }
        }
        UnimodularMatrix::new(u)
    }
}

struct CosetDecomposition {
    u: Mat,
    u_inv: Mat,
    diag: Vec<BigInt>,
}

fn mod_inverse_big(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = num_integer::Integer::extended_gcd(&num_integer::Integer::mod_floor(a, m), m);
    if e.gcd.is_one() {
        Some(num_integer::Integer::mod_floor(&e.x, m))
    } else {
        None
    }
}

/// An integer matrix with determinant +-1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnimodularMatrix {
    n: usize,
    entries: Mat,
}

impl UnimodularMatrix {
    pub fn new(entries: Mat) -> Result<Self, QuadError> {
        let n = entries.len();
        if n == 0 || entries.iter().any(|r| r.len() != n) {
            return Err(QuadError::DimensionMismatch);
        }
        if !intmat::det(&entries).abs().is_one() {
            return Err(QuadError::NotUnimodular);
        }
        Ok(UnimodularMatrix { n, entries })
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Result<Self, QuadError> {
        Self::new(intmat::from_i64(rows))
    }

    pub fn identity(n: usize) -> Self {
        UnimodularMatrix {
            n,
            entries: intmat::identity(n),
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &Mat {
        &self.entries
    }

    pub fn det(&self) -> BigInt {
        intmat::det(&self.entries)
    }
}
