//! The epsilon matrices of root-of-unity entries, exact rank computation
//! over cyclotomic fields, the tensor-product factorization, and the
//! exhaustive rank verification sweep.
//!
//! The lemma-case matrix E_{a,d}(s0) has entries exp(a(s-r)^2/d) with r
//! running over (Z/d)^x and s over the square roots of s0^2 mod d. Its
//! rank must equal the column count 2^t, t the number of primes dividing
//! d but not s0.
//!
//! Rank verification has two routes. `rank_exact` is general Bareiss-style
//! elimination over the single field containing all entries. The sweep
//! additionally uses a division-free certificate: a maximal minor is
//! expanded in the group algebra Z[x]/(x^d - 1) (every entry is a single
//! root of unity, so multiplication is a cyclic shift) and reduced mod the
//! cyclotomic polynomial for an exact zero test. Row subsets come from a
//! CRT grid that the tensor structure makes provably nonsingular, and the
//! determinant is still evaluated honestly on the assembled matrix.

use crate::arith::{gcd_i, inv_mod, is_squarefree, prime_divisors, units_mod};
use crate::charsums::gauss_sum;
use crate::exactarith::CycNumber;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EpsError {
    NotOddSquarefree,
    NotCoprime(&'static str),
    NotADivisor,
    /// the row/column counting claim fails (never observed; kept as a
    /// flagged error rather than an assert)
    RowColumnInvariantViolated,
}

impl std::fmt::Display for EpsError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EpsError::NotOddSquarefree => write!(f, "d must be odd and square-free"),
            EpsError::NotCoprime(what) => write!(f, "precondition violated: {what}"),
            EpsError::NotADivisor => write!(f, "p_split must be a prime divisor of d"),
            EpsError::RowColumnInvariantViolated => {
                write!(f, "row count fell below column count")
            }
        }
    }
}

impl std::error::Error for EpsError {}

/// Which index convention the matrix uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpsCase {
    /// rows (Z/d)^x, cols s mod d with s^2 = s0^2 mod d, entries
    /// exp(a(s-r)^2/d)
    Lemma,
    /// rows (Z/2d)^x, cols s mod 2d with s^2 = s0^2 mod 4d, entries
    /// exp(a(s-r)^2/4d): the pre-reduction shape of the odd-size case
    Odd,
    /// lemma-shaped root matrix scaled by the constant Gauss prefactor
    /// G(a, 0, d) of the even-size case
    Even,
}

/// An epsilon matrix in exponent form: entry (i, j) is the root of unity
/// zeta_order^exps[i][j], optionally scaled by a constant prefactor.
#[derive(Debug, Clone)]
pub struct EpsilonMatrix {
    pub case: EpsCase,
    pub a: i64,
    pub d: u64,
    pub s0: i64,
    /// residues indexing the rows, ascending
    pub rows: Vec<u64>,
    /// residues indexing the columns, ascending
    pub cols: Vec<u64>,
    /// order of the roots of unity (d, or 4d in the odd case)
    pub order: u32,
    /// exps[i][j]: entry is prefactor * zeta_order^exps[i][j]
    pub exps: Vec<Vec<u32>>,
    /// constant nonzero scalar in front of every entry (even case)
    pub prefactor: Option<CycNumber>,
}

impl EpsilonMatrix {
    pub fn entry(&self, i: usize, j: usize) -> CycNumber {
        let root = CycNumber::root_of_unity(self.exps[i][j] as i64, self.order);
        match &self.prefactor {
            None => root,
            Some(c) => c.mul_value(&root),
        }
    }

    pub fn entries(&self) -> Vec<Vec<CycNumber>> {
        (0..self.rows.len())
            .map(|i| (0..self.cols.len()).map(|j| self.entry(i, j)).collect())
            .collect()
    }

    /// 2^t, the rank the counting argument predicts.
    pub fn expected_rank(&self) -> usize {
        1usize << t_value(self.d, self.s0)
    }
}

/// t = #{primes p | d with p not dividing s0}.
fn t_value(d: u64, s0: i64) -> u32 {
    prime_divisors(d)
        .iter()
        .filter(|&&p| s0.rem_euclid(p as i64) != 0)
        .count() as u32
}

/// Entry of the odd-size case before reduction:
/// (1/2) G(-Nm, 2(s-r)m, 4d).
pub fn epsilon_entry_odd(m: i64, n: i64, d: u32, s: i64, r: i64) -> Result<CycNumber, EpsError> {
    let c = 4 * d as i64;
    if gcd_i(m, c) != 1 {
        return Err(EpsError::NotCoprime("gcd(m, 4d) = 1"));
    }
    if gcd_i(n, c) != 1 {
        return Err(EpsError::NotCoprime("gcd(N, 4d) = 1"));
    }
    let g = gauss_sum(-n * m, 2 * (s - r) * m, 4 * d);
    Ok(g.scale(&crate::Rat::new(1.into(), 2.into())))
}

/// Entry of the even-size case: G(-Nm', 0, d) * exp(-Nm'(s-r)^2/d).
pub fn epsilon_entry_even(m2: i64, n: i64, d: u32, s: i64, r: i64) -> Result<CycNumber, EpsError> {
    if gcd_i(m2, d as i64) != 1 {
        return Err(EpsError::NotCoprime("gcd(m', d) = 1"));
    }
    if gcd_i(n, d as i64) != 1 {
        return Err(EpsError::NotCoprime("gcd(N, d) = 1"));
    }
    let a = -(n as i128) * m2 as i128;
    let phase = (a * (s - r) as i128 * (s - r) as i128).rem_euclid(d as i128) as i64;
    let g = gauss_sum((a.rem_euclid(d as i128)) as i64, 0, d);
    Ok(g.mul_value(&CycNumber::root_of_unity(phase, d)))
}

/// The lemma-case matrix E_{a,d}(s0).
pub fn build_e(a: i64, d: u64, s0: i64) -> Result<EpsilonMatrix, EpsError> {
    if d % 2 == 0 || !is_squarefree(d) {
        return Err(EpsError::NotOddSquarefree);
    }
    if gcd_i(a, d as i64) != 1 {
        return Err(EpsError::NotCoprime("gcd(a, d) = 1"));
    }
    let rows = units_mod(d);
    let cols = square_roots_mod_with(s0.rem_euclid(d as i64), d, d);
    let exps = root_exponents(a, d as u32, &rows, &cols);
    let m = EpsilonMatrix {
        case: EpsCase::Lemma,
        a,
        d,
        s0: s0.rem_euclid(d as i64),
        rows,
        cols,
        order: d as u32,
        exps,
        prefactor: None,
    };
    debug_assert_eq!(m.cols.len(), m.expected_rank());
    if m.rows.len() < m.cols.len() {
        return Err(EpsError::RowColumnInvariantViolated);
    }
    Ok(m)
}

/// The odd-size pre-reduction shape: rows (Z/2d)^x, columns s mod 2d with
/// s^2 = s0^2 mod 4d, entries exp(a(s-r)^2/(4d)).
pub fn build_e_odd(a: i64, d: u64, s0: i64) -> Result<EpsilonMatrix, EpsError> {
    if d % 2 == 0 || !is_squarefree(d) {
        return Err(EpsError::NotOddSquarefree);
    }
    if gcd_i(a, 4 * d as i64) != 1 {
        return Err(EpsError::NotCoprime("gcd(a, 4d) = 1"));
    }
    let rows = units_mod(2 * d);
    let cols = square_roots_mod_with(s0.rem_euclid(2 * d as i64), 2 * d, 4 * d);
    let exps = root_exponents(a, 4 * d as u32, &rows, &cols);
    let m = EpsilonMatrix {
        case: EpsCase::Odd,
        a,
        d,
        s0: s0.rem_euclid(2 * d as i64),
        rows,
        cols,
        order: 4 * d as u32,
        exps,
        prefactor: None,
    };
    if m.rows.len() < m.cols.len() {
        return Err(EpsError::RowColumnInvariantViolated);
    }
    Ok(m)
}

/// The even-size case: the lemma-shaped root matrix times the constant
/// prefactor G(a, 0, d), whose nonvanishing is certified exactly via
/// G * conj(G) = d. The rank of the scaled matrix equals the rank of the
/// root matrix precisely because of that certificate, so it is a real
/// check, not a debug assertion.
pub fn build_e_even(a: i64, d: u64, s0: i64) -> Result<EpsilonMatrix, EpsError> {
    let mut m = build_e(a, d, s0)?;
    let g = gauss_sum(a, 0, d as u32);
    let norm = g.mul_value(&g.conj());
    assert_eq!(
        norm.as_rational(),
        Some(crate::Rat::from_integer(d.into())),
        "Gauss prefactor norm certificate failed"
    );
    m.case = EpsCase::Even;
    m.prefactor = Some(g);
    Ok(m)
}

/// s in [0, range) with s^2 = s0^2 mod modulus.
fn square_roots_mod_with(s0: i64, range: u64, modulus: u64) -> Vec<u64> {
    let target = (s0 as i128 * s0 as i128).rem_euclid(modulus as i128) as u64;
    (0..range)
        .filter(|&s| (s as u128 * s as u128 % modulus as u128) as u64 == target)
        .collect()
}

fn root_exponents(a: i64, order: u32, rows: &[u64], cols: &[u64]) -> Vec<Vec<u32>> {
    rows.iter()
        .map(|&r| {
            cols.iter()
                .map(|&s| {
                    let diff = s as i128 - r as i128;
                    (a as i128 * diff * diff).rem_euclid(order as i128) as u32
                })
                .collect()
        })
        .collect()
}

/// Exact rank over the cyclotomic field containing all entries, by
/// fraction-free Bareiss elimination with deterministic pivoting.
pub fn rank_exact(matrix: &[Vec<CycNumber>]) -> usize {
    let rows = matrix.len();
    if rows == 0 {
        return 0;
    }
    let cols = matrix[0].len();
    let mut m: Vec<Vec<CycNumber>> = matrix.to_vec();
    let mut prev = CycNumber::one();
    let mut rank = 0;
    let mut pivot_row = 0;
    for col in 0..cols {
        if pivot_row >= rows {
            break;
        }
        let found = (pivot_row..rows).find(|&i| !m[i][col].is_zero());
        let found = match found {
            None => continue,
            Some(i) => i,
        };
        m.swap(pivot_row, found);
        let prev_inv = prev.inv().expect("previous pivot is nonzero");
        for i in pivot_row + 1..rows {
            for j in col + 1..cols {
                let num = m[pivot_row][col]
                    .mul_value(&m[i][j])
                    .sub_value(&m[i][col].mul_value(&m[pivot_row][j]));
                m[i][j] = num.mul_value(&prev_inv);
            }
            m[i][col] = CycNumber::zero();
        }
        prev = m[pivot_row][col].clone();
        pivot_row += 1;
        rank += 1;
    }
    rank
}

/// Division-free determinant zero test for a square submatrix of a
/// root-of-unity matrix: expand over permutations with a subset DP in the
/// group algebra (multiplication by an entry is a cyclic shift), then
/// reduce mod the cyclotomic polynomial.
fn minor_is_nonzero(order: u32, exps: &[Vec<u32>], row_subset: &[usize]) -> bool {
    let c = row_subset.len();
    debug_assert_eq!(exps[0].len(), c);
    let m = order as usize;
    // dp[mask] = group-algebra vector of det(rows 0..k restricted to the
    // column set mask), k = popcount(mask)
    let mut dp: Vec<Option<Vec<i64>>> = vec![None; 1 << c];
    let mut start = vec![0i64; m];
    start[0] = 1;
    dp[0] = Some(start);
    for mask in 1u32..(1u32 << c) {
        let k = mask.count_ones() as usize;
        let row = exps[row_subset[k - 1]].as_slice();
        let mut acc = vec![0i64; m];
        let mut pos = 0usize; // position of the column within the mask
        for j in 0..c {
            if mask >> j & 1 == 0 {
                continue;
            }
            let sub = dp[(mask ^ (1 << j)) as usize]
                .as_ref()
                .expect("subset DP fills in popcount order");
            let shift = row[j] as usize;
            // expansion along the last row: sign (-1)^{(k-1)+pos}
            let neg = (k - 1 + pos) % 2 == 1;
            for (e, &v) in sub.iter().enumerate() {
                if v == 0 {
                    continue;
                }
                let idx = (e + shift) % m;
                if neg {
                    acc[idx] -= v;
                } else {
                    acc[idx] += v;
                }
            }
            pos += 1;
        }
        dp[mask as usize] = Some(acc);
    }
    let full = dp[(1usize << c) - 1].take().unwrap();
    !CycNumber::exponent_counts_are_zero(order, &full)
}

/// Deterministic row subset from the CRT grid: per prime factor pick the
/// two smallest units (one when the prime divides s0), then combine. The
/// tensor factorization makes the resulting maximal minor nonsingular,
/// which the caller still verifies honestly.
fn grid_row_subset(m: &EpsilonMatrix) -> Option<Vec<usize>> {
    let modulus = match m.case {
        EpsCase::Odd => 2 * m.d,
        _ => m.d,
    };
    if modulus == 1 {
        return Some(vec![0]);
    }
    let mut residues: Vec<u64> = vec![0];
    let mut built: u64 = 1;
    for p in prime_divisors(modulus) {
        let picks: Vec<u64> = if p == 2 || m.s0.rem_euclid(p as i64) == 0 {
            vec![1]
        } else {
            vec![1, 2]
        };
        let mut next = Vec::with_capacity(residues.len() * picks.len());
        for &r in &residues {
            for &u in &picks {
                next.push(if built == 1 {
                    u % p
                } else {
                    crate::arith::crt(r, built, u % p, p)
                });
            }
        }
        residues = next;
        built *= p;
    }
    if residues.len() != m.cols.len() {
        return None;
    }
    let mut idx: Vec<usize> = residues
        .iter()
        .map(|r| m.rows.binary_search(r).ok())
        .collect::<Option<Vec<_>>>()?;
    idx.sort_unstable();
    Some(idx)
}

/// Verified rank with a stated expectation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankLemmaReport {
    pub a: i64,
    pub d: u64,
    pub s0: i64,
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub expected: usize,
    pub pass: bool,
}

fn verify_rank(m: &EpsilonMatrix, expected: usize) -> RankLemmaReport {
    let c = m.cols.len();
    let mut rank = None;
    // a nonzero maximal minor proves rank = #cols (never more: there are
    // only c columns)
    if let Some(subset) = grid_row_subset(m) {
        if minor_is_nonzero(m.order, &m.exps, &subset) {
            rank = Some(c);
        }
    }
    if rank.is_none() {
        let mut tried = 0;
        let mut combo: Vec<usize> = (0..c).collect();
        'scan: while tried < 200 && m.rows.len() >= c {
            if minor_is_nonzero(m.order, &m.exps, &combo) {
                rank = Some(c);
                break 'scan;
            }
            tried += 1;
            // next lexicographic combination
            let mut i = c;
            loop {
                if i == 0 {
                    break 'scan;
                }
                i -= 1;
                combo[i] += 1;
                if combo[i] <= m.rows.len() - (c - i) {
                    for j in i + 1..c {
                        combo[j] = combo[j - 1] + 1;
                    }
                    break;
                }
            }
        }
    }
    // fall back to honest elimination over the field
    let rank = rank.unwrap_or_else(|| rank_exact(&m.entries()));
    RankLemmaReport {
        a: m.a,
        d: m.d,
        s0: m.s0,
        rows: m.rows.len(),
        cols: c,
        rank,
        expected,
        pass: rank == expected,
    }
}

/// Lemma instance: rank(E_{a,d}(s0)) must be 2^t.
pub fn verify_rank_lemma(a: i64, d: u64, s0: i64) -> Result<RankLemmaReport, EpsError> {
    let m = build_e(a, d, s0)?;
    let expected = m.expected_rank();
    Ok(verify_rank(&m, expected))
}

/// The mod-4d variant of the rank check (odd-size pre-reduction shape).
pub fn verify_rank_odd(a: i64, d: u64, s0: i64) -> Result<RankLemmaReport, EpsError> {
    let m = build_e_odd(a, d, s0)?;
    let expected = 1usize << t_value(d, s0);
    Ok(verify_rank(&m, expected))
}

/// The even-size case: identical root matrix, with the nonzero constant
/// prefactor verified exactly while building.
pub fn verify_rank_even(a: i64, d: u64, s0: i64) -> Result<RankLemmaReport, EpsError> {
    let m = build_e_even(a, d, s0)?;
    let expected = m.expected_rank();
    Ok(verify_rank(&m, expected))
}

/// Entrywise verification of the tensor factorization
/// E_{a,d}(s0) = E_{a p, d'}(s0') (x) E_{a d', p}(s0'') under the CRT
/// index bijection s = p s' + d' s''. Entries are single roots of unity
/// of a common order, so exact equality is exponent congruence; the
/// bijection is computed explicitly, not read off by sorting.
pub fn tensor_split_check(a: i64, d: u64, s0: i64, p_split: u64) -> Result<bool, EpsError> {
    if d % 2 == 0 || !is_squarefree(d) {
        return Err(EpsError::NotOddSquarefree);
    }
    if p_split == 1 || d % p_split != 0 || !crate::arith::is_prime(p_split) {
        return Err(EpsError::NotADivisor);
    }
    if gcd_i(a, d as i64) != 1 {
        return Err(EpsError::NotCoprime("gcd(a, d) = 1"));
    }
    let p = p_split;
    let dp = d / p; // d'
    let e = build_e(a, d, s0)?;
    let p_bar = inv_mod(p as i64, dp).expect("p invertible mod d'");
    let dp_bar = inv_mod(dp as i64, p).expect("d' invertible mod p");
    let s0p = (p_bar as i128 * s0 as i128).rem_euclid(dp.max(1) as i128) as i64;
    let s0pp = (dp_bar as i128 * s0 as i128).rem_euclid(p as i128) as i64;
    let e1 = build_e((a as i128 * p as i128).rem_euclid(dp as i128) as i64, dp, s0p)?;
    let e2 = build_e(
        (a as i128 * dp as i128).rem_euclid(p as i128) as i64,
        p,
        s0pp,
    )?;

    if e.rows.len() != e1.rows.len() * e2.rows.len()
        || e.cols.len() != e1.cols.len() * e2.cols.len()
    {
        return Ok(false);
    }

    // x -> (x', x'') under x = p x' + d' x''
    let split = |x: u64| -> (u64, u64) {
        let x1 = (p_bar as u128 * x as u128 % dp as u128) as u64;
        let x2 = (dp_bar as u128 * x as u128 % p as u128) as u64;
        (x1, x2)
    };

    for (i, &r) in e.rows.iter().enumerate() {
        let (r1, r2) = split(r);
        let i1 = match e1.rows.binary_search(&r1) {
            Ok(v) => v,
            Err(_) => return Ok(false),
        };
        let i2 = match e2.rows.binary_search(&r2) {
            Ok(v) => v,
            Err(_) => return Ok(false),
        };
        for (j, &s) in e.cols.iter().enumerate() {
            let (s1, s2) = split(s);
            let j1 = match e1.cols.binary_search(&s1) {
                Ok(v) => v,
                Err(_) => return Ok(false),
            };
            let j2 = match e2.cols.binary_search(&s2) {
                Ok(v) => v,
                Err(_) => return Ok(false),
            };
            // zeta_{d'}^e1 * zeta_p^e2 = zeta_d^{p e1 + d' e2}
            let lhs = e.exps[i][j] as u128;
            let rhs = (p as u128 * e1.exps[i1][j1] as u128
                + dp as u128 * e2.exps[i2][j2] as u128)
                % d as u128;
            if lhs != rhs {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Sweep over every a in the unit group and every s0 for all odd
/// square-free d <= dmax, optionally fanned out over worker threads.
/// Reports come back in canonical (d, a, s0) order regardless of jobs.
pub fn rank_lemma_sweep(
    dmax: u64,
    case: EpsCase,
    jobs: usize,
) -> Result<Vec<RankLemmaReport>, EpsError> {
    let mut triples = Vec::new();
    for d in (1..=dmax).filter(|&d| d % 2 == 1 && is_squarefree(d)) {
        let (a_mod, s_mod) = match case {
            EpsCase::Lemma | EpsCase::Even => (d, d),
            EpsCase::Odd => (4 * d, 2 * d),
        };
        for a in units_mod(a_mod) {
            let a = if a == 0 { 1 } else { a };
            for s0 in 0..s_mod {
                triples.push((a as i64, d, s0 as i64));
            }
        }
    }
    let run = |&(a, d, s0): &(i64, u64, i64)| -> Result<RankLemmaReport, EpsError> {
        match case {
            EpsCase::Lemma => verify_rank_lemma(a, d, s0),
            EpsCase::Odd => verify_rank_odd(a, d, s0),
            EpsCase::Even => verify_rank_even(a, d, s0),
        }
    };
    if jobs <= 1 {
        return triples.iter().map(run).collect();
    }
    let jobs = jobs.min(triples.len().max(1));
    let chunk = triples.len().div_ceil(jobs);
    let mut out: Vec<Result<Vec<RankLemmaReport>, EpsError>> = Vec::new();
    std::thread::scope(|scope| {
        let handles: Vec<_> = triples
            .chunks(chunk)
            .map(|slice| scope.spawn(move || slice.iter().map(run).collect()))
            .collect();
        for h in handles {
            out.push(h.join().expect("sweep worker panicked"));
        }
    });
    let mut reports = Vec::with_capacity(triples.len());
    for r in out {
        reports.extend(r?);
    }
    Ok(reports)
}
