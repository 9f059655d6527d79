//! Exact integer matrix helpers: Bareiss determinants, adjugates, and
//! Smith normal form with transform tracking. Sizes here are tiny (the
//! genus of a form), so clarity wins over asymptotics.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

pub type Mat = Vec<Vec<BigInt>>;

pub fn identity(n: usize) -> Mat {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                .collect()
        })
        .collect()
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..k).map(|t| &a[i][t] * &b[t][j]).sum())
                .collect()
        })
        .collect()
}

pub fn mat_vec(a: &Mat, v: &[BigInt]) -> Vec<BigInt> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

pub fn transpose(a: &Mat) -> Mat {
    let n = a.len();
    let m = a[0].len();
    (0..m).map(|j| (0..n).map(|i| a[i][j].clone()).collect()).collect()
}

/// Fraction-free Bareiss determinant.
pub fn det(a: &Mat) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut m: Mat = a.to_vec();
    let mut prev = BigInt::one();
    let mut sign = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let swap = (k + 1..n).find(|&i| !m[i][k].is_zero());
            match swap {
                Some(i) => {
                    m.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &m[k][k] * &m[i][j] - &m[i][k] * &m[k][j];
                m[i][j] = num / &prev;
            }
            m[i][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    sign * m[n - 1][n - 1].clone()
}

fn minor(a: &Mat, skip_row: usize, skip_col: usize) -> Mat {
    a.iter()
        .enumerate()
        .filter(|(i, _)| *i != skip_row)
        .map(|(_, row)| {
            row.iter()
                .enumerate()
                .filter(|(j, _)| *j != skip_col)
                .map(|(_, x)| x.clone())
                .collect()
        })
        .collect()
}

/// Adjugate matrix: adj(A) * A = det(A) * I.
pub fn adjugate(a: &Mat) -> Mat {
    let n = a.len();
    if n == 1 {
        return vec![vec![BigInt::one()]];
    }
    let mut out = vec![vec![BigInt::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let c = det(&minor(a, i, j));
            out[j][i] = if (i + j) % 2 == 0 { c } else { -c };
        }
    }
    out
}

/// Exact inverse of a unimodular matrix.
pub fn unimodular_inverse(a: &Mat) -> Mat {
    let d = det(a);
    debug_assert!(d.clone().abs().is_one());
    let mut adj = adjugate(a);
    if d == BigInt::from(-1) {
        for row in adj.iter_mut() {
            for x in row.iter_mut() {
                *x = -std::mem::take(x);
            }
        }
    }
    adj
}

/// Smith normal form with transforms: returns (u, d, v) with u*a*v = d,
/// d diagonal with nonnegative entries and d[i] | d[i+1], and u, v
/// unimodular. Pivot choices are canonical, so the output is deterministic.
pub fn smith_normal_form(a: &Mat) -> (Mat, Mat, Mat) {
    let rows = a.len();
    let cols = a[0].len();
    let mut m = a.to_vec();
    let mut u = identity(rows);
    let mut v = identity(cols);

    let r = rows.min(cols);
    for t in 0..r {
        loop {
            // smallest nonzero entry in the trailing submatrix, first by
            // magnitude then by position
            let mut pivot: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if m[i][j].is_zero() {
                        continue;
                    }
                    let better = match pivot {
                        None => true,
                        Some((pi, pj)) => m[i][j].abs() < m[pi][pj].abs(),
                    };
                    if better {
                        pivot = Some((i, j));
                    }
                }
            }
            let (pi, pj) = match pivot {
                None => return (u, m, v),
                Some(p) => p,
            };
            if pi != t {
                m.swap(pi, t);
                u.swap(pi, t);
            }
            if pj != t {
                for row in m.iter_mut() {
                    row.swap(pj, t);
                }
                for row in v.iter_mut() {
                    row.swap(pj, t);
                }
            }
            let mut clean = true;
            for i in t + 1..rows {
                if m[i][t].is_zero() {
                    continue;
                }
                let q = &m[i][t] / &m[t][t];
                if !q.is_zero() {
                    for j in t..cols {
                        let s = &q * &m[t][j];
                        m[i][j] -= s;
                    }
                    for j in 0..rows {
                        let s = &q * &u[t][j];
                        u[i][j] -= s;
                    }
                }
                if !m[i][t].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..cols {
                if m[t][j].is_zero() {
                    continue;
                }
                let q = &m[t][j] / &m[t][t];
                if !q.is_zero() {
                    for i in t..rows {
                        let s = &q * &m[i][t];
                        m[i][j] -= s;
                    }
                    for i in 0..cols {
                        let s = &q * &v[i][t];
                        v[i][j] -= s;
                    }
                }
                if !m[t][j].is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // enforce divisibility of the remaining block by the pivot
            let mut divides_all = true;
            'scan: for i in t + 1..rows {
                for j in t + 1..cols {
                    if !(&m[i][j] % &m[t][t]).is_zero() {
                        // fold that row into row t and restart this pivot
                        for jj in 0..cols {
                            let s = m[i][jj].clone();
                            m[t][jj] += s;
                        }
                        for jj in 0..rows {
                            let s = u[i][jj].clone();
                            u[t][jj] += s;
                        }
                        divides_all = false;
                        break 'scan;
                    }
                }
            }
            if divides_all {
                break;
            }
        }
        if m[t][t].is_negative() {
            for j in 0..cols {
                m[t][j] = -std::mem::take(&mut m[t][j]);
            }
            for j in 0..rows {
                u[t][j] = -std::mem::take(&mut u[t][j]);
            }
        }
    }
    (u, m, v)
}

/// All leading principal minors, sizes 1..=n.
pub fn leading_principal_minors(a: &Mat) -> Vec<BigInt> {
    (1..=a.len())
        .map(|k| {
            let sub: Mat = a[..k].iter().map(|row| row[..k].to_vec()).collect();
            det(&sub)
        })
        .collect()
}

/// Determinants of every nonempty principal submatrix (for PSD testing).
pub fn all_principal_minors(a: &Mat) -> Vec<BigInt> {
    let n = a.len();
    let mut out = Vec::new();
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let sub: Mat = idx
            .iter()
            .map(|&i| idx.iter().map(|&j| a[i][j].clone()).collect())
            .collect();
        out.push(det(&sub));
    }
    out
}

pub fn from_i64(rows: &[Vec<i64>]) -> Mat {
    rows.iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Laplace-expansion determinant, the oracle for Bareiss.
    fn det_laplace(a: &Mat) -> BigInt {
        let n = a.len();
        if n == 0 {
            return BigInt::one();
        }
        if n == 1 {
            return a[0][0].clone();
        }
        let mut acc = BigInt::zero();
        for j in 0..n {
            if a[0][j].is_zero() {
                continue;
            }
            let c = det_laplace(&minor(a, 0, j));
            let term = &a[0][j] * c;
            if j % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc
    }

    #[test]
    fn bareiss_matches_laplace() {
        let mut rng = crate::arith::SplitMix64::new(3);
        for n in 1..=4usize {
            for _ in 0..30 {
                let a: Mat = (0..n)
                    .map(|_| (0..n).map(|_| BigInt::from(rng.range_i64(-9, 9))).collect())
                    .collect();
                assert_eq!(det(&a), det_laplace(&a));
            }
        }
    }

    #[test]
    fn adjugate_identity() {
        let mut rng = crate::arith::SplitMix64::new(5);
        for n in 1..=4usize {
            for _ in 0..10 {
                let a: Mat = (0..n)
                    .map(|_| (0..n).map(|_| BigInt::from(rng.range_i64(-5, 5))).collect())
                    .collect();
                let d = det(&a);
                let prod = mat_mul(&adjugate(&a), &a);
                for i in 0..n {
                    for j in 0..n {
                        let expect = if i == j { d.clone() } else { BigInt::zero() };
                        assert_eq!(prod[i][j], expect);
                    }
                }
            }
        }
    }

    #[test]
    fn snf_reconstructs_and_divides() {
        let mut rng = crate::arith::SplitMix64::new(11);
        for n in 1..=3usize {
            for _ in 0..40 {
                let a: Mat = (0..n)
                    .map(|_| (0..n).map(|_| BigInt::from(rng.range_i64(-8, 8))).collect())
                    .collect();
                let (u, d, v) = smith_normal_form(&a);
                assert!(det(&u).abs().is_one());
                assert!(det(&v).abs().is_one());
                assert_eq!(mat_mul(&mat_mul(&u, &a), &v), d);
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            assert!(d[i][j].is_zero());
                        }
                    }
                    assert!(!d[i][i].is_negative());
                    if i + 1 < n && !d[i][i].is_zero() && !d[i + 1][i + 1].is_zero() {
                        assert!((&d[i + 1][i + 1] % &d[i][i]).is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn snf_of_example_gram() {
        let a = from_i64(&[vec![2, 1], vec![1, 2]]);
        let (_, d, _) = smith_normal_form(&a);
        assert_eq!(d[0][0], BigInt::from(1));
        assert_eq!(d[1][1], BigInt::from(3));
    }
}
