//! Small integer utilities: gcd/Bezout, modular arithmetic, factorization,
//! the Kronecker symbol, and a deterministic PRNG for reproducible sweeps.
//!
//! Everything here works on machine integers; the moduli appearing in this
//! crate (orders of roots of unity, character moduli, discriminants) are
//! small even when the rational coefficients they multiply are not.

/// Greatest common divisor of two nonnegative integers.
pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = b;
        b = a % b;
        a = t;
    }
    a
}

/// gcd for signed inputs, always nonnegative.
pub fn gcd_i(a: i64, b: i64) -> u64 {
    gcd(a.unsigned_abs(), b.unsigned_abs())
}

/// Least common multiple. Panics on overflow (orders here stay tiny).
pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        return 0;
    }
    a / gcd(a, b) * b
}

/// Extended Euclid: returns (g, x, y) with a*x + b*y = g = gcd(a, b).
pub fn egcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x, y) = egcd(b, a.rem_euclid(b));
        (g, y, x - (a.div_euclid(b)) * y)
    }
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: i64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let (g, x, _) = egcd(a.rem_euclid(m as i64), m as i64);
    if g != 1 {
        None
    } else {
        Some(x.rem_euclid(m as i64) as u64)
    }
}

/// `base^exp mod m` (m >= 1).
pub fn mod_pow(base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut result: u128 = 1;
    let mut b: u128 = (base % m) as u128;
    let m = m as u128;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    result as u64
}

/// Trial-division primality test; sufficient for the moduli in this crate.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Prime factorization as (prime, exponent) pairs, ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Distinct prime divisors, ascending.
pub fn prime_divisors(n: u64) -> Vec<u64> {
    factorize(n).into_iter().map(|(p, _)| p).collect()
}

pub fn is_squarefree(n: u64) -> bool {
    n != 0 && factorize(n).iter().all(|&(_, e)| e == 1)
}

pub fn euler_phi(n: u64) -> u64 {
    let mut phi = n;
    for (p, _) in factorize(n) {
        phi -= phi / p;
    }
    phi
}

/// All positive divisors, ascending.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for (p, e) in factorize(n) {
        let prev = out.clone();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            out.extend(prev.iter().map(|d| d * pk));
        }
    }
    out.sort_unstable();
    out
}

/// Units of Z/n, ascending. For n = 1 this is `[0]`.
pub fn units_mod(n: u64) -> Vec<u64> {
    if n == 1 {
        return vec![0];
    }
    (1..n).filter(|&a| gcd(a, n) == 1).collect()
}

/// Kronecker symbol (a|n), the extension of the Jacobi symbol to all
/// integer n. Follows the classical algorithm (Cohen, Alg. 1.4.10).
pub fn kronecker(mut a: i64, mut n: i64) -> i32 {
    if n == 0 {
        return if a.unsigned_abs() == 1 { 1 } else { 0 };
    }
    if a % 2 == 0 && n % 2 == 0 {
        return 0;
    }
    // (a|2) table indexed by a mod 8
    const TAB2: [i32; 8] = [0, 1, 0, -1, 0, -1, 0, 1];
    let mut v = 0;
    while n % 2 == 0 {
        n /= 2;
        v += 1;
    }
    let mut k = if v % 2 == 0 {
        1
    } else {
        TAB2[(a.rem_euclid(8)) as usize]
    };
    if n < 0 {
        n = -n;
        if a < 0 {
            k = -k;
        }
    }
    loop {
        debug_assert!(n % 2 == 1 && n > 0);
        if a == 0 {
            return if n > 1 { 0 } else { k };
        }
        v = 0;
        while a % 2 == 0 {
            a /= 2;
            v += 1;
        }
        if v % 2 == 1 {
            k *= TAB2[(n.rem_euclid(8)) as usize];
        }
        // quadratic reciprocity for odd arguments
        if a.rem_euclid(4) == 3 && n.rem_euclid(4) == 3 {
            k = -k;
        }
        let r = a;
        a = n.rem_euclid(r.abs());
        n = r.abs();
    }
}

/// CRT lift: the residue mod m1*m2 congruent to r1 (m1) and r2 (m2),
/// for coprime moduli.
pub fn crt(r1: u64, m1: u64, r2: u64, m2: u64) -> u64 {
    debug_assert_eq!(gcd(m1, m2), 1);
    let m1i = inv_mod(m1 as i64, m2).expect("coprime moduli");
    let diff = (r2 as i128 - r1 as i128).rem_euclid(m2 as i128) as u64;
    r1 + m1 * (diff * m1i % m2)
}

/// Smallest primitive root mod p^e for odd prime p.
pub fn primitive_root(p: u64, e: u32) -> u64 {
    debug_assert!(p % 2 == 1 && is_prime(p));
    let qs = prime_divisors(p - 1);
    let mut g = 2;
    loop {
        if qs.iter().all(|&q| mod_pow(g, (p - 1) / q, p) != 1) {
            break;
        }
        g += 1;
    }
    if e >= 2 && mod_pow(g, p - 1, p * p) == 1 {
        g += p;
    }
    g
}

/// SplitMix64: a tiny deterministic PRNG used for reproducible sweeps in
/// tests and verification drivers.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, bound).
    pub fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        self.next_u64() % bound
    }

    /// Uniform in [lo, hi].
    pub fn range_i64(&mut self, lo: i64, hi: i64) -> i64 {
        debug_assert!(lo <= hi);
        lo + self.below((hi - lo + 1) as u64) as i64
    }
}
