//! Acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line (run with `cargo test --test acceptance -- --nocapture`
//! to see the lines on success).
//!
//! Every tolerance and threshold is pinned here, in code:
//!   1. rank sweep dmax = 105, zero failures, under 600 s single worker
//!   2. tensor factorization for d in {15, 21, 35, 105}, every split
//!   3. Gauss factorization sweep + 500 random complete-square tuples
//!   4. |G(a,0,c)|^2 = c exactly for odd square-free c <= 105
//!   5. theta laws at tolerance 1e-8, tail bounds below 1e-10
//!   6. decomposition round trip on 200 datasets; denominators up to 100
//!   7. Eichler--Zagier parity, exact, across the stated parameter grid
//!   8. sieve chain branch decisions and the a(n) = a(ell n) relation
//!   9. end-to-end hunt with --explain on a planted genus-3 fixture

use std::collections::BTreeMap;
use std::process::Command;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use fundam::arith::{gcd, gcd_i, is_squarefree, units_mod, SplitMix64};
use fundam::charsums::{complete_square_check, gauss_factor_check, gauss_sum, DirichletCharacter};
use fundam::epsmat::tensor_split_check;
use fundam::exactarith::CycNumber;
use fundam::jacobi::theta::{theta_s_law_check, theta_t_law_check, C64};
use fundam::jacobi::{JacobiFormData, SiegelFormData, SieveBranch};
use fundam::quadform::HalfIntegralMatrix;

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn big(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

fn report(criterion: u32, pass: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} - {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {detail}");
}

#[test]
fn criterion_1_rank_lemma_exhaustive() {
    let started = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_fundam"))
        .args(["rank-check", "--dmax", "105", "--tsv"])
        .output()
        .expect("binary runs");
    let elapsed = started.elapsed();
    let text = String::from_utf8_lossy(&out.stdout);
    let triples = text.lines().filter(|l| !l.starts_with('#')).count() - 1; // header
    let failures = text
        .lines()
        .filter(|l| !l.starts_with('#') && l.ends_with("false"))
        .count();
    let pass = out.status.success()
        && failures == 0
        && text.contains("#outcome\tpass")
        && elapsed.as_secs() < 600;
    report(
        1,
        pass,
        &format!(
            "rank lemma exhaustive at dmax=105: {triples} triples, {failures} failures, {:.1}s (budget 600s)",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_2_tensor_factorization() {
    let mut checks = 0usize;
    let mut failures = 0usize;
    for d in [15u64, 21, 35, 105] {
        for a in units_mod(d) {
            for s0 in 0..d as i64 {
                for p in fundam::arith::prime_divisors(d) {
                    checks += 1;
                    if !tensor_split_check(a as i64, d, s0, p).unwrap() {
                        failures += 1;
                    }
                }
            }
        }
    }
    report(
        2,
        failures == 0,
        &format!("tensor factorization entrywise-exact: {checks} checks, {failures} failures"),
    );
}

#[test]
fn criterion_3_gauss_sum_identities() {
    let mut factor_checks = 0usize;
    let mut failures = 0usize;
    for p in [3u64, 5, 7, 11, 13] {
        for n in [1i64, 5, 7, 11] {
            if gcd_i(n, 2 * p as i64) != 1 {
                continue;
            }
            for mu in 0..2 * p as i64 {
                for eta in 0..2 * p as i64 {
                    factor_checks += 1;
                    if !gauss_factor_check(p, n, mu, eta).unwrap() {
                        failures += 1;
                    }
                }
            }
        }
    }
    let mut square_checks = 0usize;
    let mut rng = SplitMix64::new(0x5eed);
    while square_checks < 500 {
        let d = rng.range_i64(1, 30) as u32;
        let m = rng.range_i64(1, 4 * d as i64);
        let n = rng.range_i64(1, 4 * d as i64);
        if gcd_i(m, 4 * d as i64) != 1 || gcd_i(n, 4 * d as i64) != 1 {
            continue;
        }
        let s = rng.range_i64(0, 2 * d as i64);
        let r = rng.range_i64(0, 2 * d as i64);
        square_checks += 1;
        if !complete_square_check(m, n, d, s, r).unwrap() {
            failures += 1;
        }
    }
    report(
        3,
        failures == 0,
        &format!(
            "gauss identities exact: {factor_checks} factorization checks + {square_checks} complete-square tuples, {failures} failures"
        ),
    );
}

#[test]
fn criterion_4_gauss_norms() {
    let mut checks = 0usize;
    let mut failures = 0usize;
    for c in (1..=105u32).filter(|&c| c % 2 == 1 && is_squarefree(c as u64)) {
        for a in units_mod(c as u64) {
            let a = if c == 1 { 1 } else { a } as i64;
            let g = gauss_sum(a, 0, c);
            let norm = g.mul_value(&g.conj());
            checks += 1;
            if norm.as_rational() != Some(rat(c as i64)) {
                failures += 1;
            }
        }
    }
    report(
        4,
        failures == 0,
        &format!("|G(a,0,c)|^2 = c exactly for odd square-free c <= 105: {checks} checks, {failures} failures"),
    );
}

#[test]
fn criterion_5_theta_transformation_laws() {
    let tol = 1e-8;
    let tail_target = 1e-10;
    let fixtures = [
        HalfIntegralMatrix::scalar(1),
        HalfIntegralMatrix::scalar(2),
        HalfIntegralMatrix::scalar(3),
        HalfIntegralMatrix::scalar(5),
        HalfIntegralMatrix::from_gram_i64(&[vec![2, 1], vec![1, 2]]).unwrap(),
        HalfIntegralMatrix::from_gram_i64(&[vec![2, 1], vec![1, 8]]).unwrap(),
        HalfIntegralMatrix::from_gram_i64(&[vec![4, 1], vec![1, 4]]).unwrap(),
    ];
    let taus = [
        C64::new(0.0, 1.0),
        C64::new(1.0, 2.0),
        C64::new(-0.5, 0.9),
        C64::new(0.3, 1.5),
        C64::new(2.0, 1.1),
    ];
    let z_at = |n: usize, i: usize| -> Vec<C64> {
        let zs1 = [(0.3, 0.2), (-0.1, 0.4), (0.25, -0.3), (0.0, 0.0), (-0.4, -0.2)];
        let zs2 = [
            (0.1, 0.05, -0.2, 0.1),
            (0.0, 0.2, 0.1, -0.1),
            (0.3, 0.0, 0.0, 0.15),
            (0.0, 0.0, 0.0, 0.0),
            (-0.15, 0.1, 0.2, 0.05),
        ];
        match n {
            1 => vec![C64::new(zs1[i].0, zs1[i].1)],
            _ => vec![C64::new(zs2[i].0, zs2[i].1), C64::new(zs2[i].2, zs2[i].3)],
        }
    };
    let mut checks = 0usize;
    let mut failures = 0usize;
    let mut max_dev = 0.0f64;
    for t in &fixtures {
        for mu in t.cosets().unwrap() {
            for (i, tau) in taus.iter().enumerate() {
                let z = z_at(t.size(), i);
                for law in 0..2 {
                    let c = if law == 0 {
                        theta_t_law_check(t, &mu, *tau, &z, tol, tail_target).unwrap()
                    } else {
                        theta_s_law_check(t, &mu, *tau, &z, tol, tail_target).unwrap()
                    };
                    checks += 1;
                    max_dev = max_dev.max(c.deviation);
                    if !c.pass || c.deviation > tol {
                        failures += 1;
                    }
                }
            }
        }
    }
    report(
        5,
        failures == 0,
        &format!(
            "theta laws at tol 1e-8 (tail bound < 1e-10): {checks} checks, max deviation {max_dev:.2e}, {failures} failures"
        ),
    );
}

/// Random positive definite index of size <= 2 with bounded discriminant.
fn random_index(rng: &mut SplitMix64, round: usize) -> HalfIntegralMatrix {
    if round % 2 == 0 {
        HalfIntegralMatrix::scalar(rng.range_i64(1, 15))
    } else {
        loop {
            let a = rng.range_i64(1, 3);
            let c = rng.range_i64(1, 3);
            let b = rng.range_i64(-2, 2);
            let t = HalfIntegralMatrix::from_gram_i64(&[vec![2 * a, b], vec![b, 2 * c]]).unwrap();
            let d = t.discriminant().unwrap();
            if t.is_positive_definite() && d <= BigInt::from(30) {
                return t;
            }
        }
    }
}

#[test]
fn criterion_6_decomposition_roundtrip_and_denominators() {
    // part 1: 200 synthetic datasets, exact reconstruction and planted
    // primitive recovery
    let mut rng = SplitMix64::new(0xdeca);
    let mut datasets = 0usize;
    while datasets < 200 {
        let t = random_index(&mut rng, datasets);
        let max_n = 6u64;
        let mut phi = JacobiFormData::new(
            4,
            t.clone(),
            1,
            DirichletCharacter::trivial(1),
            max_n,
        )
        .unwrap();
        let cosets = phi.cosets().to_vec();
        let mut planted: BTreeMap<(usize, u64), BigRational> = BTreeMap::new();
        let mut planted_primitive: Vec<Vec<BigInt>> = Vec::new();
        for (idx, mu) in cosets.iter().enumerate() {
            let floor = t
                .inv_form_value(mu)
                .unwrap()
                .ceil()
                .to_integer()
                .to_u64()
                .unwrap_or(u64::MAX);
            for l in floor..max_n {
                if rng.below(3) != 0 {
                    continue;
                }
                let v = rat(rng.range_i64(-9, 9));
                if v.is_zero() {
                    continue;
                }
                phi.insert(l, mu, v.clone()).unwrap();
                planted.insert((idx, l), v);
            }
            if planted.keys().any(|&(i, _)| i == idx) && t.is_primitive_mu(mu).unwrap() {
                planted_primitive.push(mu.clone());
            }
        }
        // decomposition reproduces the planted tables exactly
        let comps = phi.theta_decompose().unwrap();
        for (idx, (_mu, h)) in comps.iter().enumerate() {
            for l in 0..max_n {
                let expect = planted.get(&(idx, l)).cloned().unwrap_or_else(BigRational::zero);
                assert_eq!(h.coeff(l), expect);
            }
        }
        // reassembly reproduces every stored coefficient
        for (&(idx, l), v) in &planted {
            assert_eq!(&phi.coeff(l, &cosets[idx]).unwrap(), v);
        }
        // primitive recovery is exactly the planted primitive set
        assert_eq!(phi.primitive_components().unwrap(), planted_primitive);
        datasets += 1;
    }

    // part 2: maximal denominators for fundamental indices of size <= 3
    let mut indices: Vec<HalfIntegralMatrix> = Vec::new();
    for t in (1..=99i64).step_by(2) {
        if is_squarefree(t as u64) {
            indices.push(HalfIntegralMatrix::scalar(t));
        }
    }
    let mut seen = std::collections::BTreeSet::new();
    for a in 1..=13i64 {
        for c in a..=13 {
            for b in -13..=13i64 {
                if let Ok(t) =
                    HalfIntegralMatrix::from_gram_i64(&[vec![2 * a, b], vec![b, 2 * c]])
                {
                    if t.is_positive_definite()
                        && t.is_fundamental().unwrap()
                        && t.discriminant().unwrap() <= BigInt::from(100)
                        && seen.insert(t.key())
                    {
                        indices.push(t);
                    }
                }
            }
        }
    }
    for d0 in [2i64, 4, 6, 8] {
        for d1 in [2i64, 4, 6, 8] {
            for d2 in [2i64, 4, 6, 8] {
                for b01 in -2..=2i64 {
                    for b02 in -2..=2i64 {
                        for b12 in -2..=2i64 {
                            let gram = vec![
                                vec![d0, b01, b02],
                                vec![b01, d1, b12],
                                vec![b02, b12, d2],
                            ];
                            let t = HalfIntegralMatrix::from_gram_i64(&gram).unwrap();
                            if t.is_positive_definite()
                                && t.is_fundamental().unwrap()
                                && t.discriminant().unwrap() <= BigInt::from(100)
                                && seen.insert(t.key())
                            {
                                indices.push(t);
                            }
                        }
                    }
                }
            }
        }
    }
    let mut denom_checks = 0usize;
    for t in &indices {
        let d = t.discriminant().unwrap();
        let target = if t.size() % 2 == 0 {
            d.clone()
        } else {
            BigInt::from(4) * &d
        };
        let max = t
            .cosets()
            .unwrap()
            .iter()
            .map(|mu| t.mu_denominator(mu).unwrap())
            .max()
            .unwrap();
        assert_eq!(max, target, "gram {:?}", t.gram());
        denom_checks += 1;
    }
    report(
        6,
        true,
        &format!(
            "decomposition round trip on 200 datasets with primitive recovery; maximal denominator verified on {denom_checks} fundamental indices of sizes 1-3 with d_T <= 100"
        ),
    );
}

#[test]
fn criterion_7_eichler_zagier_parity() {
    let mut checks = 0usize;
    let mut skipped_hypothesis = 0usize;
    for k in 3i64..=10 {
        for chi_label in ["trivial", "legendre:5"] {
            for p in [5u64, 7] {
                for eps_label in ["trivial", &format!("legendre:{p}")] {
                    let chi = DirichletCharacter::from_label(chi_label).unwrap();
                    let level = chi.modulus();
                    let t = HalfIntegralMatrix::scalar(p as i64);
                    let mut phi =
                        JacobiFormData::new(k, t.clone(), level, chi.clone(), 10).unwrap();
                    let sym = chi.parity() * if k % 2 == 0 { 1 } else { -1 };
                    // symmetric synthetic data over every paired class
                    for mu in 1..p as i64 {
                        let l = 2u64;
                        let l_rat = rat(l as i64);
                        if &l_rat - t.inv_form_value(&big(&[mu])).unwrap() < BigRational::zero()
                        {
                            continue;
                        }
                        let base = rat(mu + 2);
                        phi.insert_i64(l, &[mu], base.clone()).unwrap();
                        let mirror = 2 * p as i64 - mu;
                        let shift = t.inv_form_value(&big(&[mirror])).unwrap()
                            - t.inv_form_value(&big(&[mu])).unwrap();
                        let n2 = (l_rat + shift).to_integer().to_u64().unwrap();
                        phi.insert_i64(n2, &[mirror], base * rat(sym)).unwrap();
                    }
                    // self-mirror classes carry data only when allowed
                    if sym == 1 {
                        phi.insert_i64(1, &[0], rat(1)).unwrap();
                    }
                    let eps = DirichletCharacter::from_label(eps_label).unwrap();
                    if gcd(2 * p, level) != 1 {
                        // the map's own hypothesis (2p, N) = 1 fails;
                        // the implementation must refuse
                        assert!(phi.ez_twist(&eps).is_err());
                        skipped_hypothesis += 1;
                        continue;
                    }
                    let h = phi.ez_twist(&eps).unwrap();
                    let mismatch = eps.parity() != sym;
                    assert_eq!(
                        h.is_zero(),
                        mismatch,
                        "k={k} chi={chi_label} eps={eps_label} p={p}"
                    );
                    checks += 1;
                }
            }
        }
    }
    report(
        7,
        true,
        &format!(
            "eichler-zagier parity exact on {checks} parameter combinations ({skipped_hypothesis} rejected by the (2p,N)=1 hypothesis)"
        ),
    );
}

#[test]
fn criterion_8_sieve_pipeline() {
    use fundam::jacobi::{ExpansionMeta, QExpansion};
    let make = |pairs: &[(u64, i64)], level: u64| -> QExpansion {
        let mut f = QExpansion::integral(40, ExpansionMeta::new(7, level, "trivial"));
        for &(n, c) in pairs {
            f.set_coeff(n, rat(c));
        }
        f
    };

    // fixture 1: sieve branch
    let f = make(&[(1, 1), (3, 1), (9, 1)], 4);
    let (g, steps) = f.sieve_chain(&[3]).unwrap();
    assert_eq!(steps[0].branch, SieveBranch::Sieve);
    assert_eq!(steps[0].level_after, 4 * 9);
    assert_eq!(steps[0].ell_after, 1);
    assert_eq!(g.coeff(1), rat(1));
    assert!(g.coeff(3).is_zero());

    // fixture 2: rescale branch, ell = 3, level / 3, character * eps_3
    let f = make(&[(3, 2), (9, -1)], 12);
    let (g, steps) = f.sieve_chain(&[3]).unwrap();
    assert_eq!(steps[0].branch, SieveBranch::Rescale);
    assert_eq!(steps[0].level_after, 4);
    assert_eq!(steps[0].character_after, "eps:3");
    assert_eq!(steps[0].ell_after, 3);
    for n in 0..13u64 {
        assert_eq!(g.coeff(n), f.coeff(3 * n));
    }

    // fixture 3: two-step chain, rescale then sieve
    let f = make(&[(3, 1), (9, 4), (15, -2)], 12);
    let (g, steps) = f.sieve_chain(&[3, 5]).unwrap();
    assert_eq!(steps[0].branch, SieveBranch::Rescale);
    assert_eq!(steps[1].branch, SieveBranch::Sieve);
    assert_eq!(steps[1].level_after, 4 * 25);
    assert_eq!(steps[1].character_after, "eps:3");
    let ell = steps[1].ell_after;
    assert_eq!(ell, 3);
    // surviving coefficients satisfy a_g(n) = a_f(ell n)
    assert_eq!(g.coeff(1), f.coeff(3));
    assert_eq!(g.coeff(3), f.coeff(9));
    assert!(g.coeff(5).is_zero()); // sieved away
    for (&n, v) in g.iter() {
        assert_eq!(*v, f.coeff(ell * n));
    }

    // multiplicative level bookkeeping across every step
    let f = make(&[(2, 1), (6, 1), (10, 1)], 8);
    let (_, steps) = f.sieve_chain(&[2, 3, 5]).unwrap();
    let mut level = 8u64;
    for s in &steps {
        match s.branch {
            SieveBranch::Sieve => level *= s.prime * s.prime,
            SieveBranch::Rescale => level /= s.prime,
        }
        assert_eq!(s.level_after, level);
    }
    report(
        8,
        true,
        "sieve chain branch decisions, a(n) = a(ell n) relation, and level/character bookkeeping verified on hand-computed fixtures",
    );
}

#[test]
fn criterion_9_end_to_end_hunt() {
    let dir = std::env::temp_dir().join(format!("fundam-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("planted.siegel");
    // genus-3 data: one fundamental coefficient (disc 5, coprime to N = 3)
    // above the fundamental block gram [[2,1],[1,2]], plus distractors
    std::fs::write(
        &path,
        "genus=3\nlevel=3\nchar=trivial\nmaxtrace=20\n\
         gram=[[4,1,0],[1,2,1],[0,1,2]] coeff=1\n\
         gram=[[2,0,0],[0,2,0],[0,0,2]] coeff=5\n\
         gram=[[6,1,1],[1,2,1],[1,1,2]] coeff=2\n",
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_fundam"))
        .args(["hunt", path.to_str().unwrap(), "--coprime-to", "3", "--explain"])
        .output()
        .expect("binary runs");
    let text = String::from_utf8_lossy(&out.stdout);
    // verify the planted fixture by hand: disc of the target is 5
    let target =
        HalfIntegralMatrix::from_gram_i64(&[vec![4, 1, 0], vec![1, 2, 1], vec![0, 1, 2]]).unwrap();
    assert_eq!(target.discriminant().unwrap(), BigInt::from(5));
    let pass = out.status.success()
        && text.contains("disc 5")
        && text.contains("extract:")
        && text.contains("decompose:")
        && text.contains("primitive components")
        && text.contains("odd square-free support coprime to 3 across primitive components: [5]");
    // the siegel data itself confirms the trace endpoint
    let f = fundam::jacobi::io::read_siegel(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let found = f.hunt_fundamental(3).unwrap().found;
    assert!(found.iter().any(|t| t == &target));
    report(
        9,
        pass,
        "hunt --explain produces the extract -> decompose -> primitive -> odd-square-free trace ending in a fundamental disc coprime to N",
    );
}
