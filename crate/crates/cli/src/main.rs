//! Batch verification and pipeline driver for the exact Fourier
//! coefficient machinery: Gauss-sum identities, epsilon-matrix rank
//! sweeps, theta transformation laws, theta decomposition, the twisted
//! Eichler--Zagier map, coefficient sieving, and the
//! fundamental-coefficient hunt.

mod report;

use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use num_traits::ToPrimitive;

use fundam::arith::{gcd_i, inv_mod, is_squarefree};
use fundam::charsums::{gauss_sum, DirichletCharacter};
use fundam::epsmat::{rank_lemma_sweep, EpsCase};
use fundam::exactarith::CycNumber;
use fundam::jacobi::io;
use fundam::jacobi::theta::{theta_s_law_check, theta_t_law_check, C64};
use fundam::quadform::HalfIntegralMatrix;

use report::{Outcome, Report};

const USAGE: &str = "\
usage: fundam <subcommand> [args]

subcommands:
  gauss <a> <b> <c> [--closed-form-check] [--tsv]
      exact generalized quadratic Gauss sum G(a,b,c) and its embedding
  rank-check --dmax <D> [--case lemma|odd|even] [--jobs <J>] [--tsv]
      verify the epsilon-matrix rank over all odd square-free d <= D
  theta-check [--fixtures <spec;...>] [--tol <x>] [--tsv]
      two-sided theta transformation-law checks on the fixture set
  decompose <jacobi-file> [--outdir <dir>] [--tsv]
      theta components as q-expansion files, with reassembly check
  ez <jacobi-file> --eps <char> [--out <file>] [--tsv]
      twisted Eichler--Zagier map to a half-integral-weight expansion
  hunt <siegel-file> --coprime-to <N> [--explain] [--tsv]
      fundamental coefficients with discriminant coprime to N
  sieve <qexp-file> --primes <p1,p2,...> [--out <file>] [--tsv]
      sieve/rescale chain with level and character bookkeeping

character specs: trivial | legendre:p | eps:p | kronecker:d, joined by *
theta fixtures:  T=<t> or T=[[..],[..]] (gram), separated by ';'
exit codes: 0 pass, 1 fail, 2 inconclusive, 3 usage or input error
";

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

struct Args {
    positional: Vec<String>,
    values: HashMap<String, String>,
    switches: HashSet<String>,
}

const BOOL_FLAGS: &[&str] = &["closed-form-check", "explain", "tsv"];

fn parse_args(tokens: &[String]) -> Result<Args, UsageError> {
    let mut positional = Vec::new();
    let mut values = HashMap::new();
    let mut switches = HashSet::new();
    let mut i = 0;
    while i < tokens.len() {
        let t = &tokens[i];
        if let Some(name) = t.strip_prefix("--") {
            if BOOL_FLAGS.contains(&name) {
                switches.insert(name.to_string());
            } else {
                let value = tokens
                    .get(i + 1)
                    .ok_or_else(|| usage(format!("flag --{name} needs a value")))?;
                values.insert(name.to_string(), value.clone());
                i += 1;
            }
        } else {
            positional.push(t.clone());
        }
        i += 1;
    }
    Ok(Args {
        positional,
        values,
        switches,
    })
}

impl Args {
    fn value<T: std::str::FromStr>(&self, name: &str) -> Result<Option<T>, UsageError> {
        match self.values.get(name) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|_| usage(format!("cannot parse --{name} value '{raw}'"))),
        }
    }

    fn require<T: std::str::FromStr>(&self, name: &str) -> Result<T, UsageError> {
        self.value(name)?
            .ok_or_else(|| usage(format!("missing required flag --{name}")))
    }
}

fn main() -> ExitCode {
    let tokens: Vec<String> = std::env::args().skip(1).collect();
    let Some((sub, rest)) = tokens.split_first() else {
        eprint!("{USAGE}");
        return ExitCode::from(3);
    };
    let args = match parse_args(rest) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    };
    let tsv = args.switches.contains("tsv");
    let started = Instant::now();
    let result = match sub.as_str() {
        "gauss" => cmd_gauss(&args),
        "rank-check" => cmd_rank_check(&args),
        "theta-check" => cmd_theta_check(&args),
        "decompose" => cmd_decompose(&args),
        "ez" => cmd_ez(&args),
        "hunt" => cmd_hunt(&args),
        "sieve" => cmd_sieve(&args),
        "help" | "--help" | "-h" => {
            print!("{USAGE}");
            return ExitCode::from(0);
        }
        other => {
            eprintln!("error: unknown subcommand '{other}'\n{USAGE}");
            return ExitCode::from(3);
        }
    };
    match result {
        Ok(mut report) => {
            report.elapsed = started.elapsed();
            print!("{}", report.render(tsv));
            ExitCode::from(report.outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}

// --- gauss ---

fn cmd_gauss(args: &Args) -> Result<Report, UsageError> {
    if args.positional.len() != 3 {
        return Err(usage("gauss needs exactly three integers: a b c"));
    }
    let parse = |s: &str| {
        s.parse::<i64>()
            .map_err(|_| usage(format!("bad integer '{s}'")))
    };
    let a = parse(&args.positional[0])?;
    let b = parse(&args.positional[1])?;
    let c = parse(&args.positional[2])?;
    if c < 1 {
        return Err(usage("modulus c must be positive"));
    }
    let c = c as u32;
    let g = gauss_sum(a, b, c);
    let mut report = Report::new("gauss");
    report.param("a", a);
    report.param("b", b);
    report.param("c", c);
    report.headers = vec!["quantity".into(), "value".into()];
    report.row(vec!["G(a,b,c)".into(), g.to_string()]);
    report.row(vec!["embedding".into(), g.embed().to_string()]);

    if args.switches.contains("closed-form-check") {
        let mut all_ok = true;
        if gcd_i(a, c as i64) == 1 && b % 2 == 0 {
            // completing the square: G(a, 2e, c) = G(a,0,c) zeta_c^{-abar e^2}
            let abar = inv_mod(a, c as u64).expect("a invertible") as i128;
            let e = (b / 2) as i128;
            let phase =
                CycNumber::root_of_unity((-abar * e * e).rem_euclid(c as i128) as i64, c);
            let rhs = gauss_sum(a, 0, c).mul_value(&phase);
            let ok = g == rhs;
            all_ok &= ok;
            report.row(vec![
                "complete-square identity".into(),
                if ok { "holds exactly".into() } else { "VIOLATED".to_string() },
            ]);
        }
        if b == 0 && c % 2 == 1 && is_squarefree(c as u64) && gcd_i(a, c as i64) == 1 {
            let norm = g.mul_value(&g.conj());
            let ok = norm.as_rational() == Some(fundam::Rat::from_integer(c.into()));
            all_ok &= ok;
            report.row(vec![
                "norm identity |G|^2 = c".into(),
                if ok { "holds exactly".into() } else { "VIOLATED".to_string() },
            ]);
        }
        report.outcome = if all_ok { Outcome::Pass } else { Outcome::Fail };
    }
    Ok(report)
}

// --- rank-check ---

fn cmd_rank_check(args: &Args) -> Result<Report, UsageError> {
    let dmax: u64 = args.require("dmax")?;
    if dmax < 1 {
        return Err(usage("--dmax must be at least 1"));
    }
    let case = match args.values.get("case").map(|s| s.as_str()).unwrap_or("lemma") {
        "lemma" => EpsCase::Lemma,
        "odd" => EpsCase::Odd,
        "even" => EpsCase::Even,
        other => return Err(usage(format!("unknown case '{other}'"))),
    };
    let jobs: usize = args.value("jobs")?.unwrap_or(1);
    let reports = rank_lemma_sweep(dmax, case, jobs.max(1))
        .map_err(|e| usage(format!("sweep failed: {e}")))?;
    let mut report = Report::new("rank-check");
    report.param("dmax", dmax);
    report.param("case", format!("{case:?}").to_lowercase());
    report.param("jobs", jobs.max(1));
    report.headers = vec![
        "d".into(),
        "a".into(),
        "s0".into(),
        "rows".into(),
        "cols".into(),
        "rank".into(),
        "expected".into(),
        "pass".into(),
    ];
    let mut failures = 0usize;
    for r in &reports {
        if !r.pass {
            failures += 1;
        }
        report.row(vec![
            r.d.to_string(),
            r.a.to_string(),
            r.s0.to_string(),
            r.rows.to_string(),
            r.cols.to_string(),
            r.rank.to_string(),
            r.expected.to_string(),
            r.pass.to_string(),
        ]);
    }
    report.note(format!("{} triples, {} failures", reports.len(), failures));
    report.outcome = if failures == 0 { Outcome::Pass } else { Outcome::Fail };
    Ok(report)
}

// --- theta-check ---

fn default_fixtures() -> Vec<HalfIntegralMatrix> {
    vec![
        HalfIntegralMatrix::scalar(1),
        HalfIntegralMatrix::scalar(2),
        HalfIntegralMatrix::scalar(3),
        HalfIntegralMatrix::scalar(5),
        HalfIntegralMatrix::from_gram_i64(&[vec![2, 1], vec![1, 2]]).unwrap(),
        HalfIntegralMatrix::from_gram_i64(&[vec![2, 1], vec![1, 8]]).unwrap(),
        HalfIntegralMatrix::from_gram_i64(&[vec![4, 1], vec![1, 4]]).unwrap(),
    ]
}

fn parse_fixture(spec: &str) -> Result<HalfIntegralMatrix, UsageError> {
    let body = spec
        .trim()
        .strip_prefix("T=")
        .ok_or_else(|| usage(format!("fixture spec '{spec}' must start with T=")))?;
    if let Ok(t) = body.parse::<i64>() {
        if t < 1 {
            return Err(usage("scalar fixture index must be positive"));
        }
        return Ok(HalfIntegralMatrix::scalar(t));
    }
    let inner = body
        .strip_prefix("[[")
        .and_then(|s| s.strip_suffix("]]"))
        .ok_or_else(|| usage(format!("cannot parse fixture '{spec}'")))?;
    let rows: Result<Vec<Vec<i64>>, UsageError> = inner
        .split("],[")
        .map(|row| {
            row.split(',')
                .map(|x| {
                    x.trim()
                        .parse::<i64>()
                        .map_err(|_| usage(format!("bad integer in fixture '{spec}'")))
                })
                .collect()
        })
        .collect();
    HalfIntegralMatrix::from_gram_i64(&rows?).map_err(|e| usage(e.to_string()))
}

/// Five sample points per fixture size.
fn sample_points(n: usize) -> Vec<(C64, Vec<C64>)> {
    let taus = [
        C64::new(0.0, 1.0),
        C64::new(1.0, 2.0),
        C64::new(-0.5, 0.9),
        C64::new(0.3, 1.5),
        C64::new(2.0, 1.1),
    ];
    let zs1 = [
        (0.3, 0.2),
        (-0.1, 0.4),
        (0.25, -0.3),
        (0.0, 0.0),
        (-0.4, -0.2),
    ];
    let zs2 = [
        (0.1, 0.05, -0.2, 0.1),
        (0.0, 0.2, 0.1, -0.1),
        (0.3, 0.0, 0.0, 0.15),
        (0.0, 0.0, 0.0, 0.0),
        (-0.15, 0.1, 0.2, 0.05),
    ];
    (0..5)
        .map(|i| {
            let z = match n {
                1 => vec![C64::new(zs1[i].0, zs1[i].1)],
                _ => vec![C64::new(zs2[i].0, zs2[i].1), C64::new(zs2[i].2, zs2[i].3)],
            };
            (taus[i], z)
        })
        .collect()
}

fn cmd_theta_check(args: &Args) -> Result<Report, UsageError> {
    let tol: f64 = args.value("tol")?.unwrap_or(1e-8);
    let fixtures = match args.values.get("fixtures") {
        None => default_fixtures(),
        Some(spec) => spec
            .split(';')
            .map(parse_fixture)
            .collect::<Result<Vec<_>, _>>()?,
    };
    let tail_target = 1e-10;
    let mut report = Report::new("theta-check");
    report.param("tol", tol);
    report.param("fixtures", fixtures.len());
    report.headers = vec![
        "fixture".into(),
        "mu".into(),
        "point".into(),
        "law".into(),
        "deviation".into(),
        "errbound".into(),
        "pass".into(),
    ];
    let mut failures = 0usize;
    let mut max_dev = 0.0f64;
    for t in &fixtures {
        let label = format_gram_i64(t);
        let cosets = t.cosets().map_err(|e| usage(e.to_string()))?;
        let points = sample_points(t.size());
        for mu in &cosets {
            let mu_label = format!(
                "{:?}",
                mu.iter().map(|x| x.to_i64().unwrap()).collect::<Vec<_>>()
            );
            for (pi, (tau, z)) in points.iter().enumerate() {
                for law in ["T", "S"] {
                    let check = if law == "T" {
                        theta_t_law_check(t, mu, *tau, z, tol, tail_target)
                    } else {
                        theta_s_law_check(t, mu, *tau, z, tol, tail_target)
                    }
                    .map_err(|e| usage(format!("theta check failed: {e}")))?;
                    // the CLI gate is the user's tolerance alone; the
                    // propagated bounds are reported alongside
                    let row_pass = check.deviation <= tol;
                    if !row_pass {
                        failures += 1;
                    }
                    max_dev = max_dev.max(check.deviation);
                    report.row(vec![
                        label.clone(),
                        mu_label.clone(),
                        pi.to_string(),
                        law.into(),
                        format!("{:.3e}", check.deviation),
                        format!("{:.3e}", check.err_total),
                        row_pass.to_string(),
                    ]);
                }
            }
        }
    }
    report.note(format!(
        "max deviation {max_dev:.3e}, tail bound target {tail_target:.1e}"
    ));
    report.outcome = if failures == 0 { Outcome::Pass } else { Outcome::Fail };
    Ok(report)
}

// --- decompose ---

fn read_to_string(path: &str) -> Result<String, UsageError> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read '{path}': {e}")))
}

fn stem_of(path: &str) -> (PathBuf, String) {
    let p = Path::new(path);
    let dir = p.parent().map(|d| d.to_path_buf()).unwrap_or_default();
    let stem = p
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_string());
    (dir, stem)
}

fn cmd_decompose(args: &Args) -> Result<Report, UsageError> {
    let path = args
        .positional
        .first()
        .ok_or_else(|| usage("decompose needs a jacobi data file"))?;
    let text = read_to_string(path)?;
    let phi = io::read_jacobi(&text).map_err(|e| usage(format!("{path}: {e}")))?;
    let (dir, stem) = stem_of(path);
    let outdir = args.values.get("outdir").map(PathBuf::from).unwrap_or(dir);
    let components = phi
        .theta_decompose()
        .map_err(|e| usage(format!("decomposition failed: {e}")))?;

    let mut report = Report::new("decompose");
    report.param("input", path);
    report.headers = vec![
        "mu".into(),
        "offset".into(),
        "nonzero".into(),
        "file".into(),
    ];
    let mut rebuilt = fundam::jacobi::JacobiFormData::new(
        phi.weight,
        phi.index.clone(),
        phi.level,
        phi.character.clone(),
        phi.max_n,
    )
    .map_err(|e| usage(e.to_string()))?;
    for (idx, (mu, h)) in components.iter().enumerate() {
        let fname = outdir.join(format!("{stem}.mu{idx}.qexp"));
        std::fs::write(&fname, io::write_qexpansion(h))
            .map_err(|e| usage(format!("cannot write '{}': {e}", fname.display())))?;
        for (&l, v) in h.iter() {
            rebuilt
                .insert(l, mu, v.clone())
                .map_err(|e| usage(format!("reassembly failed: {e}")))?;
        }
        report.row(vec![
            format!("{:?}", mu.iter().map(|x| x.to_i64().unwrap()).collect::<Vec<_>>()),
            io::format_rational(h.offset()),
            h.iter().count().to_string(),
            fname.display().to_string(),
        ]);
    }
    // reassembly must reproduce the input byte for byte (canonical form)
    let identical = io::write_jacobi(&rebuilt) == io::write_jacobi(&phi);
    report.note(format!("reassembly byte-identical: {identical}"));
    report.outcome = if identical { Outcome::Pass } else { Outcome::Fail };
    Ok(report)
}

// --- ez ---

fn cmd_ez(args: &Args) -> Result<Report, UsageError> {
    let path = args
        .positional
        .first()
        .ok_or_else(|| usage("ez needs a jacobi data file"))?;
    let eps_label: String = args.require("eps")?;
    let eps =
        DirichletCharacter::from_label(&eps_label).map_err(|e| usage(format!("--eps: {e}")))?;
    let text = read_to_string(path)?;
    let phi = io::read_jacobi(&text).map_err(|e| usage(format!("{path}: {e}")))?;
    let h = phi
        .ez_twist(&eps)
        .map_err(|e| usage(format!("eichler-zagier map failed: {e}")))?;

    let (dir, stem) = stem_of(path);
    let out_path = match args.values.get("out") {
        Some(p) => PathBuf::from(p),
        None => dir.join(format!("{stem}.ez.qexp")),
    };
    std::fs::write(&out_path, io::write_qexpansion(&h))
        .map_err(|e| usage(format!("cannot write '{}': {e}", out_path.display())))?;

    // parity bookkeeping: on symmetric data the map vanishes identically
    // iff eps(-1) != chi(-1)(-1)^k
    let eps_parity = eps.parity();
    let rhs_parity = phi.character.parity() * if phi.weight % 2 == 0 { 1 } else { -1 };
    let mut report = Report::new("ez");
    report.param("input", path);
    report.param("eps", &eps_label);
    report.headers = vec!["quantity".into(), "value".into()];
    report.row(vec!["eps(-1)".into(), eps_parity.to_string()]);
    report.row(vec!["chi(-1)(-1)^k".into(), rhs_parity.to_string()]);
    report.row(vec![
        "parity match".into(),
        (eps_parity == rhs_parity).to_string(),
    ]);
    report.row(vec!["output zero".into(), h.is_zero().to_string()]);
    report.row(vec!["weight2".into(), h.meta.weight2.to_string()]);
    report.row(vec!["level".into(), h.meta.level.to_string()]);
    report.row(vec!["character".into(), h.meta.character.clone()]);
    report.row(vec!["file".into(), out_path.display().to_string()]);
    if h.is_zero() {
        report.note(if eps_parity != rhs_parity {
            "zero output: parity mismatch forces vanishing"
        } else {
            "zero output despite matching parity (data may be truncated)"
        });
    }
    report.outcome = Outcome::Pass;
    Ok(report)
}

// --- hunt ---

fn cmd_hunt(args: &Args) -> Result<Report, UsageError> {
    let path = args
        .positional
        .first()
        .ok_or_else(|| usage("hunt needs a siegel data file"))?;
    let coprime_to: u64 = args.require("coprime-to")?;
    let text = read_to_string(path)?;
    let f = io::read_siegel(&text).map_err(|e| usage(format!("{path}: {e}")))?;

    let mut report = Report::new("hunt");
    report.param("input", path);
    report.param("coprime-to", coprime_to);
    report.headers = vec!["gram".into(), "disc".into()];

    let explain = args.switches.contains("explain");
    let (outcome, steps, support) = if explain {
        let trace = f
            .hunt_explain(coprime_to)
            .map_err(|e| usage(format!("hunt failed: {e}")))?;
        (trace.outcome, trace.steps, trace.support)
    } else {
        let outcome = f
            .hunt_fundamental(coprime_to)
            .map_err(|e| usage(format!("hunt failed: {e}")))?;
        (outcome, vec![], vec![])
    };
    for t in &outcome.found {
        report.row(vec![
            format_gram_i64(t),
            t.discriminant().map_err(|e| usage(e.to_string()))?.to_string(),
        ]);
    }
    for step in &steps {
        report.note(step.clone());
    }
    if explain && !support.is_empty() {
        report.note(format!("pipeline support: {support:?}"));
    }
    report.outcome = match outcome.inconclusive_reason() {
        None => Outcome::Pass,
        Some(reason) => {
            report.note(format!("inconclusive: {reason}"));
            Outcome::Inconclusive
        }
    };
    Ok(report)
}

fn format_gram_i64(t: &HalfIntegralMatrix) -> String {
    format!(
        "{:?}",
        t.gram()
            .iter()
            .map(|row| row.iter().map(|x| x.to_i64().unwrap()).collect::<Vec<_>>())
            .collect::<Vec<_>>()
    )
}

// --- sieve ---

fn cmd_sieve(args: &Args) -> Result<Report, UsageError> {
    let path = args
        .positional
        .first()
        .ok_or_else(|| usage("sieve needs a q-expansion file"))?;
    let primes_spec: String = args.require("primes")?;
    let primes: Result<Vec<u64>, UsageError> = primes_spec
        .split(',')
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .map_err(|_| usage(format!("bad prime '{s}'")))
        })
        .collect();
    let primes = primes?;
    if let Some(p) = primes.iter().find(|&&p| !fundam::arith::is_prime(p)) {
        return Err(usage(format!("{p} is not prime")));
    }
    let text = read_to_string(path)?;
    let f = io::read_qexpansion(&text).map_err(|e| usage(format!("{path}: {e}")))?;

    let mut report = Report::new("sieve");
    report.param("input", path);
    report.param("primes", &primes_spec);
    report.headers = vec![
        "step".into(),
        "prime".into(),
        "branch".into(),
        "level".into(),
        "char".into(),
        "ell".into(),
    ];
    match f.sieve_chain(&primes) {
        Ok((g, steps)) => {
            for (i, s) in steps.iter().enumerate() {
                report.row(vec![
                    i.to_string(),
                    s.prime.to_string(),
                    s.branch.to_string(),
                    s.level_after.to_string(),
                    s.character_after.clone(),
                    s.ell_after.to_string(),
                ]);
            }
            let (dir, stem) = stem_of(path);
            let out_path = match args.values.get("out") {
                Some(p) => PathBuf::from(p),
                None => dir.join(format!("{stem}.sieved.qexp")),
            };
            std::fs::write(&out_path, io::write_qexpansion(&g))
                .map_err(|e| usage(format!("cannot write '{}': {e}", out_path.display())))?;
            report.note(format!("output: {}", out_path.display()));
            if g.is_zero() {
                report.note("sieved expansion is zero");
            }
            report.outcome = Outcome::Pass;
        }
        Err(e) => {
            report.row(vec![
                "-".into(),
                "-".into(),
                "error".into(),
                "-".into(),
                e.to_string(),
                "-".into(),
            ]);
            report.outcome = Outcome::Fail;
        }
    }
    Ok(report)
}
