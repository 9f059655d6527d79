//! Line-oriented coefficient file formats, shared with the CLI.
//!
//! Siegel data:
//!   genus=3
//!   level=1
//!   char=trivial
//!   maxtrace=10
//!   gram=[[2,1,0],[1,2,1],[0,1,2]] coeff=3/4
//!
//! Jacobi data:
//!   k=4
//!   index_gram=[[2,1],[1,2]]
//!   level=1
//!   char=trivial
//!   maxn=8
//!   n=1 r=[1,0] coeff=1
//!
//! Q-expansion:
//!   offset=-1/3 weight2=7 level=12 char=trivial
//!   exp=2 coeff=7
//!
//! Lines are whitespace-insensitive internally and round-trip exactly.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::forms::{JacobiFormData, SiegelFormData};
use super::qexp::{ExpansionMeta, QExpansion};
use crate::charsums::DirichletCharacter;
use crate::quadform::HalfIntegralMatrix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ParseError {}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

/// Split a line into key=value fields. Whitespace inside a line is
/// insignificant: spaces around '=' are dropped and tokens without '='
/// glue onto the previous value.
fn fields(line: &str) -> Vec<(String, String)> {
    // drop whitespace that touches an '=' so "level = 1" reads as one token
    let chars: Vec<char> = line.chars().collect();
    let mut cleaned = String::with_capacity(line.len());
    for (i, &c) in chars.iter().enumerate() {
        if c.is_whitespace() {
            let prev = cleaned.chars().next_back();
            let next = chars[i + 1..].iter().find(|ch| !ch.is_whitespace());
            if prev == Some('=') || next == Some(&'=') {
                continue;
            }
        }
        cleaned.push(c);
    }
    let mut out: Vec<(String, String)> = Vec::new();
    for token in cleaned.split_whitespace() {
        match token.split_once('=') {
            Some((k, v)) if !k.is_empty() => out.push((k.to_string(), v.to_string())),
            _ => {
                if let Some(last) = out.last_mut() {
                    last.1.push_str(token);
                }
            }
        }
    }
    out
}

pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse_rational(s: &str, line: usize) -> Result<BigRational, ParseError> {
    let parse_int = |t: &str| -> Result<BigInt, ParseError> {
        t.parse::<BigInt>()
            .map_err(|_| err(line, format!("bad integer '{t}'")))
    };
    match s.split_once('/') {
        None => Ok(BigRational::from_integer(parse_int(s)?)),
        Some((n, d)) => {
            let den = parse_int(d)?;
            if den.is_zero() {
                return Err(err(line, "zero denominator"));
            }
            Ok(BigRational::new(parse_int(n)?, den))
        }
    }
}

fn format_gram(t: &HalfIntegralMatrix) -> String {
    let mut s = String::from("[");
    for (i, row) in t.gram().iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push('[');
        for (j, x) in row.iter().enumerate() {
            if j > 0 {
                s.push(',');
            }
            let _ = write!(s, "{x}");
        }
        s.push(']');
    }
    s.push(']');
    s
}

fn parse_int_list(s: &str, line: usize) -> Result<Vec<BigInt>, ParseError> {
    let inner = s
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| err(line, format!("expected [..] list, got '{s}'")))?;
    if inner.is_empty() {
        return Ok(vec![]);
    }
    inner
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<BigInt>()
                .map_err(|_| err(line, format!("bad integer '{t}'")))
        })
        .collect()
}

fn parse_gram(s: &str, line: usize) -> Result<HalfIntegralMatrix, ParseError> {
    let inner = s
        .strip_prefix("[[")
        .and_then(|t| t.strip_suffix("]]"))
        .ok_or_else(|| err(line, format!("expected [[..],..], got '{s}'")))?;
    let rows: Result<Vec<Vec<BigInt>>, ParseError> = inner
        .split("],[")
        .map(|row| {
            row.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<BigInt>()
                        .map_err(|_| err(line, format!("bad integer '{t}'")))
                })
                .collect()
        })
        .collect();
    HalfIntegralMatrix::from_gram(rows?).map_err(|e| err(line, e.to_string()))
}

fn parse_char(label: &str, line: usize) -> Result<DirichletCharacter, ParseError> {
    DirichletCharacter::from_label(label).map_err(|e| err(line, e.to_string()))
}

fn format_int_list(v: &[BigInt]) -> String {
    let mut s = String::from("[");
    for (i, x) in v.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{x}");
    }
    s.push(']');
    s
}

// --- Siegel data ---

pub fn write_siegel(f: &SiegelFormData) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "genus={}", f.genus);
    let _ = writeln!(s, "level={}", f.level);
    let _ = writeln!(s, "char={}", f.character.label());
    let _ = writeln!(s, "maxtrace={}", f.max_trace);
    if let Some(w) = f.weight {
        let _ = writeln!(s, "weight={w}");
    }
    for (t, v) in f.iter() {
        let _ = writeln!(s, "gram={} coeff={}", format_gram(t), format_rational(v));
    }
    s
}

pub fn read_siegel(text: &str) -> Result<SiegelFormData, ParseError> {
    let mut genus = None;
    let mut level = None;
    let mut character = None;
    let mut max_trace = None;
    let mut weight = None;
    let mut records: Vec<(usize, HalfIntegralMatrix, BigRational)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let kv = fields(raw);
        if kv.is_empty() {
            return Err(err(ln, "unrecognized line"));
        }
        match kv[0].0.as_str() {
            "genus" => genus = Some(kv[0].1.parse::<usize>().map_err(|_| err(ln, "bad genus"))?),
            "level" => level = Some(kv[0].1.parse::<u64>().map_err(|_| err(ln, "bad level"))?),
            "char" => character = Some(parse_char(&kv[0].1, ln)?),
            "maxtrace" => {
                max_trace = Some(kv[0].1.parse::<u64>().map_err(|_| err(ln, "bad maxtrace"))?)
            }
            "weight" => weight = Some(kv[0].1.parse::<i64>().map_err(|_| err(ln, "bad weight"))?),
            "gram" => {
                let coeff = kv
                    .iter()
                    .find(|(k, _)| k == "coeff")
                    .ok_or_else(|| err(ln, "record missing coeff="))?;
                records.push((
                    ln,
                    parse_gram(&kv[0].1, ln)?,
                    parse_rational(&coeff.1, ln)?,
                ));
            }
            other => return Err(err(ln, format!("unknown key '{other}'"))),
        }
    }
    let genus = genus.ok_or_else(|| err(0, "missing genus="))?;
    let level = level.ok_or_else(|| err(0, "missing level="))?;
    let character = character.ok_or_else(|| err(0, "missing char="))?;
    let max_trace = max_trace.ok_or_else(|| err(0, "missing maxtrace="))?;
    let mut out = SiegelFormData::new(genus, level, character, max_trace);
    out.weight = weight;
    for (ln, t, v) in records {
        out.insert(t, v).map_err(|e| err(ln, e.to_string()))?;
    }
    Ok(out)
}

// --- Jacobi data ---

pub fn write_jacobi(f: &JacobiFormData) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "k={}", f.weight);
    let _ = writeln!(s, "index_gram={}", format_gram(&f.index));
    let _ = writeln!(s, "level={}", f.level);
    let _ = writeln!(s, "char={}", f.character.label());
    let _ = writeln!(s, "maxn={}", f.max_n);
    for (&(idx, l), v) in f.iter() {
        // the canonical representative is its own record carrier
        let mu = &f.cosets()[idx];
        let _ = writeln!(
            s,
            "n={} r={} coeff={}",
            l,
            format_int_list(mu),
            format_rational(v)
        );
    }
    s
}

pub fn read_jacobi(text: &str) -> Result<JacobiFormData, ParseError> {
    let mut weight = None;
    let mut index = None;
    let mut level = None;
    let mut character = None;
    let mut max_n = None;
    let mut records: Vec<(usize, u64, Vec<BigInt>, BigRational)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let kv = fields(raw);
        if kv.is_empty() {
            return Err(err(ln, "unrecognized line"));
        }
        match kv[0].0.as_str() {
            "k" => weight = Some(kv[0].1.parse::<i64>().map_err(|_| err(ln, "bad weight"))?),
            "index_gram" => index = Some(parse_gram(&kv[0].1, ln)?),
            "level" => level = Some(kv[0].1.parse::<u64>().map_err(|_| err(ln, "bad level"))?),
            "char" => character = Some(parse_char(&kv[0].1, ln)?),
            "maxn" => max_n = Some(kv[0].1.parse::<u64>().map_err(|_| err(ln, "bad maxn"))?),
            "n" => {
                let n = kv[0].1.parse::<u64>().map_err(|_| err(ln, "bad n"))?;
                let r = kv
                    .iter()
                    .find(|(k, _)| k == "r")
                    .ok_or_else(|| err(ln, "record missing r="))?;
                let coeff = kv
                    .iter()
                    .find(|(k, _)| k == "coeff")
                    .ok_or_else(|| err(ln, "record missing coeff="))?;
                records.push((
                    ln,
                    n,
                    parse_int_list(&r.1, ln)?,
                    parse_rational(&coeff.1, ln)?,
                ));
            }
            other => return Err(err(ln, format!("unknown key '{other}'"))),
        }
    }
    let weight = weight.ok_or_else(|| err(0, "missing k="))?;
    let index = index.ok_or_else(|| err(0, "missing index_gram="))?;
    let level = level.ok_or_else(|| err(0, "missing level="))?;
    let character = character.ok_or_else(|| err(0, "missing char="))?;
    let max_n = max_n.ok_or_else(|| err(0, "missing maxn="))?;
    let mut out = JacobiFormData::new(weight, index, level, character, max_n)
        .map_err(|e| err(0, e.to_string()))?;
    for (ln, n, r, v) in records {
        out.insert(n, &r, v).map_err(|e| err(ln, e.to_string()))?;
    }
    Ok(out)
}

// --- Q-expansions ---

pub fn write_qexpansion(f: &QExpansion) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "offset={} weight2={} level={} char={}",
        format_rational(f.offset()),
        f.meta.weight2,
        f.meta.level,
        f.meta.character
    );
    let _ = writeln!(s, "trunc={}", f.truncation());
    for (&l, v) in f.iter() {
        let _ = writeln!(s, "exp={} coeff={}", l, format_rational(v));
    }
    s
}

pub fn read_qexpansion(text: &str) -> Result<QExpansion, ParseError> {
    let mut header: Option<(BigRational, i64, u64, String)> = None;
    let mut trunc: Option<u64> = None;
    let mut records: Vec<(usize, u64, BigRational)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let kv = fields(raw);
        if kv.is_empty() {
            return Err(err(ln, "unrecognized line"));
        }
        match kv[0].0.as_str() {
            "offset" => {
                let get = |name: &str| -> Result<String, ParseError> {
                    kv.iter()
                        .find(|(k, _)| k == name)
                        .map(|(_, v)| v.clone())
                        .ok_or_else(|| err(ln, format!("header missing {name}=")))
                };
                header = Some((
                    parse_rational(&kv[0].1, ln)?,
                    get("weight2")?.parse().map_err(|_| err(ln, "bad weight2"))?,
                    get("level")?.parse().map_err(|_| err(ln, "bad level"))?,
                    get("char")?,
                ));
            }
            "trunc" => trunc = Some(kv[0].1.parse().map_err(|_| err(ln, "bad trunc"))?),
            "exp" => {
                let l = kv[0].1.parse::<u64>().map_err(|_| err(ln, "bad exp"))?;
                let coeff = kv
                    .iter()
                    .find(|(k, _)| k == "coeff")
                    .ok_or_else(|| err(ln, "record missing coeff="))?;
                records.push((ln, l, parse_rational(&coeff.1, ln)?));
            }
            other => return Err(err(ln, format!("unknown key '{other}'"))),
        }
    }
    let (offset, weight2, level, character) =
        header.ok_or_else(|| err(0, "missing header line"))?;
    let trunc = trunc
        .or_else(|| records.iter().map(|(_, l, _)| l + 1).max())
        .unwrap_or(1);
    let meta = ExpansionMeta::new(weight2, level, character);
    let mut out = QExpansion::new(offset, trunc, meta);
    for (ln, l, v) in records {
        if l >= out.truncation() {
            return Err(err(ln, "exponent beyond truncation"));
        }
        out.set_coeff(l, v);
    }
    Ok(out)
}
