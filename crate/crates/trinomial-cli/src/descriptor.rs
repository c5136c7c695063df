//! The algebra-descriptor document: a TOML file with keys `kind`, `m`,
//! `blocks`, and `a`.
//!
//! ```toml
//! kind = "type2"
//! m = 0
//! blocks = [[2], [2, 1], [4]]
//! a = [[0, -1, 1], [1, -1, 0]]
//! ```
//!
//! `blocks` lists each block's exponent tuple. For type 1, `a` holds one
//! scalar per block; for type 2 it is the two-row matrix whose columns
//! drive the determinantal relations. Rationals are written as integers or
//! `"p/q"` strings. [`render`] emits the same format, and parsing the
//! rendering returns the original data exactly.

use crate::CliError;
use num::{BigInt, BigRational, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::str::FromStr;
use toml::Value;
use trinomial::model::{Column, TrinomialData, TrinomialKind};
use trinomial::polyring::render_rational;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDescriptor {
    kind: String,
    m: usize,
    blocks: Vec<Vec<i64>>,
    a: Value,
}

#[derive(Serialize)]
struct RawOut<'a> {
    kind: &'a str,
    m: usize,
    blocks: Vec<Vec<u32>>,
    a: Value,
}

pub fn parse(text: &str) -> Result<TrinomialData, CliError> {
    let raw: RawDescriptor = toml::from_str(text).map_err(|e| from_toml(text, e))?;
    let mut blocks = Vec::with_capacity(raw.blocks.len());
    for row in &raw.blocks {
        let mut out = Vec::with_capacity(row.len());
        for &e in row {
            if !(0..=i64::from(u32::MAX)).contains(&e) {
                return Err(at_literal(
                    text,
                    &e.to_string(),
                    format!("block exponent {e} is out of range"),
                ));
            }
            out.push(e as u32);
        }
        blocks.push(out);
    }
    let built = match raw.kind.as_str() {
        "type1" => {
            let entries = rational_array(text, &raw.a)?;
            if entries.len() != blocks.len() {
                return Err(CliError::Input(format!(
                    "`a` lists {} scalars but there are {} blocks",
                    entries.len(),
                    blocks.len()
                )));
            }
            TrinomialData::type1(blocks, entries, raw.m)
        }
        "type2" => {
            let rows = raw.a.as_array().ok_or_else(|| {
                CliError::Input("`a` must be a two-row rational matrix for type2".into())
            })?;
            if rows.len() != 2 {
                return Err(CliError::Input(format!(
                    "`a` must have exactly 2 rows for type2, found {}",
                    rows.len()
                )));
            }
            let top = rational_array(text, &rows[0])?;
            let bottom = rational_array(text, &rows[1])?;
            if top.len() != blocks.len() || bottom.len() != blocks.len() {
                return Err(CliError::Input(format!(
                    "each row of `a` needs one entry per block ({}), found {} and {}",
                    blocks.len(),
                    top.len(),
                    bottom.len()
                )));
            }
            let columns: Vec<Column> =
                top.into_iter().zip(bottom).map(|(x, y)| [x, y]).collect();
            TrinomialData::type2(blocks, columns, raw.m)
        }
        other => {
            return Err(at_literal(
                text,
                &format!("\"{other}\""),
                format!("unknown kind `{other}`; expected \"type1\" or \"type2\""),
            ))
        }
    };
    built.map_err(|e| CliError::Input(format!("descriptor shape: {e}")))
}

/// Emits the canonical descriptor text of the data.
pub fn render(data: &TrinomialData) -> String {
    let blocks: Vec<Vec<u32>> = data.block_labels().map(|l| data.l(l).to_vec()).collect();
    let (kind, a) = match data.kind() {
        TrinomialKind::Type1 => {
            let scalars: Vec<Value> =
                data.block_labels().map(|l| rational_out(data.scalar(l))).collect();
            ("type1", Value::Array(scalars))
        }
        TrinomialKind::Type2 => {
            let row = |i: usize| {
                Value::Array(
                    data.block_labels().map(|l| rational_out(&data.column(l)[i])).collect(),
                )
            };
            ("type2", Value::Array(vec![row(0), row(1)]))
        }
    };
    let out = RawOut { kind, m: data.m(), blocks, a };
    toml::to_string(&out).expect("descriptor serializes")
}

/// Parses `p`, `-p`, or `p/q` (nonzero `q`) into an exact rational.
pub fn parse_rational_str(s: &str) -> Result<BigRational, String> {
    let trimmed = s.trim();
    let (num, den) = match trimmed.split_once('/') {
        None => (trimmed, "1"),
        Some((n, d)) => (n.trim(), d.trim()),
    };
    let part =
        |p: &str| BigInt::from_str(p).map_err(|_| format!("malformed rational `{s}`"));
    let n = part(num)?;
    let d = part(den)?;
    if d.is_zero() {
        return Err(format!("zero denominator in `{s}`"));
    }
    Ok(BigRational::new(n, d))
}

fn rational_array(text: &str, v: &Value) -> Result<Vec<BigRational>, CliError> {
    let entries = v
        .as_array()
        .ok_or_else(|| CliError::Input("`a` entries must form an array".into()))?;
    entries.iter().map(|entry| rational(text, entry)).collect()
}

fn rational(text: &str, v: &Value) -> Result<BigRational, CliError> {
    match v {
        Value::Integer(i) => Ok(BigRational::from_integer(BigInt::from(*i))),
        Value::String(s) => {
            parse_rational_str(s).map_err(|m| at_literal(text, &format!("\"{s}\""), m))
        }
        other => Err(CliError::Input(format!(
            "rational entries must be integers or \"p/q\" strings, found `{other}`"
        ))),
    }
}

fn rational_out(x: &BigRational) -> Value {
    if x.is_integer() {
        if let Some(i) = x.numer().to_i64() {
            return Value::Integer(i);
        }
    }
    Value::String(render_rational(x))
}

fn from_toml(text: &str, e: toml::de::Error) -> CliError {
    let (line, column) = e.span().map_or((1, 1), |s| location(text, s.start));
    CliError::Parse { line, column, message: e.message().to_string() }
}

fn at_literal(text: &str, needle: &str, message: String) -> CliError {
    let (line, column) = text.find(needle).map_or((1, 1), |off| location(text, off));
    CliError::Parse { line, column, message }
}

/// 1-based line and character column of a byte offset.
fn location(text: &str, offset: usize) -> (usize, usize) {
    let prefix = &text[..offset.min(text.len())];
    let line = prefix.matches('\n').count() + 1;
    let column = prefix.rsplit('\n').next().map_or(0, |tail| tail.chars().count()) + 1;
    (line, column)
}
