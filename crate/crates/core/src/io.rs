//! Deterministic JSON and CSV serialization.
//!
//! All numeric output uses 17-significant-digit scientific notation, which
//! round-trips f64 exactly; re-serializing a parsed file reproduces it byte
//! for byte. Parsing goes through `serde_json`.

use std::fmt::Write as _;

use num_complex::Complex64 as C64;
use serde_json::Value;

use crate::block::BlockOperator;
use crate::error::{Error, Result};
use crate::keyrates::{CqClosenessReport, EdBoundReport, ProtocolPoint};
use crate::lemmas::LemmaReport;
use crate::matrix::ComplexMatrix;
use crate::shape::{Party, Shape};
use crate::twist::ClosenessReport;

/// 17-significant-digit decimal form of an f64 (exact round trip).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_complex_data(out: &mut String, data: &[C64]) {
    out.push('[');
    for (i, z) in data.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "[{},{}]", fmt_f64(z.re), fmt_f64(z.im));
    }
    out.push(']');
}

fn write_parties(out: &mut String, shape: Option<&Shape>) {
    out.push('[');
    if let Some(shape) = shape {
        for (i, p) in shape.parties().iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{{\"key\":{},\"shield\":{}}}", p.key_dim, p.shield_dim);
        }
    }
    out.push(']');
}

/// Matrix file: `{"dim":…,"parties":[…],"data":[[re,im],…]}`, row-major.
pub fn matrix_to_json(m: &ComplexMatrix) -> String {
    let mut out = String::new();
    let _ = write!(out, "{{\"dim\":{},\"parties\":", m.dim());
    write_parties(&mut out, m.shape());
    out.push_str(",\"data\":");
    write_complex_data(&mut out, m.data());
    out.push('}');
    out.push('\n');
    out
}

fn parse_err(msg: &str) -> Error {
    Error::Parse(msg.to_string())
}

fn value_f64(v: &Value) -> Result<f64> {
    v.as_f64().ok_or_else(|| parse_err("expected a number"))
}

fn parse_complex_data(v: &Value, expect: usize) -> Result<Vec<C64>> {
    let arr = v.as_array().ok_or_else(|| parse_err("data must be an array"))?;
    if arr.len() != expect {
        return Err(parse_err(&format!("data length {} ≠ {expect}", arr.len())));
    }
    arr.iter()
        .map(|pair| {
            let pair = pair.as_array().ok_or_else(|| parse_err("entry must be [re, im]"))?;
            if pair.len() != 2 {
                return Err(parse_err("entry must be [re, im]"));
            }
            Ok(C64::new(value_f64(&pair[0])?, value_f64(&pair[1])?))
        })
        .collect()
}

fn parse_parties(v: &Value) -> Result<Option<Shape>> {
    let arr = v.as_array().ok_or_else(|| parse_err("parties must be an array"))?;
    if arr.is_empty() {
        return Ok(None);
    }
    let parties = arr
        .iter()
        .map(|p| {
            let key = p
                .get("key")
                .and_then(Value::as_u64)
                .ok_or_else(|| parse_err("party needs a key dim"))?;
            let shield = p
                .get("shield")
                .and_then(Value::as_u64)
                .ok_or_else(|| parse_err("party needs a shield dim"))?;
            Ok(Party::new(key as usize, shield as usize))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Some(Shape::new(parties)?))
}

pub fn matrix_from_json(text: &str) -> Result<ComplexMatrix> {
    let v: Value = serde_json::from_str(text).map_err(|e| parse_err(&e.to_string()))?;
    let dim = v
        .get("dim")
        .and_then(Value::as_u64)
        .ok_or_else(|| parse_err("missing dim"))? as usize;
    let data = parse_complex_data(v.get("data").ok_or_else(|| parse_err("missing data"))?, dim * dim)?;
    let mut m = ComplexMatrix::zeros(dim);
    m.data_mut().copy_from_slice(&data);
    match v.get("parties") {
        Some(p) => match parse_parties(p)? {
            Some(shape) => m.with_shape(shape),
            None => Ok(m),
        },
        None => Ok(m),
    }
}

/// Block-operator file:
/// `{"d":…,"N":…,"shield_parties":[…],"blocks":[{"row":[…],"col":[…],"data":[…]},…]}`.
pub fn block_operator_to_json(op: &BlockOperator) -> String {
    let mut out = String::new();
    let _ = write!(out, "{{\"d\":{},\"N\":{},\"shield_parties\":", op.key_dim(), op.parties());
    write_parties(&mut out, Some(op.shield_shape()));
    out.push_str(",\"blocks\":[");
    for (i, ((row, col), block)) in op.blocks().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let fmt_idx = |idx: &[u8]| {
            let parts: Vec<String> = idx.iter().map(|b| b.to_string()).collect();
            format!("[{}]", parts.join(","))
        };
        let _ = write!(out, "{{\"row\":{},\"col\":{},\"data\":", fmt_idx(row), fmt_idx(col));
        write_complex_data(&mut out, block.data());
        out.push('}');
    }
    out.push_str("]}");
    out.push('\n');
    out
}

pub fn block_operator_from_json(text: &str) -> Result<BlockOperator> {
    let v: Value = serde_json::from_str(text).map_err(|e| parse_err(&e.to_string()))?;
    let d = v.get("d").and_then(Value::as_u64).ok_or_else(|| parse_err("missing d"))? as usize;
    let n = v.get("N").and_then(Value::as_u64).ok_or_else(|| parse_err("missing N"))? as usize;
    let shape = parse_parties(
        v.get("shield_parties").ok_or_else(|| parse_err("missing shield_parties"))?,
    )?
    .ok_or_else(|| parse_err("shield_parties must be nonempty"))?;
    let shield_dim = shape.total_dim();
    let mut op = BlockOperator::new(d, n, shape);
    let blocks = v
        .get("blocks")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_err("missing blocks"))?;
    for b in blocks {
        let idx = |field: &str| -> Result<Vec<u8>> {
            b.get(field)
                .and_then(Value::as_array)
                .ok_or_else(|| parse_err("block needs row/col"))?
                .iter()
                .map(|x| {
                    x.as_u64()
                        .map(|v| v as u8)
                        .ok_or_else(|| parse_err("index digits must be integers"))
                })
                .collect()
        };
        let data = parse_complex_data(
            b.get("data").ok_or_else(|| parse_err("block needs data"))?,
            shield_dim * shield_dim,
        )?;
        let mut m = ComplexMatrix::zeros(shield_dim);
        m.data_mut().copy_from_slice(&data);
        op.set_block(idx("row")?, idx("col")?, m)?;
    }
    Ok(op)
}

/// Is this text a block-operator file (as opposed to a plain matrix file)?
pub fn looks_like_block_operator(text: &str) -> bool {
    serde_json::from_str::<Value>(text)
        .map(|v| v.get("blocks").is_some())
        .unwrap_or(false)
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

pub const CURVE_CSV_HEADER: &str = "family,D,N,k,p_success,K_DW,K_DW_raw,K_scaled";

/// Key-curve CSV: fixed header, one row per point, ascending k.
pub fn curve_to_csv(points: &[ProtocolPoint]) -> String {
    let mut out = String::from(CURVE_CSV_HEADER);
    out.push('\n');
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            p.family,
            p.shield_dim,
            p.parties,
            p.k,
            fmt_f64(p.success_probability),
            fmt_f64(p.key_rate),
            fmt_f64(p.key_rate_raw),
            fmt_f64(p.scaled_key_rate),
        );
    }
    out
}

// ---------------------------------------------------------------------------
// Report JSON
// ---------------------------------------------------------------------------

fn opt_f64(v: Option<f64>) -> String {
    match v {
        Some(x) => fmt_f64(x),
        None => "null".into(),
    }
}

fn f64_list(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|&v| fmt_f64(v)).collect();
    format!("[{}]", parts.join(","))
}

pub fn closeness_report_to_json(r: &ClosenessReport) -> String {
    format!(
        "{{\"d\":{},\"N\":{},\"row\":{},\"block_norms\":{},\"epsilon\":{},\"sufficient_bound\":{}}}\n",
        r.key_dim,
        r.parties,
        r.row,
        f64_list(&r.block_norms),
        fmt_f64(r.epsilon),
        opt_f64(r.sufficient_bound),
    )
}

pub fn lemma_report_to_json(r: &LemmaReport) -> String {
    let mut out = String::new();
    let _ = write!(
        out,
        "{{\"suite\":{:?},\"grid\":{:?},\"pass\":{},\"cases\":[",
        r.suite, r.grid, r.pass
    );
    for (i, c) in r.cases.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(
            out,
            "{{\"label\":{:?},\"margin\":{},\"tolerance\":{},\"pass\":{}}}",
            c.label,
            fmt_f64(c.margin),
            fmt_f64(c.tolerance),
            c.pass
        );
    }
    out.push_str("]}\n");
    out
}

pub fn cq_closeness_report_to_json(r: &CqClosenessReport) -> String {
    format!(
        "{{\"global_distance\":{},\"pair_distances\":{},\"converse_factor\":{},\"forward_ok\":{},\"converse_ok\":{}}}\n",
        fmt_f64(r.global_distance),
        f64_list(&r.pair_distances),
        fmt_f64(r.converse_factor),
        r.forward_ok,
        r.converse_ok,
    )
}

pub fn ed_report_to_json(r: &EdBoundReport) -> String {
    let mut out = String::new();
    let _ = write!(out, "{{\"heuristic\":{},\"best\":{},\"pairs\":[", r.heuristic, fmt_f64(r.best));
    for (i, p) in r.pairs.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let vec_json = |v: &Vec<Vec<C64>>| {
            let parties: Vec<String> = v
                .iter()
                .map(|site| {
                    let entries: Vec<String> = site
                        .iter()
                        .map(|z| format!("[{},{}]", fmt_f64(z.re), fmt_f64(z.im)))
                        .collect();
                    format!("[{}]", entries.join(","))
                })
                .collect();
            format!("[{}]", parties.join(","))
        };
        let _ = write!(
            out,
            "{{\"i\":{},\"j\":{},\"eta\":{},\"a1\":{},\"a2\":{},\"bound\":{},\"f\":{},\"g\":{}}}",
            p.i,
            p.j,
            fmt_f64(p.eta),
            fmt_f64(p.a1),
            fmt_f64(p.a2),
            fmt_f64(p.bound),
            vec_json(&p.f),
            vec_json(&p.g),
        );
    }
    out.push_str("]}\n");
    out
}

pub fn bell_result_to_json(value: f64, settings: &crate::bell::BellSettings) -> String {
    let mut out = String::new();
    let _ = write!(out, "{{\"value\":{},\"observables\":[", fmt_f64(value));
    for (i, [a, b]) in settings.observables.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(
            out,
            "[[{},{},{}],[{},{},{}]]",
            fmt_f64(a.x),
            fmt_f64(a.y),
            fmt_f64(a.z),
            fmt_f64(b.x),
            fmt_f64(b.y),
            fmt_f64(b.z)
        );
    }
    out.push_str("]}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states;

    #[test]
    fn f64_formatting_roundtrips() {
        for x in [0.0, -0.0, 1.0 / 3.0, 27.0 / 29.0, 1e-300, -123.456e77, f64::MIN_POSITIVE] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn matrix_json_roundtrip_is_byte_identical() {
        let m = states::x_matrix(3, 2);
        let text = matrix_to_json(&m);
        let parsed = matrix_from_json(&text).unwrap();
        assert_eq!(matrix_to_json(&parsed), text);
        assert_eq!(parsed.shape().unwrap().num_parties(), 2);
        assert_eq!(parsed.dim(), 9);
    }

    #[test]
    fn block_operator_json_roundtrip_is_byte_identical() {
        let op = states::construction_one(2, 2).unwrap();
        let text = block_operator_to_json(&op);
        let parsed = block_operator_from_json(&text).unwrap();
        assert_eq!(block_operator_to_json(&parsed), text);
        assert!(looks_like_block_operator(&text));
        assert!(!looks_like_block_operator(&matrix_to_json(&states::ghz(2, 2).unwrap())));
    }

    #[test]
    fn curve_csv_header_and_rows() {
        let curve = crate::keyrates::key_curve(
            &crate::keyrates::CurveFamily::One { shield_dim: 3, parties: 3 },
            1..=3,
        )
        .unwrap();
        let csv = curve_to_csv(&curve);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CURVE_CSV_HEADER);
        assert_eq!(lines.count(), 3);
        assert!(csv.lines().nth(1).unwrap().starts_with("one,3,3,1,"));
    }
}
