//! Browser bindings. Every export takes plain strings/numbers and returns a
//! JSON string, so the page needs no generated type definitions.

use std::str::FromStr;

use num_bigint::BigInt;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use zrecover::field::{Field, FieldModulus};
use zrecover::matrix::{build_matrix, encode, MatrixParams, SparseIntVector};
use zrecover::recovery::{decode, DecodeConfig};
use zrecover::recurrence::berlekamp_massey;
use zrecover::rootfind::find_roots;
use zrecover::RootStrategy;

/// Columns beyond this are summarized, not returned entry by entry.
pub const MAX_HEATMAP_COLUMNS: usize = 256;

fn params(p: u64, m: usize, slack: f64) -> Result<MatrixParams, String> {
    let modulus = FieldModulus::new(p).map_err(|e| e.to_string())?;
    MatrixParams::new(modulus, m, (p - 1) as usize, slack).map_err(|e| e.to_string())
}

/// Parses `"5: 123, 40: -17"` (index: value pairs, any separators).
pub fn parse_vector(text: &str, length: usize) -> Result<SparseIntVector, String> {
    let mut pairs = Vec::new();
    for item in text.split([',', ';', '\n']).map(str::trim).filter(|s| !s.is_empty()) {
        let (i, v) = item.split_once(':').ok_or_else(|| format!("expected index:value, got {item:?}"))?;
        let i: usize = i.trim().parse().map_err(|_| format!("bad index {i:?}"))?;
        let v = BigInt::from_str(v.trim()).map_err(|_| format!("bad value {v:?}"))?;
        if v != BigInt::from(0) {
            pairs.push((i, v));
        }
    }
    pairs.sort_by_key(|(i, _)| *i);
    if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err("an index appears twice".into());
    }
    SparseIntVector::from_pairs(length, pairs).map_err(|e| e.to_string())
}

pub fn matrix_view(p: u64, m: usize, slack: f64) -> Result<Value, String> {
    let params = params(p, m, slack)?;
    let mx = build_matrix(params);
    let shown = mx.columns().min(MAX_HEATMAP_COLUMNS);
    let rows: Vec<Vec<i64>> = (0..m).map(|r| (1..=shown).map(|j| mx.entry(r, j)).collect()).collect();
    Ok(json!({
        "p": p,
        "m": m,
        "columns": mx.columns(),
        "shown_columns": shown,
        "element_bound": params.element_bound(),
        "max_abs_entry": mx.max_abs_entry(),
        "bound_met": mx.bound_met_count(),
        "multipliers": &mx.multipliers()[..shown],
        "entries": rows,
    }))
}

pub fn roundtrip_view(p: u64, m: usize, vector: &str) -> Result<Value, String> {
    let mx = build_matrix(params(p, m, 1.0)?);
    let x = parse_vector(vector, mx.columns())?;
    let y = encode(&mx, &x).map_err(|e| e.to_string())?;
    let config = DecodeConfig { trace: true, ..Default::default() };
    let r = decode(&mx, &y, &config).map_err(|e| e.to_string())?;
    let pairs = |v: &SparseIntVector| v.iter().map(|(i, c)| json!([i, c.to_string()])).collect::<Vec<_>>();
    Ok(json!({
        "x": pairs(&x),
        "y": y.values().iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        "sparsity": x.sparsity(),
        "recoverable_sparsity": m / 2,
        "decoded": pairs(&r.x),
        "status": r.status.as_str(),
        "reason": r.reason,
        "exact": r.x == x,
        "steps": r.stats.steps,
        "inner_steps": r.stats.inner_steps,
        "lifts": r.stats.lifts,
        "field_ops": r.stats.ledger.field_ops,
        "ring_ops": r.stats.ledger.ring_ops,
        "peak_magnitude": r.stats.ledger.peak_magnitude.to_string(),
        "trace": r.trace,
    }))
}

pub fn recurrence_view(p: u64, sequence: &str) -> Result<Value, String> {
    let modulus = FieldModulus::new(p).map_err(|e| e.to_string())?;
    let field = Field::new(modulus);
    let seq = sequence
        .split([',', ' ', ';', '\n'])
        .filter(|s| !s.trim().is_empty())
        .map(|s| BigInt::from_str(s.trim()).map(|v| modulus.reduce(&v)).map_err(|_| format!("bad term {s:?}")))
        .collect::<Result<Vec<_>, _>>()?;
    let rec = berlekamp_massey(&seq, seq.len(), &field).map_err(|e| e.to_string())?;
    let roots = if rec.order() > 0 {
        find_roots(&rec.poly(), &RootStrategy::default(), &field).0.iter().map(|r| r.value()).collect()
    } else {
        Vec::new()
    };
    Ok(json!({
        "p": p,
        "sequence": seq.iter().map(|e| e.value()).collect::<Vec<_>>(),
        "order": rec.order(),
        "certified": 2 * rec.order() <= seq.len(),
        "polynomial": rec.coefficients().iter().map(|c| c.value()).collect::<Vec<_>>(),
        "roots": roots,
    }))
}

fn to_js(r: Result<Value, String>) -> Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

/// Matrix entries (up to 256 columns) and bound statistics.
#[wasm_bindgen(js_name = matrixView)]
pub fn matrix_view_js(p: u32, m: u32, slack: f64) -> Result<String, JsError> {
    to_js(matrix_view(p as u64, m as usize, slack))
}

/// Encodes `vector` ("index: value, ...") and decodes it with a full trace.
#[wasm_bindgen(js_name = roundtrip)]
pub fn roundtrip_js(p: u32, m: u32, vector: &str) -> Result<String, JsError> {
    to_js(roundtrip_view(p as u64, m as usize, vector))
}

/// Shortest linear recurrence of a sequence mod `p`, with its roots.
#[wasm_bindgen(js_name = recurrence)]
pub fn recurrence_js(p: u32, sequence: &str) -> Result<String, JsError> {
    to_js(recurrence_view(p as u64, sequence))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vector_text() {
        let x = parse_vector("5: 123, 40:-17\n 7:0", 100).unwrap();
        assert_eq!(x.support(), &[5, 40]);
        assert!(parse_vector("5:1, 5:2", 100).is_err());
        assert!(parse_vector("101:1", 100).is_err());
        assert!(parse_vector("x", 100).is_err());
        assert!(parse_vector("", 100).unwrap().is_zero());
    }

    #[test]
    fn matrix_is_truncated_for_display() {
        let v = matrix_view(1009, 4, 1.0).unwrap();
        assert_eq!(v["columns"], 1008);
        assert_eq!(v["entries"].as_array().unwrap().len(), 4);
        assert_eq!(v["entries"][0].as_array().unwrap().len(), MAX_HEATMAP_COLUMNS);
        assert!(matrix_view(100, 4, 1.0).is_err());
    }

    #[test]
    fn roundtrip_has_trace() {
        let v = roundtrip_view(101, 8, "5: 123456789, 40: -17").unwrap();
        assert_eq!(v["status"], "success");
        assert_eq!(v["exact"], true);
        let events: Vec<&str> = v["trace"].as_array().unwrap().iter().map(|e| e["event"].as_str().unwrap()).collect();
        assert!(events.contains(&"main-step"));
        assert!(events.contains(&"lift"));
        let over = roundtrip_view(101, 4, "1:1, 2:1, 3:1").unwrap();
        assert_eq!(over["status"], "sparsity-exceeded");
    }

    #[test]
    fn recurrence_fibonacci() {
        let v = recurrence_view(7, "0 1 1 2 3 5 8 13").unwrap();
        assert_eq!(v["order"], 2);
        assert_eq!(v["polynomial"], json!([6, 6, 1]));
        assert_eq!(v["certified"], true);
        assert!(recurrence_view(7, "").is_err());
    }
}
