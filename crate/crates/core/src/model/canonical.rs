//! Byte-stable JSON encoding.
//!
//! Object keys are emitted in lexicographic (byte) order, there is no
//! whitespace between tokens and numbers use serde_json's shortest
//! round-trip formatting. Decoding the output and encoding it again yields
//! the same bytes.

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, thiserror::Error)]
pub enum CanonicalError {
    #[error("non-finite number at {0}")]
    NonFinite(String),
    #[error("serialization failed: {0}")]
    Serde(#[from] serde_json::Error),
}

/// Encodes any serializable value canonically.
///
/// serde_json maps non-finite floats to `null` silently, so callers holding
/// floats must check finiteness first (see [`super::SegmentFile::first_non_finite`]).
pub fn to_vec<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>, CanonicalError> {
    let value = serde_json::to_value(value)?;
    let mut out = Vec::with_capacity(256);
    write_value(&value, &mut out);
    Ok(out)
}

pub fn value_to_vec(value: &Value) -> Vec<u8> {
    let mut out = Vec::with_capacity(256);
    write_value(value, &mut out);
    out
}

fn write_value(value: &Value, out: &mut Vec<u8>) {
    match value {
        Value::Null => out.extend_from_slice(b"null"),
        Value::Bool(true) => out.extend_from_slice(b"true"),
        Value::Bool(false) => out.extend_from_slice(b"false"),
        Value::Number(n) => out.extend_from_slice(n.to_string().as_bytes()),
        Value::String(s) => {
            // Infallible for a plain string.
            serde_json::to_writer(&mut *out, s).expect("string encoding");
        }
        Value::Array(items) => {
            out.push(b'[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(b',');
                }
                write_value(item, out);
            }
            out.push(b']');
        }
        Value::Object(map) => {
            let mut entries: Vec<(&String, &Value)> = map.iter().collect();
            entries.sort_by(|a, b| a.0.as_bytes().cmp(b.0.as_bytes()));
            out.push(b'{');
            for (i, (k, v)) in entries.into_iter().enumerate() {
                if i > 0 {
                    out.push(b',');
                }
                serde_json::to_writer(&mut *out, k).expect("string encoding");
                out.push(b':');
                write_value(v, out);
            }
            out.push(b'}');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn key_order_does_not_matter() {
        let mut forward = serde_json::Map::new();
        forward.insert("alpha".into(), json!(1));
        forward.insert("beta".into(), json!({"y": 2, "x": [1.5, "s"]}));
        let mut reverse = serde_json::Map::new();
        reverse.insert("beta".into(), json!({"x": [1.5, "s"], "y": 2}));
        reverse.insert("alpha".into(), json!(1));
        let a = value_to_vec(&Value::Object(forward));
        let b = value_to_vec(&Value::Object(reverse));
        assert_eq!(a, b);
        assert_eq!(a, br#"{"alpha":1,"beta":{"x":[1.5,"s"],"y":2}}"#);
    }

    #[test]
    fn shortest_round_trip_numbers() {
        let bytes = to_vec(&json!([0.1, 1e-7, 123456789.125, -0.0, 5.0])).unwrap();
        assert_eq!(bytes, b"[0.1,1e-7,123456789.125,-0.0,5.0]");
        let back: Value = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(value_to_vec(&back), bytes);
    }

    #[test]
    fn escapes_strings() {
        let bytes = to_vec(&json!({"k\"": "line\nbreak\u{1}"})).unwrap();
        assert_eq!(bytes, br#"{"k\"":"line\nbreak\u0001"}"#);
    }
}
