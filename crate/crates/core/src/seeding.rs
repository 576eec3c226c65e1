//! Canonical serialization and seed derivation.
//!
//! Job identity and every random stream derive from the canonical JSON
//! serialization of the producing object's values (keys sorted, numbers
//! rendered minimally), so semantically equal configs share caches and
//! adding unrelated modules never perturbs other modules' draws.

use sha2::{Digest, Sha256};

/// Canonical JSON: object keys sorted, no whitespace, minimal numbers.
pub fn canonical_json(value: &serde_json::Value) -> String {
    use serde_json::Value;
    match value {
        Value::Null => "null".to_string(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.to_string()
            } else if let Some(u) = n.as_u64() {
                u.to_string()
            } else {
                let f = n.as_f64().unwrap();
                if f == f.trunc() && f.abs() < 1e15 {
                    format!("{}", f as i64)
                } else {
                    format!("{f}")
                }
            }
        }
        Value::String(s) => serde_json::to_string(s).unwrap(),
        Value::Array(items) => {
            let inner: Vec<String> = items.iter().map(canonical_json).collect();
            format!("[{}]", inner.join(","))
        }
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            let inner: Vec<String> = keys
                .iter()
                .map(|k| {
                    format!(
                        "{}:{}",
                        serde_json::to_string(k).unwrap(),
                        canonical_json(&map[*k])
                    )
                })
                .collect();
            format!("{{{}}}", inner.join(","))
        }
    }
}

/// Hex SHA-256 of a byte string.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// 64-bit seed from an identity string (first 8 bytes of its SHA-256).
pub fn seed_from_identity(identity: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(identity.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn canonical_sorts_keys_and_minimizes_numbers() {
        let v = json!({"b": 1.0, "a": [2.5, 3], "c": {"y": null, "x": "s"}});
        assert_eq!(
            canonical_json(&v),
            r#"{"a":[2.5,3],"b":1,"c":{"x":"s","y":null}}"#
        );
    }

    #[test]
    fn key_order_does_not_matter() {
        let a: serde_json::Value = serde_json::from_str(r#"{"x": 1, "y": 2}"#).unwrap();
        let b: serde_json::Value = serde_json::from_str(r#"{"y": 2, "x": 1}"#).unwrap();
        assert_eq!(canonical_json(&a), canonical_json(&b));
    }

    #[test]
    fn seeds_differ_across_identities() {
        let a = seed_from_identity("graph|{\"n\":20}|1");
        let b = seed_from_identity("graph|{\"n\":20}|2");
        assert_ne!(a, b);
        assert_eq!(a, seed_from_identity("graph|{\"n\":20}|1"));
    }
}
