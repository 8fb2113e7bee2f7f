//! Shared formatting for report files.

use serde_json::Value;
use sha2::{Digest, Sha256};

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Hash of the compact JSON encoding. Object keys are sorted by serde_json's
/// default map, so equal values always hash equally.
pub fn digest_json(value: &Value) -> String {
    sha256_hex(serde_json::to_string(value).expect("json value serializes").as_bytes())
}
