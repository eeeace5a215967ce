//! Content digests for reproducibility metadata in reports and files.

use serde::Serialize;
use sha2::{Digest, Sha256};

/// SHA-256 hex digest of a value's canonical JSON encoding.
pub fn sha256_hex_json<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("serializable value");
    sha256_hex(&bytes)
}

/// SHA-256 hex digest of raw bytes.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let out = hasher.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}
