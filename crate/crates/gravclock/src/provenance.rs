//! Run provenance: tool version and configuration digests embedded in every
//! output so a table can be traced back to the exact inputs that produced it.

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Crate version recorded in output metadata.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Hex digest (first 8 bytes of SHA-256) of the serialized value. Struct
/// fields serialize in declaration order, so equal configurations hash
/// equally across runs and machines.
pub fn config_digest<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("config serialization cannot fail");
    let hash = Sha256::digest(&bytes);
    hash[..8].iter().map(|b| format!("{b:02x}")).collect()
}
