//! Content digests for partitions and run records.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;

/// Hex SHA-256 of the compact JSON serialization of `value`.
pub fn json_digest<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let bytes = serde_json::to_vec(value)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_stable_and_content_sensitive() {
        let a = json_digest(&vec![1.0, 2.0]).unwrap();
        assert_eq!(a, json_digest(&vec![1.0, 2.0]).unwrap());
        assert_ne!(a, json_digest(&vec![1.0, 2.5]).unwrap());
        assert_eq!(a.len(), 64);
    }
}
