use serde::Serialize;
use sha2::{Digest, Sha256};

/// Hex SHA-256 of the compact JSON encoding of `value`.
pub fn content_hash<T: Serialize + ?Sized>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("value serializes to JSON");
    hex::encode(Sha256::digest(&bytes))
}
