//! Arithmetic and weak generators shared by the generators and the solvers.

pub mod curve;
pub mod math;
pub mod prng;

use sha2::{Digest, Sha256};

pub fn sha256(data: &[u8]) -> [u8; 32] {
    Sha256::digest(data).into()
}

/// XOR `data` with `key`, repeating the key as needed.
pub fn xor_repeating(data: &[u8], key: &[u8]) -> Vec<u8> {
    assert!(!key.is_empty(), "XOR key must not be empty");
    data.iter()
        .zip(key.iter().cycle())
        .map(|(d, k)| d ^ k)
        .collect()
}

/// XOR of two byte strings, truncated to the shorter.
pub fn xor_bytes(a: &[u8], b: &[u8]) -> Vec<u8> {
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

/// Keystream used by challenges whose key is "SHA-256 of some secret
/// string": the 32-byte digest, repeated.
pub fn sha256_stream_xor(secret: &str, data: &[u8]) -> Vec<u8> {
    xor_repeating(data, &sha256(secret.as_bytes()))
}
