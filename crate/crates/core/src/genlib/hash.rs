//! Hash subtypes: short preimages and guessable salts.

use md5::{Digest, Md5};
use rand::Rng;

use super::{GenRng, Plant};
use crate::flag::Flag;
use crate::primitives::{sha256, sha256_stream_xor};

/// Longest preimage planted by the generators.
pub const MAX_SECRET_LEN: usize = 4;

/// Width of the disclosed salt window in seconds.
pub const SALT_WINDOW_SECS: u64 = 3_600;

pub fn md5_hex(data: &[u8]) -> String {
    hex::encode(Md5::digest(data))
}

/// `sha256` applied `iterations` times, hashing raw digests after the first
/// round.
pub fn iterated_sha256(data: &[u8], iterations: u32) -> [u8; 32] {
    assert!(iterations >= 1);
    let mut digest = sha256(data);
    for _ in 1..iterations {
        digest = sha256(&digest);
    }
    digest
}

fn short_secret(rng: &mut GenRng) -> String {
    let len = rng.gen_range(1..=MAX_SECRET_LEN);
    (0..len).map(|_| rng.gen_range(b'a'..=b'z') as char).collect()
}

/// A timestamp somewhere in 2023-2025 and the hour-aligned window holding it.
fn salt_window(rng: &mut GenRng) -> (u64, u64) {
    let start = rng.gen_range(1_672_531_200u64..1_767_225_600) / SALT_WINDOW_SECS * SALT_WINDOW_SECS;
    (start, start + rng.gen_range(0..SALT_WINDOW_SECS))
}

pub(super) fn plant(name: &str, rng: &mut GenRng, flag: Flag) -> Plant {
    let pt = flag.render().into_bytes();
    match name {
        "md5_reverse" => {
            let secret = short_secret(rng);
            Plant::new(
                flag,
                &[
                    ("md5", md5_hex(secret.as_bytes())),
                    ("ciphertext_hex", hex::encode(sha256_stream_xor(&secret, &pt))),
                ],
            )
            .param("secret", secret)
        }
        "poor_random_salt" => {
            let (start, ts) = salt_window(rng);
            Plant::new(
                flag,
                &[
                    ("salt_window", format!("{start}..{}", start + SALT_WINDOW_SECS)),
                    ("key", "sha256(str(salt))".to_string()),
                    ("ciphertext_hex", hex::encode(sha256_stream_xor(&ts.to_string(), &pt))),
                ],
            )
            .param("salt", ts)
        }
        "iterated_hash" => {
            let secret = short_secret(rng);
            let iterations = rng.gen_range(2..=4u32);
            Plant::new(
                flag,
                &[
                    ("iterations", iterations.to_string()),
                    ("digest", hex::encode(iterated_sha256(secret.as_bytes(), iterations))),
                    ("charset", format!("a-z, length 1-{MAX_SECRET_LEN}")),
                    ("ciphertext_hex", hex::encode(sha256_stream_xor(&secret, &pt))),
                ],
            )
            .param("secret", secret)
        }
        other => unreachable!("{other} is not a hash subtype"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn md5_known_values() {
        // RFC 1321 test suite
        assert_eq!(md5_hex(b""), "d41d8cd98f00b204e9800998ecf8427e");
        assert_eq!(md5_hex(b"abc"), "900150983cd24fb0d6963f7d28e17f72");
    }

    #[test]
    fn iterated_hash_chains_raw_digests() {
        assert_eq!(iterated_sha256(b"x", 1), sha256(b"x"));
        assert_eq!(iterated_sha256(b"x", 3), sha256(&sha256(&sha256(b"x"))));
    }
}
