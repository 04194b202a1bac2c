//! Seeded challenge generation: pick parameters for a subtype, plant the
//! weakness, encrypt a fresh flag and wrap the public data in a story.

pub mod aes;
pub mod classical;
pub mod corpus;
pub mod ecc;
pub mod hash;
pub mod prng;
pub mod rsa;
pub mod web;

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::challenge::{render_artifact_block, Artifacts, Challenge};
use crate::flag::{Flag, BODY_ALPHABET, DEFAULT_BODY_LEN, FLAG_PREFIX};
use crate::narrative::{render_story, StoryMode};
use crate::primitives::sha256;
use crate::taxonomy::{Archetype, SubtypeId};

pub use ecc::{ecdsa_sign_with_nonce, EcdsaSignature};
pub use rsa::{make_rsa_instance, RsaInstance, RsaSet};

pub type GenRng = ChaCha20Rng;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("invalid argument: {0}")]
    Argument(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GenSeed(pub u64);

impl fmt::Display for GenSeed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// RNG for one (subtype, seed) pair. Streams for different subtypes are
/// independent even when the seeds coincide.
pub fn rng_for(subtype: SubtypeId, seed: GenSeed) -> GenRng {
    let label = format!("randcrypto:{}:{}", subtype.name(), seed.0);
    ChaCha20Rng::from_seed(sha256(label.as_bytes()))
}

pub fn sample_flag<R: Rng + ?Sized>(rng: &mut R) -> Flag {
    let body: String = (0..DEFAULT_BODY_LEN)
        .map(|_| BODY_ALPHABET[rng.gen_range(0..BODY_ALPHABET.len())] as char)
        .collect();
    Flag::from_body(&body).expect("alphabet characters only")
}

/// Output of a subtype's planting routine.
#[derive(Debug, Clone)]
pub struct Plant {
    pub flag: Flag,
    pub artifacts: Artifacts,
    pub params: BTreeMap<String, String>,
}

impl Plant {
    pub fn new<S: AsRef<str>>(flag: Flag, artifacts: &[(S, String)]) -> Plant {
        Plant {
            flag,
            artifacts: artifacts
                .iter()
                .map(|(k, v)| (k.as_ref().to_string(), v.clone()))
                .collect(),
            params: BTreeMap::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl fmt::Display) -> Plant {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn artifact(mut self, key: &str, value: impl fmt::Display) -> Plant {
        self.artifacts.insert(key.to_string(), value.to_string());
        self
    }
}

fn plant(subtype: SubtypeId, rng: &mut GenRng) -> Plant {
    let flag = sample_flag(rng);
    let name = subtype.name();
    match subtype.archetype() {
        Archetype::Classical => classical::plant(name, rng, flag),
        Archetype::Rsa => rsa::plant(name, rng, flag),
        Archetype::Aes => aes::plant(name, rng, flag),
        Archetype::Ecc => ecc::plant(name, rng, flag),
        Archetype::Hash => hash::plant(name, rng, flag),
        Archetype::Prng => prng::plant(name, rng, flag),
        Archetype::WebCrypto => web::plant(name, rng, flag),
        Archetype::Signature => match name {
            "nonce_reuse_ecdsa" => ecc::plant(name, rng, flag),
            _ => rsa::plant(name, rng, flag),
        },
    }
}

pub fn challenge_id(subtype: SubtypeId, seed: GenSeed) -> String {
    format!("{}-{}", subtype.name(), seed.0)
}

/// Deterministic challenge for `(subtype, seed)` with a template story.
pub fn generate(subtype: SubtypeId, seed: GenSeed) -> Challenge {
    generate_with(subtype, seed, &StoryMode::Template)
}

/// As [`generate`], with the story produced by `mode`.
pub fn generate_with(subtype: SubtypeId, seed: GenSeed, mode: &StoryMode<'_>) -> Challenge {
    let mut rng = rng_for(subtype, seed);
    loop {
        let plant = plant(subtype, &mut rng);
        let block = render_artifact_block(&plant.artifacts).expect("artifact values are single-line");
        let question = render_story(subtype, &format!("\n{block}\n"), mode, &mut rng)
            .expect("template bank covers every subtype");
        let hint = subtype.info().hint.to_string();
        let rendered = plant.flag.render();
        if question.contains(&rendered) || question.contains(FLAG_PREFIX) || hint.contains(&rendered) {
            continue;
        }
        return Challenge {
            id: challenge_id(subtype, seed),
            subtype,
            difficulty: subtype.difficulty(),
            question,
            hint,
            expected_flag: plant.flag,
            cipher_params: plant.params,
            public_artifacts: plant.artifacts,
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn sampled_flags_are_valid_and_distinct() {
        let mut seen = HashSet::new();
        for seed in 0..1000u64 {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let flag = sample_flag(&mut rng);
            assert!(crate::flag::validate_flag_format(&flag.render()));
            assert_eq!(flag.body().len(), DEFAULT_BODY_LEN);
            assert!(seen.insert(flag));
        }
        let mut a = ChaCha20Rng::seed_from_u64(0);
        let mut b = ChaCha20Rng::seed_from_u64(0);
        assert_eq!(sample_flag(&mut a), sample_flag(&mut b));
    }

    #[test]
    fn caesar_seed_42() {
        let st = SubtypeId::by_name("caesar").unwrap();
        let c = generate(st, GenSeed(42));
        let shift: u8 = c.cipher_params["shift"].parse().unwrap();
        assert!((1..=25).contains(&shift));
        assert_eq!(c, generate(st, GenSeed(42)));
        assert_eq!(c.id, "caesar-42");
    }

    #[test]
    fn flag_never_leaks_into_question() {
        for st in SubtypeId::all() {
            for seed in 0..5 {
                let c = generate(st, GenSeed(seed));
                let f = c.expected_flag.render();
                assert!(!c.question.contains(&f), "{}", c.id);
                assert!(!c.hint.contains(&f), "{}", c.id);
                assert_eq!(c.public_view().unwrap().artifacts(), &c.public_artifacts);
            }
        }
    }
}
