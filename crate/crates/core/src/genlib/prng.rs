//! Keystreams from generators whose state is small, guessable or leaked.

use rand::Rng;

use super::{GenRng, Plant};
use crate::flag::Flag;
use crate::primitives::prng::{lcg_byte, lcg_next, Lfsr16, Mt19937, Xorshift16};
use crate::primitives::xor_bytes;

pub const PREDICTABLE_SEED_SPACE: u64 = 10_000;
pub const TIME_WINDOW_SECS: u64 = 3_600;
pub const LCG_MODULUS: u64 = 1 << 32;
pub const LCG_LEAKED_STATES: usize = 3;

/// Keystream bytes following `state` (the state itself is not used).
pub fn lcg_keystream(mut state: u64, a: u64, c: u64, m: u64, len: usize) -> Vec<u8> {
    (0..len)
        .map(|_| {
            state = lcg_next(state, a, c, m);
            lcg_byte(state)
        })
        .collect()
}

pub(super) fn plant(name: &str, rng: &mut GenRng, flag: Flag) -> Plant {
    let pt = flag.render().into_bytes();
    let encrypt = |ks: Vec<u8>| hex::encode(xor_bytes(&pt, &ks));
    match name {
        "predictable_seed" => {
            let seed = rng.gen_range(0..PREDICTABLE_SEED_SPACE);
            let ct = encrypt(Mt19937::python_seeded(seed).keystream(pt.len()));
            Plant::new(
                flag,
                &[
                    ("generator", "random.seed(seed); one random.getrandbits(8) per byte".to_string()),
                    ("seed_range", format!("0..{PREDICTABLE_SEED_SPACE}")),
                    ("ciphertext_hex", ct),
                ],
            )
            .param("seed", seed)
        }
        "time_based_seed" => {
            let start = rng.gen_range(1_672_531_200u64..1_767_225_600) / TIME_WINDOW_SECS * TIME_WINDOW_SECS;
            let ts = start + rng.gen_range(0..TIME_WINDOW_SECS);
            let ct = encrypt(Mt19937::python_seeded(ts).keystream(pt.len()));
            Plant::new(
                flag,
                &[
                    ("generator", "random.seed(int(time.time())); one random.getrandbits(8) per byte".to_string()),
                    ("encrypted_between", format!("{start}..{}", start + TIME_WINDOW_SECS)),
                    ("ciphertext_hex", ct),
                ],
            )
            .param("seed", ts)
        }
        "low_entropy_generator" => {
            let seed = rng.gen_range(1..=u16::MAX);
            let ct = encrypt(Xorshift16::keystream(seed, pt.len()));
            Plant::new(
                flag,
                &[
                    (
                        "generator",
                        "16-bit xorshift: s ^= s << 7; s ^= s >> 9; s ^= s << 8 (mod 2^16); output s >> 8".to_string(),
                    ),
                    ("ciphertext_hex", ct),
                ],
            )
            .param("seed", seed)
        }
        "lfsr_weakness" => {
            let seed = rng.gen_range(1..=u16::MAX);
            let taps = rng.gen_range(1..=u16::MAX) | 1;
            let ct = encrypt(Lfsr16::keystream(seed, taps, pt.len()));
            Plant::new(
                flag,
                &[
                    (
                        "generator",
                        "16-bit LFSR: out = s & 1; s = (s >> 1) | (parity(s & taps) << 15); bytes LSB first"
                            .to_string(),
                    ),
                    ("taps", format!("{taps:#06x}")),
                    ("ciphertext_hex", ct),
                ],
            )
            .param("seed", seed)
        }
        "lcg_flaw" => {
            let a = rng.gen_range(0..LCG_MODULUS / 4) * 4 + 1;
            let c = rng.gen_range(0..LCG_MODULUS / 2) * 2 + 1;
            let mut state = rng.gen_range(0..LCG_MODULUS);
            let mut leaked = Vec::with_capacity(LCG_LEAKED_STATES);
            for _ in 0..LCG_LEAKED_STATES {
                state = lcg_next(state, a, c, LCG_MODULUS);
                leaked.push(state.to_string());
            }
            let ct = encrypt(lcg_keystream(state, a, c, LCG_MODULUS, pt.len()));
            Plant::new(
                flag,
                &[
                    ("a", a.to_string()),
                    ("c", c.to_string()),
                    ("m", LCG_MODULUS.to_string()),
                    ("outputs", leaked.join(",")),
                    ("keystream", "byte i = (state_{i+1} >> 24) for the states after the outputs".to_string()),
                    ("ciphertext_hex", ct),
                ],
            )
            .param("state", state)
        }
        other => unreachable!("{other} is not a PRNG subtype"),
    }
}
