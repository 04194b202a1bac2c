//! Web-flavoured mistakes: unsigned tokens, toy cookie crypto and a
//! Diffie-Hellman exchange over a tiny prime.

use base64::engine::general_purpose::{STANDARD, URL_SAFE_NO_PAD};
use base64::Engine;
use rand::seq::SliceRandom;
use rand::Rng;

use super::corpus::USERNAMES;
use super::{GenRng, Plant};
use crate::flag::Flag;
use crate::primitives::math::{pow_mod_u64, random_prime_u64};
use crate::primitives::sha256_stream_xor;

/// JWT with `alg: none` and an empty signature segment.
pub fn unsigned_jwt(claims: &serde_json::Value) -> String {
    let header = serde_json::json!({"alg": "none", "typ": "JWT"});
    format!(
        "{}.{}.",
        URL_SAFE_NO_PAD.encode(header.to_string()),
        URL_SAFE_NO_PAD.encode(claims.to_string())
    )
}

pub(super) fn plant(name: &str, rng: &mut GenRng, flag: Flag) -> Plant {
    let rendered = flag.render();
    let user = *USERNAMES.choose(rng).unwrap();
    let ts = rng.gen_range(1_672_531_200u64..1_767_225_600);
    match name {
        "jwt_none" => {
            let claims = serde_json::json!({"sub": user, "iat": ts, "admin": true, "flag": rendered});
            Plant::new(flag, &[("token", unsigned_jwt(&claims))])
        }
        "weak_cookie_encryption" => {
            let key = rng.gen_range(1..=u8::MAX);
            let cookie = format!("user={user};flag={rendered}");
            let ct: Vec<u8> = cookie.bytes().map(|b| b ^ key).collect();
            Plant::new(flag, &[("cookie_hex", hex::encode(ct))]).param("key", key)
        }
        "broken_key_exchange" => {
            let p = random_prime_u64(rng, 1 << 15, 1 << 16);
            let g = rng.gen_range(2..p - 1);
            let a = rng.gen_range(2..p - 1);
            let b = rng.gen_range(2..p - 1);
            let shared = pow_mod_u64(pow_mod_u64(g, b, p), a, p);
            Plant::new(
                flag,
                &[
                    ("p", p.to_string()),
                    ("g", g.to_string()),
                    ("A", pow_mod_u64(g, a, p).to_string()),
                    ("B", pow_mod_u64(g, b, p).to_string()),
                    ("key", "sha256(str(shared_secret))".to_string()),
                    ("ciphertext_hex", hex::encode(sha256_stream_xor(&shared.to_string(), rendered.as_bytes()))),
                ],
            )
            .param("a", a)
            .param("b", b)
        }
        "insecure_session_token" => {
            let token = STANDARD.encode(format!("{user}:{ts}:{rendered}"));
            Plant::new(flag, &[("session_token", token)])
        }
        other => unreachable!("{other} is not a web subtype"),
    }
}
