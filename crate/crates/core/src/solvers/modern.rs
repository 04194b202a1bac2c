use base64::engine::general_purpose::{STANDARD, URL_SAFE_NO_PAD};
use base64::Engine;

use super::{
    art, art_hex, art_int, art_range, art_u64, as_flag, flag_or_fail, malformed, outcome, recover_ecdsa_private,
    SolveError, SolveResult,
};
use crate::challenge::PublicChallenge;
use crate::genlib::aes::{xts_data_key, xts_decrypt};
use crate::genlib::ecc::{ecdsa_hash, NodalCurve};
use crate::genlib::hash::{iterated_sha256, md5_hex};
use crate::genlib::EcdsaSignature;
use crate::primitives::curve::{Curve, Point, SmallCurve};
use crate::primitives::math::{inv_mod_u64, pow_mod_u64};
use crate::primitives::prng::{lcg_byte, lcg_next, Lfsr16, Mt19937, Xorshift16};
use crate::primitives::{sha256_stream_xor, xor_bytes};

const PREFIX: &[u8] = b"flag{";

pub(super) fn solve(name: &str, c: &PublicChallenge) -> SolveResult {
    match name {
        "aes_gcm" | "aes_ccm" | "aes_cfb" => {
            // Same key and nonce (or IV) twice: the keystream cancels.
            let known = art(c, "known_plaintext")?.as_bytes();
            let c1 = art_hex(c, "ciphertext1_hex")?;
            let c2 = art_hex(c, "ciphertext2_hex")?;
            let usable = if name == "aes_cfb" { 16 } else { known.len().min(c1.len()) };
            if c2.len() > usable {
                return Err(SolveError::failed("keystream reuse", "target is longer than the shared keystream"));
            }
            let keystream = xor_bytes(known, &c1);
            outcome(flag_or_fail("keystream reuse", &xor_bytes(&c2, &keystream))?, "keystream reuse", 1)
        }
        "aes_xts" => {
            let tweak: [u8; 16] = art_hex(c, "tweak_key_hex")?
                .try_into()
                .map_err(|_| malformed("tweak_key_hex", "expected 16 bytes"))?;
            let ct = art_hex(c, "ciphertext_hex")?;
            if ct.len() < 16 {
                return Err(malformed("ciphertext_hex", "shorter than one block"));
            }
            let space = super::work_ceiling(c.subtype) as u32;
            for pin in 0..space {
                let pt = xts_decrypt(&xts_data_key(pin), &tweak, &ct);
                if !pt.starts_with(PREFIX) {
                    continue;
                }
                let trimmed = pt.trim_ascii_end();
                if let Some(flag) = as_flag(trimmed) {
                    return outcome(flag, "data-key PIN brute force", pin as u64 + 1);
                }
            }
            Err(SolveError::failed("xts", "no PIN decrypts to a flag"))
        }
        "small_order_curve" => {
            let (curve, g, q) = small_curve(c)?;
            let limit = super::work_ceiling(c.subtype);
            let mut acc = g;
            for d in 1..=limit {
                if acc == q {
                    return unwrap_secret(c, &d.to_string(), "walk multiples of G", d);
                }
                acc = curve.add(acc, g);
                if acc.is_none() && q.is_some() {
                    break;
                }
            }
            Err(SolveError::failed("discrete log", "Q is not a multiple of G"))
        }
        "faulty_curve" => {
            let (curve, g, q) = small_curve(c)?;
            let p = curve.p;
            // y^2 = (x - r)^2 (x + 2r) has a = -3r^2, b = 2r^3, so r = -3b / 2a.
            let den = inv_mod_u64(2 * curve.a % p, p).ok_or_else(|| malformed("a", "curve is not singular with a node"))?;
            let r = (p - 3 * curve.b % p) % p * den % p;
            let nodal = NodalCurve::new(p, r).ok_or_else(|| SolveError::failed("singular map", "no node at r"))?;
            if nodal.curve != curve {
                return Err(SolveError::failed("singular map", "curve is not of the form (x - r)^2 (x + 2r)"));
            }
            let ug = nodal.to_multiplicative(g).ok_or_else(|| SolveError::failed("singular map", "G is the node"))?;
            let uq = nodal.to_multiplicative(q).ok_or_else(|| SolveError::failed("singular map", "Q is the node"))?;
            let mut acc = ug;
            for d in 1..p {
                if acc == uq {
                    return unwrap_secret(c, &d.to_string(), "map to the multiplicative group", d);
                }
                acc = acc * ug % p;
            }
            Err(SolveError::failed("discrete log", "no exponent in F_p*"))
        }
        "ecdsa_reused_nonce" | "nonce_reuse_ecdsa" => {
            let curve_name = art(c, "curve")?;
            let curve = Curve::by_name(curve_name).ok_or_else(|| malformed("curve", format!("unknown curve {curve_name}")))?;
            let public = Point::parse(art(c, "public_key")?).ok_or_else(|| malformed("public_key", "expected (x, y)"))?;
            let sig = |i: u8| -> Result<EcdsaSignature, SolveError> {
                Ok(EcdsaSignature {
                    r: art_int(c, &format!("r{i}"))?,
                    s: art_int(c, &format!("s{i}"))?,
                    h: ecdsa_hash(art(c, &format!("msg{i}"))?.as_bytes(), &curve.n),
                    curve_id: curve.name.clone(),
                })
            };
            let d = recover_ecdsa_private(&sig(1)?, &sig(2)?, &curve.n)?;
            if curve.mul_g(&d) != public {
                return Err(SolveError::failed("ecdsa", "recovered key does not match the public key"));
            }
            unwrap_secret(c, &d.to_string(), "nonce reuse key recovery", 1)
        }
        "md5_reverse" => {
            let target = art(c, "md5")?.to_ascii_lowercase();
            let mut steps = 0;
            let found = search_letters(5, |cand| {
                steps += 1;
                md5_hex(cand.as_bytes()) == target
            });
            let secret = found.ok_or_else(|| SolveError::failed("md5", "no preimage of five letters or fewer"))?;
            unwrap_secret(c, &secret, "dictionary-free brute force", steps)
        }
        "iterated_hash" => {
            let rounds: u32 = art(c, "iterations")?.trim().parse().map_err(|_| malformed("iterations", "not a number"))?;
            let target = art_hex(c, "digest")?;
            let mut steps = 0;
            let found = search_letters(4, |cand| {
                steps += rounds as u64;
                iterated_sha256(cand.as_bytes(), rounds)[..] == target[..]
            });
            let secret = found.ok_or_else(|| SolveError::failed("iterated hash", "no preimage in the stated charset"))?;
            unwrap_secret(c, &secret, "brute force of short secret", steps)
        }
        "poor_random_salt" => {
            let window = art_range(c, "salt_window")?;
            let ct = art_hex(c, "ciphertext_hex")?;
            for (i, salt) in window.enumerate() {
                if let Some(flag) = as_flag(&sha256_stream_xor(&salt.to_string(), &ct)) {
                    return outcome(flag, "timestamp salt search", i as u64 + 1);
                }
            }
            Err(SolveError::failed("salt search", "no timestamp in the window"))
        }
        "predictable_seed" | "time_based_seed" => {
            let key = if name == "predictable_seed" { "seed_range" } else { "encrypted_between" };
            let window = art_range(c, key)?;
            let ct = art_hex(c, "ciphertext_hex")?;
            for (i, seed) in window.enumerate() {
                let mut mt = Mt19937::python_seeded(seed);
                let head: Vec<u8> = ct.iter().take(PREFIX.len()).map(|b| b ^ mt.getrandbits8()).collect();
                if head != PREFIX[..head.len()] {
                    continue;
                }
                let ks = Mt19937::python_seeded(seed).keystream(ct.len());
                if let Some(flag) = as_flag(&xor_bytes(&ct, &ks)) {
                    return outcome(flag, "seed enumeration", i as u64 + 1);
                }
            }
            Err(SolveError::failed("seed search", "no seed in range"))
        }
        "low_entropy_generator" => {
            let ct = art_hex(c, "ciphertext_hex")?;
            for seed in 1..=u16::MAX {
                let ks = Xorshift16::keystream(seed, ct.len());
                if let Some(flag) = as_flag(&xor_bytes(&ct, &ks)) {
                    return outcome(flag, "16-bit state enumeration", seed as u64);
                }
            }
            Err(SolveError::failed("state search", "no 16-bit seed"))
        }
        "lfsr_weakness" => {
            let ct = art_hex(c, "ciphertext_hex")?;
            let taps = art_u64(c, "taps")? as u16;
            if ct.len() < 2 {
                return Err(malformed("ciphertext_hex", "too short"));
            }
            // The first 16 output bits are the seed itself.
            let seed = u16::from_le_bytes([ct[0] ^ b'f', ct[1] ^ b'l']);
            let ks = Lfsr16::keystream(seed, taps, ct.len());
            outcome(flag_or_fail("lfsr", &xor_bytes(&ct, &ks))?, "state from known prefix", 1)
        }
        "lcg_flaw" => {
            let (a, inc, m) = (art_u64(c, "a")?, art_u64(c, "c")?, art_u64(c, "m")?);
            if m == 0 {
                return Err(malformed("m", "modulus is zero"));
            }
            let outputs = art(c, "outputs")?
                .split(',')
                .map(|s| s.trim().parse::<u64>().map_err(|_| malformed("outputs", "not a number")))
                .collect::<Result<Vec<_>, _>>()?;
            let mut state = *outputs.last().ok_or_else(|| malformed("outputs", "empty"))?;
            let ct = art_hex(c, "ciphertext_hex")?;
            let ks: Vec<u8> = ct
                .iter()
                .map(|_| {
                    state = lcg_next(state, a, inc, m);
                    lcg_byte(state)
                })
                .collect();
            outcome(flag_or_fail("lcg", &xor_bytes(&ct, &ks))?, "continue leaked state", 1)
        }
        "jwt_none" => {
            let token = art(c, "token")?;
            let payload = token.split('.').nth(1).ok_or_else(|| malformed("token", "not a JWT"))?;
            let bytes = URL_SAFE_NO_PAD.decode(payload).map_err(|e| malformed("token", e.to_string()))?;
            let claims: serde_json::Value = serde_json::from_slice(&bytes).map_err(|e| malformed("token", e.to_string()))?;
            let flag = claims
                .get("flag")
                .and_then(|v| v.as_str())
                .ok_or_else(|| SolveError::failed("jwt", "no flag claim"))?;
            outcome(flag_or_fail("jwt", flag.as_bytes())?, "decode unsigned token", 1)
        }
        "weak_cookie_encryption" => {
            let ct = art_hex(c, "cookie_hex")?;
            let key = ct.first().ok_or_else(|| malformed("cookie_hex", "empty"))? ^ b'u';
            let pt: Vec<u8> = ct.iter().map(|b| b ^ key).collect();
            let text = String::from_utf8_lossy(&pt);
            let value = text
                .split(';')
                .find_map(|field| field.strip_prefix("flag="))
                .ok_or_else(|| SolveError::failed("cookie", "no flag field"))?;
            outcome(flag_or_fail("cookie", value.as_bytes())?, "single-byte XOR from known field", 1)
        }
        "broken_key_exchange" => {
            let (p, g) = (art_u64(c, "p")?, art_u64(c, "g")?);
            let (big_a, big_b) = (art_u64(c, "A")?, art_u64(c, "B")?);
            if p < 3 || p > u32::MAX as u64 {
                return Err(malformed("p", "modulus out of range"));
            }
            let mut acc = 1u64;
            for a in 1..p {
                acc = acc * g % p;
                if acc == big_a {
                    let shared = pow_mod_u64(big_b, a, p);
                    let ct = art_hex(c, "ciphertext_hex")?;
                    let pt = sha256_stream_xor(&shared.to_string(), &ct);
                    return outcome(flag_or_fail("key exchange", &pt)?, "discrete log of a small group", a);
                }
            }
            Err(SolveError::failed("discrete log", "A is not a power of g"))
        }
        "insecure_session_token" => {
            let raw = STANDARD.decode(art(c, "session_token")?).map_err(|e| malformed("session_token", e.to_string()))?;
            let text = String::from_utf8_lossy(&raw);
            let last = text.rsplit(':').next().unwrap_or_default();
            outcome(flag_or_fail("session token", last.as_bytes())?, "decode token", 1)
        }
        other => Err(SolveError::Unsupported(other.to_string())),
    }
}

fn small_curve(c: &PublicChallenge) -> Result<(SmallCurve, Option<(u64, u64)>, Option<(u64, u64)>), SolveError> {
    let curve = SmallCurve { p: art_u64(c, "p")?, a: art_u64(c, "a")?, b: art_u64(c, "b")? };
    if curve.p < 3 || curve.p > u32::MAX as u64 {
        return Err(malformed("p", "field size out of range"));
    }
    let point = |key: &str| {
        let pt = SmallCurve::parse_point(art(c, key)?).ok_or_else(|| malformed(key, "expected (x, y)"))?;
        if curve.contains(pt) {
            Ok(pt)
        } else {
            Err(malformed(key, "point is not on the curve"))
        }
    };
    Ok((curve, point("G")?, point("Q")?))
}

fn unwrap_secret(c: &PublicChallenge, secret: &str, method: &'static str, steps: u64) -> SolveResult {
    let ct = art_hex(c, "ciphertext_hex")?;
    outcome(flag_or_fail("unwrap", &sha256_stream_xor(secret, &ct))?, method, steps)
}

/// Every lowercase string of length 1 to `max_len`, shortest first.
fn search_letters(max_len: usize, mut hit: impl FnMut(&str) -> bool) -> Option<String> {
    for len in 1..=max_len {
        let mut buf = vec![b'a'; len];
        loop {
            let cand = std::str::from_utf8(&buf).expect("ascii");
            if hit(cand) {
                return Some(cand.to_string());
            }
            let mut i = len;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                if buf[i] == b'z' {
                    buf[i] = b'a';
                } else {
                    buf[i] += 1;
                    break;
                }
            }
            if buf.iter().all(|&b| b == b'a') {
                break;
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn letter_search_order_and_coverage() {
        let mut seen = Vec::new();
        search_letters(2, |s| {
            seen.push(s.to_string());
            false
        });
        assert_eq!(seen.len(), 26 + 26 * 26);
        assert_eq!(seen[0], "a");
        assert_eq!(seen[26], "aa");
        assert_eq!(seen.last().unwrap(), "zz");
        assert_eq!(search_letters(3, |s| s == "cab").as_deref(), Some("cab"));
    }

    #[test]
    fn lfsr_prefix_is_seed() {
        let ks = Lfsr16::keystream(0xbeef, 0x002d, 2);
        assert_eq!(u16::from_le_bytes([ks[0], ks[1]]), 0xbeef);
    }
}
