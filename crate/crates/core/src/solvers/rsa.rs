use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::{art, art_hex, art_int, flag_or_fail, malformed, outcome, rsa_common_factor, rsa_cube_root, SolveError, SolveResult};
use crate::challenge::PublicChallenge;
use crate::primitives::math::{int_to_bytes, isqrt, lcm, mod_inverse};
use crate::primitives::sha256_stream_xor;

fn private_exponent(p: &BigUint, q: &BigUint, e: &BigUint) -> Result<BigUint, SolveError> {
    let one = BigUint::one();
    let order = if p == q { p * (p - &one) } else { lcm(&(p - &one), &(q - &one)) };
    mod_inverse(e, &order).ok_or_else(|| SolveError::failed("rsa", "e is not invertible for the recovered factors"))
}

fn decrypt(p: &BigUint, q: &BigUint, e: &BigUint, c: &BigUint) -> Result<BigUint, SolveError> {
    let d = private_exponent(p, q, e)?;
    Ok(c.modpow(&d, &(p * q)))
}

fn check_factor(n: &BigUint, p: &BigUint) -> Result<BigUint, SolveError> {
    if p.is_zero() || p.is_one() || p == n || !(n % p).is_zero() {
        return Err(SolveError::failed("factoring", "no nontrivial factor"));
    }
    Ok(n / p)
}

pub(super) fn solve(name: &str, c: &PublicChallenge) -> SolveResult {
    let e = art_int(c, "e")?;
    let ct = art_int(c, "c")?;
    let (p, q, method, steps) = match name {
        "small_primes" => {
            let n = art_int(c, "n")?.to_u64().ok_or_else(|| malformed("n", "modulus above 64 bits"))?;
            let (p, steps) = trial_division(n).ok_or_else(|| SolveError::failed("trial division", "n has no small factor"))?;
            let (p, q) = (BigUint::from(p), BigUint::from(n / p));
            let secret = decrypt(&p, &q, &e, &ct)?;
            let wrapped = art_hex(c, "flag_ciphertext_hex")?;
            let flag = flag_or_fail("unwrap", &sha256_stream_xor(&secret.to_string(), &wrapped))?;
            return outcome(flag, "trial division", steps);
        }
        "repeated_prime" => {
            let n = art_int(c, "n")?;
            let p = isqrt(&n);
            if &p * &p != n {
                return Err(SolveError::failed("square root", "n is not a perfect square"));
            }
            (p.clone(), p, "integer square root of p^2", 1)
        }
        "partial_key_exposure" => {
            let n = art_int(c, "n")?;
            let high = art_int(c, "p_high")?;
            let bits: u32 = art(c, "unknown_low_bits")?.trim().parse().map_err(|_| malformed("unknown_low_bits", "not a number"))?;
            if bits > 24 {
                return Err(malformed("unknown_low_bits", "too many unknown bits for exhaustive search"));
            }
            let base = high << bits;
            let mut steps = 0;
            let mut found = None;
            for low in (1u64..1 << bits).step_by(2) {
                steps += 1;
                let cand = &base + low;
                if (&n % &cand).is_zero() {
                    found = Some(cand);
                    break;
                }
            }
            let p = found.ok_or_else(|| SolveError::failed("low-bit search", "no candidate divides n"))?;
            let q = check_factor(&n, &p)?;
            (p, q, "exhaustive search of hidden low bits", steps)
        }
        "common_factors" => {
            let n1 = art_int(c, "n1")?;
            let n2 = art_int(c, "n2")?;
            let p = rsa_common_factor(&n1, &n2);
            let q = check_factor(&n1, &p)?;
            (p, q, "gcd of moduli", 1)
        }
        "shared_prime" => {
            let target: usize = art(c, "target")?.trim().parse().map_err(|_| malformed("target", "not an index"))?;
            let mut moduli = Vec::new();
            while let Some(n) = c.artifact(&format!("n_{}", moduli.len() + 1)) {
                moduli.push(crate::primitives::math::parse_biguint(n).ok_or_else(|| malformed("n_k", "not an integer"))?);
            }
            if target == 0 || target > moduli.len() {
                return Err(malformed("target", "out of range"));
            }
            let n = &moduli[target - 1];
            let mut steps = 0;
            let mut found = None;
            for (k, other) in moduli.iter().enumerate() {
                if k + 1 == target {
                    continue;
                }
                steps += 1;
                let g = n.gcd(other);
                if !g.is_one() && &g != n {
                    found = Some(g);
                    break;
                }
            }
            let p = found.ok_or_else(|| SolveError::failed("pairwise gcd", "target shares no prime"))?;
            let q = check_factor(n, &p)?;
            (p, q, "pairwise gcd", steps)
        }
        "blum_integers" => {
            let n = art_int(c, "n")?;
            let limit = super::work_ceiling(c.subtype);
            let (p, steps) = fermat(&n, limit).ok_or_else(|| SolveError::failed("Fermat", "factors are not close"))?;
            let q = check_factor(&n, &p)?;
            (p, q, "Fermat factorisation", steps)
        }
        "rsa_low_exponent" => {
            if e != BigUint::from(3u32) {
                return Err(malformed("e", "expected e = 3"));
            }
            let m = rsa_cube_root(&ct)?;
            return outcome(flag_or_fail("cube root", &int_to_bytes(&m))?, "integer cube root", 1);
        }
        other => return Err(SolveError::Unsupported(other.to_string())),
    };
    let m = decrypt(&p, &q, &e, &ct)?;
    outcome(flag_or_fail(name_stage(name), &int_to_bytes(&m))?, method, steps)
}

fn name_stage(name: &str) -> &'static str {
    match name {
        "repeated_prime" => "repeated prime",
        "partial_key_exposure" => "partial key",
        "common_factors" => "common factor",
        "shared_prime" => "shared prime",
        _ => "rsa",
    }
}

/// Smallest odd factor of `n` and the number of divisors tried.
fn trial_division(n: u64) -> Option<(u64, u64)> {
    if n % 2 == 0 && n > 2 {
        return Some((2, 1));
    }
    let mut steps = 0;
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        steps += 1;
        if n % d == 0 {
            return Some((d, steps));
        }
        d += 2;
    }
    None
}

/// Fermat's method: walk `a` up from `ceil(sqrt(n))` until `a^2 - n` is square.
pub(crate) fn fermat(n: &BigUint, limit: u64) -> Option<(BigUint, u64)> {
    let mut a = isqrt(n);
    if &a * &a < *n {
        a += 1u32;
    }
    for step in 1..=limit {
        let b2 = &a * &a - n;
        let b = isqrt(&b2);
        if &b * &b == b2 {
            let p = &a - &b;
            return (!p.is_one()).then_some((p, step));
        }
        a += 1u32;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trial_division_finds_smallest_factor() {
        assert_eq!(trial_division(15).map(|r| r.0), Some(3));
        assert_eq!(trial_division(10_007 * 10_009).map(|r| r.0), Some(10_007));
        assert_eq!(trial_division(10_007), None);
    }

    #[test]
    fn fermat_close_primes() {
        let n = BigUint::from(10_007u64 * 10_009);
        assert_eq!(fermat(&n, 4).unwrap().0, BigUint::from(10_007u32));
        let far = BigUint::from(3u64 * 1_000_003);
        assert!(fermat(&far, 4).is_none());
    }
}
