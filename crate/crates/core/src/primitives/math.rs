//! Number theory over `BigUint` and `u64`.

use num_bigint::{BigInt, BigUint, RandBigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::Rng;

const SMALL_PRIMES: [u64; 54] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
    97, 101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191,
    193, 197, 199, 211, 223, 227, 229, 233, 239, 241, 251,
];

pub fn mod_inverse(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    if m.is_zero() {
        return None;
    }
    let a = BigInt::from_biguint(Sign::Plus, a % m);
    let m_int = BigInt::from_biguint(Sign::Plus, m.clone());
    let ext = a.extended_gcd(&m_int);
    if !ext.gcd.is_one() {
        return None;
    }
    let x = ext.x.mod_floor(&m_int);
    x.to_biguint()
}

/// `a - b mod m` for residues already reduced below `m`.
pub fn mod_sub(a: &BigUint, b: &BigUint, m: &BigUint) -> BigUint {
    let a = a % m;
    let b = b % m;
    if a >= b {
        a - b
    } else {
        m - (b - a)
    }
}

pub fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_u64(acc, base, m);
        }
        base = mul_mod_u64(base, base, m);
        exp >>= 1;
    }
    acc
}

pub fn inv_mod_u64(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// Deterministic Miller-Rabin; exact for every `u64`.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &SMALL_PRIMES[..12] {
        if n % p == 0 {
            return n == p;
        }
    }
    let (d, s) = split_pow2(n - 1);
    'witness: for &a in &SMALL_PRIMES[..12] {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn split_pow2(mut d: u64) -> (u64, u32) {
    let s = d.trailing_zeros();
    d >>= s;
    (d, s)
}

/// Miller-Rabin with the first 24 primes as bases. Random inputs of the
/// sizes used here have a negligible chance of fooling it.
pub fn is_probable_prime(n: &BigUint) -> bool {
    if let Some(small) = u64::try_from(n).ok() {
        return is_prime_u64(small);
    }
    for &p in SMALL_PRIMES.iter() {
        if (n % p).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'witness: for &a in &SMALL_PRIMES[..24] {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&BigUint::from(2u32), n);
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Uniform prime with exactly `bits` bits satisfying `accept`.
pub fn random_prime<R: Rng + ?Sized>(
    rng: &mut R,
    bits: u64,
    accept: impl Fn(&BigUint) -> bool,
) -> BigUint {
    assert!(bits >= 3);
    loop {
        let mut candidate = rng.gen_biguint(bits);
        candidate.set_bit(bits - 1, true);
        candidate.set_bit(0, true);
        if accept(&candidate) && is_probable_prime(&candidate) {
            return candidate;
        }
    }
}

pub fn random_prime_u64<R: Rng + ?Sized>(rng: &mut R, lo: u64, hi: u64) -> u64 {
    loop {
        let c = rng.gen_range(lo..hi) | 1;
        if c < hi && is_prime_u64(c) {
            return c;
        }
    }
}

/// Smallest prime `>= start` satisfying `accept`.
pub fn next_prime(start: &BigUint, accept: impl Fn(&BigUint) -> bool) -> BigUint {
    let mut c = start | BigUint::one();
    loop {
        if accept(&c) && is_probable_prime(&c) {
            return c;
        }
        c += 2u32;
    }
}

pub fn lcm(a: &BigUint, b: &BigUint) -> BigUint {
    a.lcm(b)
}

/// Floor of the square root.
pub fn isqrt(n: &BigUint) -> BigUint {
    n.sqrt()
}

/// Floor of the cube root, by binary search.
pub fn icbrt(n: &BigUint) -> BigUint {
    if n.is_zero() {
        return BigUint::zero();
    }
    let mut lo = BigUint::zero();
    let mut hi = BigUint::one() << (n.bits() / 3 + 1);
    // invariant: lo^3 <= n < hi^3
    while &hi - &lo > BigUint::one() {
        let mid: BigUint = (&lo + &hi) >> 1;
        if mid.pow(3) <= *n {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Prime factorisation of a `u64` by trial division.
pub fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Multiplicative order of `g` modulo prime `p`.
pub fn mult_order_u64(g: u64, p: u64) -> u64 {
    let mut order = p - 1;
    for (q, _) in factor_u64(p - 1) {
        while order % q == 0 && pow_mod_u64(g, order / q, p) == 1 {
            order /= q;
        }
    }
    order
}

/// Square root modulo an odd prime (Tonelli-Shanks). `None` for
/// non-residues.
pub fn sqrt_mod_u64(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if pow_mod_u64(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    let (q, s) = split_pow2(p - 1);
    let mut z = 2;
    while pow_mod_u64(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod_u64(z, q, p);
    let mut t = pow_mod_u64(a, q, p);
    let mut r = pow_mod_u64(a, (q + 1) / 2, p);
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mul_mod_u64(t2, t2, p);
            i += 1;
        }
        let b = pow_mod_u64(c, 1 << (m - i - 1), p);
        m = i;
        c = mul_mod_u64(b, b, p);
        t = mul_mod_u64(t, c, p);
        r = mul_mod_u64(r, b, p);
    }
    Some(r)
}

pub fn bytes_to_int(bytes: &[u8]) -> BigUint {
    BigUint::from_bytes_be(bytes)
}

pub fn int_to_bytes(n: &BigUint) -> Vec<u8> {
    if n.is_zero() {
        return vec![0];
    }
    n.to_bytes_be()
}

pub fn parse_biguint(s: &str) -> Option<BigUint> {
    let s = s.trim();
    match s.strip_prefix("0x") {
        Some(hex) => BigUint::parse_bytes(hex.as_bytes(), 16),
        None => BigUint::parse_bytes(s.as_bytes(), 10),
    }
}

pub fn signed_mod(a: &BigInt, m: &BigUint) -> BigUint {
    let m = BigInt::from_biguint(Sign::Plus, m.clone());
    let r = a.mod_floor(&m);
    debug_assert!(!r.is_negative());
    r.to_biguint().unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn naive_is_prime(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
    }

    #[test]
    fn miller_rabin_matches_trial_division() {
        for n in 0..20_000u64 {
            assert_eq!(is_prime_u64(n), naive_is_prime(n), "{n}");
            assert_eq!(is_probable_prime(&BigUint::from(n)), naive_is_prime(n));
        }
        // Carmichael numbers
        for n in [561u64, 1105, 1729, 2465, 2821, 6601, 8911, 3_215_031_751] {
            assert!(!is_prime_u64(n));
        }
        let m61 = (BigUint::one() << 61u32) - 1u32;
        assert!(is_probable_prime(&m61));
        let m127 = (BigUint::one() << 127u32) - 1u32;
        assert!(is_probable_prime(&m127));
        assert!(!is_probable_prime(&(&m127 * &m61)));
    }

    #[test]
    fn inverses() {
        assert_eq!(
            mod_inverse(&BigUint::from(3u32), &BigUint::from(11u32)),
            Some(BigUint::from(4u32))
        );
        assert_eq!(mod_inverse(&BigUint::from(4u32), &BigUint::from(26u32)), None);
        for a in 1..97u64 {
            let inv = inv_mod_u64(a, 97).unwrap();
            assert_eq!(a * inv % 97, 1);
        }
        assert_eq!(inv_mod_u64(13, 26), None);
    }

    #[test]
    fn roots() {
        assert_eq!(icbrt(&BigUint::from(125u32)), BigUint::from(5u32));
        assert_eq!(icbrt(&BigUint::from(126u32)), BigUint::from(5u32));
        assert_eq!(icbrt(&BigUint::from(124u32)), BigUint::from(4u32));
        assert_eq!(icbrt(&BigUint::from(1u32)), BigUint::one());
        let big = (BigUint::one() << 300u32) + 12345u32;
        let r = icbrt(&big);
        assert!(r.pow(3) <= big && (&r + 1u32).pow(3) > big);
    }

    #[test]
    fn tonelli_shanks() {
        for p in [13u64, 17, 41, 65_537, 1_000_003] {
            for a in 1..200u64 {
                if let Some(r) = sqrt_mod_u64(a, p) {
                    assert_eq!(mul_mod_u64(r, r, p), a % p);
                } else {
                    assert_eq!(pow_mod_u64(a, (p - 1) / 2, p), p - 1);
                }
            }
        }
    }

    #[test]
    fn orders_and_factors() {
        assert_eq!(factor_u64(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(mult_order_u64(2, 7), 3);
        assert_eq!(mult_order_u64(3, 7), 6);
    }

    #[test]
    fn random_primes_have_requested_size() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let p = random_prime(&mut rng, 64, |p| p % 4u32 == BigUint::from(3u32));
        assert_eq!(p.bits(), 64);
        assert_eq!(&p % 4u32, BigUint::from(3u32));
        let q = random_prime_u64(&mut rng, 1 << 20, 1 << 21);
        assert!(is_prime_u64(q) && (1 << 20..1 << 21).contains(&q));
    }
}
