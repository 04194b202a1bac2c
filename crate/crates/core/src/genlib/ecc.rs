//! Elliptic-curve subtypes: tiny groups, a singular curve, and ECDSA with a
//! repeated nonce.

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

use super::corpus::SIGNED_MESSAGES;
use super::{GenError, GenRng, Plant};
use crate::flag::Flag;
use crate::primitives::curve::{Curve, Point, SmallCurve, SmallPoint};
use crate::primitives::math::{
    bytes_to_int, mod_inverse, mult_order_u64, random_prime_u64, sqrt_mod_u64,
};
use crate::primitives::{sha256, sha256_stream_xor};

/// Smallest acceptable order for the base point of the brute-force curves.
pub const MIN_BASE_ORDER: u64 = 1_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EcdsaSignature {
    pub r: BigUint,
    pub s: BigUint,
    /// Message hash reduced mod the group order.
    pub h: BigUint,
    pub curve_id: String,
}

/// `int(sha256(msg)) mod n`.
pub fn ecdsa_hash(msg: &[u8], n: &BigUint) -> BigUint {
    bytes_to_int(&sha256(msg)) % n
}

/// Signs `h` with nonce `k`. Returns an error when `k` yields `r = 0` or
/// `s = 0`; the caller should draw a new nonce.
pub fn ecdsa_sign_with_nonce(
    h: &BigUint,
    k: &BigUint,
    d: &BigUint,
    curve: &Curve,
) -> Result<EcdsaSignature, GenError> {
    let n = &curve.n;
    if k.is_zero() || k >= n || d.is_zero() || d >= n {
        return Err(GenError::Argument("nonce and key must lie in [1, n)".into()));
    }
    let r = match curve.mul_g(k) {
        Point::Affine { x, .. } => x % n,
        Point::Infinity => BigUint::zero(),
    };
    if r.is_zero() {
        return Err(GenError::Argument("nonce gives r = 0".into()));
    }
    let k_inv = mod_inverse(k, n).ok_or_else(|| GenError::Argument("nonce not invertible".into()))?;
    let s = k_inv * ((h + &r * d) % n) % n;
    if s.is_zero() {
        return Err(GenError::Argument("nonce gives s = 0".into()));
    }
    Ok(EcdsaSignature { r, s, h: h.clone(), curve_id: curve.name.clone() })
}

pub fn ecdsa_verify(sig: &EcdsaSignature, public: &Point, curve: &Curve) -> bool {
    let n = &curve.n;
    if sig.r.is_zero() || &sig.r >= n || sig.s.is_zero() || &sig.s >= n {
        return false;
    }
    let Some(w) = mod_inverse(&sig.s, n) else { return false };
    let u1 = &sig.h * &w % n;
    let u2 = &sig.r * &w % n;
    match curve.add(&curve.mul_g(&u1), &curve.mul(&u2, public)) {
        Point::Affine { x, .. } => x % n == sig.r,
        Point::Infinity => false,
    }
}

fn random_point(curve: &SmallCurve, rng: &mut GenRng) -> SmallPoint {
    loop {
        let x = rng.gen_range(0..curve.p);
        if let Some(y) = sqrt_mod_u64(curve.rhs(x), curve.p) {
            if y != 0 {
                let y = if rng.gen_bool(0.5) { y } else { curve.p - y };
                return Some((x, y));
            }
        }
    }
}

/// Curve over a 14 to 16 bit prime field with a base point of order at
/// least [`MIN_BASE_ORDER`].
pub fn small_order_instance(rng: &mut GenRng) -> (SmallCurve, SmallPoint, u64) {
    loop {
        let p = random_prime_u64(rng, 1 << 14, 1 << 16);
        let curve = SmallCurve { p, a: rng.gen_range(0..p), b: rng.gen_range(1..p) };
        if curve.discriminant_is_zero() {
            continue;
        }
        let g = random_point(&curve, rng);
        let order = curve.point_order(g, curve.count_points());
        if order >= MIN_BASE_ORDER {
            return (curve, g, order);
        }
    }
}

/// Nodal cubic `y^2 = (x - r)^2 (x + 2r)` with split tangents at the node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodalCurve {
    pub curve: SmallCurve,
    pub r: u64,
    /// Square root of `3r`: the tangent slopes at the node are `±alpha`.
    pub alpha: u64,
}

impl NodalCurve {
    pub fn new(p: u64, r: u64) -> Option<NodalCurve> {
        let alpha = sqrt_mod_u64(3 * r % p, p)?;
        if r == 0 || alpha == 0 {
            return None;
        }
        let r2 = r * r % p;
        let a = (p - 3 * r2 % p) % p;
        let b = 2 * (r2 * r % p) % p;
        Some(NodalCurve { curve: SmallCurve { p, a, b }, r, alpha })
    }

    /// The point on the line of slope `m` through the node.
    pub fn point_with_slope(&self, m: u64) -> SmallPoint {
        let p = self.curve.p;
        let s = (m * m % p + p - 3 * self.r % p) % p;
        if s == 0 {
            return None;
        }
        Some(((self.r + s) % p, s * m % p))
    }

    /// Isomorphism from the non-singular points onto the multiplicative
    /// group of the field.
    pub fn to_multiplicative(&self, pt: SmallPoint) -> Option<u64> {
        let p = self.curve.p;
        let Some((x, y)) = pt else { return Some(1) };
        let t = self.alpha * ((x + p - self.r) % p) % p;
        let num = (y + t) % p;
        let den = (y + p - t) % p;
        Some(num * crate::primitives::math::inv_mod_u64(den, p)? % p)
    }
}

pub fn nodal_instance(rng: &mut GenRng) -> (NodalCurve, SmallPoint, u64) {
    loop {
        let p = random_prime_u64(rng, 1 << 14, 1 << 16);
        let Some(nodal) = NodalCurve::new(p, rng.gen_range(1..p)) else { continue };
        let g = nodal.point_with_slope(rng.gen_range(1..p));
        let Some(u) = nodal.to_multiplicative(g) else { continue };
        let order = mult_order_u64(u, p);
        if g.is_some() && order >= MIN_BASE_ORDER {
            return (nodal, g, order);
        }
    }
}

fn draw_nonzero_below(rng: &mut GenRng, n: &BigUint) -> BigUint {
    rng.gen_biguint_range(&BigUint::one(), n)
}

pub(super) fn plant(name: &str, rng: &mut GenRng, flag: Flag) -> Plant {
    let pt = flag.render().into_bytes();
    match name {
        "small_order_curve" | "faulty_curve" => {
            let (curve, g, order) = if name == "small_order_curve" {
                small_order_instance(rng)
            } else {
                let (nodal, g, order) = nodal_instance(rng);
                (nodal.curve, g, order)
            };
            let d = rng.gen_range(2..order);
            let q = curve.mul(d, g);
            Plant::new(
                flag,
                &[
                    ("p", curve.p.to_string()),
                    ("a", curve.a.to_string()),
                    ("b", curve.b.to_string()),
                    ("G", SmallCurve::render_point(g)),
                    ("Q", SmallCurve::render_point(q)),
                    ("ciphertext_hex", hex::encode(sha256_stream_xor(&d.to_string(), &pt))),
                ],
            )
            .param("d", d)
            .param("base_order", order)
        }
        "ecdsa_reused_nonce" | "nonce_reuse_ecdsa" => {
            let curve = if name == "ecdsa_reused_nonce" { Curve::secp256k1() } else { Curve::p256() };
            let d = draw_nonzero_below(rng, &curve.n);
            let public = curve.mul_g(&d);
            let msgs: Vec<&str> = SIGNED_MESSAGES.choose_multiple(rng, 2).copied().collect();
            let (h1, h2) = (ecdsa_hash(msgs[0].as_bytes(), &curve.n), ecdsa_hash(msgs[1].as_bytes(), &curve.n));
            let (k, sig1, sig2) = loop {
                let k = draw_nonzero_below(rng, &curve.n);
                let (Ok(s1), Ok(s2)) = (
                    ecdsa_sign_with_nonce(&h1, &k, &d, &curve),
                    ecdsa_sign_with_nonce(&h2, &k, &d, &curve),
                ) else {
                    continue;
                };
                if s1.s != s2.s {
                    break (k, s1, s2);
                }
            };
            Plant::new(
                flag,
                &[
                    ("curve", curve.name.clone()),
                    ("public_key", public.render()),
                    ("hash", "sha256(message) as big-endian integer mod n".to_string()),
                    ("msg1", msgs[0].to_string()),
                    ("r1", sig1.r.to_string()),
                    ("s1", sig1.s.to_string()),
                    ("msg2", msgs[1].to_string()),
                    ("r2", sig2.r.to_string()),
                    ("s2", sig2.s.to_string()),
                    ("ciphertext_hex", hex::encode(sha256_stream_xor(&d.to_string(), &pt))),
                ],
            )
            .param("d", d)
            .param("k", k)
        }
        other => unreachable!("{other} is not an elliptic-curve subtype"),
    }
}
