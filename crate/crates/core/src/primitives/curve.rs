//! Short Weierstrass curves `y^2 = x^3 + ax + b` in affine coordinates.
//!
//! [`Curve`] works over `BigUint` and carries a base point of known order
//! (named curves and ECDSA). [`SmallCurve`] works over `u64` fields small
//! enough to brute-force, and makes no assumption that the curve is
//! non-singular.

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::math::{inv_mod_u64, mod_inverse, mod_sub, mul_mod_u64, pow_mod_u64};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Point {
    Infinity,
    Affine { x: BigUint, y: BigUint },
}

impl Point {
    pub fn new(x: BigUint, y: BigUint) -> Self {
        Point::Affine { x, y }
    }

    pub fn x(&self) -> Option<&BigUint> {
        match self {
            Point::Infinity => None,
            Point::Affine { x, .. } => Some(x),
        }
    }

    /// `(x, y)` in decimal, or `inf`.
    pub fn render(&self) -> String {
        match self {
            Point::Infinity => "inf".to_string(),
            Point::Affine { x, y } => format!("({x}, {y})"),
        }
    }

    pub fn parse(s: &str) -> Option<Point> {
        let s = s.trim();
        if s == "inf" {
            return Some(Point::Infinity);
        }
        let inner = s.strip_prefix('(')?.strip_suffix(')')?;
        let (x, y) = inner.split_once(',')?;
        Some(Point::Affine {
            x: x.trim().parse().ok()?,
            y: y.trim().parse().ok()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Curve {
    pub name: String,
    pub p: BigUint,
    pub a: BigUint,
    pub b: BigUint,
    pub g: Point,
    /// Order of `g`.
    pub n: BigUint,
}

fn hex(s: &str) -> BigUint {
    BigUint::parse_bytes(s.as_bytes(), 16).expect("valid hex constant")
}

impl Curve {
    pub fn secp256k1() -> Curve {
        Curve {
            name: "secp256k1".into(),
            p: hex("FFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEFFFFFC2F"),
            a: BigUint::zero(),
            b: BigUint::from(7u32),
            g: Point::new(
                hex("79BE667EF9DCBBAC55A06295CE870B07029BFCDB2DCE28D959F2815B16F81798"),
                hex("483ADA7726A3C4655DA4FBFC0E1108A8FD17B448A68554199C47D08FFB10D4B8"),
            ),
            n: hex("FFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141"),
        }
    }

    pub fn p256() -> Curve {
        let p = hex("FFFFFFFF00000001000000000000000000000000FFFFFFFFFFFFFFFFFFFFFFFF");
        Curve {
            name: "P-256".into(),
            a: &p - 3u32,
            p,
            b: hex("5AC635D8AA3A93E7B3EBBD55769886BC651D06B0CC53B0F63BCE3C3E27D2604B"),
            g: Point::new(
                hex("6B17D1F2E12C4247F8BCE6E563A440F277037D812DEB33A0F4A13945D898C296"),
                hex("4FE342E2FE1A7F9B8EE7EB4A7C0F9E162BCE33576B315ECECBB6406837BF51F5"),
            ),
            n: hex("FFFFFFFF00000000FFFFFFFFFFFFFFFFBCE6FAADA7179E84F3B9CAC2FC632551"),
        }
    }

    pub fn by_name(name: &str) -> Option<Curve> {
        match name {
            "secp256k1" => Some(Curve::secp256k1()),
            "P-256" | "secp256r1" | "prime256v1" => Some(Curve::p256()),
            _ => None,
        }
    }

    pub fn contains(&self, pt: &Point) -> bool {
        match pt {
            Point::Infinity => true,
            Point::Affine { x, y } => {
                let lhs = (y * y) % &self.p;
                let rhs = (x * x * x + &self.a * x + &self.b) % &self.p;
                lhs == rhs
            }
        }
    }

    pub fn neg(&self, pt: &Point) -> Point {
        match pt {
            Point::Infinity => Point::Infinity,
            Point::Affine { x, y } => Point::new(x.clone(), mod_sub(&BigUint::zero(), y, &self.p)),
        }
    }

    pub fn add(&self, lhs: &Point, rhs: &Point) -> Point {
        let p = &self.p;
        match (lhs, rhs) {
            (Point::Infinity, q) | (q, Point::Infinity) => q.clone(),
            (Point::Affine { x: x1, y: y1 }, Point::Affine { x: x2, y: y2 }) => {
                let slope = if x1 == x2 {
                    if ((y1 + y2) % p).is_zero() {
                        return Point::Infinity;
                    }
                    let num = (BigUint::from(3u32) * x1 * x1 + &self.a) % p;
                    let den = (BigUint::from(2u32) * y1) % p;
                    match mod_inverse(&den, p) {
                        Some(inv) => num * inv % p,
                        None => return Point::Infinity,
                    }
                } else {
                    let num = mod_sub(y2, y1, p);
                    let den = mod_sub(x2, x1, p);
                    match mod_inverse(&den, p) {
                        Some(inv) => num * inv % p,
                        None => return Point::Infinity,
                    }
                };
                let x3 = mod_sub(&(&slope * &slope % p), &((x1 + x2) % p), p);
                let y3 = mod_sub(&(&slope * mod_sub(x1, &x3, p) % p), y1, p);
                Point::new(x3, y3)
            }
        }
    }

    pub fn mul(&self, k: &BigUint, pt: &Point) -> Point {
        let mut acc = Point::Infinity;
        for i in (0..k.bits()).rev() {
            acc = self.add(&acc, &acc);
            if k.bit(i) {
                acc = self.add(&acc, pt);
            }
        }
        acc
    }

    pub fn mul_g(&self, k: &BigUint) -> Point {
        self.mul(k, &self.g)
    }
}

/// Affine point over a `u64` field; `None` is the point at infinity.
pub type SmallPoint = Option<(u64, u64)>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmallCurve {
    pub p: u64,
    pub a: u64,
    pub b: u64,
}

impl SmallCurve {
    pub fn discriminant_is_zero(&self) -> bool {
        let p = self.p;
        let a3 = mul_mod_u64(mul_mod_u64(self.a, self.a, p), self.a, p);
        let b2 = mul_mod_u64(self.b, self.b, p);
        (mul_mod_u64(4, a3, p) + mul_mod_u64(27, b2, p)) % p == 0
    }

    pub fn rhs(&self, x: u64) -> u64 {
        let p = self.p;
        let x3 = mul_mod_u64(mul_mod_u64(x, x, p), x, p);
        (x3 + mul_mod_u64(self.a, x, p) + self.b) % p
    }

    pub fn contains(&self, pt: SmallPoint) -> bool {
        match pt {
            None => true,
            Some((x, y)) => mul_mod_u64(y, y, self.p) == self.rhs(x),
        }
    }

    pub fn add(&self, lhs: SmallPoint, rhs: SmallPoint) -> SmallPoint {
        let p = self.p;
        let (x1, y1) = match lhs {
            None => return rhs,
            Some(v) => v,
        };
        let (x2, y2) = match rhs {
            None => return lhs,
            Some(v) => v,
        };
        let slope = if x1 == x2 {
            if (y1 + y2) % p == 0 {
                return None;
            }
            let num = (mul_mod_u64(3, mul_mod_u64(x1, x1, p), p) + self.a) % p;
            mul_mod_u64(num, inv_mod_u64(2 * y1 % p, p)?, p)
        } else {
            let num = (y2 + p - y1) % p;
            let den = (x2 + p - x1) % p;
            mul_mod_u64(num, inv_mod_u64(den, p)?, p)
        };
        let x3 = (mul_mod_u64(slope, slope, p) + 2 * p - x1 - x2) % p;
        let y3 = (mul_mod_u64(slope, (x1 + p - x3) % p, p) + p - y1) % p;
        Some((x3, y3))
    }

    pub fn mul(&self, mut k: u64, pt: SmallPoint) -> SmallPoint {
        let mut acc = None;
        let mut base = pt;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(acc, base);
            }
            base = self.add(base, base);
            k >>= 1;
        }
        acc
    }

    /// Number of points including infinity, counted with Euler's criterion.
    pub fn count_points(&self) -> u64 {
        let p = self.p;
        let mut count = 1;
        for x in 0..p {
            let r = self.rhs(x);
            if r == 0 {
                count += 1;
            } else if pow_mod_u64(r, (p - 1) / 2, p) == 1 {
                count += 2;
            }
        }
        count
    }

    /// Order of `pt` given the group order `group_order`.
    pub fn point_order(&self, pt: SmallPoint, group_order: u64) -> u64 {
        let mut order = group_order;
        for (q, _) in super::math::factor_u64(group_order) {
            while order % q == 0 && self.mul(order / q, pt).is_none() {
                order /= q;
            }
        }
        order
    }

    pub fn render_point(pt: SmallPoint) -> String {
        match pt {
            None => "inf".into(),
            Some((x, y)) => format!("({x}, {y})"),
        }
    }

    pub fn parse_point(s: &str) -> Option<SmallPoint> {
        let s = s.trim();
        if s == "inf" {
            return Some(None);
        }
        let inner = s.strip_prefix('(')?.strip_suffix(')')?;
        let (x, y) = inner.split_once(',')?;
        Some(Some((x.trim().parse().ok()?, y.trim().parse().ok()?)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_curves_are_consistent() {
        for curve in [Curve::secp256k1(), Curve::p256()] {
            assert!(curve.contains(&curve.g), "{}", curve.name);
            assert_eq!(curve.mul_g(&curve.n), Point::Infinity, "{}", curve.name);
            let two_g = curve.mul_g(&BigUint::from(2u32));
            assert_eq!(two_g, curve.add(&curve.g, &curve.g));
            assert!(curve.contains(&two_g));
        }
    }

    #[test]
    fn secp256k1_known_multiple() {
        // 2G on secp256k1
        let c = Curve::secp256k1();
        let two_g = c.mul_g(&BigUint::from(2u32));
        assert_eq!(
            two_g.x().unwrap(),
            &hex("C6047F9441ED7D6D3045406E95C07CD85C778E4B8CEF3CA7ABAC09B95C709EE5")
        );
    }

    #[test]
    fn small_curve_group_law_brute_force() {
        // y^2 = x^3 + 2x + 3 over F_97
        let c = SmallCurve { p: 97, a: 2, b: 3 };
        let mut points = vec![None];
        for x in 0..97 {
            for y in 0..97 {
                if c.contains(Some((x, y))) {
                    points.push(Some((x, y)));
                }
            }
        }
        assert_eq!(points.len() as u64, c.count_points());
        let n = c.count_points();
        for &pt in &points {
            assert!(c.contains(c.add(pt, pt)));
            assert_eq!(c.mul(n, pt), None);
            let ord = c.point_order(pt, n);
            assert_eq!(c.mul(ord, pt), None);
        }
    }

    #[test]
    fn point_text_round_trip() {
        let pt = Point::new(BigUint::from(5u32), BigUint::from(9u32));
        assert_eq!(Point::parse(&pt.render()), Some(pt));
        assert_eq!(SmallCurve::parse_point("(3, 4)"), Some(Some((3, 4))));
        assert_eq!(SmallCurve::parse_point("inf"), Some(None));
    }
}
