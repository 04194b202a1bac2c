//! Textbook RSA instances with one planted weakness each.

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::One;
use rand::Rng;

use super::{GenError, GenRng, Plant};
use crate::flag::Flag;
use crate::primitives::math::{bytes_to_int, lcm, mod_inverse, next_prime, random_prime};
use crate::primitives::sha256_stream_xor;

pub const RSA_VARIANTS: &[&str] = &[
    "small_primes",
    "repeated_prime",
    "partial_key_exposure",
    "common_factors",
    "shared_prime",
    "blum_integers",
    "rsa_low_exponent",
];

/// Low bits of `p` withheld in the partial key exposure variant.
pub const PARTIAL_KEY_HIDDEN_BITS: u32 = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RsaInstance {
    pub p: BigUint,
    pub q: BigUint,
    pub n: BigUint,
    pub e: BigUint,
    pub d: BigUint,
    pub c: BigUint,
}

impl RsaInstance {
    /// Builds the key for `p, q` and encrypts `m`. When `p == q` the
    /// private exponent is taken modulo `p(p-1)`, the order of the unit
    /// group mod `p^2`.
    pub fn new(p: BigUint, q: BigUint, e: BigUint, m: &BigUint) -> RsaInstance {
        let one = BigUint::one();
        let n = &p * &q;
        let modulus = if p == q {
            &p * (&p - &one)
        } else {
            lcm(&(&p - &one), &(&q - &one))
        };
        let d = mod_inverse(&e, &modulus).expect("e is coprime to the group order");
        assert!(m < &n, "message must be smaller than the modulus");
        let c = m.modpow(&e, &n);
        RsaInstance { p, q, n, e, d, c }
    }

    pub fn decrypt(&self) -> BigUint {
        self.c.modpow(&self.d, &self.n)
    }
}

/// The instance carrying the flag plus whatever else the variant discloses.
#[derive(Debug, Clone)]
pub struct RsaSet {
    pub primary: RsaInstance,
    /// Further moduli (common factor / shared prime variants).
    pub companions: Vec<RsaInstance>,
    /// For moduli too small to hold the flag: the flag XORed with the
    /// SHA-256 of the decimal plaintext of `primary.c`.
    pub wrapped_flag: Option<Vec<u8>>,
    /// Position of `primary` among all moduli, for variants that list several.
    pub primary_index: usize,
}

fn coprime_to(e: &BigUint) -> impl Fn(&BigUint) -> bool + '_ {
    move |p: &BigUint| (p - 1u32).gcd(e).is_one()
}

pub fn make_rsa_instance(variant: &str, flag: &Flag, rng: &mut GenRng) -> Result<RsaSet, GenError> {
    let m = bytes_to_int(flag.render().as_bytes());
    let e65537 = BigUint::from(65_537u32);
    let single = |primary| RsaSet { primary, companions: Vec::new(), wrapped_flag: None, primary_index: 0 };
    let set = match variant {
        "small_primes" => {
            let p = random_prime(rng, 24, coprime_to(&e65537));
            let q = loop {
                let q = random_prime(rng, 24, coprime_to(&e65537));
                if q != p {
                    break q;
                }
            };
            let n = &p * &q;
            let secret = rng.gen_biguint_range(&BigUint::from(2u32), &n);
            let wrapped = sha256_stream_xor(&secret.to_string(), flag.render().as_bytes());
            RsaSet {
                primary: RsaInstance::new(p, q, e65537, &secret),
                companions: Vec::new(),
                wrapped_flag: Some(wrapped),
                primary_index: 0,
            }
        }
        "repeated_prime" => {
            let p = random_prime(rng, 160, coprime_to(&e65537));
            single(RsaInstance::new(p.clone(), p, e65537, &m))
        }
        "partial_key_exposure" => {
            let p = random_prime(rng, 80, coprime_to(&e65537));
            let q = random_prime(rng, 80, |q| q != &p && coprime_to(&e65537)(q));
            single(RsaInstance::new(p, q, e65537, &m))
        }
        "common_factors" => {
            let p = random_prime(rng, 128, coprime_to(&e65537));
            let q1 = random_prime(rng, 128, |q| q != &p && coprime_to(&e65537)(q));
            let q2 = random_prime(rng, 128, |q| q != &p && q != &q1 && coprime_to(&e65537)(q));
            let decoy = rng.gen_biguint_range(&BigUint::from(2u32), &(BigUint::one() << 120));
            RsaSet {
                primary: RsaInstance::new(p.clone(), q1, e65537.clone(), &m),
                companions: vec![RsaInstance::new(p, q2, e65537, &decoy)],
                wrapped_flag: None,
                primary_index: 0,
            }
        }
        "shared_prime" => {
            let count = rng.gen_range(3..=5usize);
            let mut used: Vec<BigUint> = Vec::new();
            let mut fresh = |rng: &mut GenRng| loop {
                let cand = random_prime(rng, 128, coprime_to(&e65537));
                if !used.contains(&cand) {
                    used.push(cand.clone());
                    break cand;
                }
            };
            let shared = fresh(rng);
            let i = rng.gen_range(0..count);
            let j = loop {
                let j = rng.gen_range(0..count);
                if j != i {
                    break j;
                }
            };
            let target = if rng.gen_bool(0.5) { i } else { j };
            let mut all = Vec::with_capacity(count);
            for k in 0..count {
                let p = fresh(rng);
                let q = if k == i || k == j { shared.clone() } else { fresh(rng) };
                let msg = if k == target { m.clone() } else { rng.gen_biguint_range(&BigUint::from(2u32), &(BigUint::one() << 120)) };
                all.push(RsaInstance::new(p, q, e65537.clone(), &msg));
            }
            let primary = all.remove(target);
            RsaSet { primary, companions: all, wrapped_flag: None, primary_index: target }
        }
        "blum_integers" => {
            let three_mod_four = |x: &BigUint| (x % 4u32) == BigUint::from(3u32) && coprime_to(&e65537)(x);
            let p = random_prime(rng, 96, three_mod_four);
            let gap = rng.gen_range(2u64..1 << 24);
            let q = next_prime(&(&p + gap), three_mod_four);
            single(RsaInstance::new(p, q, e65537, &m))
        }
        "rsa_low_exponent" => {
            let three = BigUint::from(3u32);
            let two_mod_three = |x: &BigUint| x % 3u32 == BigUint::from(2u32);
            let p = random_prime(rng, 256, two_mod_three);
            let q = random_prime(rng, 256, |q| q != &p && two_mod_three(q));
            single(RsaInstance::new(p, q, three, &m))
        }
        other => return Err(GenError::Argument(format!("{other} is not an RSA variant"))),
    };
    Ok(set)
}

pub(super) fn plant(name: &str, rng: &mut GenRng, flag: Flag) -> Plant {
    let set = make_rsa_instance(name, &flag, rng).expect("dispatch only passes RSA variants");
    let RsaSet { primary, companions, wrapped_flag, primary_index } = set;
    let mut plant = Plant::new(flag, &[] as &[(&str, String)])
        .param("p", &primary.p)
        .param("q", &primary.q)
        .param("d", &primary.d);
    match name {
        "common_factors" => {
            plant = plant
                .artifact("n1", &primary.n)
                .artifact("n2", &companions[0].n)
                .artifact("e", &primary.e)
                .artifact("c", &primary.c);
        }
        "shared_prime" => {
            let mut moduli: Vec<&BigUint> = companions.iter().map(|inst| &inst.n).collect();
            moduli.insert(primary_index, &primary.n);
            for (k, n) in moduli.iter().enumerate() {
                plant = plant.artifact(&format!("n_{}", k + 1), n);
            }
            plant = plant
                .artifact("e", &primary.e)
                .artifact("c", &primary.c)
                .artifact("target", primary_index + 1);
        }
        _ => {
            plant = plant
                .artifact("n", &primary.n)
                .artifact("e", &primary.e)
                .artifact("c", &primary.c);
        }
    }
    if name == "partial_key_exposure" {
        plant = plant
            .artifact("p_high", &(&primary.p >> PARTIAL_KEY_HIDDEN_BITS))
            .artifact("unknown_low_bits", PARTIAL_KEY_HIDDEN_BITS);
    }
    if let Some(wrapped) = wrapped_flag {
        plant = plant.artifact("flag_ciphertext_hex", hex::encode(wrapped));
    }
    plant
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn rng(seed: u64) -> GenRng {
        GenRng::seed_from_u64(seed)
    }

    fn flag() -> Flag {
        Flag::from_body("abc_123_xy").unwrap()
    }

    fn trial_division(n: u64) -> u64 {
        (2..).find(|d| n % d == 0).unwrap()
    }

    fn check_key(inst: &RsaInstance) {
        let one = BigUint::one();
        assert_eq!(inst.n, &inst.p * &inst.q);
        let l = lcm(&(&inst.p - &one), &(&inst.q - &one));
        assert!((&inst.e * &inst.d % l).is_one());
        assert!(inst.c > BigUint::from(0u32) && inst.c < inst.n);
    }

    #[test]
    fn every_variant_satisfies_key_invariants() {
        for (i, v) in RSA_VARIANTS.iter().enumerate() {
            let set = make_rsa_instance(v, &flag(), &mut rng(i as u64)).unwrap();
            check_key(&set.primary);
            set.companions.iter().for_each(check_key);
            if set.wrapped_flag.is_none() {
                assert_eq!(set.primary.decrypt(), bytes_to_int(b"flag{abc_123_xy}"), "{v}");
            }
        }
        assert!(make_rsa_instance("nope", &flag(), &mut rng(0)).is_err());
    }

    #[test]
    fn small_primes_fall_to_trial_division() {
        for seed in 0..20 {
            let set = make_rsa_instance("small_primes", &flag(), &mut rng(seed)).unwrap();
            let n: u64 = set.primary.n.to_string().parse().unwrap();
            let p = trial_division(n);
            assert!(p < 1 << 24 && n / p < 1 << 24);
            assert_eq!(p * (n / p), n);
        }
    }

    #[test]
    fn planted_predicates() {
        for seed in 0..10 {
            let cf = make_rsa_instance("common_factors", &flag(), &mut rng(seed)).unwrap();
            let g = cf.primary.n.gcd(&cf.companions[0].n);
            assert!(g > BigUint::one());
            assert!(crate::primitives::math::is_probable_prime(&g));

            let blum = make_rsa_instance("blum_integers", &flag(), &mut rng(seed)).unwrap().primary;
            assert_eq!(&blum.p % 4u32, BigUint::from(3u32));
            assert_eq!(&blum.q % 4u32, BigUint::from(3u32));

            let rep = make_rsa_instance("repeated_prime", &flag(), &mut rng(seed)).unwrap().primary;
            assert_eq!(rep.n, &rep.p * &rep.p);

            let low = make_rsa_instance("rsa_low_exponent", &flag(), &mut rng(seed)).unwrap().primary;
            assert_eq!(low.c, bytes_to_int(b"flag{abc_123_xy}").pow(3));

            let sp = make_rsa_instance("shared_prime", &flag(), &mut rng(seed)).unwrap();
            let shares = sp.companions.iter().filter(|o| o.n.gcd(&sp.primary.n) > BigUint::one()).count();
            assert_eq!(shares, 1);
        }
    }
}
