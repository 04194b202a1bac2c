//! Static table of challenge archetypes, subtypes and their difficulty.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Archetype {
    Classical,
    Rsa,
    Aes,
    Ecc,
    Hash,
    Prng,
    WebCrypto,
    Signature,
}

impl Archetype {
    pub const ALL: [Archetype; 8] = [
        Archetype::Classical,
        Archetype::Rsa,
        Archetype::Aes,
        Archetype::Ecc,
        Archetype::Hash,
        Archetype::Prng,
        Archetype::WebCrypto,
        Archetype::Signature,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Archetype::Classical => "classical",
            Archetype::Rsa => "rsa",
            Archetype::Aes => "aes",
            Archetype::Ecc => "ecc",
            Archetype::Hash => "hash",
            Archetype::Prng => "prng",
            Archetype::WebCrypto => "webcrypto",
            Archetype::Signature => "signature",
        }
    }
}

impl fmt::Display for Archetype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Archetype {
    type Err = TaxonomyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Archetype::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| TaxonomyError::UnknownArchetype(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
}

impl Difficulty {
    pub const ALL: [Difficulty; 3] = [Difficulty::Easy, Difficulty::Medium, Difficulty::Hard];

    pub fn as_str(self) -> &'static str {
        match self {
            Difficulty::Easy => "easy",
            Difficulty::Medium => "medium",
            Difficulty::Hard => "hard",
        }
    }
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Difficulty {
    type Err = TaxonomyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "easy" => Ok(Difficulty::Easy),
            "medium" => Ok(Difficulty::Medium),
            "hard" => Ok(Difficulty::Hard),
            _ => Err(TaxonomyError::UnknownDifficulty(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TaxonomyError {
    #[error("unknown archetype {0:?}")]
    UnknownArchetype(String),
    #[error("unknown subtype {0:?}")]
    UnknownSubtype(String),
    #[error("subtype {name:?} does not belong to archetype {archetype}")]
    ArchetypeMismatch { archetype: Archetype, name: String },
    #[error("unknown difficulty {0:?}")]
    UnknownDifficulty(String),
}

/// One row of the taxonomy.
#[derive(Debug, Clone, Copy)]
pub struct SubtypeInfo {
    pub archetype: Archetype,
    pub name: &'static str,
    /// Human readable cipher name, substituted into story prompts.
    pub display: &'static str,
    pub difficulty: Difficulty,
    /// Optional weakness phrase for story prompts ("with shared primes").
    pub vulnerability: &'static str,
    pub hint: &'static str,
}

macro_rules! row {
    ($arch:ident, $name:literal, $display:literal, $diff:ident, $vuln:literal, $hint:literal) => {
        SubtypeInfo {
            archetype: Archetype::$arch,
            name: $name,
            display: $display,
            difficulty: Difficulty::$diff,
            vulnerability: $vuln,
            hint: $hint,
        }
    };
}

pub static TAXONOMY: [SubtypeInfo; 49] = [
    row!(Classical, "caesar", "Caesar", Easy, "",
        "Every letter was rotated by the same secret amount; the message starts with 'flag'."),
    row!(Classical, "vigenere", "Vigenère", Medium, "with a leaked key",
        "A Vigenère key was leaked alongside the ciphertext; only letters advance the key."),
    row!(Classical, "playfair", "Playfair", Medium, "with a leaked keyword",
        "Playfair with the disclosed keyword (I and J share a cell); digits and symbols were left in place."),
    row!(Classical, "hill", "Hill", Hard, "with a known-plaintext leak",
        "A 2x2 Hill cipher over the letters; a known plaintext/ciphertext pair reveals the matrix."),
    row!(Classical, "rail_fence", "Rail fence", Easy, "",
        "A rail fence with a small number of rails scrambled the characters."),
    row!(Classical, "substitution", "Substitution", Hard, "vulnerable to frequency analysis",
        "A monoalphabetic substitution over English text; word patterns and the 'flag' crib break it."),
    row!(Classical, "substitution_direct", "Substitution", Easy, "with the mapping table disclosed",
        "The substitution alphabet is given: plaintext a..z map to the listed letters."),
    row!(Classical, "transposition", "Columnar transposition", Hard, "with a short key",
        "A columnar transposition with a key of at most 7 columns; try them all and look for English."),
    row!(Classical, "autokey", "Autokey", Medium, "with a leaked primer",
        "Autokey Vigenère: the key is the primer followed by the plaintext letters themselves."),
    row!(Classical, "atbash", "Atbash", Easy, "",
        "The alphabet was mirrored: a<->z, b<->y, and so on."),
    row!(Classical, "xor", "XOR", Medium, "with a short repeating key",
        "Hex-encoded XOR with a repeating key of at most 4 bytes; the plaintext starts with the usual flag prefix."),
    row!(Classical, "hex", "Hex", Easy, "",
        "It is just hexadecimal."),
    row!(Classical, "ascii_shift", "ASCII shift", Easy, "",
        "Each printable ASCII character (space..tilde) was shifted by a small constant with wrap-around."),
    row!(Classical, "morse_code", "Morse code", Easy, "",
        "International Morse; braces were sent as parentheses and letters are separated by spaces."),
    row!(Classical, "fibonacci_encoding", "Fibonacci encoding", Medium, "",
        "Each byte is written as a Zeckendorf bit string (Fibonacci numbers 1,2,3,5,..., most significant first)."),
    row!(Classical, "base64", "Base64", Easy, "",
        "Standard Base64."),
    row!(Classical, "base64_layered", "Base64", Easy, "applied several times",
        "Base64 applied several times in a row."),
    row!(Classical, "base85", "Base85", Easy, "",
        "Base85 with the RFC 1924 alphabet (Python's base64.b85encode)."),
    row!(Classical, "base85_layered", "Base85", Easy, "applied several times",
        "Base85 (RFC 1924 alphabet) applied several times in a row."),
    row!(Classical, "split_flag", "Split flag", Easy, "",
        "The flag was cut into numbered pieces; put them back together in order."),
    row!(Classical, "reversed_flag", "Reversed flag", Easy, "",
        "Read it backwards."),
    row!(Classical, "chunked_flag", "Chunked flag", Easy, "",
        "The flag was broken into space-separated chunks."),
    row!(Rsa, "small_primes", "RSA", Medium, "with tiny primes",
        "Both primes are below 2^24, so trial division factors n. The flag is XORed with SHA-256(str(m))."),
    row!(Rsa, "repeated_prime", "RSA", Medium, "where the same prime was used twice",
        "The modulus is a perfect square: n = p^2, so phi(n) = p(p-1)."),
    row!(Rsa, "partial_key_exposure", "RSA", Hard, "with partial key exposure",
        "Only the lowest bits of p are missing; brute-force them and test divisibility."),
    row!(Rsa, "common_factors", "RSA", Medium, "with moduli sharing a factor",
        "The two moduli share a prime factor; their gcd is not 1."),
    row!(Rsa, "shared_prime", "RSA", Medium, "with a prime shared across keys",
        "Two of the published moduli share a prime; pairwise gcds expose it."),
    row!(Rsa, "blum_integers", "RSA", Medium, "with a Blum modulus of close primes",
        "The Blum primes (both 3 mod 4) are very close together; Fermat factorization is instant."),
    row!(Aes, "aes_gcm", "AES-GCM", Hard, "with a reused nonce",
        "The same key and nonce encrypted a known message; the GCM keystream repeats."),
    row!(Aes, "aes_ccm", "AES-CCM", Hard, "with a reused nonce",
        "The same key and nonce encrypted a known message; the CCM counter keystream repeats."),
    row!(Aes, "aes_xts", "AES-XTS", Hard, "with a low-entropy data key",
        "The tweak key is public and the data key is SHA-256 of a PIN below 65536 (first 16 bytes)."),
    row!(Aes, "aes_cfb", "AES-CFB", Medium, "with a reused IV",
        "CFB with a reused IV: the first block's keystream is identical for both messages."),
    row!(Ecc, "small_order_curve", "elliptic-curve", Hard, "over a tiny curve",
        "The curve group is tiny; walk multiples of G until you reach Q. The key is SHA-256(str(d))."),
    row!(Ecc, "faulty_curve", "elliptic-curve", Hard, "with singular curve parameters",
        "The discriminant is zero: the curve is singular and the DLP maps into the multiplicative group of F_p."),
    row!(Ecc, "ecdsa_reused_nonce", "ECDSA", Hard, "with a reused nonce",
        "Both signatures share r, so they share the nonce k."),
    row!(Hash, "md5_reverse", "MD5", Medium, "hiding a short password",
        "The password is at most 5 lowercase letters; reverse the MD5 by brute force."),
    row!(Hash, "poor_random_salt", "SHA-256", Medium, "with a timestamp salt",
        "The salt is the Unix timestamp of creation inside the disclosed one-hour window."),
    row!(Hash, "iterated_hash", "iterated SHA-256", Hard, "over a tiny password space",
        "The password is at most 4 lowercase letters; iterate SHA-256 the stated number of times."),
    row!(Prng, "predictable_seed", "PRNG stream", Medium, "with a predictable seed",
        "Python's random was seeded with a number below 10000; the keystream is getrandbits(8) per byte."),
    row!(Prng, "time_based_seed", "PRNG stream", Medium, "seeded with the current time",
        "Python's random was seeded with a Unix timestamp inside the disclosed window."),
    row!(Prng, "low_entropy_generator", "PRNG stream", Hard, "with 16 bits of state",
        "The generator has only 16 bits of state; enumerate them all."),
    row!(Prng, "lfsr_weakness", "LFSR stream", Hard, "with a 16-bit register",
        "A 16-bit LFSR outputs its state bits directly; the known 'fl' prefix gives away the seed."),
    row!(Prng, "lcg_flaw", "LCG stream", Hard, "with leaked outputs",
        "The LCG parameters are public and consecutive states leaked; predict the rest."),
    row!(WebCrypto, "jwt_none", "JWT", Easy, "accepting the none algorithm",
        "The token is unsigned (alg none); its payload is plain base64url."),
    row!(WebCrypto, "weak_cookie_encryption", "cookie", Medium, "XOR-encrypted with one byte",
        "The cookie was XORed with a single byte and hex-encoded."),
    row!(WebCrypto, "broken_key_exchange", "Diffie-Hellman", Hard, "over a 16-bit prime",
        "The Diffie-Hellman prime has 16 bits; the shared secret keys SHA-256(str(s))."),
    row!(WebCrypto, "insecure_session_token", "session token", Easy, "built from guessable fields",
        "The session token is just Base64 of colon-separated fields."),
    row!(Signature, "nonce_reuse_ecdsa", "ECDSA", Hard, "with a repeated nonce",
        "Two signatures from the same key reuse the nonce; recover the private key d."),
    row!(Signature, "rsa_low_exponent", "RSA", Medium, "with public exponent 3 and no padding",
        "e = 3 and no padding: m^3 is smaller than n, so take an integer cube root."),
];

/// Identifies one subtype of the taxonomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubtypeId {
    index: u8,
}

impl SubtypeId {
    pub fn all() -> impl Iterator<Item = SubtypeId> + Clone {
        (0..TAXONOMY.len() as u8).map(|index| SubtypeId { index })
    }

    pub fn by_name(name: &str) -> Result<SubtypeId, TaxonomyError> {
        TAXONOMY
            .iter()
            .position(|row| row.name == name)
            .map(|i| SubtypeId { index: i as u8 })
            .ok_or_else(|| TaxonomyError::UnknownSubtype(name.to_string()))
    }

    /// Looks up `(archetype, name)`, rejecting pairs absent from the table.
    pub fn new(archetype: Archetype, name: &str) -> Result<SubtypeId, TaxonomyError> {
        let id = SubtypeId::by_name(name)?;
        if id.archetype() != archetype {
            return Err(TaxonomyError::ArchetypeMismatch {
                archetype,
                name: name.to_string(),
            });
        }
        Ok(id)
    }

    pub fn info(self) -> &'static SubtypeInfo {
        &TAXONOMY[self.index as usize]
    }

    pub fn archetype(self) -> Archetype {
        self.info().archetype
    }

    pub fn name(self) -> &'static str {
        self.info().name
    }

    pub fn difficulty(self) -> Difficulty {
        self.info().difficulty
    }

    pub fn with_difficulty(level: Difficulty) -> impl Iterator<Item = SubtypeId> + Clone {
        SubtypeId::all().filter(move |s| s.difficulty() == level)
    }
}

impl fmt::Display for SubtypeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.archetype(), self.name())
    }
}

/// Accepts either `archetype.name` or the bare subtype name.
impl FromStr for SubtypeId {
    type Err = TaxonomyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once('.') {
            Some((arch, name)) => SubtypeId::new(arch.parse()?, name),
            None => SubtypeId::by_name(s),
        }
    }
}

impl Serialize for SubtypeId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for SubtypeId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{BTreeMap, HashSet};

    #[test]
    fn table_shape() {
        assert_eq!(TAXONOMY.len(), 49);
        let names: HashSet<_> = TAXONOMY.iter().map(|r| r.name).collect();
        assert_eq!(names.len(), 49, "subtype names must be unique");

        let mut per_arch = BTreeMap::new();
        for row in &TAXONOMY {
            *per_arch.entry(row.archetype).or_insert(0) += 1;
        }
        let counts: Vec<usize> = Archetype::ALL.iter().map(|a| per_arch[a]).collect();
        assert_eq!(counts, vec![22, 6, 4, 3, 3, 5, 4, 2]);
    }

    #[test]
    fn every_level_has_at_least_16() {
        for level in Difficulty::ALL {
            let n = SubtypeId::with_difficulty(level).count();
            assert!(n >= 16, "{level} has only {n} subtypes");
        }
    }

    #[test]
    fn lookups() {
        let caesar: SubtypeId = "classical.caesar".parse().unwrap();
        assert_eq!(caesar.name(), "caesar");
        assert_eq!(caesar.difficulty(), Difficulty::Easy);
        assert_eq!("caesar".parse::<SubtypeId>().unwrap(), caesar);
        assert_eq!(caesar.to_string(), "classical.caesar");
        assert!(matches!(
            SubtypeId::new(Archetype::Rsa, "caesar"),
            Err(TaxonomyError::ArchetypeMismatch { .. })
        ));
        assert!("classical.enigma".parse::<SubtypeId>().is_err());
        assert_eq!(
            "webcrypto.jwt_none".parse::<SubtypeId>().unwrap().archetype(),
            Archetype::WebCrypto
        );
    }

    #[test]
    fn hints_are_nonempty_sentences() {
        for row in &TAXONOMY {
            assert!(!row.hint.is_empty(), "{}", row.name);
            assert!(!row.hint.contains("flag{"), "{}", row.name);
        }
    }
}
