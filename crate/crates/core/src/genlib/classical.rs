//! Classical ciphers and encodings. Only the encrypting direction lives
//! here; the solvers implement their own inverses.

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use rand::seq::SliceRandom;
use rand::Rng;

use super::corpus::{COVER_SENTENCES, PANGRAMS, PLAYFAIR_KEYWORDS};
use super::{sample_flag, GenError, GenRng, Plant};
use crate::flag::Flag;

pub const BASE85_ALPHABET: &[u8; 85] =
    b"0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz!#$%&()*+-;<=>?@^_`{|}~";

/// Morse table: letters, digits, and the extra codes used for `_{}`.
pub const MORSE: &[(char, &str)] = &[
    ('a', ".-"), ('b', "-..."), ('c', "-.-."), ('d', "-.."), ('e', "."), ('f', "..-."),
    ('g', "--."), ('h', "...."), ('i', ".."), ('j', ".---"), ('k', "-.-"), ('l', ".-.."),
    ('m', "--"), ('n', "-."), ('o', "---"), ('p', ".--."), ('q', "--.-"), ('r', ".-."),
    ('s', "..."), ('t', "-"), ('u', "..-"), ('v', "...-"), ('w', ".--"), ('x', "-..-"),
    ('y', "-.--"), ('z', "--.."), ('0', "-----"), ('1', ".----"), ('2', "..---"),
    ('3', "...--"), ('4', "....-"), ('5', "....."), ('6', "-...."), ('7', "--..."),
    ('8', "---.."), ('9', "----."), ('_', "..--.-"), ('{', "-.--."), ('}', "-.--.-"),
];

fn rotate_letter(c: char, shift: u8) -> char {
    let base = if c.is_ascii_lowercase() { b'a' } else { b'A' };
    (((c as u8 - base + shift) % 26) + base) as char
}

/// Rotates ASCII letters by `shift`, preserving case; everything else is
/// copied through.
pub fn caesar_encrypt(plaintext: &str, shift: u8) -> String {
    let shift = shift % 26;
    plaintext
        .chars()
        .map(|c| if c.is_ascii_alphabetic() { rotate_letter(c, shift) } else { c })
        .collect()
}

pub fn atbash(text: &str) -> String {
    text.chars()
        .map(|c| match c {
            'a'..='z' => (b'z' - (c as u8 - b'a')) as char,
            'A'..='Z' => (b'Z' - (c as u8 - b'A')) as char,
            _ => c,
        })
        .collect()
}

/// Applies `f(letter_index, letter)` to the lowercase letters of `text`,
/// leaving the other characters in place.
fn map_letters(text: &str, mut f: impl FnMut(usize, u8) -> u8) -> String {
    let mut j = 0;
    text.chars()
        .map(|c| {
            if c.is_ascii_lowercase() {
                let out = f(j, c as u8 - b'a');
                j += 1;
                (out + b'a') as char
            } else {
                c
            }
        })
        .collect()
}

pub fn vigenere_encrypt(plaintext: &str, key: &str) -> String {
    let key: Vec<u8> = key.bytes().map(|b| b - b'a').collect();
    map_letters(plaintext, |j, p| (p + key[j % key.len()]) % 26)
}

pub fn autokey_encrypt(plaintext: &str, primer: &str) -> String {
    let mut stream: Vec<u8> = primer.bytes().map(|b| b - b'a').collect();
    stream.extend(plaintext.bytes().filter(u8::is_ascii_lowercase).map(|b| b - b'a'));
    map_letters(plaintext, |j, p| (p + stream[j]) % 26)
}

pub fn substitute(plaintext: &str, alphabet: &[u8; 26]) -> String {
    map_letters(plaintext, |_, p| alphabet[p as usize] - b'a')
}

/// 2x2 Hill over the letter stream: `c = K * p (mod 26)` on column vectors
/// of consecutive letters. The letter count must be even.
pub fn hill_encrypt(plaintext: &str, key: [[u8; 2]; 2]) -> String {
    let letters: Vec<u8> = plaintext.bytes().filter(u8::is_ascii_lowercase).map(|b| b - b'a').collect();
    assert!(letters.len() % 2 == 0, "Hill plaintext needs an even letter count");
    let mut out = Vec::with_capacity(letters.len());
    for pair in letters.chunks(2) {
        for row in key {
            out.push(((row[0] as u32 * pair[0] as u32 + row[1] as u32 * pair[1] as u32) % 26) as u8);
        }
    }
    map_letters(plaintext, |j, _| out[j])
}

pub fn hill_is_invertible(key: [[u8; 2]; 2]) -> bool {
    let det = (key[0][0] as i32 * key[1][1] as i32 - key[0][1] as i32 * key[1][0] as i32).rem_euclid(26);
    det % 2 != 0 && det % 13 != 0
}

/// 5x5 Playfair grid: keyword letters first (j folded into i), then the
/// rest of the alphabet without j.
pub fn playfair_grid(keyword: &str) -> [u8; 25] {
    let mut grid = Vec::with_capacity(25);
    for c in keyword.bytes().chain(b'a'..=b'z') {
        let c = if c == b'j' { b'i' } else { c };
        if c.is_ascii_lowercase() && !grid.contains(&c) {
            grid.push(c);
        }
    }
    grid.try_into().expect("25 distinct letters")
}

/// Playfair over the letter stream, without filler letters: the stream
/// must have even length, no `j`, and no digraph with a repeated letter.
pub fn playfair_encrypt(plaintext: &str, keyword: &str) -> String {
    let grid = playfair_grid(keyword);
    let pos = |c: u8| grid.iter().position(|&g| g == c).expect("letter in grid");
    let letters: Vec<u8> = plaintext.bytes().filter(u8::is_ascii_lowercase).collect();
    assert!(playfair_compatible(plaintext), "plaintext unsuitable for Playfair");
    let mut out = Vec::with_capacity(letters.len());
    for pair in letters.chunks(2) {
        let (a, b) = (pos(pair[0]), pos(pair[1]));
        let (ra, ca, rb, cb) = (a / 5, a % 5, b / 5, b % 5);
        let (x, y) = if ra == rb {
            (ra * 5 + (ca + 1) % 5, rb * 5 + (cb + 1) % 5)
        } else if ca == cb {
            (((ra + 1) % 5) * 5 + ca, ((rb + 1) % 5) * 5 + cb)
        } else {
            (ra * 5 + cb, rb * 5 + ca)
        };
        out.push(grid[x] - b'a');
        out.push(grid[y] - b'a');
    }
    map_letters(plaintext, |j, _| out[j])
}

pub fn playfair_compatible(plaintext: &str) -> bool {
    let letters: Vec<u8> = plaintext.bytes().filter(u8::is_ascii_lowercase).collect();
    letters.len() % 2 == 0
        && !letters.contains(&b'j')
        && letters.chunks(2).all(|p| p[0] != p[1])
}

/// Zig-zag row index of every position for `rails` rails.
pub fn rail_pattern(len: usize, rails: usize) -> Vec<usize> {
    assert!(rails >= 2);
    let cycle = 2 * (rails - 1);
    (0..len)
        .map(|i| {
            let k = i % cycle;
            if k < rails { k } else { cycle - k }
        })
        .collect()
}

pub fn rail_fence_encrypt(plaintext: &str, rails: usize) -> String {
    let chars: Vec<char> = plaintext.chars().collect();
    let pattern = rail_pattern(chars.len(), rails);
    (0..rails)
        .flat_map(|r| {
            chars
                .iter()
                .zip(&pattern)
                .filter(move |(_, row)| **row == r)
                .map(|(c, _)| *c)
        })
        .collect()
}

/// Columnar transposition: rows of `order.len()` characters, columns read
/// in the sequence given by `order` (a permutation of column indices).
pub fn columnar_encrypt(plaintext: &str, order: &[usize]) -> String {
    let chars: Vec<char> = plaintext.chars().collect();
    let width = order.len();
    order
        .iter()
        .flat_map(|&col| chars.iter().skip(col).step_by(width).copied())
        .collect()
}

/// Shifts printable ASCII (32..=126) by `shift` with wrap-around.
pub fn ascii_shift(text: &str, shift: i32) -> String {
    text.bytes()
        .map(|b| {
            assert!((32..=126).contains(&b), "non-printable input");
            (((b as i32 - 32 + shift).rem_euclid(95)) + 32) as u8 as char
        })
        .collect()
}

pub fn morse_encode(text: &str) -> String {
    text.split(' ')
        .map(|word| {
            word.chars()
                .map(|c| {
                    MORSE
                        .iter()
                        .find(|(m, _)| *m == c.to_ascii_lowercase())
                        .map(|(_, code)| *code)
                        .expect("character has a Morse code")
                })
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect::<Vec<_>>()
        .join(" / ")
}

/// Zeckendorf representation over 1, 2, 3, 5, 8, ..., most significant
/// bit first.
pub fn zeckendorf_encode(n: u64) -> Result<String, GenError> {
    if n < 1 {
        return Err(GenError::Argument(format!("zeckendorf_encode needs n >= 1, got {n}")));
    }
    let mut fibs = vec![1u64, 2];
    while let Some(next) = fibs[fibs.len() - 1].checked_add(fibs[fibs.len() - 2]) {
        if next > n {
            break;
        }
        fibs.push(next);
    }
    while *fibs.last().unwrap() > n {
        fibs.pop();
    }
    let mut rest = n;
    let mut bits = String::with_capacity(fibs.len());
    for &f in fibs.iter().rev() {
        if f <= rest {
            rest -= f;
            bits.push('1');
        } else {
            bits.push('0');
        }
    }
    Ok(bits)
}

/// Base64-encodes `input` `rounds` times. Zero rounds returns the input
/// unchanged (lossily decoded as UTF-8).
pub fn layered_base64_encode(input: &[u8], rounds: i64) -> Result<String, GenError> {
    if rounds < 0 {
        return Err(GenError::Argument(format!("rounds must be >= 0, got {rounds}")));
    }
    let mut current = input.to_vec();
    for _ in 0..rounds {
        current = STANDARD.encode(&current).into_bytes();
    }
    Ok(String::from_utf8_lossy(&current).into_owned())
}

/// Base85 with the RFC 1924 alphabet and Python `b85encode` framing:
/// 4-byte big-endian groups, the final partial group zero-padded and its
/// output truncated.
pub fn base85_encode(input: &[u8]) -> String {
    let mut out = String::with_capacity(input.len() * 5 / 4 + 5);
    for chunk in input.chunks(4) {
        let mut word = [0u8; 4];
        word[..chunk.len()].copy_from_slice(chunk);
        let mut v = u32::from_be_bytes(word);
        let mut digits = [0u8; 5];
        for d in digits.iter_mut().rev() {
            *d = BASE85_ALPHABET[(v % 85) as usize];
            v /= 85;
        }
        out.extend(digits[..chunk.len() + 1].iter().map(|&b| b as char));
    }
    out
}

pub fn layered_base85_encode(input: &[u8], rounds: usize) -> String {
    let mut current = input.to_vec();
    for _ in 0..rounds {
        current = base85_encode(&current).into_bytes();
    }
    String::from_utf8(current).expect("base85 output is ASCII")
}

fn random_letters(rng: &mut GenRng, len: usize) -> String {
    (0..len).map(|_| rng.gen_range(b'a'..=b'z') as char).collect()
}

fn random_alphabet(rng: &mut GenRng) -> [u8; 26] {
    let mut alphabet: [u8; 26] = std::array::from_fn(|i| b'a' + i as u8);
    alphabet.shuffle(rng);
    alphabet
}

pub(super) fn plant(name: &str, rng: &mut GenRng, flag: Flag) -> Plant {
    let pt = flag.render();
    match name {
        "caesar" => {
            let shift = rng.gen_range(1..=25u8);
            Plant::new(flag, &[("ciphertext", caesar_encrypt(&pt, shift))])
                .param("shift", shift)
        }
        "vigenere" => {
            let len = rng.gen_range(3..=8);
            let key = random_letters(rng, len);
            Plant::new(flag, &[("ciphertext", vigenere_encrypt(&pt, &key)), ("key", key.clone())])
                .param("key", key)
        }
        "playfair" => {
            let flag = resample_until(rng, flag, |f| playfair_compatible(&f.render()));
            let keyword = *PLAYFAIR_KEYWORDS.choose(rng).unwrap();
            let ct = playfair_encrypt(&flag.render(), keyword);
            Plant::new(flag, &[("ciphertext", ct), ("keyword", keyword.to_string())])
                .param("keyword", keyword)
        }
        "hill" => plant_hill(rng, flag),
        "rail_fence" => {
            let rails = loop {
                let rails = rng.gen_range(2..=5);
                if rail_fence_unambiguous(&pt, rails) {
                    break rails;
                }
            };
            Plant::new(flag, &[("ciphertext", rail_fence_encrypt(&pt, rails))]).param("rails", rails)
        }
        "substitution" => {
            let mut sentences: Vec<&str> = PANGRAMS.choose_multiple(rng, 2).copied().collect();
            sentences.shuffle(rng);
            let plaintext = format!("{} {} {}", sentences[0], sentences[1], pt);
            let alphabet = loop {
                let a = random_alphabet(rng);
                if substitute(&pt, &a) != pt {
                    break a;
                }
            };
            let key = String::from_utf8(alphabet.to_vec()).unwrap();
            Plant::new(flag, &[("ciphertext", substitute(&plaintext, &alphabet))])
                .param("alphabet", key)
                .param("plaintext", plaintext)
        }
        "substitution_direct" => {
            let alphabet = loop {
                let a = random_alphabet(rng);
                if substitute(&pt, &a) != pt {
                    break a;
                }
            };
            let key = String::from_utf8(alphabet.to_vec()).unwrap();
            Plant::new(
                flag,
                &[
                    ("ciphertext", substitute(&pt, &alphabet)),
                    ("mapping", format!("abcdefghijklmnopqrstuvwxyz -> {key}")),
                ],
            )
            .param("alphabet", key)
        }
        "transposition" => {
            let cover = *COVER_SENTENCES.choose(rng).unwrap();
            let plaintext = format!("{cover} {pt}");
            let width = rng.gen_range(3..=7);
            let order = loop {
                let mut order: Vec<usize> = (0..width).collect();
                order.shuffle(rng);
                if order.windows(2).any(|w| w[0] > w[1]) {
                    break order;
                }
            };
            let key = order.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",");
            Plant::new(flag, &[("ciphertext", columnar_encrypt(&plaintext, &order))])
                .param("column_order", key)
                .param("plaintext", plaintext)
        }
        "autokey" => {
            let len = rng.gen_range(3..=6);
            let primer = random_letters(rng, len);
            Plant::new(
                flag,
                &[("ciphertext", autokey_encrypt(&pt, &primer)), ("primer", primer.clone())],
            )
            .param("primer", primer)
        }
        "atbash" => Plant::new(flag, &[("ciphertext", atbash(&pt))]),
        "xor" => {
            let key = loop {
                let len = rng.gen_range(1..=4);
                let key: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
                if key.iter().any(|&b| b != 0) && xor_crib_unambiguous(pt.as_bytes(), &key) {
                    break key;
                }
            };
            let ct = crate::primitives::xor_repeating(pt.as_bytes(), &key);
            Plant::new(flag, &[("ciphertext_hex", hex::encode(ct))]).param("key_hex", hex::encode(key))
        }
        "hex" => Plant::new(flag, &[("ciphertext", hex::encode(pt.as_bytes()))]),
        "ascii_shift" => {
            let shift = loop {
                let magnitude = rng.gen_range(1..=10);
                let shift = if rng.gen_bool(0.5) { magnitude } else { -magnitude };
                let ct = ascii_shift(&pt, shift);
                if !ct.starts_with(' ') && !ct.ends_with(' ') {
                    break shift;
                }
            };
            Plant::new(flag, &[("ciphertext", ascii_shift(&pt, shift))]).param("shift", shift)
        }
        "morse_code" => Plant::new(flag, &[("ciphertext", morse_encode(&pt))]),
        "fibonacci_encoding" => {
            let ct = pt
                .bytes()
                .map(|b| zeckendorf_encode(b as u64).expect("bytes of a flag are non-zero"))
                .collect::<Vec<_>>()
                .join(" ");
            Plant::new(flag, &[("ciphertext", ct)])
        }
        "base64" => Plant::new(flag, &[("ciphertext", STANDARD.encode(pt.as_bytes()))]),
        "base64_layered" => {
            let rounds = rng.gen_range(2..=4);
            let ct = layered_base64_encode(pt.as_bytes(), rounds).expect("rounds >= 0");
            Plant::new(flag, &[("ciphertext", ct)]).param("rounds", rounds)
        }
        "base85" => Plant::new(flag, &[("ciphertext", base85_encode(pt.as_bytes()))]),
        "base85_layered" => {
            let rounds = rng.gen_range(2..=3);
            Plant::new(flag, &[("ciphertext", layered_base85_encode(pt.as_bytes(), rounds))])
                .param("rounds", rounds)
        }
        "split_flag" => {
            let parts = rng.gen_range(2..=4usize);
            // The first cut falls inside "flag" so no part spells out the
            // full prefix.
            let first = rng.gen_range(1..=4);
            let mut rest: Vec<usize> = (first + 1..pt.len()).collect();
            rest.shuffle(rng);
            let mut cuts = vec![first];
            cuts.extend_from_slice(&rest[..parts - 2]);
            cuts.sort_unstable();
            let mut bounds = vec![0];
            bounds.extend(cuts);
            bounds.push(pt.len());
            let pieces: Vec<(String, String)> = bounds
                .windows(2)
                .enumerate()
                .map(|(i, w)| (format!("part_{}", i + 1), pt[w[0]..w[1]].to_string()))
                .collect();
            let refs: Vec<(&str, String)> = pieces.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
            Plant::new(flag, &refs).param("parts", parts)
        }
        "reversed_flag" => Plant::new(flag, &[("ciphertext", pt.chars().rev().collect())]),
        "chunked_flag" => {
            let size = rng.gen_range(2..=4);
            let chunks: Vec<String> = pt
                .as_bytes()
                .chunks(size)
                .map(|c| String::from_utf8(c.to_vec()).unwrap())
                .collect();
            Plant::new(flag, &[("ciphertext", chunks.join(" "))]).param("chunk_size", size)
        }
        other => unreachable!("{other} is not a classical subtype"),
    }
}

fn resample_until(rng: &mut GenRng, mut flag: Flag, ok: impl Fn(&Flag) -> bool) -> Flag {
    while !ok(&flag) {
        flag = sample_flag(rng);
    }
    flag
}

fn plant_hill(rng: &mut GenRng, flag: Flag) -> Plant {
    let letter_count = |f: &Flag| f.render().bytes().filter(u8::is_ascii_lowercase).count();
    let flag = resample_until(rng, flag, |f| letter_count(f) % 2 == 0);
    let pt = flag.render();
    let key = loop {
        let k = [[rng.gen_range(0..26), rng.gen_range(0..26)], [rng.gen_range(0..26), rng.gen_range(0..26)]];
        if hill_is_invertible(k) && hill_encrypt(&pt, k) != pt {
            break k;
        }
    };
    // The leaked sample's first two digraphs form an invertible matrix, so
    // the key is determined by the sample alone.
    let sample = loop {
        let s = random_letters(rng, 8);
        let b = s.as_bytes();
        let m = [[b[0] - b'a', b[2] - b'a'], [b[1] - b'a', b[3] - b'a']];
        if hill_is_invertible(m) {
            break s;
        }
    };
    Plant::new(
        flag,
        &[
            ("ciphertext", hill_encrypt(&pt, key)),
            ("known_plaintext", sample.clone()),
            ("known_ciphertext", hill_encrypt(&sample, key)),
        ],
    )
    .param("key", format!("{},{},{},{}", key[0][0], key[0][1], key[1][0], key[1][1]))
}

/// True when no other rail count in 2..len maps the ciphertext back to a
/// different well-formed flag.
fn rail_fence_unambiguous(pt: &str, rails: usize) -> bool {
    let ct: Vec<char> = rail_fence_encrypt(pt, rails).chars().collect();
    (2..pt.len()).filter(|&r| r != rails).all(|r| {
        let candidate = rail_fence_invert(&ct, r);
        candidate == pt || !crate::flag::validate_flag_format(&candidate)
    })
}

fn rail_fence_invert(ct: &[char], rails: usize) -> String {
    let pattern = rail_pattern(ct.len(), rails);
    let mut order: Vec<usize> = (0..ct.len()).collect();
    order.sort_by_key(|&i| pattern[i]);
    let mut out = vec!['\0'; ct.len()];
    for (src, &dst) in order.iter().enumerate() {
        out[dst] = ct[src];
    }
    out.into_iter().collect()
}

/// For a repeating XOR key, the `flag{` crib yields a candidate key for each
/// length 1..=4. Reject keys where one of those candidates decrypts to a
/// different valid flag.
fn xor_crib_unambiguous(pt: &[u8], key: &[u8]) -> bool {
    let ct = crate::primitives::xor_repeating(pt, key);
    (1..=4).all(|len| {
        let guess: Vec<u8> = (0..len).map(|i| ct[i] ^ b"flag{"[i]).collect();
        let candidate = crate::primitives::xor_repeating(&ct, &guess);
        candidate == pt
            || std::str::from_utf8(&candidate).map_or(true, |s| !crate::flag::validate_flag_format(s))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent ROT13 via a lookup string.
    fn rot13_oracle(s: &str) -> String {
        let from = "abcdefghijklmnopqrstuvwxyz";
        let to = "nopqrstuvwxyzabcdefghijklm";
        s.chars()
            .map(|c| from.find(c).map_or(c, |i| to.as_bytes()[i] as char))
            .collect()
    }

    #[test]
    fn caesar_examples() {
        assert_eq!(caesar_encrypt("flag{hi}", 0), "flag{hi}");
        assert_eq!(caesar_encrypt("flag{hi}", 3), "iodj{kl}");
        assert_eq!(caesar_encrypt("flag", 13), "synt");
        assert_eq!(caesar_encrypt("flag", 13), rot13_oracle("flag"));
        assert_eq!(caesar_encrypt("Hello, World", 1), "Ifmmp, Xpsme");
    }

    #[test]
    fn atbash_maps_flag_to_uozt() {
        assert_eq!(atbash("flag"), "uozt");
        assert_eq!(atbash(&atbash("flag{x_1}")), "flag{x_1}");
    }

    #[test]
    fn base64_examples() {
        assert_eq!(layered_base64_encode(b"A", 1).unwrap(), "QQ==");
        assert_eq!(layered_base64_encode(b"xyz", 0).unwrap(), "xyz");
        let once = layered_base64_encode(b"A", 1).unwrap();
        assert_eq!(
            layered_base64_encode(b"A", 2).unwrap(),
            layered_base64_encode(once.as_bytes(), 1).unwrap()
        );
        assert_eq!(layered_base64_encode(b"A", 2).unwrap(), "UVE9PQ==");
        assert!(layered_base64_encode(b"A", -1).is_err());
    }

    #[test]
    fn base85_matches_python() {
        // base64.b85encode(b'flag{abc}') and (b'A')
        assert_eq!(base85_encode(b"flag{abc}"), "W^7?+dtqW@eE");
        assert_eq!(base85_encode(b"A"), "K>");
    }

    /// All subsets of non-consecutive Fibonacci numbers up to 100, by brute
    /// force; the subset summing to n is unique.
    fn zeckendorf_oracle(n: u64) -> String {
        let fibs = [1u64, 2, 3, 5, 8, 13, 21, 34, 55, 89];
        let mut hits = Vec::new();
        for mask in 0u32..(1 << fibs.len()) {
            if mask & (mask >> 1) != 0 {
                continue;
            }
            let sum: u64 = (0..fibs.len()).filter(|i| mask >> i & 1 == 1).map(|i| fibs[i]).sum();
            if sum == n {
                hits.push(mask);
            }
        }
        assert_eq!(hits.len(), 1, "Zeckendorf uniqueness for {n}");
        let top = 31 - hits[0].leading_zeros();
        (0..=top).rev().map(|i| if hits[0] >> i & 1 == 1 { '1' } else { '0' }).collect()
    }

    #[test]
    fn zeckendorf_examples() {
        assert_eq!(zeckendorf_encode(1).unwrap(), "1");
        assert_eq!(zeckendorf_encode(4).unwrap(), "101");
        assert!(zeckendorf_encode(0).is_err());
        for n in 1..=143 {
            assert_eq!(zeckendorf_encode(n).unwrap(), zeckendorf_oracle(n), "{n}");
        }
    }

    #[test]
    fn rail_fence_known_vector() {
        assert_eq!(rail_fence_encrypt("wearediscoveredfleeatonce", 3), "wecrlteerdsoeefeaocaivden");
        let ct: Vec<char> = "wecrlteerdsoeefeaocaivden".chars().collect();
        assert_eq!(rail_fence_invert(&ct, 3), "wearediscoveredfleeatonce");
    }

    #[test]
    fn playfair_known_vector() {
        // "hide the gold in the tree stump" with keyword playfair example,
        // digraphs chosen to avoid filler letters
        let grid = playfair_grid("playfairexample");
        assert_eq!(&grid[..10], b"playfirexm");
        assert_eq!(playfair_encrypt("hide", "playfairexample"), "bmod");
    }

    #[test]
    fn hill_known_vector() {
        // K = [[3,3],[2,5]] encrypts "help" to "hiat"
        assert_eq!(hill_encrypt("help", [[3, 3], [2, 5]]), "hiat");
        assert!(hill_is_invertible([[3, 3], [2, 5]]));
        assert!(!hill_is_invertible([[2, 0], [0, 1]]));
    }

    #[test]
    fn columnar_example() {
        assert_eq!(columnar_encrypt("abcdefgh", &[2, 0, 1]), "cfadgbeh");
    }

    #[test]
    fn morse_example() {
        assert_eq!(morse_encode("sos"), "... --- ...");
        assert_eq!(morse_encode("a b"), ".- / -...");
    }

    #[test]
    fn vigenere_and_autokey_examples() {
        assert_eq!(vigenere_encrypt("attackatdawn", "lemon"), "lxfopvefrnhr");
        assert_eq!(autokey_encrypt("attackatdawn", "queenly"), "qnxepvytwtwp");
    }

    #[test]
    fn ascii_shift_wraps() {
        assert_eq!(ascii_shift("~", 1), " ");
        assert_eq!(ascii_shift(" ", -1), "~");
        assert_eq!(ascii_shift(&ascii_shift("flag{a_1}", 7), -7), "flag{a_1}");
    }
}
