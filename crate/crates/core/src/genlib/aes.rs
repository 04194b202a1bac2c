//! AES modes misused so that the flag falls out without the key.

use aes::cipher::{AsyncStreamCipher, KeyInit, KeyIvInit};
use aes::Aes128;
use aes_gcm::aead::generic_array::GenericArray;
use aes_gcm::aead::Aead;
use aes_gcm::Aes128Gcm;
use ccm::consts::{U13, U16};
use ccm::Ccm;
use rand::seq::SliceRandom;
use rand::Rng;
use xts_mode::{get_tweak_default, Xts128};

use super::corpus::KNOWN_MESSAGES;
use super::{GenRng, Plant};
use crate::flag::Flag;
use crate::primitives::sha256;

pub type Aes128Ccm = Ccm<Aes128, U16, U13>;

/// Largest XTS data-key PIN (exclusive).
pub const XTS_PIN_SPACE: u32 = 1 << 16;

pub fn gcm_encrypt(key: &[u8; 16], nonce: &[u8; 12], plaintext: &[u8]) -> Vec<u8> {
    Aes128Gcm::new(GenericArray::from_slice(key))
        .encrypt(GenericArray::from_slice(nonce), plaintext)
        .expect("GCM encryption of short messages cannot fail")
}

pub fn ccm_encrypt(key: &[u8; 16], nonce: &[u8; 13], plaintext: &[u8]) -> Vec<u8> {
    Aes128Ccm::new(GenericArray::from_slice(key))
        .encrypt(GenericArray::from_slice(nonce), plaintext)
        .expect("CCM encryption of short messages cannot fail")
}

pub fn cfb_encrypt(key: &[u8; 16], iv: &[u8; 16], plaintext: &[u8]) -> Vec<u8> {
    let mut buf = plaintext.to_vec();
    cfb_mode::Encryptor::<Aes128>::new(key.into(), iv.into()).encrypt(&mut buf);
    buf
}

/// XTS key derived from a short numeric PIN.
pub fn xts_data_key(pin: u32) -> [u8; 16] {
    sha256(pin.to_string().as_bytes())[..16].try_into().unwrap()
}

/// Encrypts sector 0. The input must be at least one block long.
pub fn xts_encrypt(data_key: &[u8; 16], tweak_key: &[u8; 16], plaintext: &[u8]) -> Vec<u8> {
    assert!(plaintext.len() >= 16, "XTS needs at least one block");
    let xts = Xts128::new(Aes128::new(data_key.into()), Aes128::new(tweak_key.into()));
    let mut buf = plaintext.to_vec();
    xts.encrypt_sector(&mut buf, get_tweak_default(0));
    buf
}

pub fn xts_decrypt(data_key: &[u8; 16], tweak_key: &[u8; 16], ciphertext: &[u8]) -> Vec<u8> {
    let xts = Xts128::new(Aes128::new(data_key.into()), Aes128::new(tweak_key.into()));
    let mut buf = ciphertext.to_vec();
    xts.decrypt_sector(&mut buf, get_tweak_default(0));
    buf
}

pub(super) fn plant(name: &str, rng: &mut GenRng, flag: Flag) -> Plant {
    let pt = flag.render().into_bytes();
    let key: [u8; 16] = rng.gen();
    let known = KNOWN_MESSAGES.choose(rng).unwrap().as_bytes();
    match name {
        "aes_gcm" | "aes_ccm" => {
            let (nonce_hex, c1, c2) = if name == "aes_gcm" {
                let nonce: [u8; 12] = rng.gen();
                (hex::encode(nonce), gcm_encrypt(&key, &nonce, known), gcm_encrypt(&key, &nonce, &pt))
            } else {
                let nonce: [u8; 13] = rng.gen();
                (hex::encode(nonce), ccm_encrypt(&key, &nonce, known), ccm_encrypt(&key, &nonce, &pt))
            };
            let (body1, tag1) = c1.split_at(known.len());
            let (body2, tag2) = c2.split_at(pt.len());
            Plant::new(
                flag,
                &[
                    ("nonce_hex", nonce_hex),
                    ("known_plaintext", String::from_utf8(known.to_vec()).unwrap()),
                    ("ciphertext1_hex", hex::encode(body1)),
                    ("tag1_hex", hex::encode(tag1)),
                    ("ciphertext2_hex", hex::encode(body2)),
                    ("tag2_hex", hex::encode(tag2)),
                ],
            )
            .param("key_hex", hex::encode(key))
        }
        "aes_xts" => {
            let pin = rng.gen_range(0..XTS_PIN_SPACE);
            let tweak_key: [u8; 16] = rng.gen();
            let mut padded = pt.clone();
            while padded.len() % 16 != 0 {
                padded.push(b' ');
            }
            let ct = xts_encrypt(&xts_data_key(pin), &tweak_key, &padded);
            Plant::new(
                flag,
                &[
                    ("tweak_key_hex", hex::encode(tweak_key)),
                    ("sector", "0".to_string()),
                    ("ciphertext_hex", hex::encode(ct)),
                    ("data_key", format!("sha256(str(pin))[:16], 0 <= pin < {XTS_PIN_SPACE}")),
                ],
            )
            .param("pin", pin)
        }
        "aes_cfb" => {
            let iv: [u8; 16] = rng.gen();
            Plant::new(
                flag,
                &[
                    ("iv_hex", hex::encode(iv)),
                    ("known_plaintext", String::from_utf8(known.to_vec()).unwrap()),
                    ("ciphertext1_hex", hex::encode(cfb_encrypt(&key, &iv, known))),
                    ("ciphertext2_hex", hex::encode(cfb_encrypt(&key, &iv, &pt))),
                ],
            )
            .param("key_hex", hex::encode(key))
        }
        other => unreachable!("{other} is not an AES subtype"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use aes::cipher::BlockEncrypt;

    // NIST SP 800-38A F.3.13, CFB128-AES128 first block
    #[test]
    fn cfb_matches_nist_vector() {
        let key = hex::decode("2b7e151628aed2a6abf7158809cf4f3c").unwrap();
        let iv = hex::decode("000102030405060708090a0b0c0d0e0f").unwrap();
        let pt = hex::decode("6bc1bee22e409f96e93d7e117393172a").unwrap();
        let ct = cfb_encrypt(&key.try_into().unwrap(), &iv.try_into().unwrap(), &pt);
        assert_eq!(hex::encode(ct), "3b3fd92eb72dad20333449f8e83cfb4a");
    }

    /// CTR-mode keystream built from raw block encryptions: GCM starts
    /// counting at J0 + 1 where J0 = nonce || 0x00000001.
    fn gcm_keystream_oracle(key: &[u8; 16], nonce: &[u8; 12], len: usize) -> Vec<u8> {
        let cipher = Aes128::new(key.into());
        let mut out = Vec::new();
        let mut counter = 2u32;
        while out.len() < len {
            let mut block = [0u8; 16];
            block[..12].copy_from_slice(nonce);
            block[12..].copy_from_slice(&counter.to_be_bytes());
            let mut b = GenericArray::from(block);
            cipher.encrypt_block(&mut b);
            out.extend_from_slice(&b);
            counter += 1;
        }
        out.truncate(len);
        out
    }

    #[test]
    fn gcm_body_is_ctr_keystream() {
        let key = [7u8; 16];
        let nonce = [9u8; 12];
        let msg = b"some message longer than one block";
        let ct = gcm_encrypt(&key, &nonce, msg);
        assert_eq!(ct.len(), msg.len() + 16);
        let ks = gcm_keystream_oracle(&key, &nonce, msg.len());
        let body: Vec<u8> = msg.iter().zip(&ks).map(|(a, b)| a ^ b).collect();
        assert_eq!(&ct[..msg.len()], &body[..]);
    }

    #[test]
    fn xts_round_trip() {
        let dk = xts_data_key(4242);
        let tk = [3u8; 16];
        let pt = b"flag{abcdefghij}";
        let ct = xts_encrypt(&dk, &tk, pt);
        assert_ne!(&ct[..], &pt[..]);
        assert_eq!(xts_decrypt(&dk, &tk, &ct), pt);
    }
}
