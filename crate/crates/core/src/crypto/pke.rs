//! Reference hybrid public-key scheme over a toy prime-order group.
//!
//! Encryption of `m` under randomness `r` (32 bytes):
//!
//! * `e = H("eph" || y || r) mod q` (non-zero), `R = g^e`, `S = y^e`;
//! * encryption and MAC keys are hashes of `(R, S)`;
//! * the payload `len(m) || m || r` is XORed with a SHA-256 keystream and
//!   authenticated with HMAC-SHA-256 over the whole ciphertext.
//!
//! Because `r` travels inside the authenticated payload, decryption returns it
//! and anyone can re-run encryption to check a claimed decryption.

use hmac::{Hmac, Mac};
use rand::{Rng, RngCore};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::Ciphertext;
use crate::field::pow_mod;

type HmacSha256 = Hmac<Sha256>;

/// Safe primes `P = 2Q + 1` indexed by bit length.
const SAFE_PRIMES: [(u32, u64); 7] = [
    (16, 65267),
    (24, 16776899),
    (32, 4294967087),
    (40, 1099511627339),
    (48, 281474976705359),
    (56, 72057594037925687),
    (62, 4611686018427377339),
];

const KEY_ID_LEN: usize = 8;
const ELEMENT_LEN: usize = 8;
const TAG_LEN: usize = 32;
const HEADER_LEN: usize = KEY_ID_LEN + ELEMENT_LEN;

pub type Randomness = [u8; 32];

/// Byte length of a ciphertext of an `m`-byte message.
pub const fn ciphertext_len(m: usize) -> usize {
    HEADER_LEN + 4 + m + 32 + TAG_LEN
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PkeError {
    #[error("security parameter {0} is outside the supported range 1..=62")]
    UnsupportedSecurityParameter(u32),
    #[error("malformed ciphertext")]
    Malformed,
    #[error("ciphertext was encrypted under a different public key")]
    WrongKey,
    #[error("ciphertext failed authentication")]
    AuthenticationFailure,
    #[error("not a public-key ciphertext")]
    NotPke,
}

/// The order-`q` subgroup of quadratic residues modulo a safe prime `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Group {
    pub p: u64,
    pub q: u64,
    pub g: u64,
    pub bits: u32,
}

impl Group {
    pub fn for_security_parameter(k: u32) -> Result<Group, PkeError> {
        if k == 0 {
            return Err(PkeError::UnsupportedSecurityParameter(k));
        }
        let &(bits, p) = SAFE_PRIMES
            .iter()
            .find(|(b, _)| *b >= k)
            .ok_or(PkeError::UnsupportedSecurityParameter(k))?;
        Ok(Group {
            p,
            q: (p - 1) / 2,
            g: 4,
            bits,
        })
    }

    pub fn exp(&self, base: u64, e: u64) -> u64 {
        pow_mod(base, e, self.p)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PublicKey {
    pub group: Group,
    pub y: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecretKey {
    pub public: PublicKey,
    x: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PkeKeyPair {
    pub public: PublicKey,
    pub secret: SecretKey,
    pub security_parameter: u32,
}

/// Generates a key pair for security parameter `k` (bit length of the group
/// modulus, rounded up to the next supported size).
pub fn pke_gen<R: Rng + ?Sized>(k: u32, rng: &mut R) -> Result<PkeKeyPair, PkeError> {
    let group = Group::for_security_parameter(k)?;
    let x = rng.gen_range(1..group.q);
    let public = PublicKey {
        group,
        y: group.exp(group.g, x),
    };
    Ok(PkeKeyPair {
        secret: SecretKey {
            public: public.clone(),
            x,
        },
        public,
        security_parameter: k,
    })
}

fn keystream_xor(key: &[u8], data: &mut [u8]) {
    for (i, chunk) in data.chunks_mut(32).enumerate() {
        let block = Sha256::new()
            .chain_update(key)
            .chain_update((i as u64).to_be_bytes())
            .finalize();
        for (d, k) in chunk.iter_mut().zip(block.iter()) {
            *d ^= k;
        }
    }
}

fn derive_keys(r_elem: u64, shared: u64) -> ([u8; 32], [u8; 32]) {
    let enc = Sha256::new()
        .chain_update(b"bg-kdf-enc")
        .chain_update(r_elem.to_be_bytes())
        .chain_update(shared.to_be_bytes())
        .finalize();
    let mac = Sha256::new()
        .chain_update(b"bg-kdf-mac")
        .chain_update(r_elem.to_be_bytes())
        .chain_update(shared.to_be_bytes())
        .finalize();
    (enc.into(), mac.into())
}

fn tag(mac_key: &[u8], data: &[u8]) -> [u8; 32] {
    let mut mac = HmacSha256::new_from_slice(mac_key).expect("HMAC accepts any key length");
    mac.update(data);
    mac.finalize().into_bytes().into()
}

impl PublicKey {
    /// First eight bytes of the hash of the public key.
    pub fn key_id(&self) -> [u8; KEY_ID_LEN] {
        let h = Sha256::new()
            .chain_update(b"bg-key-id")
            .chain_update(self.group.p.to_be_bytes())
            .chain_update(self.y.to_be_bytes())
            .finalize();
        h[..KEY_ID_LEN].try_into().expect("slice has key id length")
    }

    fn ephemeral(&self, r: &Randomness) -> u64 {
        let h = Sha256::new()
            .chain_update(b"bg-eph")
            .chain_update(self.y.to_be_bytes())
            .chain_update(r)
            .finalize();
        let wide = u128::from_be_bytes(h[..16].try_into().expect("16 bytes"));
        1 + (wide % (self.group.q as u128 - 1)) as u64
    }

    /// Deterministic encryption of `m` under randomness `r`.
    pub fn encrypt(&self, m: &[u8], r: &Randomness) -> Ciphertext {
        let e = self.ephemeral(r);
        let r_elem = self.group.exp(self.group.g, e);
        let shared = self.group.exp(self.y, e);
        let (enc_key, mac_key) = derive_keys(r_elem, shared);
        let mut body = Vec::with_capacity(4 + m.len() + 32);
        body.extend_from_slice(&(m.len() as u32).to_be_bytes());
        body.extend_from_slice(m);
        body.extend_from_slice(r);
        keystream_xor(&enc_key, &mut body);
        let mut out = Vec::with_capacity(HEADER_LEN + body.len() + TAG_LEN);
        out.extend_from_slice(&self.key_id());
        out.extend_from_slice(&r_elem.to_be_bytes());
        out.extend_from_slice(&body);
        let t = tag(&mac_key, &out);
        out.extend_from_slice(&t);
        Ciphertext::Pke(out)
    }

    /// Encrypts with fresh randomness drawn from `rng`, returning it as well.
    pub fn encrypt_random<R: RngCore + ?Sized>(&self, m: &[u8], rng: &mut R) -> (Ciphertext, Randomness) {
        let mut r = [0u8; 32];
        rng.fill_bytes(&mut r);
        (self.encrypt(m, &r), r)
    }
}

impl SecretKey {
    /// Recovers the message and the encryption randomness.
    pub fn decrypt(&self, c: &Ciphertext) -> Result<(Vec<u8>, Randomness), PkeError> {
        let Ciphertext::Pke(bytes) = c else {
            return Err(PkeError::NotPke);
        };
        self.decrypt_bytes(bytes)
    }

    pub fn decrypt_bytes(&self, bytes: &[u8]) -> Result<(Vec<u8>, Randomness), PkeError> {
        if bytes.len() < HEADER_LEN + 4 + 32 + TAG_LEN {
            return Err(PkeError::Malformed);
        }
        if bytes[..KEY_ID_LEN] != self.public.key_id() {
            return Err(PkeError::WrongKey);
        }
        let group = self.public.group;
        let r_elem = u64::from_be_bytes(bytes[KEY_ID_LEN..HEADER_LEN].try_into().expect("8 bytes"));
        let shared = group.exp(r_elem, self.x);
        let (enc_key, mac_key) = derive_keys(r_elem, shared);
        let (signed, t) = bytes.split_at(bytes.len() - TAG_LEN);
        let mut mac = HmacSha256::new_from_slice(&mac_key).expect("HMAC accepts any key length");
        mac.update(signed);
        mac.verify_slice(t)
            .map_err(|_| PkeError::AuthenticationFailure)?;
        let mut body = signed[HEADER_LEN..].to_vec();
        keystream_xor(&enc_key, &mut body);
        let len = u32::from_be_bytes(body[..4].try_into().expect("4 bytes")) as usize;
        if body.len() != 4 + len + 32 {
            return Err(PkeError::AuthenticationFailure);
        }
        let m = body[4..4 + len].to_vec();
        let r: Randomness = body[4 + len..].try_into().expect("32 bytes");
        if group.exp(group.g, self.public.ephemeral(&r)) != r_elem {
            return Err(PkeError::AuthenticationFailure);
        }
        Ok((m, r))
    }
}

/// True iff encrypting `m` under `r` reproduces `c` byte for byte.
pub fn verify_decryption(pk: &PublicKey, c: &Ciphertext, m: &[u8], r: &Randomness) -> bool {
    pk.encrypt(m, r) == *c
}

/// Hashed ElGamal without authentication: `key id || R || m XOR keystream`.
/// Flipping a payload bit flips the same plaintext bit.
pub mod malleable {
    use super::*;

    pub fn encrypt<R: RngCore + ?Sized>(pk: &PublicKey, m: &[u8], rng: &mut R) -> Vec<u8> {
        let e = rng.gen_range(1..pk.group.q);
        let r_elem = pk.group.exp(pk.group.g, e);
        let shared = pk.group.exp(pk.y, e);
        let (enc_key, _) = derive_keys(r_elem, shared);
        let mut body = m.to_vec();
        keystream_xor(&enc_key, &mut body);
        let mut out = Vec::with_capacity(HEADER_LEN + body.len());
        out.extend_from_slice(&pk.key_id());
        out.extend_from_slice(&r_elem.to_be_bytes());
        out.extend_from_slice(&body);
        out
    }

    pub fn decrypt(sk: &SecretKey, bytes: &[u8]) -> Result<Vec<u8>, PkeError> {
        if bytes.len() < HEADER_LEN {
            return Err(PkeError::Malformed);
        }
        if bytes[..KEY_ID_LEN] != sk.public.key_id() {
            return Err(PkeError::WrongKey);
        }
        let r_elem = u64::from_be_bytes(bytes[KEY_ID_LEN..HEADER_LEN].try_into().expect("8 bytes"));
        let shared = sk.public.group.exp(r_elem, sk.x);
        let (enc_key, _) = derive_keys(r_elem, shared);
        let mut body = bytes[HEADER_LEN..].to_vec();
        keystream_xor(&enc_key, &mut body);
        Ok(body)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn keys(seed: u64) -> PkeKeyPair {
        pke_gen(32, &mut ChaCha20Rng::seed_from_u64(seed)).unwrap()
    }

    #[test]
    fn roundtrip_recovers_randomness() {
        let kp = keys(1);
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        for _ in 0..100 {
            let len = rng.gen_range(0..20);
            let m: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
            let (c, r) = kp.public.encrypt_random(&m, &mut rng);
            assert_eq!(kp.secret.decrypt(&c).unwrap(), (m.clone(), r));
            assert!(verify_decryption(&kp.public, &c, &m, &r));
        }
    }

    #[test]
    fn every_single_byte_flip_is_rejected() {
        let kp = keys(3);
        let Ciphertext::Pke(bytes) = kp.public.encrypt(b"\x01", &[7u8; 32]) else {
            unreachable!()
        };
        for i in 0..bytes.len() {
            let mut t = bytes.clone();
            t[i] ^= 1;
            let err = kp.secret.decrypt_bytes(&t).unwrap_err();
            if i < KEY_ID_LEN {
                assert_eq!(err, PkeError::WrongKey);
            } else {
                assert_eq!(err, PkeError::AuthenticationFailure, "byte {i}");
            }
        }
    }

    #[test]
    fn unrelated_key_fails() {
        let a = keys(4);
        let b = keys(5);
        let c = a.public.encrypt(b"hi", &[1u8; 32]);
        assert_eq!(b.secret.decrypt(&c), Err(PkeError::WrongKey));
    }

    #[test]
    fn wrong_claims_do_not_verify() {
        let kp = pke_gen(16, &mut ChaCha20Rng::seed_from_u64(6)).unwrap();
        let r = [9u8; 32];
        let c = kp.public.encrypt(&[3], &r);
        for m in 0..=255u8 {
            assert_eq!(verify_decryption(&kp.public, &c, &[m], &r), m == 3);
        }
        assert!(!verify_decryption(&kp.public, &c, &[3], &[8u8; 32]));
    }

    #[test]
    fn malleable_scheme_flips_through() {
        let kp = keys(7);
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let mut c = malleable::encrypt(&kp.public, &[0b1010], &mut rng);
        *c.last_mut().unwrap() ^= 1;
        assert_eq!(malleable::decrypt(&kp.secret, &c).unwrap(), vec![0b1011]);
    }

    #[test]
    fn security_parameter_bounds() {
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        assert!(pke_gen(0, &mut rng).is_err());
        assert!(pke_gen(63, &mut rng).is_err());
        assert_eq!(pke_gen(20, &mut rng).unwrap().public.group.bits, 24);
    }
}
