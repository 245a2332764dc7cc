//! Encryption schemes used to blind games, with exact and experimental
//! security checks.
//!
//! Toy parameters: nothing here is cryptographically secure.

pub mod checks;
pub mod experiment;
pub mod pke;
pub mod ske;

use std::fmt;

use sha2::{Digest, Sha256};

pub use checks::{exact_nonmalleability_check, exact_secrecy_check, NmVerdict, Relation, SecrecyVerdict};
pub use experiment::{run_security_experiment, Adversary, ExperimentKind, SecurityExperimentReport};
pub use pke::{pke_gen, verify_decryption, PkeError, PkeKeyPair, PublicKey, SecretKey};
pub use ske::{SkeInstance, SkeKey, SkeVariant};

/// Banner attached to every report that depends on the reference schemes.
pub const TOY_BANNER: &str = "toy parameters - not cryptographically secure";

/// A ciphertext of either scheme. Equality is byte equality of the canonical
/// encoding.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ciphertext {
    Ske { coord: usize, value: u64 },
    Pke(Vec<u8>),
}

impl Ciphertext {
    /// Canonical encoding: SKE values as 8-byte big-endian integers prefixed by
    /// `0x01` and the coordinate, PKE ciphertexts prefixed by `0x02`.
    pub fn to_bytes(&self) -> Vec<u8> {
        match self {
            Ciphertext::Ske { coord, value } => {
                let mut out = vec![1u8];
                out.extend_from_slice(&(*coord as u32).to_be_bytes());
                out.extend_from_slice(&value.to_be_bytes());
                out
            }
            Ciphertext::Pke(bytes) => {
                let mut out = vec![2u8];
                out.extend_from_slice(bytes);
                out
            }
        }
    }

    pub fn from_bytes(bytes: &[u8]) -> Option<Ciphertext> {
        match bytes.split_first()? {
            (1, rest) if rest.len() == 12 => {
                let coord = u32::from_be_bytes(rest[..4].try_into().ok()?) as usize;
                let value = u64::from_be_bytes(rest[4..].try_into().ok()?);
                Some(Ciphertext::Ske { coord, value })
            }
            (2, rest) => Some(Ciphertext::Pke(rest.to_vec())),
            _ => None,
        }
    }

    /// Short printable label, also used as an action label in blinded games.
    pub fn label(&self) -> String {
        match self {
            Ciphertext::Ske { coord, value } => format!("c{coord}.{value}"),
            Ciphertext::Pke(bytes) => {
                let digest = Sha256::digest(bytes);
                format!("x{}", hex::encode(&digest[..6]))
            }
        }
    }
}

impl fmt::Display for Ciphertext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.to_bytes()))
    }
}
