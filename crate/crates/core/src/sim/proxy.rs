//! The verifiable proxy: translates blinded actions and proves it did so
//! correctly.

use std::fmt;

use crate::blinded::{decode_action, encode_action, BlindedAction};
use crate::crypto::pke::{PublicKey, Randomness, SecretKey};
use crate::crypto::{verify_decryption, Ciphertext, SkeInstance, SkeKey};
use crate::field::Field;
use crate::game::PlayerId;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Proof {
    /// Plain actions need no proof.
    Trivial,
    /// The coordinate subkey; re-encrypting the action must give the ciphertext.
    Subkey(SkeKey),
    /// Message and encryption randomness of a public-key ciphertext.
    Opening { message: Vec<u8>, randomness: Randomness },
}

impl fmt::Display for Proof {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Proof::Trivial => f.write_str("-"),
            Proof::Subkey(k) => write!(f, "subkey({},{})", k.a, k.b),
            Proof::Opening { message, randomness } => {
                write!(f, "open({},{})", hex::encode(message), hex::encode(randomness))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Translation {
    pub player: PlayerId,
    pub action: usize,
    pub proof: Proof,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Refusal {
    /// Encrypted for another player or under another key.
    Foreign,
    Undecryptable,
    /// Decrypts to something outside the player's action set.
    OutOfRange,
}

impl fmt::Display for Refusal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Refusal::Foreign => "foreign",
            Refusal::Undecryptable => "undecryptable",
            Refusal::OutOfRange => "out-of-range",
        })
    }
}

#[derive(Debug, Clone)]
pub enum ProxyKeys {
    Ske(SkeInstance),
    Pke(SecretKey),
}

/// What everyone can use to check a proof.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PublicParams {
    Ske { modulus: u64 },
    Pke(PublicKey),
}

/// Holds the secret key and acts on each player's submission independently.
#[derive(Debug, Clone)]
pub struct VerifiableProxy {
    keys: ProxyKeys,
    action_counts: Vec<usize>,
    tamper: bool,
}

impl VerifiableProxy {
    pub fn new(keys: ProxyKeys, action_counts: Vec<usize>) -> Self {
        VerifiableProxy {
            keys,
            action_counts,
            tamper: false,
        }
    }

    /// A faulty proxy that corrupts one symbol of every non-trivial proof.
    pub fn tampering(mut self) -> Self {
        self.tamper = true;
        self
    }

    pub fn public_params(&self) -> PublicParams {
        match &self.keys {
            ProxyKeys::Ske(s) => PublicParams::Ske { modulus: s.modulus() },
            ProxyKeys::Pke(sk) => PublicParams::Pke(sk.public.clone()),
        }
    }

    pub fn translate(&self, player: PlayerId, submission: &BlindedAction) -> Result<Translation, Refusal> {
        let k = self.action_counts[player];
        let (action, proof) = match (submission, &self.keys) {
            (BlindedAction::Plain(a), ProxyKeys::Ske(_)) => (*a, Proof::Trivial),
            (BlindedAction::Cipher(c @ Ciphertext::Ske { coord, .. }), ProxyKeys::Ske(s)) => {
                if *coord != player {
                    return Err(Refusal::Foreign);
                }
                let m = s.decrypt(player, c).map_err(|_| Refusal::Undecryptable)?;
                let key = s.key(player).map_err(|_| Refusal::Undecryptable)?;
                let a = usize::try_from(m).map_err(|_| Refusal::OutOfRange)?;
                (a, Proof::Subkey(key))
            }
            (BlindedAction::Cipher(c @ Ciphertext::Pke(_)), ProxyKeys::Pke(sk)) => {
                let (message, randomness) = sk.decrypt(c).map_err(|e| match e {
                    crate::crypto::PkeError::WrongKey => Refusal::Foreign,
                    _ => Refusal::Undecryptable,
                })?;
                let (who, a) = decode_action(&message).ok_or(Refusal::OutOfRange)?;
                if who != player {
                    return Err(Refusal::Foreign);
                }
                (a, Proof::Opening { message, randomness })
            }
            _ => return Err(Refusal::Foreign),
        };
        if action >= k {
            return Err(Refusal::OutOfRange);
        }
        let proof = if self.tamper { tamper(proof, self) } else { proof };
        Ok(Translation {
            player,
            action,
            proof,
        })
    }
}

fn tamper(proof: Proof, proxy: &VerifiableProxy) -> Proof {
    match proof {
        Proof::Trivial => Proof::Trivial,
        Proof::Subkey(k) => {
            let p = match &proxy.keys {
                ProxyKeys::Ske(s) => s.modulus(),
                ProxyKeys::Pke(_) => unreachable!("subkey proofs come from ske keys"),
            };
            Proof::Subkey(SkeKey { a: k.a, b: (k.b + 1) % p })
        }
        Proof::Opening { message, mut randomness } => {
            randomness[0] ^= 1;
            Proof::Opening { message, randomness }
        }
    }
}

/// Publicly checks that `t` is the correct translation of `submission`.
pub fn verify_translation(params: &PublicParams, submission: &BlindedAction, t: &Translation) -> bool {
    match (submission, &t.proof, params) {
        (BlindedAction::Plain(a), Proof::Trivial, PublicParams::Ske { .. }) => *a == t.action,
        (
            BlindedAction::Cipher(Ciphertext::Ske { coord, value }),
            Proof::Subkey(k),
            PublicParams::Ske { modulus },
        ) => {
            let Ok(field) = Field::new(*modulus) else {
                return false;
            };
            *coord == t.player
                && k.a != 0
                && k.a < *modulus
                && k.b < *modulus
                && (t.action as u64) < *modulus
                && k.encrypt(field, t.action as u64) == *value
        }
        (BlindedAction::Cipher(c), Proof::Opening { message, randomness }, PublicParams::Pke(pk)) => {
            *message == encode_action(t.player, t.action) && verify_decryption(pk, c, message, randomness)
        }
        _ => false,
    }
}

/// Translates every player's submission independently.
pub fn proxy_translate(
    proxy: &VerifiableProxy,
    submissions: &[BlindedAction],
) -> Vec<Result<Translation, Refusal>> {
    submissions
        .iter()
        .enumerate()
        .map(|(i, s)| proxy.translate(i, s))
        .collect()
}
