//! Per-coordinate affine cipher over GF(p): `c = a*m + b` with `a != 0`.

use rand::Rng;
use thiserror::Error;

use super::Ciphertext;
use crate::field::{Field, FieldError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SkeError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("modulus {modulus} is too small for {needed} messages")]
    ModulusTooSmall { modulus: u64, needed: usize },
    #[error("coordinate {0} out of range")]
    Coordinate(usize),
    #[error("ciphertext is not an SKE ciphertext for coordinate {0}")]
    WrongCiphertext(usize),
}

/// The affine cipher and two deliberately broken relatives used as negative
/// controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SkeVariant {
    /// `c = a*m + b`, `a != 0`, `b` uniform.
    Affine,
    /// `c = a*m`: the offset is fixed at zero.
    FixedZeroOffset,
    /// `c = m + b`: the multiplier is fixed at one.
    AdditiveOnly,
}

impl SkeVariant {
    /// Every key of the variant, each equally likely under key generation.
    pub fn key_space(self, field: Field) -> Vec<SkeKey> {
        let p = field.modulus();
        match self {
            SkeVariant::Affine => (1..p)
                .flat_map(|a| (0..p).map(move |b| SkeKey { a, b }))
                .collect(),
            SkeVariant::FixedZeroOffset => (1..p).map(|a| SkeKey { a, b: 0 }).collect(),
            SkeVariant::AdditiveOnly => (0..p).map(|b| SkeKey { a: 1, b }).collect(),
        }
    }

    fn sample<R: Rng + ?Sized>(self, p: u64, rng: &mut R) -> SkeKey {
        match self {
            SkeVariant::Affine => SkeKey {
                a: rng.gen_range(1..p),
                b: rng.gen_range(0..p),
            },
            SkeVariant::FixedZeroOffset => SkeKey {
                a: rng.gen_range(1..p),
                b: 0,
            },
            SkeVariant::AdditiveOnly => SkeKey {
                a: 1,
                b: rng.gen_range(0..p),
            },
        }
    }
}

/// One coordinate's subkey.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SkeKey {
    pub a: u64,
    pub b: u64,
}

impl SkeKey {
    pub fn encrypt(&self, field: Field, m: u64) -> u64 {
        field.add(field.mul(self.a, m), self.b)
    }

    pub fn decrypt(&self, field: Field, c: u64) -> u64 {
        let inv = field.inv(self.a).expect("subkey multiplier is non-zero");
        field.mul(inv, field.sub(c, self.b))
    }
}

/// A secret key: one independent subkey per coordinate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkeInstance {
    field: Field,
    keys: Vec<SkeKey>,
    variant: SkeVariant,
}

impl SkeInstance {
    /// Samples an affine key for `coordinates` coordinates.
    pub fn generate<R: Rng + ?Sized>(p: u64, coordinates: usize, rng: &mut R) -> Result<Self, SkeError> {
        Self::generate_variant(p, coordinates, SkeVariant::Affine, rng)
    }

    pub fn generate_variant<R: Rng + ?Sized>(
        p: u64,
        coordinates: usize,
        variant: SkeVariant,
        rng: &mut R,
    ) -> Result<Self, SkeError> {
        let field = Field::new(p)?;
        let keys = (0..coordinates).map(|_| variant.sample(p, rng)).collect();
        Ok(SkeInstance {
            field,
            keys,
            variant,
        })
    }

    /// Builds an instance from explicit subkeys.
    pub fn from_keys(p: u64, keys: Vec<SkeKey>) -> Result<Self, SkeError> {
        let field = Field::new(p)?;
        for k in &keys {
            field.check(k.a)?;
            field.check(k.b)?;
            if k.a == 0 {
                return Err(FieldError::OutOfRange { value: 0, modulus: p }.into());
            }
        }
        Ok(SkeInstance {
            field,
            keys,
            variant: SkeVariant::Affine,
        })
    }

    /// Fails unless the field can hold `needed` distinct messages.
    pub fn check_capacity(&self, needed: usize) -> Result<(), SkeError> {
        if (self.field.modulus() as u128) < needed as u128 {
            Err(SkeError::ModulusTooSmall {
                modulus: self.field.modulus(),
                needed,
            })
        } else {
            Ok(())
        }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn modulus(&self) -> u64 {
        self.field.modulus()
    }

    pub fn variant(&self) -> SkeVariant {
        self.variant
    }

    pub fn keys(&self) -> &[SkeKey] {
        &self.keys
    }

    pub fn key(&self, coord: usize) -> Result<SkeKey, SkeError> {
        self.keys.get(coord).copied().ok_or(SkeError::Coordinate(coord))
    }

    pub fn encrypt(&self, coord: usize, m: u64) -> Result<Ciphertext, SkeError> {
        let key = self.key(coord)?;
        let m = self.field.check(m)?;
        Ok(Ciphertext::Ske {
            coord,
            value: key.encrypt(self.field, m),
        })
    }

    pub fn decrypt(&self, coord: usize, c: &Ciphertext) -> Result<u64, SkeError> {
        let key = self.key(coord)?;
        match c {
            Ciphertext::Ske { coord: cc, value } if *cc == coord => {
                Ok(key.decrypt(self.field, self.field.check(*value)?))
            }
            _ => Err(SkeError::WrongCiphertext(coord)),
        }
    }
}
