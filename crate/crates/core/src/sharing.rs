//! Shamir k-out-of-N secret sharing over GF(p).

use std::collections::HashSet;

use rand::Rng;
use thiserror::Error;

use crate::field::{Field, FieldError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SharingError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("need 1 <= k <= N < p, got k={k}, N={n}, p={p}")]
    Parameters { k: usize, n: usize, p: u64 },
    #[error("duplicate share index {0}")]
    DuplicateIndex(u64),
    #[error("shares use different moduli")]
    MixedModuli,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Share {
    pub x: u64,
    pub y: u64,
    pub modulus: u64,
}

impl std::fmt::Display for Share {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}) mod {}", self.x, self.y, self.modulus)
    }
}

fn check(k: usize, n: usize, p: u64) -> Result<Field, SharingError> {
    let field = Field::new(p)?;
    if k == 0 || k > n || n as u64 >= p {
        return Err(SharingError::Parameters { k, n, p });
    }
    Ok(field)
}

fn eval(field: Field, coeffs: &[u64], x: u64) -> u64 {
    coeffs
        .iter()
        .rev()
        .fold(0, |acc, &c| field.add(field.mul(acc, x), c))
}

/// Shares `secret` with the polynomial whose coefficients are
/// `[secret, coeffs...]`. Shares are `(j, f(j))` for `j = 1..=n`.
pub fn share_with_coefficients(
    secret: u64,
    coeffs: &[u64],
    n: usize,
    p: u64,
) -> Result<Vec<Share>, SharingError> {
    let field = check(coeffs.len() + 1, n, p)?;
    let mut poly = vec![field.check(secret)?];
    for &c in coeffs {
        poly.push(field.check(c)?);
    }
    Ok((1..=n as u64)
        .map(|x| Share {
            x,
            y: eval(field, &poly, x),
            modulus: p,
        })
        .collect())
}

/// Shares `secret` with a uniformly random polynomial of degree `k - 1`.
pub fn share<R: Rng + ?Sized>(
    secret: u64,
    k: usize,
    n: usize,
    p: u64,
    rng: &mut R,
) -> Result<Vec<Share>, SharingError> {
    check(k, n, p)?;
    let coeffs: Vec<u64> = (1..k).map(|_| rng.gen_range(0..p)).collect();
    share_with_coefficients(secret, &coeffs, n, p)
}

/// Lagrange interpolation at zero. Returns `Ok(None)` (the paper's bottom)
/// when fewer than `k` shares are given.
pub fn reconstruct(shares: &[Share], k: usize) -> Result<Option<u64>, SharingError> {
    if shares.len() < k || shares.is_empty() {
        return Ok(None);
    }
    let p = shares[0].modulus;
    if shares.iter().any(|s| s.modulus != p) {
        return Err(SharingError::MixedModuli);
    }
    let field = Field::new(p)?;
    let mut seen = HashSet::new();
    for s in shares {
        if !seen.insert(s.x % p) {
            return Err(SharingError::DuplicateIndex(s.x));
        }
    }
    let mut acc = 0;
    for (i, si) in shares.iter().enumerate() {
        let mut num = 1;
        let mut den = 1;
        for (j, sj) in shares.iter().enumerate() {
            if i != j {
                num = field.mul(num, field.neg(sj.x));
                den = field.mul(den, field.sub(si.x, sj.x));
            }
        }
        let inv = field.inv(den).expect("indices are distinct");
        acc = field.add(acc, field.mul(si.y, field.mul(num, inv)));
    }
    Ok(Some(acc))
}

/// How shares are handed out in the privacy check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShareIndices {
    /// Indices `1..=N`.
    Standard,
    /// Indices `0..N`: the first share is `f(0)`, the secret itself.
    LeakZero,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrivacyVerdict {
    pub accepted: bool,
    /// Share indices and observed values under which two secrets have different
    /// likelihoods.
    pub witness: Option<(Vec<u64>, Vec<u64>)>,
}

fn subsets_below(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..(1 << n))
        .map(|mask| (0..n).filter(|&i| mask & (1 << i) != 0).collect::<Vec<_>>())
        .filter(|s: &Vec<usize>| s.len() < k)
        .collect()
}

/// For every secret and every set of fewer than `k` shares, checks over all
/// polynomials that each observation is equally likely under every secret,
/// which makes the posterior on the secret equal to the prior.
pub fn privacy_check_exhaustive(
    k: usize,
    n: usize,
    p: u64,
    indices: ShareIndices,
) -> Result<PrivacyVerdict, SharingError> {
    let field = check(k, n, p)?;
    let xs: Vec<u64> = match indices {
        ShareIndices::Standard => (1..=n as u64).collect(),
        ShareIndices::LeakZero => (0..n as u64).collect(),
    };
    let polys = (p as usize).pow(k as u32 - 1);
    for subset in subsets_below(n, k) {
        let width = subset.len();
        let cells = (p as usize).pow(width as u32);
        let mut reference: Option<Vec<u32>> = None;
        for secret in 0..p {
            let mut counts = vec![0u32; cells];
            for idx in 0..polys {
                let mut poly = vec![secret];
                let mut r = idx;
                for _ in 1..k {
                    poly.push((r % p as usize) as u64);
                    r /= p as usize;
                }
                let cell = subset.iter().fold(0usize, |acc, &s| {
                    acc * p as usize + eval(field, &poly, xs[s]) as usize
                });
                counts[cell] += 1;
            }
            match &reference {
                None => reference = Some(counts),
                Some(r) => {
                    if let Some(cell) = (0..cells).find(|&c| r[c] != counts[c]) {
                        let mut values = Vec::with_capacity(width);
                        let mut rest = cell;
                        for _ in 0..width {
                            values.push((rest % p as usize) as u64);
                            rest /= p as usize;
                        }
                        values.reverse();
                        return Ok(PrivacyVerdict {
                            accepted: false,
                            witness: Some((subset.iter().map(|&s| xs[s]).collect(), values)),
                        });
                    }
                }
            }
        }
    }
    Ok(PrivacyVerdict {
        accepted: true,
        witness: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn sh(x: u64, y: u64) -> Share {
        Share { x, y, modulus: 7 }
    }

    #[test]
    fn worked_example() {
        let s = share_with_coefficients(3, &[2], 3, 7).unwrap();
        assert_eq!(s, vec![sh(1, 5), sh(2, 0), sh(3, 2)]);
        assert_eq!(reconstruct(&[sh(1, 5), sh(3, 2)], 2).unwrap(), Some(3));
        assert_eq!(reconstruct(&[sh(1, 5)], 2).unwrap(), None);
        assert_eq!(reconstruct(&s, 2).unwrap(), Some(3));
    }

    #[test]
    fn k_one_and_boundary() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let s = share(4, 1, 3, 7, &mut rng).unwrap();
        assert!(s.iter().all(|x| x.y == 4));
        assert!(share(4, 6, 6, 7, &mut rng).is_ok());
        assert!(share(4, 7, 7, 7, &mut rng).is_err());
        assert!(share(4, 0, 3, 7, &mut rng).is_err());
    }

    #[test]
    fn duplicates_rejected() {
        assert_eq!(
            reconstruct(&[sh(1, 5), sh(1, 5)], 2),
            Err(SharingError::DuplicateIndex(1))
        );
    }

    #[test]
    fn privacy() {
        assert!(privacy_check_exhaustive(2, 3, 5, ShareIndices::Standard).unwrap().accepted);
        assert!(privacy_check_exhaustive(1, 3, 5, ShareIndices::Standard).unwrap().accepted);
        let leak = privacy_check_exhaustive(2, 3, 5, ShareIndices::LeakZero).unwrap();
        assert!(!leak.accepted);
        assert_eq!(leak.witness.unwrap().0, vec![0]);
    }
}
