//! Exact secrecy and non-malleability checks by key enumeration.

use std::fmt;

use num_rational::Ratio;

use super::ske::{SkeKey, SkeVariant};
use crate::field::{Field, FieldError};

/// A relation `R(m, m')` on plaintext pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Equal,
    /// `m' - m = delta (mod p)`.
    DifferBy(u64),
    /// `m' = t`.
    Target(u64),
    /// `m = s` and `m' = t`.
    Pair(u64, u64),
    ConstantTrue,
}

impl Relation {
    pub fn holds(&self, field: Field, m: u64, m2: u64) -> bool {
        match *self {
            Relation::Equal => m == m2,
            Relation::DifferBy(d) => field.sub(m2, m) == d % field.modulus(),
            Relation::Target(t) => m2 == t,
            Relation::Pair(s, t) => m == s && m2 == t,
            Relation::ConstantTrue => true,
        }
    }

    /// Equality, every shift, every target value, every plaintext pair and the
    /// constant relation.
    pub fn library(p: u64) -> Vec<Relation> {
        let mut out = vec![Relation::Equal, Relation::ConstantTrue];
        out.extend((1..p).map(Relation::DifferBy));
        out.extend((0..p).map(Relation::Target));
        out.extend((0..p).flat_map(|s| (0..p).map(move |t| Relation::Pair(s, t))));
        out
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Relation::Equal => write!(f, "equal"),
            Relation::DifferBy(d) => write!(f, "differ-by-{d}"),
            Relation::Target(t) => write!(f, "target-{t}"),
            Relation::Pair(s, t) => write!(f, "pair-{s}-{t}"),
            Relation::ConstantTrue => write!(f, "true"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecrecyVerdict {
    pub modulus: u64,
    pub keys: usize,
    pub accepted: bool,
    /// `(m0, m1, c, Pr[Enc(m0) = c], Pr[Enc(m1) = c])` on rejection.
    pub witness: Option<(u64, u64, u64, Ratio<u64>, Ratio<u64>)>,
}

/// Checks that every message induces the same ciphertext distribution over a
/// uniformly drawn key.
pub fn exact_secrecy_check(p: u64, variant: SkeVariant) -> Result<SecrecyVerdict, FieldError> {
    let field = Field::new(p)?;
    let keys = variant.key_space(field);
    let n = keys.len() as u64;
    let dist = |m: u64| {
        let mut counts = vec![0u64; p as usize];
        for k in &keys {
            counts[k.encrypt(field, m) as usize] += 1;
        }
        counts
    };
    let reference = dist(0);
    let mut witness = None;
    'outer: for m in 1..p {
        let d = dist(m);
        for c in 0..p as usize {
            if d[c] != reference[c] {
                witness = Some((
                    0,
                    m,
                    c as u64,
                    Ratio::new(reference[c], n),
                    Ratio::new(d[c], n),
                ));
                break 'outer;
            }
        }
    }
    Ok(SecrecyVerdict {
        modulus: p,
        keys: keys.len(),
        accepted: witness.is_none(),
        witness,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NmWitness {
    pub c: u64,
    pub c1: u64,
    pub c2: u64,
    pub relation: Relation,
    pub p1: Ratio<u64>,
    pub p2: Ratio<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NmVerdict {
    pub modulus: u64,
    pub relations: usize,
    pub accepted: bool,
    pub witness: Option<NmWitness>,
}

/// Joint counts of `(Dec(c), Dec(c'))` over all keys, flattened `m * p + m'`.
fn joint_table(field: Field, keys: &[SkeKey], c: u64, c1: u64) -> Vec<u32> {
    let p = field.modulus() as usize;
    let mut t = vec![0u32; p * p];
    for k in keys {
        let m = k.decrypt(field, c) as usize;
        let m1 = k.decrypt(field, c1) as usize;
        t[m * p + m1] += 1;
    }
    t
}

fn relation_count(field: Field, table: &[u32], r: Relation) -> u64 {
    let p = field.modulus() as usize;
    table
        .iter()
        .enumerate()
        .filter(|(i, _)| r.holds(field, (i / p) as u64, (i % p) as u64))
        .map(|(_, &n)| n as u64)
        .sum()
}

/// Checks that for every `c` and every `c' != c != c''`, each relation in
/// `relations` holds between `Dec(c)` and `Dec(c')` with the same probability
/// as between `Dec(c)` and `Dec(c'')`.
///
/// Joint tables that agree exactly certify all relations at once, so relation
/// probabilities are only compared when tables differ.
pub fn exact_nonmalleability_check(
    p: u64,
    variant: SkeVariant,
    relations: &[Relation],
) -> Result<NmVerdict, FieldError> {
    let field = Field::new(p)?;
    let keys = variant.key_space(field);
    let n = keys.len() as u64;
    let mut witness = None;
    'outer: for c in 0..p {
        let others: Vec<u64> = (0..p).filter(|&x| x != c).collect();
        let tables: Vec<Vec<u32>> = others
            .iter()
            .map(|&c1| joint_table(field, &keys, c, c1))
            .collect();
        if tables.iter().all(|t| *t == tables[0]) {
            continue;
        }
        for &r in relations {
            let counts: Vec<u64> = tables.iter().map(|t| relation_count(field, t, r)).collect();
            if let Some(j) = counts.iter().position(|&x| x != counts[0]) {
                witness = Some(NmWitness {
                    c,
                    c1: others[0],
                    c2: others[j],
                    relation: r,
                    p1: Ratio::new(counts[0], n),
                    p2: Ratio::new(counts[j], n),
                });
                break 'outer;
            }
        }
    }
    Ok(NmVerdict {
        modulus: p,
        relations: relations.len(),
        accepted: witness.is_none(),
        witness,
    })
}
