//! Cryptographically blinded strategic games.
//!
//! This crate verifies and solves equilibria of finite strategic games in exact
//! rational arithmetic, blinds games by encrypting their actions, and simulates
//! cheap-talk pre-play protocols that let players reach coarse correlated
//! equilibrium payoffs without a trusted mediator.
//!
//! Module map:
//!
//! * [`game`]: strategic games, profile distributions, equilibrium verifiers and
//!   the text file formats.
//! * [`solve`]: exact simplex, CE/CCE programs, Nash enumeration, punishments.
//! * [`crypto`]: the affine secret-key cipher, the reference hybrid public-key
//!   scheme, exact secrecy/non-malleability checks and the CCA/NM experiments.
//! * [`sharing`]: Shamir sharing over GF(p).
//! * [`blinded`]: blinded games, renaming maps, lifting and projection.
//! * [`sim`]: ideal MPC, verifiable proxy, Protocols 1 to 4 and the deviation harness.
//! * [`extensive`]: perfect-information trees, Nash and empty-threat checks.

pub mod blinded;
pub mod crypto;
pub mod extensive;
pub mod field;
pub mod fixtures;
pub mod game;
pub mod manifest;
pub mod sharing;
pub mod sim;
pub mod solve;

pub use num_rational::BigRational as Rational;

pub use game::{
    deviation_gain, expected_utility, normalize_payoffs, verify_equilibrium, ActionProfile,
    Concept, DistKind, EquilibriumReport, GameError, PlayerId, ProfileDistribution,
    StrategicGame, Tolerance,
};

/// Builds the rational `num/den`.
///
/// Panics if `den` is zero.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(num.into(), den.into())
}

/// Builds the integer rational `n`.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

/// Samples an index with probability proportional to the given non-negative
/// rational weights, using exact integer arithmetic.
///
/// Panics if all weights are zero.
pub fn sample_index<R: rand::Rng + ?Sized>(weights: &[&Rational], rng: &mut R) -> usize {
    use num_bigint::{BigInt, RandBigInt};
    use num_integer::Integer;
    use num_traits::{One, Zero};

    let lcm = weights
        .iter()
        .fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
    let scaled: Vec<BigInt> = weights
        .iter()
        .map(|w| w.numer() * (&lcm / w.denom()))
        .collect();
    let total: BigInt = scaled.iter().sum();
    assert!(total > BigInt::zero(), "cannot sample from zero weights");
    let mut draw = rng.gen_bigint_range(&BigInt::zero(), &total);
    for (i, s) in scaled.iter().enumerate() {
        if draw < *s {
            return i;
        }
        draw -= s;
    }
    unreachable!("draw is below the total weight")
}

/// Independent, reproducible RNG stream for one trial of a seeded run.
pub fn trial_rng(seed: u64, trial: u64) -> rand_chacha::ChaCha20Rng {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}
