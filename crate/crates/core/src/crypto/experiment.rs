//! Monte Carlo runs of the CCA and NM indistinguishability experiments.

use std::fmt;

use num_traits::{One, Zero};
use rand::{Rng, RngCore};
use rayon::prelude::*;

use super::pke::{malleable, pke_gen, PkeError, PublicKey, SecretKey};
use super::{Ciphertext, TOY_BANNER};
use crate::game::{normalize_payoffs, PlayerId, ProfileDistribution, StrategicGame};
use crate::{sample_index, trial_rng, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    Cca,
    Nm,
    /// NM with the challenge encrypting an independent message.
    NmDollar,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExperimentKind::Cca => "cca",
            ExperimentKind::Nm => "nm",
            ExperimentKind::NmDollar => "nm_dollar",
        })
    }
}

impl std::str::FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cca" => Ok(ExperimentKind::Cca),
            "nm" => Ok(ExperimentKind::Nm),
            "nm_dollar" | "nm-dollar" | "nm$" => Ok(ExperimentKind::NmDollar),
            other => Err(format!("unknown experiment `{other}`")),
        }
    }
}

/// The public-key scheme under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// The authenticated reference scheme.
    Reference,
    /// Unauthenticated hashed ElGamal.
    Malleable,
}

impl Scheme {
    fn encrypt(self, pk: &PublicKey, m: &[u8], rng: &mut dyn RngCore) -> Vec<u8> {
        match self {
            Scheme::Reference => match pk.encrypt_random(m, rng).0 {
                Ciphertext::Pke(b) => b,
                Ciphertext::Ske { .. } => unreachable!("reference scheme emits PKE ciphertexts"),
            },
            Scheme::Malleable => malleable::encrypt(pk, m, rng),
        }
    }

    fn decrypt(self, sk: &SecretKey, c: &[u8]) -> Option<Vec<u8>> {
        match self {
            Scheme::Reference => sk.decrypt_bytes(c).ok().map(|(m, _)| m),
            Scheme::Malleable => malleable::decrypt(sk, c).ok(),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Reference => "reference",
            Scheme::Malleable => "malleable",
        })
    }
}

/// The deviation-to-adversary reduction: messages are a player's advice drawn
/// from a correlated device, the adversary mauls the challenge by XORing the
/// last ciphertext byte, and the relation fires with probability
/// `(gain + 1) / 2` computed on normalised payoffs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviationAdversary {
    /// `accept[b][b_hat]`: probability that the relation holds between advice
    /// `b` and decrypted deviation `b_hat`. Index `|A_i|` is the fallback used
    /// for undecryptable or out-of-range deviations.
    accept: Vec<Vec<Rational>>,
    advice: Vec<Rational>,
    mask: u8,
}

impl DeviationAdversary {
    pub fn new(
        game: &StrategicGame,
        alpha: &ProfileDistribution,
        player: PlayerId,
        mask: u8,
    ) -> Self {
        let g = normalize_payoffs(game);
        let k = g.num_actions(player);
        let half = Rational::new(1.into(), 2.into());
        let advice = alpha.marginal(player, k);
        let mut accept = Vec::with_capacity(k);
        for b in 0..k {
            let cond: Vec<_> = alpha
                .support()
                .iter()
                .filter(|(p, _)| p.get(player) == b)
                .collect();
            let mut row = Vec::with_capacity(k + 1);
            if advice[b].is_zero() {
                row = vec![half.clone(); k + 1];
            } else {
                let value = |d: usize| {
                    cond.iter().fold(Rational::zero(), |acc, (p, w)| {
                        acc + w * g.payoff(&p.with(player, d), player)
                    }) / &advice[b]
                };
                let base = value(b);
                let mut fallback = Rational::zero();
                for d in 0..k {
                    let gain = value(d) - &base;
                    fallback += &gain;
                    row.push((gain + Rational::one()) * &half);
                }
                let kq = Rational::from_integer(k.into());
                row.push((fallback / kq + Rational::one()) * &half);
            }
            accept.push(row);
        }
        DeviationAdversary {
            accept,
            advice,
            mask,
        }
    }

    /// Probability that the relation holds for advice `b` and decryption `dec`.
    pub fn acceptance(&self, b: usize, dec: Option<&[u8]>) -> &Rational {
        let k = self.advice.len();
        let idx = match dec {
            Some([d]) if (*d as usize) < k => *d as usize,
            _ => k,
        };
        &self.accept[b][idx]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Adversary {
    /// CCA: uniform guess.
    RandomGuess,
    /// CCA: always guesses 0 (the null adversary).
    ConstantGuess,
    /// CCA: flips the last challenge byte and asks the oracle.
    FlipAndQuery,
    /// NM: message distribution uniform over one byte; flips the lowest bit of
    /// the last ciphertext byte; relation "messages differ exactly in the
    /// lowest bit".
    FlipAndRelate,
    /// Queries the oracle on the challenge itself; the trial is voided.
    CheatingQuery,
    /// NM: the reduction from a profitable deviation in a blinded game.
    Deviation(DeviationAdversary),
}

impl fmt::Display for Adversary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Adversary::RandomGuess => "random-guess",
            Adversary::ConstantGuess => "constant-guess",
            Adversary::FlipAndQuery => "flip-and-query",
            Adversary::FlipAndRelate => "flip-and-relate",
            Adversary::CheatingQuery => "cheating-query",
            Adversary::Deviation(_) => "deviation",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecurityExperimentReport {
    pub kind: ExperimentKind,
    pub scheme: Scheme,
    pub adversary: String,
    pub security_parameter: u32,
    pub seed: u64,
    pub trials: u64,
    pub successes: u64,
    pub voided: u64,
    pub estimate: f64,
    pub sigma: f64,
}

impl SecurityExperimentReport {
    pub fn valid_trials(&self) -> u64 {
        self.trials - self.voided
    }

    /// Three binomial standard deviations.
    pub fn radius(&self) -> f64 {
        3.0 * self.sigma
    }
}

impl fmt::Display for SecurityExperimentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# {TOY_BANNER}")?;
        writeln!(
            f,
            "experiment={} scheme={} adversary={} k={} seed={}",
            self.kind, self.scheme, self.adversary, self.security_parameter, self.seed
        )?;
        writeln!(
            f,
            "trials={} successes={} voided={}",
            self.trials, self.successes, self.voided
        )?;
        write!(
            f,
            "estimate={:.6} sigma={:.6} radius={:.6}",
            self.estimate,
            self.sigma,
            self.radius()
        )
    }
}

/// Errors surfaced by the experiment harness.
#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ExperimentError {
    #[error(transparent)]
    Pke(#[from] PkeError),
    #[error("adversary `{adversary}` does not play the {kind} experiment")]
    Mismatch { adversary: String, kind: ExperimentKind },
}

enum Outcome {
    Win,
    Lose,
    /// The adversary queried the decryption oracle on the challenge.
    Violation,
}

struct Oracle<'a> {
    scheme: Scheme,
    sk: &'a SecretKey,
    challenge: &'a [u8],
}

impl Oracle<'_> {
    fn query(&self, c: &[u8]) -> Result<Option<Vec<u8>>, ()> {
        if c == self.challenge {
            return Err(());
        }
        Ok(self.scheme.decrypt(self.sk, c))
    }
}

fn bernoulli(p: &Rational, rng: &mut dyn RngCore) -> bool {
    let q = Rational::one() - p;
    sample_index(&[p, &q], rng) == 0
}

fn flip_last(c: &[u8], mask: u8) -> Vec<u8> {
    let mut out = c.to_vec();
    if let Some(last) = out.last_mut() {
        *last ^= mask;
    }
    out
}

fn run_trial(
    kind: ExperimentKind,
    scheme: Scheme,
    adversary: &Adversary,
    k: u32,
    rng: &mut dyn RngCore,
) -> Result<Outcome, ExperimentError> {
    let kp = pke_gen(k, rng)?;
    match kind {
        ExperimentKind::Cca => {
            let (m0, m1) = (vec![0u8], vec![1u8]);
            let b = rng.gen_bool(0.5);
            let c = scheme.encrypt(&kp.public, if b { &m1 } else { &m0 }, rng);
            let oracle = Oracle {
                scheme,
                sk: &kp.secret,
                challenge: &c,
            };
            let guess = match adversary {
                Adversary::RandomGuess => rng.gen_bool(0.5),
                Adversary::ConstantGuess => false,
                Adversary::CheatingQuery => {
                    if oracle.query(&c).is_err() {
                        return Ok(Outcome::Violation);
                    }
                    false
                }
                Adversary::FlipAndQuery => match oracle.query(&flip_last(&c, 1)) {
                    Ok(Some(m)) if m.len() == 1 => (m[0] ^ 1) == m1[0],
                    _ => rng.gen_bool(0.5),
                },
                other => {
                    return Err(ExperimentError::Mismatch {
                        adversary: other.to_string(),
                        kind,
                    })
                }
            };
            Ok(if guess == b { Outcome::Win } else { Outcome::Lose })
        }
        ExperimentKind::Nm | ExperimentKind::NmDollar => {
            let draw = |rng: &mut dyn RngCore| -> Vec<u8> {
                match adversary {
                    Adversary::Deviation(d) => {
                        let w: Vec<&Rational> = d.advice.iter().collect();
                        vec![sample_index(&w, rng) as u8]
                    }
                    _ => vec![rng.gen::<u8>()],
                }
            };
            let m = draw(rng);
            let encrypted = if kind == ExperimentKind::Nm {
                m.clone()
            } else {
                draw(rng)
            };
            let c = scheme.encrypt(&kp.public, &encrypted, rng);
            let oracle = Oracle {
                scheme,
                sk: &kp.secret,
                challenge: &c,
            };
            let (c2, related): (Vec<u8>, Box<dyn Fn(Option<&[u8]>, &mut dyn RngCore) -> bool>) =
                match adversary {
                    Adversary::FlipAndRelate => {
                        let m = m.clone();
                        (
                            flip_last(&c, 1),
                            Box::new(move |dec, _| {
                                matches!(dec, Some(d) if d.len() == 1 && d[0] ^ m[0] == 1)
                            }),
                        )
                    }
                    Adversary::CheatingQuery => {
                        if oracle.query(&c).is_err() {
                            return Ok(Outcome::Violation);
                        }
                        (c.clone(), Box::new(|_, _| false))
                    }
                    Adversary::Deviation(d) => {
                        let b = m[0] as usize;
                        (
                            flip_last(&c, d.mask),
                            Box::new(move |dec, rng| bernoulli(d.acceptance(b, dec), rng)),
                        )
                    }
                    other => {
                        return Err(ExperimentError::Mismatch {
                            adversary: other.to_string(),
                            kind,
                        })
                    }
                };
            if c2 == c {
                return Ok(Outcome::Lose);
            }
            let dec = scheme.decrypt(&kp.secret, &c2);
            Ok(if related(dec.as_deref(), rng) {
                Outcome::Win
            } else {
                Outcome::Lose
            })
        }
    }
}

/// Runs `trials` independent experiments. Trial `t` draws all its randomness
/// from stream `t` of `seed`, so results do not depend on `parallel`.
pub fn run_security_experiment(
    kind: ExperimentKind,
    scheme: Scheme,
    adversary: &Adversary,
    k: u32,
    trials: u64,
    seed: u64,
    parallel: bool,
) -> Result<SecurityExperimentReport, ExperimentError> {
    let one = |t: u64| {
        let mut rng = trial_rng(seed, t);
        run_trial(kind, scheme, adversary, k, &mut rng)
    };
    let outcomes: Vec<Outcome> = if parallel {
        (0..trials).into_par_iter().map(one).collect::<Result<_, _>>()?
    } else {
        (0..trials).map(one).collect::<Result<_, _>>()?
    };
    let successes = outcomes.iter().filter(|o| matches!(o, Outcome::Win)).count() as u64;
    let voided = outcomes
        .iter()
        .filter(|o| matches!(o, Outcome::Violation))
        .count() as u64;
    let n = trials - voided;
    let (estimate, sigma) = if n == 0 {
        (0.0, 0.0)
    } else {
        let p = successes as f64 / n as f64;
        (p, (p * (1.0 - p) / n as f64).sqrt())
    };
    Ok(SecurityExperimentReport {
        kind,
        scheme,
        adversary: adversary.to_string(),
        security_parameter: k,
        seed,
        trials,
        successes,
        voided,
        estimate,
        sigma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn flip_and_relate_separates_schemes() {
        let run = |kind, scheme| {
            run_security_experiment(kind, scheme, &Adversary::FlipAndRelate, 16, 2000, 11, true)
                .unwrap()
        };
        let nm = run(ExperimentKind::Nm, Scheme::Malleable);
        assert_eq!(nm.successes, 2000);
        let nmd = run(ExperimentKind::NmDollar, Scheme::Malleable);
        assert!(nmd.estimate < 0.02);
        assert_eq!(run(ExperimentKind::Nm, Scheme::Reference).successes, 0);
    }

    #[test]
    fn flip_and_query_breaks_malleable_cca() {
        let r = run_security_experiment(
            ExperimentKind::Cca,
            Scheme::Malleable,
            &Adversary::FlipAndQuery,
            16,
            500,
            3,
            false,
        )
        .unwrap();
        assert_eq!(r.successes, 500);
    }

    #[test]
    fn cheating_is_voided() {
        let r = run_security_experiment(
            ExperimentKind::Cca,
            Scheme::Reference,
            &Adversary::CheatingQuery,
            16,
            50,
            3,
            false,
        )
        .unwrap();
        assert_eq!(r.voided, 50);
        assert_eq!(r.valid_trials(), 0);
    }

    #[test]
    fn parallel_matches_sequential() {
        let a = |par| {
            run_security_experiment(
                ExperimentKind::Cca,
                Scheme::Reference,
                &Adversary::RandomGuess,
                16,
                300,
                99,
                par,
            )
            .unwrap()
        };
        assert_eq!(a(true), a(false));
    }

    #[test]
    fn deviation_acceptance_table() {
        let d = DeviationAdversary::new(&fixtures::g_star(), &fixtures::g_star_alpha(), 0, 2);
        // Normalised row payoffs span [-1, 101]; told A, switching to C gains 102/102.
        assert_eq!(d.acceptance(0, Some(&[2])), &Rational::one());
        assert_eq!(d.acceptance(0, Some(&[0])), &Rational::new(1.into(), 2.into()));
    }
}
