//! Sources of randomness for protocol runs.
//!
//! Outcome-relevant draws go through [`Chooser::choose`]; a Monte Carlo chooser
//! samples them, while [`explore`] enumerates every branch with its exact
//! probability. Draws that cannot change the outcome distribution (public-key
//! nonces, sharing polynomials) use [`Chooser::aux`], which is a seeded RNG in
//! both modes.

use num_traits::{One, Zero};
use rand::{Rng, RngCore};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::{sample_index, trial_rng, Rational};

pub trait Chooser {
    /// Picks an index with probability proportional to `weights`.
    fn choose(&mut self, weights: &[Rational]) -> usize;

    /// Picks uniformly from `0..n`.
    fn choose_uniform(&mut self, n: usize) -> usize;

    fn aux(&mut self) -> &mut dyn RngCore;
}

/// Samples every choice from one RNG stream.
pub struct Sampler {
    rng: ChaCha20Rng,
}

impl Sampler {
    pub fn new(seed: u64, trial: u64) -> Self {
        Sampler {
            rng: trial_rng(seed, trial),
        }
    }
}

impl Chooser for Sampler {
    fn choose(&mut self, weights: &[Rational]) -> usize {
        let refs: Vec<&Rational> = weights.iter().collect();
        sample_index(&refs, &mut self.rng)
    }

    fn choose_uniform(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    fn aux(&mut self) -> &mut dyn RngCore {
        &mut self.rng
    }
}

#[derive(Debug, Clone)]
enum Branch {
    Uniform(usize),
    Weighted(Vec<Rational>),
}

impl Branch {
    fn viable(&self, i: usize) -> bool {
        match self {
            Branch::Uniform(n) => i < *n,
            Branch::Weighted(w) => i < w.len() && !w[i].is_zero(),
        }
    }

    fn len(&self) -> usize {
        match self {
            Branch::Uniform(n) => *n,
            Branch::Weighted(w) => w.len(),
        }
    }

    fn probability(&self, i: usize) -> Rational {
        match self {
            Branch::Uniform(n) => Rational::new(1.into(), (*n).into()),
            Branch::Weighted(w) => {
                let total = w.iter().fold(Rational::zero(), |a, b| a + b);
                &w[i] / total
            }
        }
    }

    fn first_viable_from(&self, start: usize) -> Option<usize> {
        (start..self.len()).find(|&i| self.viable(i))
    }
}

/// Replays a fixed prefix of choices and extends it with first viable choices.
struct PathChooser {
    path: Vec<(usize, Branch)>,
    pos: usize,
    probability: Rational,
    aux: ChaCha20Rng,
}

impl PathChooser {
    fn take(&mut self, branch: Branch) -> usize {
        let choice = if self.pos < self.path.len() {
            self.path[self.pos].0
        } else {
            let c = branch
                .first_viable_from(0)
                .expect("a choice needs at least one viable branch");
            self.path.push((c, branch.clone()));
            c
        };
        self.probability *= branch.probability(choice);
        self.pos += 1;
        choice
    }
}

impl Chooser for PathChooser {
    fn choose(&mut self, weights: &[Rational]) -> usize {
        self.take(Branch::Weighted(weights.to_vec()))
    }

    fn choose_uniform(&mut self, n: usize) -> usize {
        self.take(Branch::Uniform(n))
    }

    fn aux(&mut self) -> &mut dyn RngCore {
        &mut self.aux
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("exact enumeration exceeded {0} paths")]
pub struct TooManyPaths(pub usize);

/// Runs `f` once per branch combination, depth first, returning each result
/// with its exact probability. Path `t` gets auxiliary stream `t` of `seed`.
pub fn explore<T, F>(seed: u64, max_paths: usize, mut f: F) -> Result<Vec<(Rational, T)>, TooManyPaths>
where
    F: FnMut(&mut dyn Chooser) -> T,
{
    let mut out = Vec::new();
    let mut prefix: Vec<(usize, Branch)> = Vec::new();
    loop {
        if out.len() == max_paths {
            return Err(TooManyPaths(max_paths));
        }
        let mut chooser = PathChooser {
            path: std::mem::take(&mut prefix),
            pos: 0,
            probability: Rational::one(),
            aux: trial_rng(seed, out.len() as u64),
        };
        let value = f(&mut chooser);
        out.push((chooser.probability, value));
        prefix = chooser.path;
        prefix.truncate(chooser.pos);
        // Advance the odometer.
        loop {
            let Some((choice, branch)) = prefix.pop() else {
                return Ok(out);
            };
            if let Some(next) = branch.first_viable_from(choice + 1) {
                prefix.push((next, branch));
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{int, ratio};

    #[test]
    fn enumerates_tree_with_probabilities() {
        let paths = explore(0, 100, |c| {
            let a = c.choose(&[ratio(1, 3), int(0), ratio(2, 3)]);
            let b = if a == 0 { c.choose_uniform(2) } else { 9 };
            (a, b)
        })
        .unwrap();
        let got: Vec<_> = paths.iter().map(|(p, v)| (p.clone(), *v)).collect();
        assert_eq!(
            got,
            vec![
                (ratio(1, 6), (0, 0)),
                (ratio(1, 6), (0, 1)),
                (ratio(2, 3), (2, 9))
            ]
        );
    }

    #[test]
    fn deterministic_path_is_single() {
        let paths = explore(0, 10, |_| 5).unwrap();
        assert_eq!(paths, vec![(int(1), 5)]);
        assert!(explore(0, 3, |c| c.choose_uniform(5)).is_err());
    }
}
