//! Finite strategic games with exact rational payoffs.

mod dist;
pub mod io;
mod verify;

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use thiserror::Error;

use crate::Rational;

pub use dist::{DistKind, ProfileDistribution};
pub use verify::{
    deviation_gain, expected_utility, player_gain, verify_equilibrium, AdviceGain,
    EquilibriumReport, PlayerGain,
};

/// Zero-based player index.
pub type PlayerId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("a game needs at least one player")]
    NoPlayers,
    #[error("player {player} has an empty action set")]
    EmptyActionSet { player: PlayerId },
    #[error("player {player} has duplicate action label `{label}`")]
    DuplicateLabel { player: PlayerId, label: String },
    #[error("action label `{0}` is empty or contains reserved characters")]
    BadLabel(String),
    #[error("payoff table has {found} rows, expected {expected}")]
    PayoffTableSize { expected: usize, found: usize },
    #[error("profile {profile} carries {found} payoffs, expected {expected}")]
    PayoffArity {
        profile: usize,
        expected: usize,
        found: usize,
    },
    #[error("profile {0:?} is not in the game")]
    ProfileOutOfRange(Vec<usize>),
    #[error("unknown player {0}")]
    UnknownPlayer(PlayerId),
    #[error("negative probability in distribution")]
    NegativeProbability,
    #[error("distribution sums to {0}, not 1")]
    NotNormalized(Rational),
    #[error("distribution is declared product but does not factor into its marginals")]
    NotProduct,
    #[error("distribution has empty support")]
    EmptySupport,
    #[error("{concept} verification requires a product distribution")]
    ConceptMismatch { concept: Concept },
}

/// The three equilibrium concepts handled by the verifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Concept {
    Nash,
    Ce,
    Cce,
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Concept::Nash => "nash",
            Concept::Ce => "ce",
            Concept::Cce => "cce",
        })
    }
}

impl FromStr for Concept {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "nash" | "ne" => Ok(Concept::Nash),
            "ce" => Ok(Concept::Ce),
            "cce" => Ok(Concept::Cce),
            other => Err(format!("unknown concept `{other}` (expected nash, ce or cce)")),
        }
    }
}

/// Additive slack for equilibrium checks, tagged with the security parameter
/// it was derived for (if any).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tolerance {
    pub epsilon: Rational,
    pub security_parameter: Option<u32>,
}

impl Tolerance {
    pub fn exact() -> Self {
        Tolerance {
            epsilon: Rational::zero(),
            security_parameter: None,
        }
    }

    pub fn new(epsilon: Rational) -> Self {
        Tolerance {
            epsilon,
            security_parameter: None,
        }
    }

    pub fn with_security_parameter(mut self, k: u32) -> Self {
        self.security_parameter = Some(k);
        self
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::exact()
    }
}

/// One action index per player.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionProfile(pub Vec<usize>);

impl ActionProfile {
    pub fn new(actions: Vec<usize>) -> Self {
        ActionProfile(actions)
    }

    pub fn get(&self, player: PlayerId) -> usize {
        self.0[player]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The profile with `player`'s action replaced by `action`.
    pub fn with(&self, player: PlayerId, action: usize) -> ActionProfile {
        let mut next = self.0.clone();
        next[player] = action;
        ActionProfile(next)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for ActionProfile {
    fn from(v: Vec<usize>) -> Self {
        ActionProfile(v)
    }
}

pub(crate) fn valid_label(label: &str) -> bool {
    !label.is_empty()
        && !label
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, ':' | '(' | ')' | ',' | '#'))
}

/// A finite strategic game `(N, A, u)` with a total payoff table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategicGame {
    labels: Vec<Vec<String>>,
    payoffs: Vec<Vec<Rational>>,
    strides: Vec<usize>,
}

impl StrategicGame {
    /// Builds a game from per-player action labels and a payoff table indexed by
    /// profile in row-major order (player 0 varies slowest).
    pub fn new(labels: Vec<Vec<String>>, payoffs: Vec<Vec<Rational>>) -> Result<Self, GameError> {
        if labels.is_empty() {
            return Err(GameError::NoPlayers);
        }
        for (player, set) in labels.iter().enumerate() {
            if set.is_empty() {
                return Err(GameError::EmptyActionSet { player });
            }
            for (i, label) in set.iter().enumerate() {
                if !valid_label(label) {
                    return Err(GameError::BadLabel(label.clone()));
                }
                if set[..i].contains(label) {
                    return Err(GameError::DuplicateLabel {
                        player,
                        label: label.clone(),
                    });
                }
            }
        }
        let n = labels.len();
        let mut strides = vec![1; n];
        for p in (0..n.saturating_sub(1)).rev() {
            strides[p] = strides[p + 1] * labels[p + 1].len();
        }
        let count = strides[0] * labels[0].len();
        if payoffs.len() != count {
            return Err(GameError::PayoffTableSize {
                expected: count,
                found: payoffs.len(),
            });
        }
        if let Some((profile, row)) = payoffs.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(GameError::PayoffArity {
                profile,
                expected: n,
                found: row.len(),
            });
        }
        Ok(StrategicGame {
            labels,
            payoffs,
            strides,
        })
    }

    /// Builds a game by evaluating `f` on every profile.
    pub fn from_fn<F>(labels: Vec<Vec<String>>, mut f: F) -> Result<Self, GameError>
    where
        F: FnMut(&ActionProfile) -> Vec<Rational>,
    {
        let sizes: Vec<usize> = labels.iter().map(Vec::len).collect();
        let payoffs = ProfileIter::new(sizes).map(|p| f(&p)).collect();
        Self::new(labels, payoffs)
    }

    /// Convenience constructor for two-player games given as payoff matrices.
    pub fn bimatrix(
        rows: &[&str],
        cols: &[&str],
        u1: &[Vec<Rational>],
        u2: &[Vec<Rational>],
    ) -> Result<Self, GameError> {
        let labels = vec![
            rows.iter().map(|s| s.to_string()).collect(),
            cols.iter().map(|s| s.to_string()).collect(),
        ];
        Self::from_fn(labels, |p| {
            vec![u1[p.get(0)][p.get(1)].clone(), u2[p.get(0)][p.get(1)].clone()]
        })
    }

    pub fn num_players(&self) -> usize {
        self.labels.len()
    }

    pub fn num_actions(&self, player: PlayerId) -> usize {
        self.labels[player].len()
    }

    pub fn action_counts(&self) -> Vec<usize> {
        self.labels.iter().map(Vec::len).collect()
    }

    pub fn labels(&self, player: PlayerId) -> &[String] {
        &self.labels[player]
    }

    pub fn all_labels(&self) -> &[Vec<String>] {
        &self.labels
    }

    pub fn action_label(&self, player: PlayerId, action: usize) -> &str {
        &self.labels[player][action]
    }

    pub fn action_index(&self, player: PlayerId, label: &str) -> Option<usize> {
        self.labels.get(player)?.iter().position(|l| l == label)
    }

    pub fn profile_count(&self) -> usize {
        self.payoffs.len()
    }

    /// Iterates every profile in row-major order.
    pub fn profiles(&self) -> ProfileIter {
        ProfileIter::new(self.action_counts())
    }

    pub fn contains(&self, profile: &ActionProfile) -> bool {
        profile.len() == self.num_players()
            && profile
                .0
                .iter()
                .zip(&self.labels)
                .all(|(&a, set)| a < set.len())
    }

    pub fn check_profile(&self, profile: &ActionProfile) -> Result<(), GameError> {
        if self.contains(profile) {
            Ok(())
        } else {
            Err(GameError::ProfileOutOfRange(profile.0.clone()))
        }
    }

    pub fn profile_index(&self, profile: &ActionProfile) -> usize {
        profile.0.iter().zip(&self.strides).map(|(a, s)| a * s).sum()
    }

    pub fn profile_at(&self, mut index: usize) -> ActionProfile {
        let mut out = Vec::with_capacity(self.num_players());
        for s in &self.strides {
            out.push(index / s);
            index %= s;
        }
        ActionProfile(out)
    }

    /// All players' payoffs at `profile`. Panics on out-of-range profiles.
    pub fn payoffs(&self, profile: &ActionProfile) -> &[Rational] {
        &self.payoffs[self.profile_index(profile)]
    }

    pub fn payoff(&self, profile: &ActionProfile, player: PlayerId) -> &Rational {
        &self.payoffs[self.profile_index(profile)][player]
    }

    pub fn payoff_table(&self) -> &[Vec<Rational>] {
        &self.payoffs
    }

    /// Renders a profile with action labels, e.g. `(B, S)`.
    pub fn format_profile(&self, profile: &ActionProfile) -> String {
        let parts: Vec<&str> = profile
            .0
            .iter()
            .enumerate()
            .map(|(p, &a)| self.action_label(p, a))
            .collect();
        format!("({})", parts.join(", "))
    }

    /// Largest and smallest payoff of `player` over all profiles.
    pub fn payoff_range(&self, player: PlayerId) -> (Rational, Rational) {
        let mut iter = self.payoffs.iter().map(|row| &row[player]);
        let first = iter.next().expect("payoff table is never empty").clone();
        iter.fold((first.clone(), first), |(lo, hi), u| {
            (
                if *u < lo { u.clone() } else { lo },
                if *u > hi { u.clone() } else { hi },
            )
        })
    }

    /// A copy with the payoffs at one profile replaced.
    pub fn with_payoffs(
        &self,
        profile: &ActionProfile,
        payoffs: Vec<Rational>,
    ) -> Result<StrategicGame, GameError> {
        self.check_profile(profile)?;
        if payoffs.len() != self.num_players() {
            return Err(GameError::PayoffArity {
                profile: self.profile_index(profile),
                expected: self.num_players(),
                found: payoffs.len(),
            });
        }
        let mut next = self.clone();
        let idx = self.profile_index(profile);
        next.payoffs[idx] = payoffs;
        Ok(next)
    }

    /// Replaces every payoff by `f(player, payoff)`.
    pub fn map_payoffs<F>(&self, mut f: F) -> StrategicGame
    where
        F: FnMut(PlayerId, &Rational) -> Rational,
    {
        let payoffs = self
            .payoffs
            .iter()
            .map(|row| row.iter().enumerate().map(|(p, u)| f(p, u)).collect())
            .collect();
        StrategicGame {
            labels: self.labels.clone(),
            payoffs,
            strides: self.strides.clone(),
        }
    }
}

/// Rescales each player's payoffs affinely onto `[0, 1]`. Players with constant
/// payoffs are mapped to 0.
pub fn normalize_payoffs(game: &StrategicGame) -> StrategicGame {
    let ranges: Vec<_> = (0..game.num_players())
        .map(|p| game.payoff_range(p))
        .collect();
    game.map_payoffs(|p, u| {
        let (lo, hi) = &ranges[p];
        if hi == lo {
            Rational::zero()
        } else {
            (u - lo) / (hi - lo)
        }
    })
}

/// Odometer over all profiles of a game with the given action counts.
#[derive(Debug, Clone)]
pub struct ProfileIter {
    sizes: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl ProfileIter {
    pub fn new(sizes: Vec<usize>) -> Self {
        let next = if sizes.iter().all(|&s| s > 0) {
            Some(vec![0; sizes.len()])
        } else {
            None
        };
        ProfileIter { sizes, next }
    }
}

impl Iterator for ProfileIter {
    type Item = ActionProfile;

    fn next(&mut self) -> Option<ActionProfile> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut i = succ.len();
        let mut carried = true;
        while carried && i > 0 {
            i -= 1;
            succ[i] += 1;
            if succ[i] == self.sizes[i] {
                succ[i] = 0;
            } else {
                carried = false;
            }
        }
        if !carried {
            self.next = Some(succ);
        }
        Some(ActionProfile(current))
    }
}

pub(crate) fn sum<'a, I: IntoIterator<Item = &'a Rational>>(it: I) -> Rational {
    it.into_iter().fold(Rational::zero(), |acc, x| acc + x)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::{fixtures, int, ratio};

    #[test]
    fn profile_index_roundtrip() {
        let g = StrategicGame::from_fn(
            vec![
                vec!["a".into(), "b".into()],
                vec!["x".into(), "y".into(), "z".into()],
                vec!["p".into(), "q".into()],
            ],
            |p| vec![int(p.get(0) as i64), int(p.get(1) as i64), int(p.get(2) as i64)],
        )
        .unwrap();
        assert_eq!(g.profile_count(), 12);
        for (i, p) in g.profiles().enumerate() {
            assert_eq!(g.profile_index(&p), i);
            assert_eq!(g.profile_at(i), p);
            assert_eq!(g.payoff(&p, 1), &int(p.get(1) as i64));
        }
    }

    #[test]
    fn rejects_bad_tables() {
        let labels = vec![vec!["a".to_string()], vec!["x".to_string(), "y".to_string()]];
        assert!(matches!(
            StrategicGame::new(labels.clone(), vec![vec![int(0), int(0)]]),
            Err(GameError::PayoffTableSize { .. })
        ));
        assert!(matches!(
            StrategicGame::new(labels, vec![vec![int(0)], vec![int(0), int(1)]]),
            Err(GameError::PayoffArity { .. })
        ));
        assert!(matches!(
            StrategicGame::new(vec![vec!["a".into(), "a".into()]], vec![vec![int(0)]; 2]),
            Err(GameError::DuplicateLabel { .. })
        ));
        assert!(matches!(
            StrategicGame::new(vec![vec![]], vec![]),
            Err(GameError::EmptyActionSet { .. })
        ));
    }

    #[test]
    fn normalize_bos() {
        let g = normalize_payoffs(&fixtures::battle_of_sexes());
        let mut p1: Vec<Rational> = g.profiles().map(|p| g.payoff(&p, 0).clone()).collect();
        p1.sort();
        p1.dedup();
        assert_eq!(p1, vec![int(0), ratio(2, 5), int(1)]);
    }

    #[test]
    fn concept_parse() {
        assert_eq!("CCE".parse::<Concept>().unwrap(), Concept::Cce);
        assert!("foo".parse::<Concept>().is_err());
    }
}
