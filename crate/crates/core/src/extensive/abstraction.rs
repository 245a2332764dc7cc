//! Coarse follow/abort tree for two-player cheap-talk protocols.
//!
//! Player 1 moves first, then player 2. If both follow, the leaf pays the
//! expected utility under the device. An abort hands the move to the other
//! player, who picks an action of the underlying game against the deviator's
//! prescribed part of the punishment. Everything cryptographic is folded
//! into those two choices.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};

use super::tree::{ExtensiveTree, TreeBuilder, TreeStrategyProfile};
use super::TreeError;
use crate::game::{ActionProfile, ProfileDistribution, StrategicGame};
use crate::solve::{PunishmentMode, PunishmentSpec};
use crate::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AbstractionProtocol {
    P2,
    P4,
}

impl AbstractionProtocol {
    pub fn punishment_mode(self) -> PunishmentMode {
        match self {
            AbstractionProtocol::P2 => PunishmentMode::WorstNash,
            AbstractionProtocol::P4 => PunishmentMode::Minmax,
        }
    }
}

impl fmt::Display for AbstractionProtocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AbstractionProtocol::P2 => "p2",
            AbstractionProtocol::P4 => "p4",
        })
    }
}

impl FromStr for AbstractionProtocol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "p2" | "2" => Ok(AbstractionProtocol::P2),
            "p4" | "4" => Ok(AbstractionProtocol::P4),
            other => Err(format!("no follow/abort abstraction for protocol {other:?} (use p2 or p4)")),
        }
    }
}

/// Builds the tree and the prescribed profile (both follow, punishers play
/// their part of the punishment).
pub fn build_cheaptalk_abstraction(
    game: &StrategicGame,
    alpha: &ProfileDistribution,
    punishments: &[PunishmentSpec],
    protocol: AbstractionProtocol,
) -> Result<(ExtensiveTree, TreeStrategyProfile), TreeError> {
    if game.num_players() != 2 {
        return Err(TreeError::Unsupported(format!(
            "the follow/abort abstraction covers two players, got {}",
            game.num_players()
        )));
    }
    let spec = |target: usize| -> Result<&PunishmentSpec, TreeError> {
        let s = punishments
            .iter()
            .find(|s| s.target == target)
            .ok_or_else(|| TreeError::Unsupported(format!("no punishment against player {}", target + 1)))?;
        if s.mode != protocol.punishment_mode() {
            return Err(TreeError::Unsupported(format!(
                "{protocol} punishes with {}, got {}",
                protocol.punishment_mode(),
                s.mode
            )));
        }
        Ok(s)
    };
    let follow_value: Vec<Rational> = (0..2)
        .map(|i| {
            alpha.support().iter().fold(Rational::zero(), |acc, (p, w)| acc + w * game.payoff(p, i))
        })
        .collect();

    let mut b = TreeBuilder::new(2);
    let root = b.decision(None, 0)?;
    let second = b.decision(Some((root, "follow")), 1)?;
    b.leaf(Some((second, "follow")), follow_value)?;
    let mut punish_nodes = Vec::new();
    // Player 1 aborts at the root; player 2 aborts after player 1 followed.
    for (deviator, parent) in [(0usize, root), (1usize, second)] {
        let s = spec(deviator)?;
        let punisher = 1 - deviator;
        let node = b.decision(Some((parent, "abort")), punisher)?;
        let own = s.target_marginal(game.num_actions(deviator));
        for a in 0..game.num_actions(punisher) {
            let payoffs: Vec<Rational> = (0..2)
                .map(|i| {
                    own.iter().enumerate().fold(Rational::zero(), |acc, (d, w)| {
                        let mut prof = vec![0; 2];
                        prof[punisher] = a;
                        prof[deviator] = d;
                        acc + w * game.payoff(&ActionProfile(prof), i)
                    })
                })
                .collect();
            b.leaf(Some((node, game.action_label(punisher, a))), payoffs)?;
        }
        punish_nodes.push((node, s.strategy.marginal(punisher, game.num_actions(punisher))));
    }
    let tree = b.build()?;
    let sigma = TreeStrategyProfile::new(&tree, |id| {
        if let Some((_, dist)) = punish_nodes.iter().find(|(n, _)| *n == id) {
            return dist.clone();
        }
        // Follow is always the first action.
        let k = tree.children(id).len();
        (0..k).map(|a| if a == 0 { Rational::one() } else { Rational::zero() }).collect()
    })?;
    Ok((tree, sigma))
}
