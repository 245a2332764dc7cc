use std::fmt;

use num_traits::{Signed, Zero};

use super::{io::fmt_rational, Concept, DistKind, GameError, PlayerId, ProfileDistribution};
use super::{StrategicGame, Tolerance};
use crate::Rational;

/// Expected payoff vector `E_{a ~ dist}[u(a)]`.
pub fn expected_utility(
    game: &StrategicGame,
    dist: &ProfileDistribution,
) -> Result<Vec<Rational>, GameError> {
    dist.check_domain(game)?;
    let mut out = vec![Rational::zero(); game.num_players()];
    for (p, w) in dist.support() {
        for (acc, u) in out.iter_mut().zip(game.payoffs(p)) {
            *acc += w * u;
        }
    }
    Ok(out)
}

/// CE contribution of one advised action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdviceGain {
    pub advice: usize,
    pub probability: Rational,
    /// Best conditional gain given this advice (never negative).
    pub conditional_gain: Rational,
    pub best_deviation: usize,
}

/// Deviation analysis for one player.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlayerGain {
    pub player: PlayerId,
    pub gain: Rational,
    /// The unconditional deviation attaining `gain` (Nash and CCE only).
    pub best_deviation: Option<usize>,
    /// Per-advice breakdown (CE only).
    pub per_advice: Vec<AdviceGain>,
}

impl PlayerGain {
    /// The single deviation that most improves the player's payoff, as
    /// `(advice, deviation)`. For CE the advice is the one with the largest
    /// weighted contribution.
    pub fn witness(&self) -> Option<(Option<usize>, usize)> {
        if let Some(d) = self.best_deviation {
            return Some((None, d));
        }
        self.per_advice
            .iter()
            .filter(|a| a.conditional_gain.is_positive())
            .max_by(|x, y| {
                (&x.probability * &x.conditional_gain).cmp(&(&y.probability * &y.conditional_gain))
            })
            .map(|a| (Some(a.advice), a.best_deviation))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquilibriumReport {
    pub concept: Concept,
    pub tolerance: Tolerance,
    pub players: Vec<PlayerGain>,
    pub accepted: bool,
}

impl EquilibriumReport {
    /// First player whose gain exceeds the tolerance.
    pub fn violator(&self) -> Option<&PlayerGain> {
        self.players
            .iter()
            .find(|p| p.gain > self.tolerance.epsilon)
    }

    pub fn max_gain(&self) -> Rational {
        self.players
            .iter()
            .map(|p| p.gain.clone())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    /// Renders the report with action labels from `game`.
    pub fn render(&self, game: &StrategicGame) -> String {
        let mut s = String::new();
        let verdict = if self.accepted { "ACCEPT" } else { "REJECT" };
        s.push_str(&format!(
            "{verdict} {} epsilon={}",
            self.concept,
            fmt_rational(&self.tolerance.epsilon)
        ));
        if let Some(k) = self.tolerance.security_parameter {
            s.push_str(&format!(" k={k}"));
        }
        s.push('\n');
        for pg in &self.players {
            s.push_str(&format!(
                "player {} gain={}",
                pg.player + 1,
                fmt_rational(&pg.gain)
            ));
            match pg.witness() {
                Some((None, d)) if pg.gain.is_positive() => {
                    s.push_str(&format!(" deviate={}", game.action_label(pg.player, d)))
                }
                Some((Some(b), d)) => s.push_str(&format!(
                    " advice={} deviate={}",
                    game.action_label(pg.player, b),
                    game.action_label(pg.player, d)
                )),
                _ => {}
            }
            s.push('\n');
        }
        s
    }
}

impl fmt::Display for EquilibriumReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} max_gain={}",
            if self.accepted { "ACCEPT" } else { "REJECT" },
            self.concept,
            fmt_rational(&self.max_gain())
        )
    }
}

/// Expected payoff of `player` when playing `deviation` unconditionally while
/// the others follow `dist`.
fn unconditional_value(
    game: &StrategicGame,
    dist: &ProfileDistribution,
    player: PlayerId,
    deviation: usize,
) -> Rational {
    dist.support()
        .iter()
        .map(|(p, w)| w * game.payoff(&p.with(player, deviation), player))
        .fold(Rational::zero(), |a, b| a + b)
}

/// Full deviation analysis of `player` under `concept`.
pub fn player_gain(
    game: &StrategicGame,
    dist: &ProfileDistribution,
    player: PlayerId,
    concept: Concept,
) -> Result<PlayerGain, GameError> {
    if player >= game.num_players() {
        return Err(GameError::UnknownPlayer(player));
    }
    dist.check_domain(game)?;
    if concept == Concept::Nash && dist.kind() != DistKind::Product {
        return Err(GameError::ConceptMismatch { concept });
    }
    let base = expected_utility(game, dist)?[player].clone();
    match concept {
        Concept::Nash | Concept::Cce => {
            let (best, value) = (0..game.num_actions(player))
                .map(|d| (d, unconditional_value(game, dist, player, d)))
                .reduce(|acc, cur| if cur.1 > acc.1 { cur } else { acc })
                .expect("action sets are non-empty");
            Ok(PlayerGain {
                player,
                gain: value - base,
                best_deviation: Some(best),
                per_advice: Vec::new(),
            })
        }
        Concept::Ce => {
            let mut per_advice = Vec::new();
            let mut total = Rational::zero();
            for (advice, prob) in dist.marginal_map(player) {
                // Unnormalised conditional gains; dividing by `prob` is deferred.
                let cond: Vec<(&_, &Rational)> = dist
                    .support()
                    .iter()
                    .filter(|(p, _)| p.get(player) == advice)
                    .map(|(p, w)| (p, w))
                    .collect();
                let own: Rational = cond
                    .iter()
                    .map(|(p, w)| *w * game.payoff(p, player))
                    .fold(Rational::zero(), |a, b| a + b);
                let mut best = (advice, Rational::zero());
                for d in 0..game.num_actions(player) {
                    let dev: Rational = cond
                        .iter()
                        .map(|(p, w)| *w * game.payoff(&p.with(player, d), player))
                        .fold(Rational::zero(), |a, b| a + b);
                    let g = dev - &own;
                    if g > best.1 {
                        best = (d, g);
                    }
                }
                total += &best.1;
                per_advice.push(AdviceGain {
                    advice,
                    conditional_gain: &best.1 / &prob,
                    probability: prob,
                    best_deviation: best.0,
                });
            }
            Ok(PlayerGain {
                player,
                gain: total,
                best_deviation: None,
                per_advice,
            })
        }
    }
}

/// The exact deviation gain of `player` under `concept`.
///
/// For CCE and Nash this is `max_{a*} E[u_i(a*, a_-i)] - E[u_i(a)]`, which may be
/// negative. For CE it is the advice-weighted sum of best conditional gains and is
/// never negative.
pub fn deviation_gain(
    game: &StrategicGame,
    dist: &ProfileDistribution,
    player: PlayerId,
    concept: Concept,
) -> Result<Rational, GameError> {
    player_gain(game, dist, player, concept).map(|g| g.gain)
}

/// Checks `dist` against `concept` with additive slack `tol.epsilon`.
pub fn verify_equilibrium(
    game: &StrategicGame,
    dist: &ProfileDistribution,
    concept: Concept,
    tol: &Tolerance,
) -> Result<EquilibriumReport, GameError> {
    let players = (0..game.num_players())
        .map(|i| player_gain(game, dist, i, concept))
        .collect::<Result<Vec<_>, _>>()?;
    let accepted = players.iter().all(|p| p.gain <= tol.epsilon);
    Ok(EquilibriumReport {
        concept,
        tolerance: tol.clone(),
        players,
        accepted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::ActionProfile;
    use crate::{fixtures, int, ratio};

    fn ap(v: &[usize]) -> ActionProfile {
        ActionProfile(v.to_vec())
    }

    #[test]
    fn bos_correlated_coin() {
        let g = fixtures::battle_of_sexes();
        let alpha = fixtures::bos_alpha();
        assert_eq!(expected_utility(&g, &alpha).unwrap(), vec![ratio(7, 2), ratio(7, 2)]);
        for c in [Concept::Ce, Concept::Cce] {
            let r = verify_equilibrium(&g, &alpha, c, &Tolerance::exact()).unwrap();
            assert!(r.accepted, "{c}");
        }
        assert!(matches!(
            verify_equilibrium(&g, &alpha, Concept::Nash, &Tolerance::exact()),
            Err(GameError::ConceptMismatch { .. })
        ));
    }

    #[test]
    fn bos_mixed_nash() {
        let g = fixtures::battle_of_sexes();
        let m = ProfileDistribution::product(&[
            vec![ratio(2, 7), ratio(5, 7)],
            vec![ratio(5, 7), ratio(2, 7)],
        ])
        .unwrap();
        let r = verify_equilibrium(&g, &m, Concept::Nash, &Tolerance::exact()).unwrap();
        assert!(r.accepted);
        assert_eq!(r.max_gain(), int(0));
        assert_eq!(expected_utility(&g, &m).unwrap(), vec![ratio(10, 7), ratio(10, 7)]);
    }

    #[test]
    fn gstar_separates_ce_and_cce() {
        let g = fixtures::g_star();
        let alpha = fixtures::g_star_alpha();
        let cce = verify_equilibrium(&g, &alpha, Concept::Cce, &Tolerance::exact()).unwrap();
        assert!(cce.accepted);
        assert_eq!(cce.max_gain(), int(0));
        let ce = verify_equilibrium(&g, &alpha, Concept::Ce, &Tolerance::exact()).unwrap();
        assert!(!ce.accepted);
        let v = ce.violator().unwrap();
        assert_eq!(v.player, 0);
        assert_eq!(v.gain, int(51));
        assert_eq!(v.witness(), Some((Some(0), 2)));
    }

    #[test]
    fn pure_profile_gain_is_best_response_gap() {
        let g = fixtures::battle_of_sexes();
        let d = ProfileDistribution::point(ap(&[0, 1]));
        let r = verify_equilibrium(&g, &d, Concept::Nash, &Tolerance::exact()).unwrap();
        assert!(!r.accepted);
        assert_eq!(r.players[0].gain, int(5));
        assert_eq!(r.players[1].gain, int(5));
    }

    #[test]
    fn epsilon_slack() {
        let g = fixtures::battle_of_sexes();
        let d = ProfileDistribution::point(ap(&[0, 1]));
        let tol = Tolerance::new(int(5)).with_security_parameter(16);
        assert!(verify_equilibrium(&g, &d, Concept::Cce, &tol).unwrap().accepted);
    }
}
