//! Equilibrium computation: CE/CCE programs, Nash enumeration and punishments.

mod nash;
pub mod simplex;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::game::{
    verify_equilibrium, ActionProfile, Concept, DistKind, GameError, PlayerId,
    ProfileDistribution, StrategicGame, Tolerance,
};
use crate::Rational;
use simplex::{LinearProgram, LpError, Relation};

pub use nash::{bimatrix_mixed_nash, enumerate_pure_nash, solve_linear_system, worst_nash_for};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("solver failure: {0}")]
    Lp(#[from] LpError),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("no equilibrium found: {0}")]
    NotFound(String),
    #[error("solver output failed certification: {0}")]
    Certification(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PunishmentMode {
    WorstNash,
    Minmax,
}

impl std::fmt::Display for PunishmentMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PunishmentMode::WorstNash => "worst_nash",
            PunishmentMode::Minmax => "minmax",
        })
    }
}

impl std::str::FromStr for PunishmentMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "worst_nash" | "worst-nash" | "nash" => Ok(PunishmentMode::WorstNash),
            "minmax" => Ok(PunishmentMode::Minmax),
            other => Err(format!("unknown punishment mode `{other}`")),
        }
    }
}

/// How the other players punish `target`.
///
/// `strategy` is a distribution over full profiles. In worst-Nash mode it is the
/// equilibrium itself, including the target's own component. In minmax mode the
/// target coordinate holds a best pure response to the punishers' mixture.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PunishmentSpec {
    pub target: PlayerId,
    pub mode: PunishmentMode,
    pub strategy: ProfileDistribution,
    pub value: Rational,
    /// Worst-Nash search was restricted to pure equilibria.
    pub pure_only: bool,
    /// Punishers were allowed to correlate (three or more players, minmax mode).
    pub correlated_punishers: bool,
}

impl PunishmentSpec {
    /// The punishers' joint mixture as (profile with target coordinate zeroed,
    /// probability) pairs.
    pub fn punisher_mixture(&self) -> Vec<(ActionProfile, Rational)> {
        let others = self
            .strategy
            .map_profiles(|p| p.with(self.target, 0))
            .expect("marginal of a distribution is a distribution");
        others.support().to_vec()
    }

    /// The target's component of the strategy.
    pub fn target_marginal(&self, num_actions: usize) -> Vec<Rational> {
        self.strategy.marginal(self.target, num_actions)
    }
}

/// Maximises `sum_i w_i E[u_i]` over the CE or CCE polytope.
pub fn solve_lp_equilibrium(
    game: &StrategicGame,
    concept: Concept,
    weights: &[Rational],
) -> Result<ProfileDistribution, SolveError> {
    let n = game.num_players();
    if weights.len() != n {
        return Err(SolveError::Unsupported(format!(
            "expected {n} weights, got {}",
            weights.len()
        )));
    }
    if concept == Concept::Nash {
        return Err(SolveError::Unsupported(
            "the linear program covers ce and cce only".into(),
        ));
    }
    let profiles: Vec<ActionProfile> = game.profiles().collect();
    let objective = profiles
        .iter()
        .map(|p| {
            game.payoffs(p)
                .iter()
                .zip(weights)
                .fold(Rational::zero(), |acc, (u, w)| acc + u * w)
        })
        .collect();
    let mut lp = LinearProgram::new(objective);
    lp.add(
        vec![Rational::one(); profiles.len()],
        Relation::Eq,
        Rational::one(),
    );
    for i in 0..n {
        let k = game.num_actions(i);
        for dev in 0..k {
            match concept {
                Concept::Cce => {
                    let row = profiles
                        .iter()
                        .map(|p| game.payoff(&p.with(i, dev), i) - game.payoff(p, i))
                        .collect();
                    lp.add(row, Relation::Le, Rational::zero());
                }
                _ => {
                    for advice in (0..k).filter(|&b| b != dev) {
                        let row = profiles
                            .iter()
                            .map(|p| {
                                if p.get(i) == advice {
                                    game.payoff(&p.with(i, dev), i) - game.payoff(p, i)
                                } else {
                                    Rational::zero()
                                }
                            })
                            .collect();
                        lp.add(row, Relation::Le, Rational::zero());
                    }
                }
            }
        }
    }
    let sol = lp.maximize()?;
    let dist = ProfileDistribution::joint(profiles.into_iter().zip(sol.x))?;
    let report = verify_equilibrium(game, &dist, concept, &Tolerance::exact())?;
    if !report.accepted {
        return Err(SolveError::Certification(format!(
            "{concept} program returned a point with gain {}",
            report.max_gain()
        )));
    }
    Ok(dist)
}

/// Best pure responses of `target` against a distribution of the others' play.
pub(crate) fn best_responses(
    game: &StrategicGame,
    others: &[(ActionProfile, Rational)],
    target: PlayerId,
) -> (Vec<usize>, Rational) {
    let values: Vec<Rational> = (0..game.num_actions(target))
        .map(|a| {
            others
                .iter()
                .fold(Rational::zero(), |acc, (p, w)| {
                    acc + w * game.payoff(&p.with(target, a), target)
                })
        })
        .collect();
    let best = values.iter().max().expect("non-empty action set").clone();
    let args = (0..values.len()).filter(|&a| values[a] == best).collect();
    (args, best)
}

/// Holds `target` to `min over punisher mixtures max over target actions` of the
/// target's expected payoff. With three or more players the punishers' mixture
/// is correlated.
pub fn minmax_punishment(
    game: &StrategicGame,
    target: PlayerId,
) -> Result<PunishmentSpec, SolveError> {
    let n = game.num_players();
    if target >= n {
        return Err(GameError::UnknownPlayer(target).into());
    }
    // Profiles of the others, encoded as full profiles with target action 0.
    let others: Vec<ActionProfile> = game
        .profiles()
        .filter(|p| p.get(target) == 0)
        .collect();
    let m = others.len();
    // Variables: y_b for each punisher profile, then v+ and v-.
    let mut objective = vec![Rational::zero(); m + 2];
    objective[m] = -Rational::one();
    objective[m + 1] = Rational::one();
    let mut lp = LinearProgram::new(objective);
    let mut simplex_row = vec![Rational::one(); m + 2];
    simplex_row[m] = Rational::zero();
    simplex_row[m + 1] = Rational::zero();
    lp.add(simplex_row, Relation::Eq, Rational::one());
    for a in 0..game.num_actions(target) {
        let mut row: Vec<Rational> = others
            .iter()
            .map(|b| game.payoff(&b.with(target, a), target).clone())
            .collect();
        row.push(-Rational::one());
        row.push(Rational::one());
        lp.add(row, Relation::Le, Rational::zero());
    }
    let sol = lp.maximize()?;
    let value = &sol.x[m] - &sol.x[m + 1];
    let mixture: Vec<(ActionProfile, Rational)> = others
        .into_iter()
        .zip(sol.x.into_iter().take(m))
        .filter(|(_, w)| !w.is_zero())
        .collect();
    let (br, br_value) = best_responses(game, &mixture, target);
    if br_value != value {
        return Err(SolveError::Certification(format!(
            "minmax value {value} disagrees with best response value {br_value}"
        )));
    }
    let full = mixture
        .iter()
        .map(|(p, w)| (p.with(target, br[0]), w.clone()));
    let correlated = n >= 3;
    let strategy = if correlated {
        ProfileDistribution::joint(full)?
    } else {
        ProfileDistribution::with_kind(full, DistKind::Product)?
    };
    Ok(PunishmentSpec {
        target,
        mode: PunishmentMode::Minmax,
        strategy,
        value,
        pure_only: false,
        correlated_punishers: correlated,
    })
}

/// Dispatches on `mode`.
pub fn punishment(
    game: &StrategicGame,
    target: PlayerId,
    mode: PunishmentMode,
) -> Result<PunishmentSpec, SolveError> {
    match mode {
        PunishmentMode::WorstNash => worst_nash_for(game, target),
        PunishmentMode::Minmax => minmax_punishment(game, target),
    }
}
