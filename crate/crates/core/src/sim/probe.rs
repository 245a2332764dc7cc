//! Projects a cheap-talk strategy profile onto the underlying game.

use rand::RngCore;

use super::mpc::MpcAction;
use super::protocol::{run_protocol, Mode, PlayerView, ProtocolConfig, StrategyHook, Submission};
use super::SimError;
use crate::blinded::BlindedAction;
use crate::game::{
    verify_equilibrium, Concept, EquilibriumReport, PlayerId, ProfileDistribution, StrategicGame,
};
use crate::solve::PunishmentSpec;
use crate::Rational;

/// A profitable deviation found in the projection, replayed in the protocol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Confirmation {
    pub player: PlayerId,
    pub deviation: usize,
    pub predicted_gain: Rational,
    pub simulated_gain: Rational,
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeReport {
    pub projected: ProfileDistribution,
    pub payoffs: Vec<Rational>,
    pub cce: EquilibriumReport,
    pub confirmation: Option<Confirmation>,
}

/// Keeps `inner`'s pre-play behaviour but always plays `action`.
struct Override<'a> {
    inner: &'a dyn StrategyHook,
    action: usize,
}

impl StrategyHook for Override<'_> {
    fn name(&self) -> String {
        format!("{}/override:{}", self.inner.name(), self.action)
    }

    fn mpc_input(&self) -> MpcAction {
        self.inner.mpc_input()
    }

    fn continue_after_output(&self, output: &BlindedAction) -> bool {
        self.inner.continue_after_output(output)
    }

    fn submit(&self, _view: &PlayerView<'_>, _rng: &mut dyn RngCore) -> Submission {
        Submission::Direct(self.action)
    }

    fn punished_reply(&self, _game: &StrategicGame, _spec: &PunishmentSpec) -> usize {
        self.action
    }
}

/// Computes the distribution over underlying profiles induced by `hooks`,
/// checks it as a coarse correlated equilibrium, and if it fails replays the
/// witness deviation inside the protocol.
pub fn strategic_equivalence_probe(
    config: &ProtocolConfig,
    hooks: &[&dyn StrategyHook],
) -> Result<ProbeReport, SimError> {
    if let Some(h) = hooks.iter().find(|h| !h.is_bounded()) {
        return Err(SimError::Unbounded(h.name()));
    }
    let mut cfg = config.clone();
    cfg.mode = Mode::Exact;
    cfg.keep_transcript = false;
    let run = run_protocol(&cfg, hooks)?;
    let game = config.game();
    let cce = verify_equilibrium(game, &run.outcome, Concept::Cce, &config.tolerance)?;
    let confirmation = match cce.violator() {
        None => None,
        Some(v) => {
            let deviation = v.best_deviation.expect("cce analysis names a deviation");
            let over = Override {
                inner: hooks[v.player],
                action: deviation,
            };
            let mut replaced = hooks.to_vec();
            replaced[v.player] = &over;
            let dev = run_protocol(&cfg, &replaced)?;
            let simulated_gain = &dev.expected[v.player] - &run.expected[v.player];
            Some(Confirmation {
                player: v.player,
                deviation,
                agrees: simulated_gain == v.gain,
                predicted_gain: v.gain.clone(),
                simulated_gain,
            })
        }
    };
    Ok(ProbeReport {
        projected: run.outcome,
        payoffs: run.expected,
        cce,
        confirmation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::ActionProfile;
    use crate::sim::{DeviationClass, DeviationHook, Honest, ProtocolId};
    use crate::{fixtures, int};

    #[test]
    fn honest_profile_projects_to_device() {
        let c = ProtocolConfig::new(ProtocolId::P1, fixtures::g_star_3(), fixtures::g_star_3_alpha()).unwrap();
        let r = strategic_equivalence_probe(&c, &[&Honest, &Honest, &Honest]).unwrap();
        assert_eq!(r.projected, fixtures::g_star_3_alpha().into_joint());
        assert!(r.cce.accepted);
        assert!(r.confirmation.is_none());
    }

    #[test]
    fn fixed_action_profile_rejected_and_confirmed() {
        let c = ProtocolConfig::new(ProtocolId::P1, fixtures::g_star_3(), fixtures::g_star_3_alpha()).unwrap();
        let fixed = DeviationHook::new(0, DeviationClass::PlayIndependent(0));
        let r = strategic_equivalence_probe(&c, &[&fixed, &Honest, &Honest]).unwrap();
        assert!(!r.cce.accepted);
        let conf = r.confirmation.unwrap();
        assert!(conf.agrees);
        assert!(conf.predicted_gain > int(0));
    }

    #[test]
    fn nash_point_accepted() {
        let g = fixtures::battle_of_sexes();
        let point = ProfileDistribution::point(ActionProfile(vec![0, 0]));
        let c = ProtocolConfig::new(ProtocolId::P2, g, point.clone()).unwrap();
        let r = strategic_equivalence_probe(&c, &[&Honest, &Honest]).unwrap();
        assert!(r.cce.accepted);
        assert_eq!(r.projected, point.into_joint());
    }
}
