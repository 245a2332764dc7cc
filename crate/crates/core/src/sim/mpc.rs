//! The ideal MPC functionality with adversary hooks.
//!
//! Corrupted parties receive their outputs before anyone else and may then
//! abort. An abort stops honest parties from receiving outputs only when
//! delivery is not guaranteed, that is when `2t >= N`.

use std::fmt;

use super::transcript::{TrialLog, Visibility};
use crate::blinded::BlindedAction;
use crate::game::PlayerId;
use crate::sharing::{reconstruct, Share};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MpcAction {
    Participate,
    Abort,
    /// Keep one's key shares out of the computation (share-input mode only).
    WithholdShare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Functionality {
    /// Samples the device with no private inputs.
    Sampler,
    /// Reconstructs secrets from `threshold`-of-N shares, then samples.
    ShareInput { threshold: usize },
}

impl fmt::Display for Functionality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Functionality::Sampler => f.write_str("sampler"),
            Functionality::ShareInput { threshold } => write!(f, "share-input/{threshold}"),
        }
    }
}

/// Decisions of corrupted parties. Only called for corrupted players, and
/// only ever shown the calling player's own output.
pub trait MpcAdversary {
    fn input_action(&self, player: PlayerId) -> MpcAction;
    fn continue_after_output(&self, player: PlayerId, output: &BlindedAction) -> bool;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdealMpc {
    n: usize,
    corrupted: Vec<PlayerId>,
    functionality: Functionality,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MpcOutcome {
    /// Output received by each player.
    pub outputs: Vec<Option<BlindedAction>>,
    /// An abort took effect and honest players received nothing.
    pub aborted: bool,
    /// First party seen aborting, withholding or sending a malformed input.
    pub detected: Option<PlayerId>,
}

impl IdealMpc {
    pub fn new(n: usize, mut corrupted: Vec<PlayerId>, functionality: Functionality) -> Self {
        corrupted.sort_unstable();
        corrupted.dedup();
        IdealMpc {
            n,
            corrupted,
            functionality,
        }
    }

    pub fn corrupted(&self) -> &[PlayerId] {
        &self.corrupted
    }

    pub fn delivery_guaranteed(&self) -> bool {
        2 * self.corrupted.len() < self.n
    }

    fn is_corrupted(&self, i: PlayerId) -> bool {
        self.corrupted.binary_search(&i).is_ok()
    }

    fn abort_event(&self, log: &mut TrialLog, by: PlayerId, stage: &str) -> bool {
        let effective = !self.delivery_guaranteed();
        log.push(
            Visibility::All,
            format_args!("mpc-abort by=p{} stage={stage} effective={effective}", by + 1),
        );
        effective
    }

    /// Runs one invocation. In share-input mode `shares[i]` holds player `i`'s
    /// share of every secret; `sample` receives the reconstructed secrets and
    /// returns one output per player.
    pub fn run<F>(
        &self,
        adversary: &dyn MpcAdversary,
        shares: Option<&[Vec<Share>]>,
        log: &mut TrialLog,
        sample: F,
    ) -> MpcOutcome
    where
        F: FnOnce(Option<Vec<u64>>) -> Vec<BlindedAction>,
    {
        let t = self.corrupted.len();
        log.push(
            Visibility::Engine,
            format_args!(
                "mpc-call n={} t={t} delivery={} functionality={}",
                self.n,
                if self.delivery_guaranteed() { "guaranteed" } else { "abortable" },
                self.functionality
            ),
        );
        let mut detected = None;
        let mut contributing = Vec::new();
        for i in 0..self.n {
            let action = if self.is_corrupted(i) {
                adversary.input_action(i)
            } else {
                MpcAction::Participate
            };
            match (action, self.functionality) {
                (MpcAction::Participate, Functionality::ShareInput { .. }) => {
                    let count = shares.map_or(0, |s| s[i].len());
                    log.push(Visibility::player(i), format_args!("mpc-input p{} shares={count}", i + 1));
                    contributing.push(i);
                }
                (MpcAction::Participate, Functionality::Sampler) => contributing.push(i),
                (MpcAction::WithholdShare, Functionality::ShareInput { .. }) => {
                    log.push(Visibility::All, format_args!("mpc-withhold p{}", i + 1));
                    detected.get_or_insert(i);
                }
                (MpcAction::WithholdShare, Functionality::Sampler) => {
                    log.push(Visibility::All, format_args!("mpc-malformed p{}", i + 1));
                    detected.get_or_insert(i);
                    if self.abort_event(log, i, "input") {
                        return self.aborted(detected, Vec::new());
                    }
                }
                (MpcAction::Abort, _) => {
                    detected.get_or_insert(i);
                    if self.abort_event(log, i, "input") {
                        return self.aborted(detected, Vec::new());
                    }
                }
            }
        }
        let secrets = match (self.functionality, shares) {
            (Functionality::ShareInput { threshold }, Some(all)) => {
                let count = all.first().map_or(0, Vec::len);
                let mut out = Vec::with_capacity(count);
                for c in 0..count {
                    let pieces: Vec<Share> = contributing.iter().map(|&i| all[i][c]).collect();
                    match reconstruct(&pieces, threshold) {
                        Ok(Some(s)) => out.push(s),
                        _ => {
                            log.push(Visibility::All, "mpc-abort reason=insufficient-shares effective=true");
                            return self.aborted(detected, Vec::new());
                        }
                    }
                }
                Some(out)
            }
            _ => None,
        };
        let outputs = sample(secrets);
        let mut received = vec![None; self.n];
        for &c in &self.corrupted {
            log.push(Visibility::player(c), format_args!("mpc-output p{} {}", c + 1, label(&outputs[c])));
            received[c] = Some(outputs[c].clone());
            if !adversary.continue_after_output(c, &outputs[c]) {
                detected.get_or_insert(c);
                if self.abort_event(log, c, "output") {
                    return self.aborted(detected, received);
                }
            }
        }
        for i in (0..self.n).filter(|&i| !self.is_corrupted(i)) {
            log.push(Visibility::player(i), format_args!("mpc-output p{} {}", i + 1, label(&outputs[i])));
            received[i] = Some(outputs[i].clone());
        }
        MpcOutcome {
            outputs: received,
            aborted: false,
            detected,
        }
    }


    fn aborted(&self, detected: Option<PlayerId>, received: Vec<Option<BlindedAction>>) -> MpcOutcome {
        let mut outputs = vec![None; self.n];
        for (i, o) in received.into_iter().enumerate() {
            if self.is_corrupted(i) {
                outputs[i] = o;
            }
        }
        MpcOutcome {
            outputs,
            aborted: true,
            detected,
        }
    }
}

pub(crate) fn label(a: &BlindedAction) -> String {
    match a {
        BlindedAction::Plain(x) => format!("plain:{x}"),
        BlindedAction::Cipher(c) => c.label(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sharing::share_with_coefficients;

    struct Script(MpcAction, bool);

    impl MpcAdversary for Script {
        fn input_action(&self, _: PlayerId) -> MpcAction {
            self.0
        }
        fn continue_after_output(&self, _: PlayerId, _: &BlindedAction) -> bool {
            self.1
        }
    }

    fn plain(n: usize) -> Vec<BlindedAction> {
        (0..n).map(BlindedAction::Plain).collect()
    }

    #[test]
    fn three_players_abort_is_ignored() {
        let mpc = IdealMpc::new(3, vec![0], Functionality::Sampler);
        assert!(mpc.delivery_guaranteed());
        let mut log = TrialLog::new();
        let out = mpc.run(&Script(MpcAction::Participate, false), None, &mut log, |_| plain(3));
        assert!(!out.aborted);
        assert_eq!(out.detected, Some(0));
        assert!(out.outputs.iter().all(Option::is_some));
    }

    #[test]
    fn two_players_abort_stops_honest_output() {
        let mpc = IdealMpc::new(2, vec![1], Functionality::Sampler);
        let mut log = TrialLog::new();
        let out = mpc.run(&Script(MpcAction::Participate, false), None, &mut log, |_| plain(2));
        assert!(out.aborted);
        assert_eq!(out.outputs, vec![None, Some(BlindedAction::Plain(1))]);
        let out = mpc.run(&Script(MpcAction::Abort, true), None, &mut log, |_| plain(2));
        assert_eq!(out.outputs, vec![None, None]);
    }

    #[test]
    fn withheld_share_still_reconstructs() {
        let p = 7;
        let secret = 5;
        let shares = share_with_coefficients(secret, &[1, 2], 4, p).unwrap();
        let per_player: Vec<Vec<Share>> = shares.into_iter().map(|s| vec![s]).collect();
        let mpc = IdealMpc::new(4, vec![2], Functionality::ShareInput { threshold: 3 });
        let mut log = TrialLog::new();
        let mut seen = None;
        let out = mpc.run(&Script(MpcAction::WithholdShare, true), Some(&per_player), &mut log, |s| {
            seen = s;
            plain(4)
        });
        assert_eq!(seen, Some(vec![secret]));
        assert!(!out.aborted);
        assert_eq!(out.detected, Some(2));
    }
}
