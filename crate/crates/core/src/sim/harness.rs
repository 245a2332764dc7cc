//! Scripted unilateral deviations and their measured gain.

use std::fmt;
use std::str::FromStr;

use num_traits::ToPrimitive;
use rand::RngCore;

use super::mpc::MpcAction;
use super::protocol::{run_protocol, Honest, Mode, PlayerView, ProtocolConfig, StrategyHook, Submission};
use super::proxy::PublicParams;
use super::SimError;
use crate::blinded::{encode_action, BlindKind, BlindedAction};
use crate::crypto::pke::ciphertext_len;
use crate::crypto::Ciphertext;
use crate::field::Field;
use crate::game::io::fmt_rational;
use crate::game::{expected_utility, PlayerId, StrategicGame};
use crate::Rational;

/// A transformation applied to one's own advice ciphertext.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Transform {
    /// Field addition of a constant (secret-key advice).
    Add(u64),
    /// Field multiplication by a constant (secret-key advice).
    Mul(u64),
    /// Flip the low bit of one ciphertext byte (public-key advice).
    FlipByte(usize),
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transform::Add(d) => write!(f, "add:{d}"),
            Transform::Mul(l) => write!(f, "mul:{l}"),
            Transform::FlipByte(i) => write!(f, "flip:{i}"),
        }
    }
}

impl FromStr for Transform {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, arg) = s.split_once(':').ok_or_else(|| format!("bad transform `{s}`"))?;
        let n: u64 = arg.parse().map_err(|_| format!("bad transform argument `{arg}`"))?;
        match kind {
            "add" => Ok(Transform::Add(n)),
            "mul" => Ok(Transform::Mul(n)),
            "flip" => Ok(Transform::FlipByte(n as usize)),
            _ => Err(format!("unknown transform `{kind}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DeviationClass {
    /// Take one's own MPC output, then abort.
    AbortAtMpc,
    /// Ignore the advice and play a fixed action in the underlying game.
    PlayIndependent(usize),
    /// Submit a fresh public-key encryption of a fixed action to the proxy.
    SubstituteKnownEncryption(usize),
    Malleate(Transform),
    /// The best of all independent plays.
    IgnoreAdviceWorstCase,
    /// Keep one's key shares out of the MPC.
    WithholdShare,
}

impl fmt::Display for DeviationClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeviationClass::AbortAtMpc => f.write_str("abort_at_mpc"),
            DeviationClass::PlayIndependent(a) => write!(f, "play_independent:{a}"),
            DeviationClass::SubstituteKnownEncryption(a) => write!(f, "substitute_known_encryption:{a}"),
            DeviationClass::Malleate(t) => write!(f, "malleate:{t}"),
            DeviationClass::IgnoreAdviceWorstCase => f.write_str("ignore_advice_worst_case"),
            DeviationClass::WithholdShare => f.write_str("withhold_share"),
        }
    }
}

/// PKE ciphertext positions worth flipping: key id, group element, length,
/// message, randomness and tag.
const FLIP_POSITIONS: [usize; 7] = [0, 8, 16, 20, 23, 24, ciphertext_len(4) - 1];

impl DeviationClass {
    /// Parses `abort`, `independent:A`, `substitute:A`, `malleate:add:2`,
    /// `worst-case` and `withhold`, with actions given by label or index.
    pub fn parse(s: &str, game: &StrategicGame, player: PlayerId) -> Result<Self, String> {
        let action = |a: &str| {
            game.action_index(player, a)
                .or_else(|| a.parse().ok().filter(|&i| i < game.num_actions(player)))
                .ok_or_else(|| format!("unknown action `{a}` for player {}", player + 1))
        };
        let (head, rest) = s.split_once(':').unwrap_or((s, ""));
        match head {
            "abort" | "abort_at_mpc" => Ok(DeviationClass::AbortAtMpc),
            "independent" | "play_independent" => action(rest).map(DeviationClass::PlayIndependent),
            "substitute" | "substitute_known_encryption" => {
                action(rest).map(DeviationClass::SubstituteKnownEncryption)
            }
            "malleate" => rest.parse().map(DeviationClass::Malleate),
            "worst-case" | "ignore_advice_worst_case" => Ok(DeviationClass::IgnoreAdviceWorstCase),
            "withhold" | "withhold_share" => Ok(DeviationClass::WithholdShare),
            _ => Err(format!("unknown deviation class `{s}`")),
        }
    }

    /// Display form with action labels.
    pub fn describe(&self, game: &StrategicGame, player: PlayerId) -> String {
        match self {
            DeviationClass::PlayIndependent(a) => {
                format!("play_independent:{}", game.action_label(player, *a))
            }
            DeviationClass::SubstituteKnownEncryption(a) => {
                format!("substitute_known_encryption:{}", game.action_label(player, *a))
            }
            other => other.to_string(),
        }
    }

    /// Rejects classes that make no sense for the configured protocol.
    pub fn check(&self, config: &ProtocolConfig, player: PlayerId) -> Result<(), SimError> {
        let game = config.game();
        let kind = config.protocol().blind_kind();
        let reason = match self {
            _ if player >= game.num_players() => Some(format!("no player {}", player + 1)),
            DeviationClass::PlayIndependent(a) | DeviationClass::SubstituteKnownEncryption(a)
                if *a >= game.num_actions(player) =>
            {
                Some(format!("no action {a}"))
            }
            DeviationClass::SubstituteKnownEncryption(_) if kind != BlindKind::Pke => {
                Some("advice is not public-key encrypted".into())
            }
            DeviationClass::WithholdShare if kind != BlindKind::Ske => {
                Some("there are no key shares to withhold".into())
            }
            DeviationClass::Malleate(Transform::FlipByte(i)) => match kind {
                BlindKind::Ske => Some("byte flips apply to public-key advice".into()),
                _ if *i >= ciphertext_len(4) => Some(format!("ciphertexts have {} bytes", ciphertext_len(4))),
                _ => None,
            },
            DeviationClass::Malleate(Transform::Add(x) | Transform::Mul(x)) => match kind {
                BlindKind::Pke => Some("field operations apply to secret-key advice".into()),
                _ if *x == 0 || *x >= config.modulus => Some(format!("constant must be in 1..{}", config.modulus)),
                _ => None,
            },
            _ => None,
        };
        match reason {
            Some(reason) => Err(SimError::Incompatible {
                class: self.to_string(),
                protocol: config.protocol(),
                reason,
            }),
            None => Ok(()),
        }
    }

    /// Every built-in class applicable to `player` under `config`.
    pub fn library(config: &ProtocolConfig, player: PlayerId) -> Vec<DeviationClass> {
        let k = config.game().num_actions(player);
        let mut out = vec![DeviationClass::AbortAtMpc];
        out.extend((0..k).map(DeviationClass::PlayIndependent));
        match config.protocol().blind_kind() {
            BlindKind::Pke => {
                out.extend((0..k).map(DeviationClass::SubstituteKnownEncryption));
                out.extend(FLIP_POSITIONS.iter().map(|&i| DeviationClass::Malleate(Transform::FlipByte(i))));
            }
            BlindKind::Ske => {
                let p = config.modulus;
                out.extend((1..p).map(|d| DeviationClass::Malleate(Transform::Add(d))));
                out.extend((2..p).map(|l| DeviationClass::Malleate(Transform::Mul(l))));
                out.push(DeviationClass::WithholdShare);
            }
        }
        out.push(DeviationClass::IgnoreAdviceWorstCase);
        out
    }
}

/// Plays a deviation class for one player.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeviationHook {
    pub player: PlayerId,
    pub class: DeviationClass,
}

impl DeviationHook {
    pub fn new(player: PlayerId, class: DeviationClass) -> Self {
        DeviationHook { player, class }
    }
}

fn malleate(t: Transform, advice: &BlindedAction, public: &PublicParams) -> Option<BlindedAction> {
    match (t, advice, public) {
        (Transform::Add(d), BlindedAction::Cipher(Ciphertext::Ske { coord, value }), PublicParams::Ske { modulus }) => {
            let f = Field::new(*modulus).ok()?;
            Some(BlindedAction::Cipher(Ciphertext::Ske { coord: *coord, value: f.add(*value, d % modulus) }))
        }
        (Transform::Mul(l), BlindedAction::Cipher(Ciphertext::Ske { coord, value }), PublicParams::Ske { modulus }) => {
            let f = Field::new(*modulus).ok()?;
            Some(BlindedAction::Cipher(Ciphertext::Ske { coord: *coord, value: f.mul(*value, l % modulus) }))
        }
        (Transform::FlipByte(i), BlindedAction::Cipher(Ciphertext::Pke(bytes)), _) => {
            let mut b = bytes.clone();
            *b.get_mut(i)? ^= 1;
            Some(BlindedAction::Cipher(Ciphertext::Pke(b)))
        }
        _ => None,
    }
}

impl StrategyHook for DeviationHook {
    fn name(&self) -> String {
        self.class.to_string()
    }

    fn mpc_input(&self) -> MpcAction {
        match self.class {
            DeviationClass::WithholdShare => MpcAction::WithholdShare,
            _ => MpcAction::Participate,
        }
    }

    fn continue_after_output(&self, _output: &BlindedAction) -> bool {
        self.class != DeviationClass::AbortAtMpc
    }

    fn submit(&self, view: &PlayerView<'_>, rng: &mut dyn RngCore) -> Submission {
        let follow = || match view.advice {
            Some(_) => Submission::Advice,
            None => Submission::Abstain,
        };
        match self.class {
            DeviationClass::AbortAtMpc | DeviationClass::WithholdShare => follow(),
            DeviationClass::PlayIndependent(a) => Submission::Direct(a),
            DeviationClass::SubstituteKnownEncryption(a) => match view.public {
                PublicParams::Pke(pk) => {
                    let (c, _) = pk.encrypt_random(&encode_action(view.player, a), rng);
                    Submission::Blinded(BlindedAction::Cipher(c))
                }
                PublicParams::Ske { .. } => Submission::Direct(a),
            },
            DeviationClass::Malleate(t) => view
                .advice
                .and_then(|adv| malleate(t, adv, view.public))
                .map_or(Submission::Abstain, Submission::Blinded),
            // Resolved by the harness into independent plays.
            DeviationClass::IgnoreAdviceWorstCase => follow(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationReport {
    pub class: DeviationClass,
    pub player: PlayerId,
    pub mode: Mode,
    pub deviant: Rational,
    pub baseline: Rational,
    pub gain: Rational,
    /// Three standard errors of the deviant mean; zero in exact mode.
    pub radius: f64,
    pub runs: u64,
    pub detection_rate: Rational,
    pub punishment_rate: Rational,
    pub accepted: bool,
    /// For the worst case: the independent play that attained it.
    pub chosen: Option<usize>,
}

impl DeviationReport {
    pub fn render_row(&self, game: &StrategicGame) -> String {
        let mut class = self.class.describe(game, self.player);
        if let Some(a) = self.chosen {
            class.push_str(&format!("({})", game.action_label(self.player, a)));
        }
        format!(
            "{:<4} {:<36} {:>12} {:>12} {:>12} {:>9.4} {:>8} {:>8} {}",
            format!("p{}", self.player + 1),
            class,
            fmt_rational(&self.deviant),
            fmt_rational(&self.baseline),
            fmt_rational(&self.gain),
            self.radius,
            fmt_rational(&self.detection_rate),
            fmt_rational(&self.punishment_rate),
            if self.accepted { "PASS" } else { "FAIL" }
        )
    }

    pub const HEADER: &'static str =
        "who  class                                     deviant     baseline         gain    radius detected punished verdict";
}

/// Expected payoff of `player` under one deviation class, against honest
/// opponents, compared with the honest expectation under the device.
pub fn deviation_harness(
    config: &ProtocolConfig,
    player: PlayerId,
    class: DeviationClass,
) -> Result<DeviationReport, SimError> {
    class.check(config, player)?;
    if class == DeviationClass::IgnoreAdviceWorstCase {
        let mut best: Option<DeviationReport> = None;
        for a in 0..config.game().num_actions(player) {
            let r = deviation_harness(config, player, DeviationClass::PlayIndependent(a))?;
            if best.as_ref().is_none_or(|b| r.deviant > b.deviant) {
                best = Some(r);
            }
        }
        let mut r = best.expect("action sets are non-empty");
        if let DeviationClass::PlayIndependent(a) = r.class {
            r.chosen = Some(a);
        }
        r.class = class;
        return Ok(r);
    }
    let hook = DeviationHook::new(player, class);
    let hooks: Vec<&dyn StrategyHook> = (0..config.game().num_players())
        .map(|i| if i == player { &hook as &dyn StrategyHook } else { &Honest })
        .collect();
    let mut cfg = config.clone();
    cfg.keep_transcript = false;
    let run = run_protocol(&cfg, &hooks)?;
    let baseline = expected_utility(config.game(), config.alpha())?[player].clone();
    let deviant = run.expected[player].clone();
    let gain = &deviant - &baseline;
    let radius = run.radius(player);
    let eps = &config.tolerance.epsilon;
    let accepted = match config.mode {
        Mode::Exact => gain <= *eps,
        Mode::MonteCarlo => {
            gain <= *eps || gain.to_f64().unwrap_or(f64::INFINITY) <= eps.to_f64().unwrap_or(0.0) + radius
        }
    };
    Ok(DeviationReport {
        class,
        player,
        mode: config.mode,
        deviant,
        baseline,
        gain,
        radius,
        runs: run.runs,
        detection_rate: run.detection_rate,
        punishment_rate: run.punishment_rate,
        accepted,
        chosen: None,
    })
}

/// Runs the whole library for one player.
pub fn run_library(config: &ProtocolConfig, player: PlayerId) -> Result<Vec<DeviationReport>, SimError> {
    DeviationClass::library(config, player)
        .into_iter()
        .map(|c| deviation_harness(config, player, c))
        .collect()
}
