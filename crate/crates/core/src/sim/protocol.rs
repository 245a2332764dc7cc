//! Protocols 1 to 4: configuration, strategy hooks and the trial runner.

use std::fmt;
use std::str::FromStr;

use num_traits::{ToPrimitive, Zero};
use rand::{Rng, RngCore};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::channel::{ChannelKind, ChannelModel, Party};
use super::chooser::{explore, Chooser, Sampler};
use super::mpc::{label, Functionality, IdealMpc, MpcAction, MpcAdversary};
use super::proxy::{verify_translation, ProxyKeys, PublicParams, VerifiableProxy};
use super::transcript::{Transcript, TranscriptBuilder, TrialLog, Visibility, TRANSCRIPT_VERSION};
use super::SimError;
use crate::blinded::{encode_action, BlindKind, BlindedAction};
use crate::crypto::pke::Group;
use crate::crypto::{pke_gen, SkeInstance, SkeKey, TOY_BANNER};
use crate::field::{is_prime, Field};
use crate::game::io::{fmt_rational, write_distribution, write_game};
use crate::game::{
    verify_equilibrium, ActionProfile, Concept, PlayerId, ProfileDistribution, StrategicGame,
    Tolerance,
};
use crate::sharing::{share, Share};
use crate::solve::{best_responses, punishment, PunishmentMode, PunishmentSpec};
use crate::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProtocolId {
    /// Public-key advice, no punishment.
    P1,
    /// Public-key advice, worst-Nash punishment of detected deviators.
    P2,
    /// Secret-key advice whose key is secret-shared among the players.
    P3,
    /// Public-key advice, minmax punishment.
    P4,
}

impl ProtocolId {
    pub fn blind_kind(self) -> BlindKind {
        match self {
            ProtocolId::P3 => BlindKind::Ske,
            _ => BlindKind::Pke,
        }
    }

    pub fn channel(self) -> ChannelKind {
        match self {
            ProtocolId::P3 => ChannelKind::Pairwise,
            _ => ChannelKind::Broadcast,
        }
    }

    pub fn punishment_mode(self) -> Option<PunishmentMode> {
        match self {
            ProtocolId::P2 => Some(PunishmentMode::WorstNash),
            ProtocolId::P4 => Some(PunishmentMode::Minmax),
            _ => None,
        }
    }
}

impl fmt::Display for ProtocolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for ProtocolId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().trim_start_matches('p') {
            "1" => Ok(ProtocolId::P1),
            "2" => Ok(ProtocolId::P2),
            "3" => Ok(ProtocolId::P3),
            "4" => Ok(ProtocolId::P4),
            _ => Err(format!("unknown protocol `{s}` (expected p1..p4)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Independent seeded trials.
    MonteCarlo,
    /// Every branch of every outcome-relevant draw, with exact probabilities.
    Exact,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::MonteCarlo => "monte-carlo",
            Mode::Exact => "exact",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mc" | "monte-carlo" => Ok(Mode::MonteCarlo),
            "exact" => Ok(Mode::Exact),
            _ => Err(format!("unknown mode `{s}`")),
        }
    }
}

/// A validated protocol setup. The game, device and punishments are fixed at
/// construction; the public fields are run knobs checked again at run time.
#[derive(Debug, Clone)]
pub struct ProtocolConfig {
    protocol: ProtocolId,
    game: StrategicGame,
    alpha: ProfileDistribution,
    punishments: Vec<PunishmentSpec>,
    warnings: Vec<String>,
    pub security_parameter: u32,
    /// Field size for secret-key advice.
    pub modulus: u64,
    pub trials: u64,
    pub seed: u64,
    pub mode: Mode,
    pub tolerance: Tolerance,
    pub tamper_proxy: bool,
    pub parallel: bool,
    pub keep_transcript: bool,
    pub max_paths: usize,
}

fn default_modulus(game: &StrategicGame) -> u64 {
    let n = game.num_players() as u64;
    let widest = game.action_counts().into_iter().max().unwrap_or(1) as u64;
    let mut p = (n + 1).max(widest).max(2);
    while !is_prime(p) {
        p += 1;
    }
    p
}

impl ProtocolConfig {
    /// Checks the setup and precomputes punishments for P2 and P4.
    pub fn new(
        protocol: ProtocolId,
        game: StrategicGame,
        alpha: ProfileDistribution,
    ) -> Result<Self, SimError> {
        alpha.check_domain(&game)?;
        let n = game.num_players();
        if protocol == ProtocolId::P3 && n < 4 {
            return Err(SimError::Config(format!(
                "P3 needs four or more players, got {n}"
            )));
        }
        if game.action_counts().iter().any(|&k| k > u16::MAX as usize) || n > u16::MAX as usize {
            return Err(SimError::Config("too many actions to encode".into()));
        }
        let punishments = match protocol.punishment_mode() {
            Some(mode) => (0..n)
                .map(|i| punishment(&game, i, mode))
                .collect::<Result<Vec<_>, _>>()?,
            None => Vec::new(),
        };
        let mut warnings = Vec::new();
        if protocol == ProtocolId::P1 && n == 2 {
            warnings.push(
                "P1 with two players: an abort can withhold the honest player's advice".to_string(),
            );
        }
        let report = verify_equilibrium(&game, &alpha, Concept::Cce, &Tolerance::exact())?;
        if !report.accepted {
            warnings.push(format!(
                "device is not a coarse correlated equilibrium (max gain {})",
                fmt_rational(&report.max_gain())
            ));
        }
        let modulus = default_modulus(&game);
        let mode = if protocol == ProtocolId::P3 {
            Mode::Exact
        } else {
            Mode::MonteCarlo
        };
        Ok(ProtocolConfig {
            protocol,
            game,
            alpha,
            punishments,
            warnings,
            security_parameter: 16,
            modulus,
            trials: 10_000,
            seed: 0,
            mode,
            tolerance: Tolerance::exact(),
            tamper_proxy: false,
            parallel: false,
            keep_transcript: false,
            max_paths: 1 << 20,
        })
    }

    pub fn protocol(&self) -> ProtocolId {
        self.protocol
    }

    pub fn game(&self) -> &StrategicGame {
        &self.game
    }

    pub fn alpha(&self) -> &ProfileDistribution {
        &self.alpha
    }

    pub fn punishments(&self) -> &[PunishmentSpec] {
        &self.punishments
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Checks the run knobs.
    pub fn validate(&self) -> Result<(), SimError> {
        match self.protocol.blind_kind() {
            BlindKind::Pke => {
                Group::for_security_parameter(self.security_parameter)?;
            }
            BlindKind::Ske => {
                let n = self.game.num_players() as u64;
                let widest = self.game.action_counts().into_iter().max().unwrap_or(1) as u64;
                if !is_prime(self.modulus) || self.modulus <= n || self.modulus < widest {
                    return Err(SimError::Config(format!(
                        "modulus must be a prime above the player count and at least the largest action count, got {}",
                        self.modulus
                    )));
                }
            }
        }
        if self.mode == Mode::MonteCarlo && self.trials == 0 {
            return Err(SimError::Config("at least one trial is needed".into()));
        }
        Ok(())
    }

    /// SHA-256 over a canonical rendering of everything but the seed.
    pub fn config_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!("protocol {}\n", self.protocol));
        h.update(write_game(&self.game));
        h.update(write_distribution(&self.game, &self.alpha));
        for p in &self.punishments {
            h.update(format!("punish {} {}\n", p.target, p.mode));
            h.update(write_distribution(&self.game, &p.strategy));
        }
        h.update(format!(
            "k {} p {} trials {} mode {} epsilon {} tamper {}\n",
            self.security_parameter,
            self.modulus,
            self.trials,
            self.mode,
            fmt_rational(&self.tolerance.epsilon),
            self.tamper_proxy
        ));
        hex::encode(h.finalize())
    }
}

/// What a player knows when choosing its submission.
pub struct PlayerView<'a> {
    pub player: PlayerId,
    pub num_actions: usize,
    pub advice: Option<&'a BlindedAction>,
    pub public: &'a PublicParams,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Submission {
    /// Hand the received advice to the proxy unchanged.
    Advice,
    /// Hand something else to the proxy.
    Blinded(BlindedAction),
    /// Act in the underlying game without the proxy.
    Direct(usize),
    /// Submit nothing; the player's action is drawn uniformly.
    Abstain,
}

/// One player's behaviour in a protocol run.
pub trait StrategyHook: Send + Sync {
    fn name(&self) -> String;

    fn is_honest(&self) -> bool {
        false
    }

    /// Whether the hook induces finitely many outcomes.
    fn is_bounded(&self) -> bool {
        true
    }

    fn mpc_input(&self) -> MpcAction {
        MpcAction::Participate
    }

    fn continue_after_output(&self, _output: &BlindedAction) -> bool {
        true
    }

    fn submit(&self, view: &PlayerView<'_>, rng: &mut dyn RngCore) -> Submission;

    /// Reply when the others punish this player: a best pure response.
    fn punished_reply(&self, game: &StrategicGame, spec: &PunishmentSpec) -> usize {
        best_responses(game, &spec.punisher_mixture(), spec.target).0[0]
    }
}

/// Follows the protocol.
#[derive(Debug, Clone, Copy, Default)]
pub struct Honest;

impl StrategyHook for Honest {
    fn name(&self) -> String {
        "honest".into()
    }

    fn is_honest(&self) -> bool {
        true
    }

    fn submit(&self, view: &PlayerView<'_>, _rng: &mut dyn RngCore) -> Submission {
        if view.advice.is_some() {
            Submission::Advice
        } else {
            Submission::Abstain
        }
    }
}

struct HookAdversary<'a>(&'a [&'a dyn StrategyHook]);

impl MpcAdversary for HookAdversary<'_> {
    fn input_action(&self, player: PlayerId) -> MpcAction {
        self.0[player].mpc_input()
    }

    fn continue_after_output(&self, player: PlayerId, output: &BlindedAction) -> bool {
        self.0[player].continue_after_output(output)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct TrialOutcome {
    profile: ActionProfile,
    detected: bool,
    punished: bool,
    refused: bool,
    aborted: bool,
    proxy_faults: usize,
}

/// Aggregate result of a run. Rates and expectations are exact in exact mode
/// and sample frequencies otherwise.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub protocol: ProtocolId,
    pub mode: Mode,
    /// Trials, or enumerated paths in exact mode.
    pub runs: u64,
    pub expected: Vec<Rational>,
    /// Standard error of each mean; zero in exact mode.
    pub std_error: Vec<f64>,
    pub outcome: ProfileDistribution,
    pub detection_rate: Rational,
    pub punishment_rate: Rational,
    pub refusal_rate: Rational,
    pub abort_rate: Rational,
    pub proxy_fault_rate: Rational,
    pub transcript: Transcript,
    pub warnings: Vec<String>,
}

impl RunReport {
    /// Three standard errors.
    pub fn radius(&self, player: PlayerId) -> f64 {
        3.0 * self.std_error[player]
    }

    pub fn render(&self, game: &StrategicGame) -> String {
        let mut s = format!(
            "protocol {} mode {} runs {}\n{TOY_BANNER}\n",
            self.protocol, self.mode, self.runs
        );
        for w in &self.warnings {
            s.push_str(&format!("warning: {w}\n"));
        }
        for (i, e) in self.expected.iter().enumerate() {
            s.push_str(&format!(
                "player {} payoff={} (~{:.4}) radius={:.4}\n",
                i + 1,
                fmt_rational(e),
                e.to_f64().unwrap_or(f64::NAN),
                self.radius(i)
            ));
        }
        s.push_str(&format!(
            "detected={} punished={} refused={} aborted={} proxy_faults={}\n",
            fmt_rational(&self.detection_rate),
            fmt_rational(&self.punishment_rate),
            fmt_rational(&self.refusal_rate),
            fmt_rational(&self.abort_rate),
            fmt_rational(&self.proxy_fault_rate)
        ));
        s.push_str("outcome\n");
        s.push_str(&write_distribution(game, &self.outcome));
        s.push_str(&format!("transcript sha256 {}\n", self.transcript.digest()));
        s
    }
}

struct Runner<'a> {
    config: &'a ProtocolConfig,
    hooks: &'a [&'a dyn StrategyHook],
    corrupted: Vec<PlayerId>,
}

fn fallback(ch: &mut dyn Chooser, log: &mut TrialLog, game: &StrategicGame, i: PlayerId) -> usize {
    let a = ch.choose_uniform(game.num_actions(i));
    log.push(
        Visibility::All,
        format_args!("fallback p{} uniform -> {}", i + 1, game.action_label(i, a)),
    );
    a
}

fn encrypt_own(public: &PublicParams, player: PlayerId, action: usize, rng: &mut dyn RngCore) -> BlindedAction {
    match public {
        PublicParams::Pke(pk) => BlindedAction::Cipher(pk.encrypt_random(&encode_action(player, action), rng).0),
        PublicParams::Ske { .. } => BlindedAction::Plain(action),
    }
}

impl Runner<'_> {
    fn run_trial(&self, ch: &mut dyn Chooser, log: &mut TrialLog) -> TrialOutcome {
        let cfg = self.config;
        let game = &cfg.game;
        let n = game.num_players();
        let mut channel = ChannelModel::new(cfg.protocol.channel());

        // Setup.
        let (proxy, shares) = match cfg.protocol.blind_kind() {
            BlindKind::Pke => {
                let kp = pke_gen(cfg.security_parameter, ch.aux()).expect("validated security parameter");
                log.push(
                    Visibility::All,
                    format_args!(
                        "setup pk key_id={} bits={}",
                        hex::encode(kp.public.key_id()),
                        kp.public.group.bits
                    ),
                );
                (VerifiableProxy::new(ProxyKeys::Pke(kp.secret), game.action_counts()), None)
            }
            BlindKind::Ske => {
                let p = cfg.modulus;
                let space = (p * (p - 1)) as usize;
                // Only corrupted players' subkeys can change the outcome, so
                // they are the only ones enumerated in exact mode.
                let keys: Vec<SkeKey> = (0..n)
                    .map(|j| {
                        let idx = if self.corrupted.contains(&j) {
                            ch.choose_uniform(space)
                        } else {
                            ch.aux().gen_range(0..space)
                        } as u64;
                        SkeKey { a: 1 + idx / p, b: idx % p }
                    })
                    .collect();
                let mut per_player: Vec<Vec<Share>> = vec![Vec::new(); n];
                for k in &keys {
                    for secret in [k.a, k.b] {
                        let s = share(secret, n - 1, n, p, ch.aux()).expect("validated modulus");
                        for (i, piece) in s.into_iter().enumerate() {
                            per_player[i].push(piece);
                        }
                    }
                }
                log.push(Visibility::Engine, format_args!("setup ske modulus={p}"));
                for (i, pieces) in per_player.iter().enumerate() {
                    let list: Vec<String> = pieces.iter().map(|s| format!("({},{})", s.x, s.y)).collect();
                    channel.send(log, Party::Dealer, Party::Player(i), format_args!("shares {}", list.join(" ")));
                }
                let ske = SkeInstance::from_keys(p, keys).expect("keys are in range");
                (VerifiableProxy::new(ProxyKeys::Ske(ske), game.action_counts()), Some(per_player))
            }
        };
        let proxy = if cfg.tamper_proxy { proxy.tampering() } else { proxy };
        let public = proxy.public_params();
        channel.next_round();

        // Pre-play.
        let functionality = match cfg.protocol.blind_kind() {
            BlindKind::Pke => Functionality::Sampler,
            BlindKind::Ske => Functionality::ShareInput { threshold: n - 1 },
        };
        let mpc = IdealMpc::new(n, self.corrupted.clone(), functionality);
        let support = cfg.alpha.support();
        let weights: Vec<Rational> = support.iter().map(|(_, w)| w.clone()).collect();
        let mut drawn = None;
        let outcome = mpc.run(&HookAdversary(self.hooks), shares.as_deref(), log, |secrets| {
            let profile = support[ch.choose(&weights)].0.clone();
            let outs = match (secrets, &public) {
                (Some(s), PublicParams::Ske { modulus }) => {
                    let field = Field::new(*modulus).expect("validated modulus");
                    (0..n)
                        .map(|i| {
                            let key = SkeKey { a: s[2 * i], b: s[2 * i + 1] };
                            BlindedAction::Cipher(crate::crypto::Ciphertext::Ske {
                                coord: i,
                                value: key.encrypt(field, profile.get(i) as u64),
                            })
                        })
                        .collect()
                }
                _ => (0..n)
                    .map(|i| encrypt_own(&public, i, profile.get(i), ch.aux()))
                    .collect(),
            };
            drawn = Some(profile);
            outs
        });
        if let Some(p) = &drawn {
            log.push(Visibility::Engine, format_args!("mpc-sample {}", game.format_profile(p)));
        }
        channel.next_round();

        // Play.
        let mut detected = outcome.detected;
        let punish = detected.and_then(|d| cfg.punishments.get(d));
        let submissions: Vec<Submission> = match punish {
            Some(spec) => {
                let d = spec.target;
                log.push(
                    Visibility::All,
                    format_args!(
                        "punish target=p{} mode={} value={}",
                        d + 1,
                        spec.mode,
                        fmt_rational(&spec.value)
                    ),
                );
                let sw: Vec<Rational> = spec.strategy.support().iter().map(|(_, w)| w.clone()).collect();
                let s = spec.strategy.support()[ch.choose(&sw)].0.clone();
                (0..n)
                    .map(|i| {
                        if i == d {
                            Submission::Direct(self.hooks[d].punished_reply(game, spec))
                        } else {
                            Submission::Blinded(encrypt_own(&public, i, s.get(i), ch.aux()))
                        }
                    })
                    .collect()
            }
            None => (0..n)
                .map(|i| {
                    let view = PlayerView {
                        player: i,
                        num_actions: game.num_actions(i),
                        advice: outcome.outputs[i].as_ref(),
                        public: &public,
                    };
                    self.hooks[i].submit(&view, ch.aux())
                })
                .collect(),
        };

        let mut profile = vec![0; n];
        let mut refused = false;
        let mut proxy_faults = 0;
        for (i, sub) in submissions.into_iter().enumerate() {
            let blinded = match sub {
                Submission::Advice => outcome.outputs[i].clone(),
                Submission::Blinded(b) => Some(b),
                Submission::Direct(a) if a < game.num_actions(i) => {
                    log.push(
                        Visibility::All,
                        format_args!("direct p{} {}", i + 1, game.action_label(i, a)),
                    );
                    profile[i] = a;
                    continue;
                }
                Submission::Direct(_) | Submission::Abstain => None,
            };
            let Some(b) = blinded else {
                log.push(Visibility::All, format_args!("abstain p{}", i + 1));
                profile[i] = fallback(ch, log, game, i);
                continue;
            };
            channel.send(log, Party::Player(i), Party::Proxy, format_args!("submit {}", label(&b)));
            match proxy.translate(i, &b) {
                Ok(t) => {
                    let ok = verify_translation(&public, &b, &t);
                    log.push(
                        Visibility::All,
                        format_args!(
                            "translate p{} -> {} proof={} verified={ok}",
                            i + 1,
                            game.action_label(i, t.action),
                            t.proof
                        ),
                    );
                    if !ok {
                        proxy_faults += 1;
                        log.push(Visibility::All, format_args!("proxy-fault p{}", i + 1));
                    }
                    profile[i] = t.action;
                }
                Err(r) => {
                    refused = true;
                    detected.get_or_insert(i);
                    log.push(Visibility::All, format_args!("refuse p{} reason={r}", i + 1));
                    profile[i] = fallback(ch, log, game, i);
                }
            }
        }
        let profile = ActionProfile(profile);
        let payoffs: Vec<String> = game.payoffs(&profile).iter().map(fmt_rational).collect();
        log.push(Visibility::All, format_args!("play {}", game.format_profile(&profile)));
        log.push(Visibility::All, format_args!("payoff {}", payoffs.join(" ")));
        TrialOutcome {
            profile,
            detected: detected.is_some(),
            punished: punish.is_some(),
            refused,
            aborted: outcome.aborted,
            proxy_faults,
        }
    }
}

fn rate<F: Fn(&TrialOutcome) -> bool>(runs: &[(Rational, TrialOutcome)], f: F) -> Rational {
    runs.iter()
        .filter(|(_, o)| f(o))
        .fold(Rational::zero(), |acc, (w, _)| acc + w)
}

/// Executes the protocol with one hook per player.
pub fn run_protocol(config: &ProtocolConfig, hooks: &[&dyn StrategyHook]) -> Result<RunReport, SimError> {
    config.validate()?;
    let game = &config.game;
    let n = game.num_players();
    if hooks.len() != n {
        return Err(SimError::Config(format!("{} hooks for {n} players", hooks.len())));
    }
    let runner = Runner {
        config,
        hooks,
        corrupted: (0..n).filter(|&i| !hooks[i].is_honest()).collect(),
    };
    let names: Vec<String> = hooks.iter().map(|h| h.name()).collect();
    let mut header = vec![
        TRANSCRIPT_VERSION.to_string(),
        format!("config {}", config.config_hash()),
        format!("seed {}", config.seed),
        format!(
            "protocol {} mode {} channel {} players {n}",
            config.protocol,
            config.mode,
            config.protocol.channel()
        ),
        format!("hooks {}", names.join(",")),
        format!("note {TOY_BANNER}"),
    ];
    header.extend(config.warnings.iter().map(|w| format!("warning {w}")));
    let mut builder = TranscriptBuilder::new(header, config.keep_transcript);

    let weighted: Vec<(Rational, TrialOutcome)> = match config.mode {
        Mode::MonteCarlo => {
            let one = |t: u64| {
                let mut log = TrialLog::new();
                log.push(Visibility::All, format_args!("trial {t}"));
                let mut ch = Sampler::new(config.seed, t);
                let o = runner.run_trial(&mut ch, &mut log);
                (o, log)
            };
            let results: Vec<(TrialOutcome, TrialLog)> = if config.parallel {
                (0..config.trials).into_par_iter().map(one).collect()
            } else {
                (0..config.trials).map(one).collect()
            };
            let w = Rational::new(1.into(), config.trials.into());
            results
                .into_iter()
                .map(|(o, log)| {
                    builder.append(log);
                    (w.clone(), o)
                })
                .collect()
        }
        Mode::Exact => {
            let paths = explore(config.seed, config.max_paths, |ch| {
                let mut log = TrialLog::new();
                let o = runner.run_trial(ch, &mut log);
                (o, log)
            })?;
            paths
                .into_iter()
                .enumerate()
                .map(|(t, (w, (o, log)))| {
                    let mut head = TrialLog::new();
                    head.push(Visibility::All, format_args!("path {t} prob={}", fmt_rational(&w)));
                    builder.append(head);
                    builder.append(log);
                    (w, o)
                })
                .collect()
        }
    };

    let runs = weighted.len() as u64;
    let mut expected = vec![Rational::zero(); n];
    let mut second = vec![Rational::zero(); n];
    for (w, o) in &weighted {
        for (i, u) in game.payoffs(&o.profile).iter().enumerate() {
            expected[i] += w * u;
            second[i] += w * u * u;
        }
    }
    let std_error = match config.mode {
        Mode::Exact => vec![0.0; n],
        Mode::MonteCarlo => (0..n)
            .map(|i| {
                let m = expected[i].to_f64().unwrap_or(0.0);
                let s = second[i].to_f64().unwrap_or(0.0);
                let t = runs as f64;
                let var = if runs > 1 { (s - m * m).max(0.0) * t / (t - 1.0) } else { 0.0 };
                (var / t).sqrt()
            })
            .collect(),
    };
    let outcome = ProfileDistribution::joint(weighted.iter().map(|(w, o)| (o.profile.clone(), w.clone())))?;
    Ok(RunReport {
        protocol: config.protocol,
        mode: config.mode,
        runs,
        expected,
        std_error,
        outcome,
        detection_rate: rate(&weighted, |o| o.detected),
        punishment_rate: rate(&weighted, |o| o.punished),
        refusal_rate: rate(&weighted, |o| o.refused),
        abort_rate: rate(&weighted, |o| o.aborted),
        proxy_fault_rate: rate(&weighted, |o| o.proxy_faults > 0),
        transcript: builder.finish(),
        warnings: config.warnings.clone(),
    })
}
