//! Blinded games: the actions of a game replaced by (or extended with) their
//! encryptions, with payoffs defined through decryption.

use std::fmt;

use num_traits::{Signed, Zero};
use rand::{Rng, RngCore};
use thiserror::Error;

use crate::crypto::pke::PkeError;
use crate::crypto::ske::{SkeError, SkeInstance, SkeKey, SkeVariant};
use crate::crypto::{Ciphertext, PkeKeyPair};
use crate::game::{
    verify_equilibrium, ActionProfile, Concept, GameError, PlayerId, ProfileDistribution,
    StrategicGame, Tolerance,
};
use crate::{trial_rng, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BlindError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Ske(#[from] SkeError),
    #[error(transparent)]
    Pke(#[from] PkeError),
    #[error("secret key has {found} coordinates, game has {needed} players")]
    TooFewCoordinates { needed: usize, found: usize },
    #[error("message does not encode an action of player {0}")]
    BadMessage(PlayerId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlindKind {
    Ske,
    Pke,
}

impl fmt::Display for BlindKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BlindKind::Ske => "ske",
            BlindKind::Pke => "pke",
        })
    }
}

/// An action of a blinded game.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BlindedAction {
    Plain(usize),
    Cipher(Ciphertext),
}

/// Per-player surjections from blinded action indices onto underlying actions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenamingMap {
    maps: Vec<Vec<usize>>,
}

impl RenamingMap {
    pub fn new(maps: Vec<Vec<usize>>) -> Self {
        RenamingMap { maps }
    }

    pub fn identity(game: &StrategicGame) -> Self {
        RenamingMap {
            maps: (0..game.num_players())
                .map(|i| (0..game.num_actions(i)).collect())
                .collect(),
        }
    }

    pub fn rho(&self, player: PlayerId, blinded: usize) -> usize {
        self.maps[player][blinded]
    }

    pub fn preimage(&self, player: PlayerId, action: usize) -> Vec<usize> {
        self.maps[player]
            .iter()
            .enumerate()
            .filter(|(_, &a)| a == action)
            .map(|(b, _)| b)
            .collect()
    }

    pub fn apply(&self, profile: &ActionProfile) -> ActionProfile {
        ActionProfile(
            profile
                .0
                .iter()
                .enumerate()
                .map(|(i, &b)| self.maps[i][b])
                .collect(),
        )
    }

    pub fn maps(&self) -> &[Vec<usize>] {
        &self.maps
    }
}

/// Key material held by the engine. Strategies never see it.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Keys {
    Ske(SkeInstance),
    Pke(PkeKeyPair),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlindedGame {
    underlying: StrategicGame,
    kind: BlindKind,
    actions: Vec<Vec<BlindedAction>>,
    game: StrategicGame,
    renaming: RenamingMap,
    keys: Keys,
}

/// Encodes a player's action as a PKE plaintext: `u16 player || u16 action`.
pub fn encode_action(player: PlayerId, action: usize) -> Vec<u8> {
    let mut m = (player as u16).to_be_bytes().to_vec();
    m.extend_from_slice(&(action as u16).to_be_bytes());
    m
}

pub fn decode_action(m: &[u8]) -> Option<(PlayerId, usize)> {
    if m.len() != 4 {
        return None;
    }
    let p = u16::from_be_bytes([m[0], m[1]]) as usize;
    let a = u16::from_be_bytes([m[2], m[3]]) as usize;
    Some((p, a))
}

fn materialize(
    underlying: &StrategicGame,
    actions: &[Vec<BlindedAction>],
    maps: &[Vec<usize>],
) -> Result<StrategicGame, GameError> {
    let labels = actions
        .iter()
        .enumerate()
        .map(|(i, set)| {
            set.iter()
                .map(|a| match a {
                    BlindedAction::Plain(x) => underlying.action_label(i, *x).to_string(),
                    BlindedAction::Cipher(c) => c.label(),
                })
                .collect()
        })
        .collect();
    StrategicGame::from_fn(labels, |p| {
        let under = ActionProfile(p.0.iter().enumerate().map(|(i, &b)| maps[i][b]).collect());
        underlying.payoffs(&under).to_vec()
    })
}

impl BlindedGame {
    /// Plain actions plus one ciphertext per action, encrypted on the player's
    /// own coordinate.
    pub fn blind_ske(underlying: &StrategicGame, ske: SkeInstance) -> Result<Self, BlindError> {
        let n = underlying.num_players();
        if ske.keys().len() < n {
            return Err(BlindError::TooFewCoordinates {
                needed: n,
                found: ske.keys().len(),
            });
        }
        let widest = (0..n).map(|i| underlying.num_actions(i)).max().unwrap_or(0);
        ske.check_capacity(widest)?;
        let mut actions = Vec::with_capacity(n);
        let mut maps = Vec::with_capacity(n);
        for i in 0..n {
            let k = underlying.num_actions(i);
            let mut set: Vec<BlindedAction> = (0..k).map(BlindedAction::Plain).collect();
            let mut map: Vec<usize> = (0..k).collect();
            for a in 0..k {
                set.push(BlindedAction::Cipher(ske.encrypt(i, a as u64)?));
                map.push(a);
            }
            actions.push(set);
            maps.push(map);
        }
        let game = materialize(underlying, &actions, &maps)?;
        Ok(BlindedGame {
            underlying: underlying.clone(),
            kind: BlindKind::Ske,
            actions,
            game,
            renaming: RenamingMap::new(maps),
            keys: Keys::Ske(ske),
        })
    }

    /// One ciphertext per (player, action), with randomness drawn from `seed`.
    pub fn blind_pke(underlying: &StrategicGame, keys: PkeKeyPair, seed: u64) -> Result<Self, BlindError> {
        let mut rng = trial_rng(seed, 0);
        let n = underlying.num_players();
        let mut actions = Vec::with_capacity(n);
        let mut maps = Vec::with_capacity(n);
        for i in 0..n {
            let k = underlying.num_actions(i);
            let mut set = Vec::with_capacity(k);
            for a in 0..k {
                let (c, _) = keys.public.encrypt_random(&encode_action(i, a), &mut rng);
                set.push(BlindedAction::Cipher(c));
            }
            actions.push(set);
            maps.push((0..k).collect());
        }
        let game = materialize(underlying, &actions, &maps)?;
        Ok(BlindedGame {
            underlying: underlying.clone(),
            kind: BlindKind::Pke,
            actions,
            game,
            renaming: RenamingMap::new(maps),
            keys: Keys::Pke(keys),
        })
    }

    pub fn kind(&self) -> BlindKind {
        self.kind
    }

    pub fn underlying(&self) -> &StrategicGame {
        &self.underlying
    }

    /// The blinded game as an ordinary strategic game over action labels.
    pub fn game(&self) -> &StrategicGame {
        &self.game
    }

    pub fn actions(&self, player: PlayerId) -> &[BlindedAction] {
        &self.actions[player]
    }

    pub fn renaming(&self) -> &RenamingMap {
        &self.renaming
    }

    /// Index of `action` in the player's blinded action list.
    pub fn action_index(&self, player: PlayerId, action: &BlindedAction) -> Option<usize> {
        self.actions[player].iter().position(|a| a == action)
    }

    /// Decrypts an arbitrary blinded action of `player` to an underlying action,
    /// or `None` when it does not decrypt to one of the player's actions.
    pub fn decrypt_action(&self, player: PlayerId, action: &BlindedAction) -> Option<usize> {
        let k = self.underlying.num_actions(player);
        match (action, &self.keys) {
            (BlindedAction::Plain(a), Keys::Ske(_)) => (*a < k).then_some(*a),
            (BlindedAction::Plain(_), Keys::Pke(_)) => None,
            (BlindedAction::Cipher(c), Keys::Ske(ske)) => {
                let m = ske.decrypt(player, c).ok()?;
                ((m as usize) < k).then_some(m as usize)
            }
            (BlindedAction::Cipher(c), Keys::Pke(kp)) => {
                let (m, _) = kp.secret.decrypt(c).ok()?;
                match decode_action(&m)? {
                    (p, a) if p == player && a < k => Some(a),
                    _ => None,
                }
            }
        }
    }

    /// Encrypts `action` for `player` with fresh randomness (PKE) or under the
    /// fixed key (SKE).
    pub fn encrypt_action<R: RngCore + ?Sized>(
        &self,
        player: PlayerId,
        action: usize,
        rng: &mut R,
    ) -> Result<BlindedAction, BlindError> {
        Ok(match &self.keys {
            Keys::Ske(ske) => BlindedAction::Cipher(ske.encrypt(player, action as u64)?),
            Keys::Pke(kp) => {
                BlindedAction::Cipher(kp.public.encrypt_random(&encode_action(player, action), rng).0)
            }
        })
    }

    /// The materialised ciphertext action of `player` for underlying `action`.
    pub fn cipher_index(&self, player: PlayerId, action: usize) -> usize {
        match self.kind {
            BlindKind::Ske => self.underlying.num_actions(player) + action,
            BlindKind::Pke => action,
        }
    }

    /// The exact lift of `alpha`: each profile replaced by its materialised
    /// encryption.
    pub fn lift_exact(&self, alpha: &ProfileDistribution) -> Result<ProfileDistribution, BlindError> {
        alpha.check_domain(&self.underlying)?;
        Ok(alpha.map_profiles(|p| {
            ActionProfile(
                p.0.iter()
                    .enumerate()
                    .map(|(i, &a)| self.cipher_index(i, a))
                    .collect(),
            )
        })?)
    }

    /// A sampler for the lift of `alpha` driven by its own seeded RNG.
    pub fn lift_cce(&self, alpha: &ProfileDistribution, seed: u64) -> Result<LiftSampler<'_>, BlindError> {
        alpha.check_domain(&self.underlying)?;
        let is_cce = verify_equilibrium(&self.underlying, alpha, Concept::Cce, &Tolerance::exact())?.accepted;
        Ok(LiftSampler {
            blinded: self,
            alpha: alpha.clone(),
            rng: trial_rng(seed, 0),
            alpha_is_cce: is_cce,
        })
    }

    /// Action lists with opaque labels; `reveal` also prints the renaming map.
    pub fn dump(&self, reveal: bool) -> String {
        let mut s = format!(
            "blinded kind={} players={}\n",
            self.kind,
            self.underlying.num_players()
        );
        for i in 0..self.underlying.num_players() {
            s.push_str(&format!("player {}:", i + 1));
            for (b, a) in self.actions[i].iter().enumerate() {
                let shown = match a {
                    BlindedAction::Plain(x) => self.underlying.action_label(i, *x).to_string(),
                    BlindedAction::Cipher(c) => c.to_string(),
                };
                s.push(' ');
                s.push_str(&shown);
                if reveal {
                    let target = self.renaming.rho(i, b);
                    s.push_str(&format!("->{}", self.underlying.action_label(i, target)));
                }
            }
            s.push('\n');
        }
        if reveal {
            s.push_str("# renaming revealed: debugging output, breaks the blinding\n");
        }
        s
    }
}

/// Draws blinded profiles whose decryption is distributed exactly as `alpha`.
pub struct LiftSampler<'a> {
    blinded: &'a BlindedGame,
    alpha: ProfileDistribution,
    rng: rand_chacha::ChaCha20Rng,
    /// Whether `alpha` passed the exact CCE check when the sampler was built.
    pub alpha_is_cce: bool,
}

impl LiftSampler<'_> {
    pub fn sample(&mut self) -> Vec<BlindedAction> {
        let profile = self.alpha.sample(&mut self.rng).clone();
        profile
            .0
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                self.blinded
                    .encrypt_action(i, a, &mut self.rng)
                    .expect("actions of alpha are in range")
            })
            .collect()
    }
}

/// Outcome of a super-equivalence check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuperEquivalence {
    pub accepted: bool,
    /// A blinded profile violating the payoff equation.
    pub payoff_witness: Option<ActionProfile>,
    /// `(player, action)` with an empty pre-image.
    pub surjectivity_witness: Option<(PlayerId, usize)>,
}

/// Checks `u'(a') = u(rho(a'))` on every blinded profile and surjectivity of
/// every `rho_i`.
pub fn check_super_equivalence_of(
    blinded: &StrategicGame,
    underlying: &StrategicGame,
    rho: &RenamingMap,
) -> SuperEquivalence {
    let mut surjectivity_witness = None;
    'players: for i in 0..underlying.num_players() {
        for a in 0..underlying.num_actions(i) {
            if rho.preimage(i, a).is_empty() {
                surjectivity_witness = Some((i, a));
                break 'players;
            }
        }
    }
    let payoff_witness = blinded
        .profiles()
        .find(|p| blinded.payoffs(p) != underlying.payoffs(&rho.apply(p)));
    SuperEquivalence {
        accepted: payoff_witness.is_none() && surjectivity_witness.is_none(),
        payoff_witness,
        surjectivity_witness,
    }
}

pub fn check_super_equivalence(blinded: &BlindedGame) -> SuperEquivalence {
    check_super_equivalence_of(&blinded.game, &blinded.underlying, &blinded.renaming)
}

/// Pushforward of a distribution over blinded profiles.
pub fn project_distribution(
    rho: &RenamingMap,
    dist: &ProfileDistribution,
) -> Result<ProfileDistribution, GameError> {
    dist.map_profiles(|p| rho.apply(p))
}

/// Deviation analysis of one player given one advice ciphertext.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdviceAnalysis {
    pub advice: u64,
    pub probability: Rational,
    /// Expected payoff of following the advice, conditioned on it.
    pub follow: Rational,
    /// Best conditional payoff over plain actions and field-element submissions.
    pub best: Rational,
    pub best_deviation: Submission,
}

/// A deviation in the SKE blinded game.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Submission {
    Plain(usize),
    Field(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkeLiftReport {
    pub modulus: u64,
    pub accepted: bool,
    /// Per player, advice-weighted positive gains.
    pub gains: Vec<Rational>,
    pub per_advice: Vec<Vec<AdviceAnalysis>>,
}

/// Exact CE check of the SKE lift of `alpha`.
///
/// Every player's coordinate key is uniform over the affine key space, and the
/// player conditions on their own advice ciphertext. Deviations are all plain
/// actions and every field element submitted as a ciphertext; a submission that
/// decrypts outside the player's action set is replaced by a uniformly random
/// action. Other players follow their advice, so only the deviator's
/// coordinate key needs enumerating.
pub fn verify_ske_lift_ce(
    game: &StrategicGame,
    alpha: &ProfileDistribution,
    p: u64,
) -> Result<SkeLiftReport, BlindError> {
    alpha.check_domain(game)?;
    let field = crate::field::Field::new(p).map_err(SkeError::from)?;
    let keys: Vec<SkeKey> = SkeVariant::Affine.key_space(field);
    let key_weight = Rational::new(1.into(), keys.len().into());
    let n = game.num_players();
    let mut gains = Vec::with_capacity(n);
    let mut per_advice = Vec::with_capacity(n);
    for i in 0..n {
        let k = game.num_actions(i);
        if (k as u64) > p {
            return Err(SkeError::ModulusTooSmall { modulus: p, needed: k }.into());
        }
        let kq = Rational::from_integer(k.into());
        // value[a][d]: payoff of i playing d against profile a.
        let value = |a: &ActionProfile, d: usize| game.payoff(&a.with(i, d), i).clone();
        let fallback = |a: &ActionProfile| {
            (0..k).fold(Rational::zero(), |acc, d| acc + value(a, d)) / &kq
        };
        let mut rows = Vec::with_capacity(p as usize);
        let mut total_gain = Rational::zero();
        for c in 0..p {
            let mut prob = Rational::zero();
            let mut follow = Rational::zero();
            let mut plain = vec![Rational::zero(); k];
            let mut field_vals = vec![Rational::zero(); p as usize];
            for (a, w) in alpha.support() {
                let fb = fallback(a);
                for key in keys.iter().filter(|key| key.encrypt(field, a.get(i) as u64) == c) {
                    let weight = w * &key_weight;
                    prob += &weight;
                    follow += &weight * game.payoff(a, i);
                    for (d, acc) in plain.iter_mut().enumerate() {
                        *acc += &weight * value(a, d);
                    }
                    for (x, acc) in field_vals.iter_mut().enumerate() {
                        let m = key.decrypt(field, x as u64) as usize;
                        let v = if m < k { value(a, m) } else { fb.clone() };
                        *acc += &weight * v;
                    }
                }
            }
            if prob.is_zero() {
                continue;
            }
            let mut best = (follow.clone(), Submission::Field(c));
            for (d, v) in plain.into_iter().enumerate() {
                if v > best.0 {
                    best = (v, Submission::Plain(d));
                }
            }
            for (x, v) in field_vals.into_iter().enumerate() {
                if v > best.0 {
                    best = (v, Submission::Field(x as u64));
                }
            }
            total_gain += &best.0 - &follow;
            rows.push(AdviceAnalysis {
                advice: c,
                follow: follow / &prob,
                best: best.0 / &prob,
                best_deviation: best.1,
                probability: prob,
            });
        }
        gains.push(total_gain);
        per_advice.push(rows);
    }
    Ok(SkeLiftReport {
        modulus: p,
        accepted: gains.iter().all(|g| !g.is_positive()),
        gains,
        per_advice,
    })
}

/// Checks whether every advice value leaves the follower with the same
/// conditional payoff.
pub fn advice_independent(report: &SkeLiftReport) -> bool {
    report
        .per_advice
        .iter()
        .all(|rows| rows.windows(2).all(|w| w[0].follow == w[1].follow))
}

/// Samples a random SKE instance and blinds `game`.
pub fn blind_ske_random<R: Rng + ?Sized>(
    game: &StrategicGame,
    p: u64,
    rng: &mut R,
) -> Result<BlindedGame, BlindError> {
    let ske = SkeInstance::generate(p, game.num_players(), rng)?;
    BlindedGame::blind_ske(game, ske)
}
