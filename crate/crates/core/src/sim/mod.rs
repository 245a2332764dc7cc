//! Cheap-talk pre-play protocols, simulated at desk scale.
//!
//! A run draws advice from an ideal MPC functionality, hands players encrypted
//! advice, and lets a verifiable proxy translate their submissions into the
//! underlying game. Strategy hooks decide what each player does; the deviation
//! harness plugs in scripted deviations and measures their gain.
//!
//! Unnoticed cheating inside the MPC has probability zero here: the
//! functionality is ideal, so a deviator can only abort, withhold, or act on
//! its own output.

pub mod channel;
pub mod chooser;
pub mod harness;
pub mod mpc;
pub mod probe;
pub mod protocol;
pub mod proxy;
pub mod transcript;

use thiserror::Error;

use crate::crypto::PkeError;
use crate::game::GameError;
use crate::sharing::SharingError;
use crate::solve::SolveError;

pub use channel::{ChannelKind, ChannelModel, Party};
pub use chooser::{explore, Chooser, Sampler};
pub use harness::{deviation_harness, run_library, DeviationClass, DeviationHook, DeviationReport, Transform};
pub use mpc::{Functionality, IdealMpc, MpcAction, MpcAdversary, MpcOutcome};
pub use probe::{strategic_equivalence_probe, Confirmation, ProbeReport};
pub use protocol::{
    run_protocol, Honest, Mode, PlayerView, ProtocolConfig, ProtocolId, RunReport, StrategyHook,
    Submission,
};
pub use proxy::{proxy_translate, verify_translation, Proof, PublicParams, Refusal, Translation, VerifiableProxy};
pub use transcript::{Transcript, TrialLog, Visibility, TRANSCRIPT_VERSION};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Pke(#[from] PkeError),
    #[error(transparent)]
    Sharing(#[from] SharingError),
    #[error(transparent)]
    Paths(#[from] chooser::TooManyPaths),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("deviation {class} is not available in {protocol}: {reason}")]
    Incompatible {
        class: String,
        protocol: ProtocolId,
        reason: String,
    },
    #[error("strategy `{0}` has unbounded outcome support")]
    Unbounded(String),
}
