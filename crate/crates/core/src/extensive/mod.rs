//! Finite perfect-information game trees, Nash checks on them, and the
//! empty-threat analysis of cheap-talk abstractions.

mod abstraction;
mod threat;
mod tree;

use thiserror::Error;

pub use abstraction::{build_cheaptalk_abstraction, AbstractionProtocol};
pub use threat::{
    cont_set, detect_empty_threat, etf_values, spot_check_mixed, verify_etf_ne, Assessment, ContSet,
    EtfReport, SpotCheck, ThreatVerdict,
};
pub use tree::{
    verify_tree_nash, ExtensiveTree, NodeId, NodeKind, TreeBuilder, TreeNashReport, TreePlayerGain,
    TreeStrategyProfile,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("a tree needs at least one player")]
    NoPlayers,
    #[error("node {0} is not a decision node")]
    NotDecision(NodeId),
    #[error("decision node {0} has no actions")]
    NoActions(NodeId),
    #[error("node {node} has two actions labelled `{label}`")]
    DuplicateAction { node: NodeId, label: String },
    #[error("leaf {node} has {got} payoffs, expected {expected}")]
    PayoffArity {
        node: NodeId,
        got: usize,
        expected: usize,
    },
    #[error("unknown player {0}")]
    UnknownPlayer(usize),
    #[error("no node {0}")]
    UnknownNode(NodeId),
    #[error("strategy at node {node}: {message}")]
    Strategy { node: NodeId, message: String },
    #[error("history {0} is terminal: no player faces an empty threat at a leaf")]
    Terminal(NodeId),
    #[error("unsupported: {0}")]
    Unsupported(String),
}
