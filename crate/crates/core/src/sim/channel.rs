//! Communication channels between protocol parties.

use std::fmt;

use super::transcript::{TrialLog, Visibility};
use crate::game::PlayerId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    Broadcast,
    Pairwise,
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChannelKind::Broadcast => "broadcast",
            ChannelKind::Pairwise => "pairwise",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Party {
    Player(PlayerId),
    Dealer,
    Proxy,
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Party::Player(i) => write!(f, "p{}", i + 1),
            Party::Dealer => f.write_str("dealer"),
            Party::Proxy => f.write_str("proxy"),
        }
    }
}

/// Logs messages with the access label their channel implies: broadcast
/// messages reach everyone, pairwise messages only their player endpoints.
#[derive(Debug, Clone)]
pub struct ChannelModel {
    kind: ChannelKind,
    round: u32,
    sent: u64,
}

impl ChannelModel {
    pub fn new(kind: ChannelKind) -> Self {
        ChannelModel {
            kind,
            round: 0,
            sent: 0,
        }
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn messages_sent(&self) -> u64 {
        self.sent
    }

    pub fn next_round(&mut self) {
        self.round += 1;
    }

    pub fn visibility(&self, from: Party, to: Party) -> Visibility {
        match self.kind {
            ChannelKind::Broadcast => Visibility::All,
            ChannelKind::Pairwise => {
                let mut ps: Vec<PlayerId> = [from, to]
                    .iter()
                    .filter_map(|p| match p {
                        Party::Player(i) => Some(*i),
                        _ => None,
                    })
                    .collect();
                ps.sort_unstable();
                ps.dedup();
                if ps.is_empty() {
                    Visibility::Engine
                } else {
                    Visibility::Players(ps)
                }
            }
        }
    }

    pub fn send(&mut self, log: &mut TrialLog, from: Party, to: Party, payload: impl fmt::Display) {
        self.sent += 1;
        let vis = self.visibility(from, to);
        log.push(
            vis,
            format_args!(
                "msg round={} chan={} from={from} to={to} {payload}",
                self.round, self.kind
            ),
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_labels_endpoints_only() {
        let mut c = ChannelModel::new(ChannelKind::Pairwise);
        let mut log = TrialLog::new();
        c.send(&mut log, Party::Dealer, Party::Player(2), "share");
        c.send(&mut log, Party::Player(1), Party::Player(0), "hi");
        assert!(log.lines()[0].starts_with("p3\t"));
        assert!(log.lines()[1].starts_with("p1+p2\t"));
        let mut b = ChannelModel::new(ChannelKind::Broadcast);
        b.send(&mut log, Party::Player(0), Party::Proxy, "x");
        assert!(log.lines()[2].starts_with("all\t"));
        assert_eq!(b.messages_sent(), 1);
    }
}
