use num_traits::{One, Signed, Zero};

use super::TreeError;
use crate::game::io::fmt_rational;
use crate::game::PlayerId;
use crate::Rational;

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    Leaf { payoffs: Vec<Rational> },
    Decision { owner: PlayerId, children: Vec<NodeId> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Node {
    label: String,
    parent: Option<NodeId>,
    kind: NodeKind,
}

/// A finite perfect-information game tree stored as an arena; node 0 is the
/// root and children appear after their parents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensiveTree {
    n: usize,
    nodes: Vec<Node>,
}

#[derive(Debug, Clone)]
pub struct TreeBuilder {
    n: usize,
    nodes: Vec<Node>,
}

impl TreeBuilder {
    pub fn new(num_players: usize) -> Self {
        TreeBuilder {
            n: num_players,
            nodes: Vec::new(),
        }
    }

    fn push(&mut self, parent: Option<(NodeId, &str)>, kind: NodeKind) -> Result<NodeId, TreeError> {
        let id = self.nodes.len();
        let (parent, label) = match parent {
            None if id == 0 => (None, String::new()),
            None => return Err(TreeError::Unsupported("a tree has one root".into())),
            Some((p, label)) => {
                let node = self.nodes.get(p).ok_or(TreeError::UnknownNode(p))?;
                let NodeKind::Decision { children, .. } = &node.kind else {
                    return Err(TreeError::NotDecision(p));
                };
                if children.iter().any(|&c| self.nodes[c].label == label) {
                    return Err(TreeError::DuplicateAction {
                        node: p,
                        label: label.to_string(),
                    });
                }
                (Some(p), label.to_string())
            }
        };
        self.nodes.push(Node { label, parent, kind });
        if let Some(p) = parent {
            if let NodeKind::Decision { children, .. } = &mut self.nodes[p].kind {
                children.push(id);
            }
        }
        Ok(id)
    }

    /// Adds a decision node; `parent` is `None` only for the root.
    pub fn decision(&mut self, parent: Option<(NodeId, &str)>, owner: PlayerId) -> Result<NodeId, TreeError> {
        if owner >= self.n {
            return Err(TreeError::UnknownPlayer(owner));
        }
        self.push(parent, NodeKind::Decision { owner, children: Vec::new() })
    }

    pub fn leaf(&mut self, parent: Option<(NodeId, &str)>, payoffs: Vec<Rational>) -> Result<NodeId, TreeError> {
        let id = self.nodes.len();
        if payoffs.len() != self.n {
            return Err(TreeError::PayoffArity {
                node: id,
                got: payoffs.len(),
                expected: self.n,
            });
        }
        self.push(parent, NodeKind::Leaf { payoffs })
    }

    pub fn build(self) -> Result<ExtensiveTree, TreeError> {
        if self.n == 0 {
            return Err(TreeError::NoPlayers);
        }
        if self.nodes.is_empty() {
            return Err(TreeError::UnknownNode(0));
        }
        for (id, node) in self.nodes.iter().enumerate() {
            if let NodeKind::Decision { children, .. } = &node.kind {
                if children.is_empty() {
                    return Err(TreeError::NoActions(id));
                }
            }
        }
        Ok(ExtensiveTree {
            n: self.n,
            nodes: self.nodes,
        })
    }
}

impl ExtensiveTree {
    pub fn num_players(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn kind(&self, id: NodeId) -> &NodeKind {
        &self.nodes[id].kind
    }

    /// Label of the action leading to `id`; empty for the root.
    pub fn label(&self, id: NodeId) -> &str {
        &self.nodes[id].label
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id].parent
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        match &self.nodes[id].kind {
            NodeKind::Decision { children, .. } => children,
            NodeKind::Leaf { .. } => &[],
        }
    }

    pub fn owner(&self, id: NodeId) -> Option<PlayerId> {
        match &self.nodes[id].kind {
            NodeKind::Decision { owner, .. } => Some(*owner),
            NodeKind::Leaf { .. } => None,
        }
    }

    pub fn is_terminal(&self, id: NodeId) -> bool {
        matches!(self.nodes[id].kind, NodeKind::Leaf { .. })
    }

    pub fn decision_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).filter(|&i| !self.is_terminal(i))
    }

    /// Action labels from the root down to `id`.
    pub fn history(&self, id: NodeId) -> Vec<&str> {
        let mut out = Vec::new();
        let mut cur = id;
        while let Some(p) = self.nodes[cur].parent {
            out.push(self.nodes[cur].label.as_str());
            cur = p;
        }
        out.reverse();
        out
    }

    pub fn history_string(&self, id: NodeId) -> String {
        let h = self.history(id);
        if h.is_empty() {
            "root".into()
        } else {
            h.join("/")
        }
    }

    /// Nodes of the subgame rooted at `id`, in preorder.
    pub fn subtree(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(x) = stack.pop() {
            out.push(x);
            stack.extend(self.children(x).iter().rev());
        }
        out
    }

    /// Longest path from `id` to a leaf, in edges.
    pub fn height(&self, id: NodeId) -> usize {
        self.children(id)
            .iter()
            .map(|&c| 1 + self.height(c))
            .max()
            .unwrap_or(0)
    }

    /// Expected payoffs of the subgame at `id` under `sigma`.
    pub fn expected(&self, sigma: &TreeStrategyProfile, id: NodeId) -> Vec<Rational> {
        match &self.nodes[id].kind {
            NodeKind::Leaf { payoffs } => payoffs.clone(),
            NodeKind::Decision { children, .. } => {
                let mut acc = vec![Rational::zero(); self.n];
                for (c, w) in children.iter().zip(sigma.at(id)) {
                    if w.is_zero() {
                        continue;
                    }
                    for (a, v) in acc.iter_mut().zip(self.expected(sigma, *c)) {
                        *a += w * v;
                    }
                }
                acc
            }
        }
    }

    /// Indented dump: one line per node with owner and strategy, or payoffs.
    pub fn dump(&self, sigma: Option<&TreeStrategyProfile>) -> String {
        let mut s = String::new();
        self.dump_node(0, 0, sigma, &mut s);
        s
    }

    fn dump_node(&self, id: NodeId, depth: usize, sigma: Option<&TreeStrategyProfile>, s: &mut String) {
        let name = if id == 0 { "root" } else { self.label(id) };
        s.push_str(&"  ".repeat(depth));
        match &self.nodes[id].kind {
            NodeKind::Leaf { payoffs } => {
                let p: Vec<String> = payoffs.iter().map(fmt_rational).collect();
                s.push_str(&format!("{name} = ({})\n", p.join(", ")));
            }
            NodeKind::Decision { owner, children } => {
                s.push_str(&format!("{name} p{}", owner + 1));
                if let Some(sig) = sigma {
                    let parts: Vec<String> = children
                        .iter()
                        .zip(sig.at(id))
                        .filter(|(_, w)| !w.is_zero())
                        .map(|(c, w)| format!("{}:{}", self.label(*c), fmt_rational(w)))
                        .collect();
                    s.push_str(&format!(" [{}]", parts.join(" ")));
                }
                s.push('\n');
                for &c in children {
                    self.dump_node(c, depth + 1, sigma, s);
                }
            }
        }
    }
}

/// A behavioural strategy profile: a distribution over actions at every
/// decision node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeStrategyProfile {
    probs: Vec<Vec<Rational>>,
}

impl TreeStrategyProfile {
    /// Builds and validates a profile from per-node distributions.
    pub fn new<F>(tree: &ExtensiveTree, mut f: F) -> Result<Self, TreeError>
    where
        F: FnMut(NodeId) -> Vec<Rational>,
    {
        let probs = (0..tree.len())
            .map(|id| if tree.is_terminal(id) { Vec::new() } else { f(id) })
            .collect();
        let s = TreeStrategyProfile { probs };
        s.validate(tree)?;
        Ok(s)
    }

    /// Plays action index `choice(node)` with certainty at every node.
    pub fn pure<F>(tree: &ExtensiveTree, mut choice: F) -> Result<Self, TreeError>
    where
        F: FnMut(NodeId) -> usize,
    {
        Self::new(tree, |id| {
            let k = tree.children(id).len();
            let c = choice(id);
            (0..k).map(|a| if a == c { Rational::one() } else { Rational::zero() }).collect()
        })
    }

    pub fn validate(&self, tree: &ExtensiveTree) -> Result<(), TreeError> {
        if self.probs.len() != tree.len() {
            return Err(TreeError::Strategy {
                node: self.probs.len().min(tree.len()),
                message: "profile does not cover the tree".into(),
            });
        }
        for id in tree.decision_nodes() {
            let d = &self.probs[id];
            let err = |message: &str| TreeError::Strategy {
                node: id,
                message: message.into(),
            };
            if d.len() != tree.children(id).len() {
                return Err(err("wrong number of actions"));
            }
            if d.iter().any(|w| w.is_negative()) {
                return Err(err("negative probability"));
            }
            if d.iter().fold(Rational::zero(), |a, b| a + b) != Rational::one() {
                return Err(err("probabilities do not sum to one"));
            }
        }
        Ok(())
    }

    pub fn at(&self, id: NodeId) -> &[Rational] {
        &self.probs[id]
    }

    /// Replaces the distribution at one node.
    pub fn with(&self, id: NodeId, dist: Vec<Rational>) -> Self {
        let mut s = self.clone();
        s.probs[id] = dist;
        s
    }

    /// The single action played at `id`, if the distribution there is pure.
    pub fn pure_action(&self, id: NodeId) -> Option<usize> {
        let d = &self.probs[id];
        d.iter().position(|w| w.is_one()).filter(|_| d.iter().filter(|w| !w.is_zero()).count() == 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreePlayerGain {
    pub player: PlayerId,
    pub value: Rational,
    pub best_response_value: Rational,
    pub gain: Rational,
    /// Reachable nodes where the best response leaves the profile's support,
    /// with the action it takes there.
    pub witness: Vec<(NodeId, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeNashReport {
    pub accepted: bool,
    pub epsilon: Rational,
    pub players: Vec<TreePlayerGain>,
}

impl TreeNashReport {
    pub fn render(&self, tree: &ExtensiveTree) -> String {
        let mut s = format!(
            "{} tree-nash epsilon={}\n",
            if self.accepted { "ACCEPT" } else { "REJECT" },
            fmt_rational(&self.epsilon)
        );
        for p in &self.players {
            s.push_str(&format!("player {} gain={}", p.player + 1, fmt_rational(&p.gain)));
            if p.gain.is_positive() {
                let w: Vec<String> = p
                    .witness
                    .iter()
                    .map(|&(node, a)| {
                        format!("{} -> {}", tree.history_string(node), tree.label(tree.children(node)[a]))
                    })
                    .collect();
                s.push_str(&format!(" deviate {}", w.join("; ")));
            }
            s.push('\n');
        }
        s
    }
}

/// Best-response value of `player` at each node against `sigma`, with the
/// chosen action at the player's own nodes.
pub(crate) fn best_response(
    tree: &ExtensiveTree,
    sigma: &TreeStrategyProfile,
    player: PlayerId,
) -> (Vec<Rational>, Vec<Option<usize>>) {
    let mut value = vec![Rational::zero(); tree.len()];
    let mut choice = vec![None; tree.len()];
    // Children follow parents in the arena, so a reverse sweep is bottom-up.
    for id in (0..tree.len()).rev() {
        match tree.kind(id) {
            NodeKind::Leaf { payoffs } => value[id] = payoffs[player].clone(),
            NodeKind::Decision { owner, children } if *owner == player => {
                let (best, v) = children
                    .iter()
                    .enumerate()
                    .map(|(a, &c)| (a, value[c].clone()))
                    .reduce(|acc, cur| if cur.1 > acc.1 { cur } else { acc })
                    .expect("decision nodes have actions");
                choice[id] = Some(best);
                value[id] = v;
            }
            NodeKind::Decision { children, .. } => {
                value[id] = children
                    .iter()
                    .zip(sigma.at(id))
                    .fold(Rational::zero(), |acc, (&c, w)| acc + w * &value[c]);
            }
        }
    }
    (value, choice)
}

/// Accepts iff no player gains more than `eps` with any pure behavioural
/// deviation.
pub fn verify_tree_nash(
    tree: &ExtensiveTree,
    sigma: &TreeStrategyProfile,
    eps: &Rational,
) -> Result<TreeNashReport, TreeError> {
    sigma.validate(tree)?;
    let base = tree.expected(sigma, tree.root());
    let mut players = Vec::new();
    for i in 0..tree.num_players() {
        let (value, choice) = best_response(tree, sigma, i);
        let gain = &value[0] - &base[i];
        let mut witness = Vec::new();
        if gain.is_positive() {
            // Walk the nodes reachable under (best response, sigma_-i).
            let mut stack = vec![0];
            while let Some(id) = stack.pop() {
                match choice[id] {
                    Some(a) => {
                        if sigma.at(id)[a].is_zero() || sigma.pure_action(id).is_none() {
                            witness.push((id, a));
                        }
                        stack.push(tree.children(id)[a]);
                    }
                    None => {
                        for (&c, w) in tree.children(id).iter().zip(sigma.at(id)) {
                            if !w.is_zero() {
                                stack.push(c);
                            }
                        }
                    }
                }
            }
            witness.sort_unstable();
        }
        players.push(TreePlayerGain {
            player: i,
            value: base[i].clone(),
            best_response_value: value[0].clone(),
            gain,
            witness,
        });
    }
    Ok(TreeNashReport {
        accepted: players.iter().all(|p| p.gain <= *eps),
        epsilon: eps.clone(),
        players,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::int;

    /// Leader picks In or Out; after In the follower picks Fight or Share.
    pub(crate) fn entry_game() -> ExtensiveTree {
        let mut b = TreeBuilder::new(2);
        let root = b.decision(None, 0).unwrap();
        b.leaf(Some((root, "out")), vec![int(1), int(5)]).unwrap();
        let f = b.decision(Some((root, "in")), 1).unwrap();
        b.leaf(Some((f, "fight")), vec![int(0), int(0)]).unwrap();
        b.leaf(Some((f, "share")), vec![int(2), int(2)]).unwrap();
        b.build().unwrap()
    }

    #[test]
    fn committed_branch_is_optimal() {
        let t = entry_game();
        // in, share
        let s = TreeStrategyProfile::pure(&t, |_| 1).unwrap();
        let r = verify_tree_nash(&t, &s, &int(0)).unwrap();
        assert!(r.accepted);
        assert_eq!(t.expected(&s, 0), vec![int(2), int(2)]);
    }

    #[test]
    fn profitable_branch_has_witness() {
        let t = entry_game();
        // out, share: leader gains 1 by entering.
        let s = TreeStrategyProfile::pure(&t, |id| if id == 0 { 0 } else { 1 }).unwrap();
        let r = verify_tree_nash(&t, &s, &int(0)).unwrap();
        assert!(!r.accepted);
        assert_eq!(r.players[0].gain, int(1));
        assert_eq!(r.players[0].witness, vec![(0, 1)]);
        assert!(r.render(&t).contains("root -> in"));
    }

    #[test]
    fn single_node_tree() {
        let mut b = TreeBuilder::new(1);
        b.leaf(None, vec![int(3)]).unwrap();
        let t = b.build().unwrap();
        let s = TreeStrategyProfile::new(&t, |_| unreachable!()).unwrap();
        assert!(verify_tree_nash(&t, &s, &int(0)).unwrap().accepted);
    }

    #[test]
    fn builder_rejects_bad_trees() {
        let mut b = TreeBuilder::new(2);
        let r = b.decision(None, 0).unwrap();
        b.leaf(Some((r, "x")), vec![int(0), int(0)]).unwrap();
        assert!(b.leaf(Some((r, "x")), vec![int(0), int(0)]).is_err());
        assert!(b.leaf(Some((r, "y")), vec![int(0)]).is_err());
        assert!(b.decision(None, 0).is_err());
        let mut b = TreeBuilder::new(1);
        b.decision(None, 0).unwrap();
        assert!(matches!(b.build(), Err(TreeError::NoActions(0))));
    }

    #[test]
    fn dump_lists_every_node() {
        let t = entry_game();
        let d = t.dump(None);
        assert_eq!(d.lines().count(), t.len());
        assert!(d.contains("  in p2"));
    }
}
