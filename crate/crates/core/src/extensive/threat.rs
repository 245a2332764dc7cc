//! Empty threats.
//!
//! Player `i = P(h)` faces an empty threat at `h` when some `tau` at `h`
//! makes every empty-threat-free continuation beat every empty-threat-free
//! continuation of the prescribed play. Values are compared inside the
//! subgame at `h`, so off-path histories are judged on their own terms.
//!
//! Continuations range over pure completions of the subgame. Since `Cont`
//! leaves the whole subgame below `h` free, the set of payoff vectors that
//! empty-threat-free completions can reach depends only on the subgame, and
//! [`etf_values`] computes it bottom-up once per tree.

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use rand::Rng;

use super::tree::{best_response, ExtensiveTree, NodeId, NodeKind, TreeNashReport, TreeStrategyProfile};
use super::{verify_tree_nash, TreeError};
use crate::game::io::fmt_rational;
use crate::game::PlayerId;
use crate::Rational;

type Payoffs = Vec<Rational>;

/// For every node, the distinct payoff vectors of empty-threat-free pure
/// completions of its subgame.
pub fn etf_values(tree: &ExtensiveTree) -> Vec<Vec<Payoffs>> {
    let mut values: Vec<Vec<Payoffs>> = vec![Vec::new(); tree.len()];
    for id in (0..tree.len()).rev() {
        values[id] = match tree.kind(id) {
            NodeKind::Leaf { payoffs } => vec![payoffs.clone()],
            NodeKind::Decision { owner, children } => {
                let j = *owner;
                let floor = children
                    .iter()
                    .map(|&c| min_of(&values[c], j))
                    .max()
                    .expect("decision nodes have actions");
                // Choosing b is threat-free iff no tau guarantees more than the
                // best that b can still lead to.
                let mut set = BTreeSet::new();
                for &c in children {
                    if max_of(&values[c], j) >= floor {
                        set.extend(values[c].iter().cloned());
                    }
                }
                set.into_iter().collect()
            }
        };
    }
    values
}

fn min_of(vals: &[Payoffs], i: PlayerId) -> Rational {
    vals.iter().map(|v| v[i].clone()).min().expect("non-empty value set")
}

fn max_of(vals: &[Payoffs], i: PlayerId) -> Rational {
    vals.iter().map(|v| v[i].clone()).max().expect("non-empty value set")
}

/// All profiles equal to a base profile off the subgame at `node` that play
/// `tau` there. With `tau = None` every pure action at `node` is allowed.
#[derive(Debug, Clone)]
pub struct ContSet<'a> {
    tree: &'a ExtensiveTree,
    base: &'a TreeStrategyProfile,
    node: NodeId,
    tau: Option<Vec<Rational>>,
    free: Vec<NodeId>,
}

/// The continuation set `Cont(h, sigma, tau)`.
pub fn cont_set<'a>(
    tree: &'a ExtensiveTree,
    node: NodeId,
    sigma: &'a TreeStrategyProfile,
    tau: Option<&[Rational]>,
) -> Result<ContSet<'a>, TreeError> {
    if node >= tree.len() {
        return Err(TreeError::UnknownNode(node));
    }
    if tree.is_terminal(node) {
        return Err(TreeError::Terminal(node));
    }
    if let Some(t) = tau {
        sigma.with(node, t.to_vec()).validate(tree)?;
    }
    let free = tree
        .subtree(node)
        .into_iter()
        .skip(1)
        .filter(|&x| !tree.is_terminal(x))
        .collect();
    Ok(ContSet {
        tree,
        base: sigma,
        node,
        tau: tau.map(<[Rational]>::to_vec),
        free,
    })
}

impl ContSet<'_> {
    /// Number of pure completions.
    pub fn len(&self) -> usize {
        let at_node = if self.tau.is_some() { 1 } else { self.tree.children(self.node).len() };
        self.free
            .iter()
            .map(|&x| self.tree.children(x).len())
            .product::<usize>()
            * at_node
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Membership by definition, not limited to pure completions.
    pub fn contains(&self, pi: &TreeStrategyProfile) -> bool {
        let inside: BTreeSet<NodeId> = self.tree.subtree(self.node).into_iter().collect();
        let off_ok = self
            .tree
            .decision_nodes()
            .filter(|x| !inside.contains(x))
            .all(|x| pi.at(x) == self.base.at(x));
        let at_ok = match &self.tau {
            Some(t) => pi.at(self.node) == t.as_slice(),
            None => pi.pure_action(self.node).is_some(),
        };
        off_ok && at_ok && pi.validate(self.tree).is_ok()
    }

    /// Every pure completion of the subgame.
    pub fn completions(&self) -> impl Iterator<Item = TreeStrategyProfile> + '_ {
        let mut slots: Vec<(NodeId, usize)> = self.free.iter().map(|&x| (x, self.tree.children(x).len())).collect();
        if self.tau.is_none() {
            slots.insert(0, (self.node, self.tree.children(self.node).len()));
        }
        let total = self.len();
        (0..total).map(move |mut idx| {
            let mut pi = self.base.clone();
            if let Some(t) = &self.tau {
                pi = pi.with(self.node, t.clone());
            }
            for &(x, k) in &slots {
                let c = idx % k;
                idx /= k;
                pi = pi.with(x, unit(k, c));
            }
            pi
        })
    }
}

fn unit(k: usize, c: usize) -> Vec<Rational> {
    (0..k).map(|a| if a == c { Rational::one() } else { Rational::zero() }).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreatVerdict {
    pub node: NodeId,
    pub player: PlayerId,
    pub threat: bool,
    /// Action at `node` whose every continuation beats the prescribed play.
    pub witness: Option<usize>,
    /// Best guaranteed value over pure `tau`.
    pub deviation_floor: Rational,
    /// Best value the prescribed play can still reach.
    pub follow_ceiling: Rational,
}

impl ThreatVerdict {
    pub fn render(&self, tree: &ExtensiveTree) -> String {
        let mut s = format!(
            "{} at {} player {} floor={} ceiling={}",
            if self.threat { "THREAT" } else { "no-threat" },
            tree.history_string(self.node),
            self.player + 1,
            fmt_rational(&self.deviation_floor),
            fmt_rational(&self.follow_ceiling)
        );
        if let Some(a) = self.witness {
            s.push_str(&format!(" tau={}", tree.label(tree.children(self.node)[a])));
        }
        s
    }
}

fn threat_at(tree: &ExtensiveTree, values: &[Vec<Payoffs>], dist: &[Rational], node: NodeId) -> ThreatVerdict {
    let i = tree.owner(node).expect("decision node");
    let children = tree.children(node);
    let (best, floor) = children
        .iter()
        .enumerate()
        .map(|(a, &c)| (a, min_of(&values[c], i)))
        .reduce(|acc, cur| if cur.1 > acc.1 { cur } else { acc })
        .expect("decision nodes have actions");
    let ceiling = children
        .iter()
        .zip(dist)
        .fold(Rational::zero(), |acc, (&c, w)| acc + w * max_of(&values[c], i));
    let threat = floor > ceiling;
    ThreatVerdict {
        node,
        player: i,
        threat,
        witness: threat.then_some(best),
        deviation_floor: floor,
        follow_ceiling: ceiling,
    }
}

/// Whether `P(h)` faces an empty threat at `h` with respect to `sigma`.
pub fn detect_empty_threat(
    tree: &ExtensiveTree,
    sigma: &TreeStrategyProfile,
    node: NodeId,
) -> Result<ThreatVerdict, TreeError> {
    cont_set(tree, node, sigma, None)?;
    sigma.validate(tree)?;
    let values = etf_values(tree);
    Ok(threat_at(tree, &values, sigma.at(node), node))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EtfReport {
    pub nash: TreeNashReport,
    pub threats: Vec<ThreatVerdict>,
    pub accepted: bool,
}

impl EtfReport {
    pub fn render(&self, tree: &ExtensiveTree) -> String {
        let mut s = format!(
            "{} empty-threat-free nash (coarse follow/abort abstraction when built from a protocol)\n",
            if self.accepted { "ACCEPT" } else { "REJECT" }
        );
        s.push_str(&self.nash.render(tree));
        if self.threats.is_empty() {
            s.push_str("no empty threats\n");
        }
        for t in &self.threats {
            s.push_str(&t.render(tree));
            s.push('\n');
        }
        s
    }
}

/// Nash within `eps` and no empty threat at any history.
pub fn verify_etf_ne(
    tree: &ExtensiveTree,
    sigma: &TreeStrategyProfile,
    eps: &Rational,
) -> Result<EtfReport, TreeError> {
    let nash = verify_tree_nash(tree, sigma, eps)?;
    let values = etf_values(tree);
    let threats: Vec<ThreatVerdict> = tree
        .decision_nodes()
        .map(|h| threat_at(tree, &values, sigma.at(h), h))
        .filter(|v| v.threat)
        .collect();
    Ok(EtfReport {
        accepted: nash.accepted && threats.is_empty(),
        nash,
        threats,
    })
}

/// Outcome of comparing the pure-completion verdict at one history with one
/// that also admits sampled mixed completions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpotCheck {
    pub node: NodeId,
    pub samples: usize,
    /// Sampled completions that were themselves free of empty threats.
    pub threat_free_samples: usize,
    /// Threat-free samples whose value fell outside the pure range.
    pub outside_pure_range: usize,
    pub pure_threat: bool,
    pub mixed_threat: bool,
}

impl SpotCheck {
    pub fn agrees(&self) -> bool {
        self.pure_threat == self.mixed_threat
    }
}

fn random_dist<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<Rational> {
    loop {
        let w: Vec<i64> = (0..k).map(|_| rng.gen_range(0..4)).collect();
        let total: i64 = w.iter().sum();
        if total > 0 {
            return w.into_iter().map(|x| crate::ratio(x, total)).collect();
        }
    }
}

/// Samples mixed completions below each child of `node` and checks whether
/// admitting them would change the empty-threat verdict there.
pub fn spot_check_mixed<R: Rng + ?Sized>(
    tree: &ExtensiveTree,
    sigma: &TreeStrategyProfile,
    node: NodeId,
    samples: usize,
    rng: &mut R,
) -> Result<SpotCheck, TreeError> {
    cont_set(tree, node, sigma, None)?;
    sigma.validate(tree)?;
    let values = etf_values(tree);
    let pure = threat_at(tree, &values, sigma.at(node), node);
    let i = pure.player;
    let children = tree.children(node).to_vec();
    let mut lo: Vec<Rational> = children.iter().map(|&c| min_of(&values[c], i)).collect();
    let mut hi: Vec<Rational> = children.iter().map(|&c| max_of(&values[c], i)).collect();
    let mut threat_free = 0;
    let mut outside = 0;
    for s in 0..samples {
        let a = s % children.len();
        let c = children[a];
        let mut pi = sigma.clone();
        let inner: Vec<NodeId> = tree.subtree(c).into_iter().filter(|&x| !tree.is_terminal(x)).collect();
        for &x in &inner {
            pi = pi.with(x, random_dist(tree.children(x).len(), rng));
        }
        if inner.iter().any(|&x| threat_at(tree, &values, pi.at(x), x).threat) {
            continue;
        }
        threat_free += 1;
        let v = tree.expected(&pi, c)[i].clone();
        if v < lo[a] || v > hi[a] {
            outside += 1;
        }
        if v < lo[a] {
            lo[a] = v.clone();
        }
        if v > hi[a] {
            hi[a] = v;
        }
    }
    let floor = lo.iter().max().expect("decision nodes have actions").clone();
    let ceiling = hi
        .iter()
        .zip(sigma.at(node))
        .fold(Rational::zero(), |acc, (h, w)| acc + w * h);
    Ok(SpotCheck {
        node,
        samples,
        threat_free_samples: threat_free,
        outside_pure_range: outside,
        pure_threat: pure.threat,
        mixed_threat: floor > ceiling,
    })
}

/// A behavioural profile with beliefs over each information set. Trees here
/// have perfect information, so every set is a single history.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assessment {
    pub beta: TreeStrategyProfile,
    pub beliefs: Vec<Vec<(NodeId, Rational)>>,
}

impl Assessment {
    pub fn perfect_information(tree: &ExtensiveTree, beta: TreeStrategyProfile) -> Self {
        let beliefs = tree.decision_nodes().map(|h| vec![(h, Rational::one())]).collect();
        Assessment { beta, beliefs }
    }

    pub fn validate(&self, tree: &ExtensiveTree) -> Result<(), TreeError> {
        self.beta.validate(tree)?;
        for set in &self.beliefs {
            let total = set.iter().fold(Rational::zero(), |a, (_, w)| a + w);
            if let Some(&(h, _)) = set.iter().find(|(h, _)| *h >= tree.len() || tree.is_terminal(*h)) {
                return Err(TreeError::NotDecision(h));
            }
            if total != Rational::one() {
                return Err(TreeError::Strategy {
                    node: set.first().map_or(0, |x| x.0),
                    message: "beliefs do not sum to one".into(),
                });
            }
        }
        Ok(())
    }

    /// Histories where the mover could do better in the subgame given the
    /// rest of the profile.
    pub fn irrational_histories(&self, tree: &ExtensiveTree) -> Vec<NodeId> {
        let mut out = Vec::new();
        for i in 0..tree.num_players() {
            let (br, _) = best_response(tree, &self.beta, i);
            for h in tree.decision_nodes().filter(|&h| tree.owner(h) == Some(i)) {
                if br[h] > tree.expected(&self.beta, h)[i] {
                    out.push(h);
                }
            }
        }
        out.sort_unstable();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extensive::TreeBuilder;
    use crate::{int, trial_rng};

    fn entry_game() -> ExtensiveTree {
        let mut b = TreeBuilder::new(2);
        let root = b.decision(None, 0).unwrap();
        b.leaf(Some((root, "out")), vec![int(1), int(5)]).unwrap();
        let f = b.decision(Some((root, "in")), 1).unwrap();
        b.leaf(Some((f, "fight")), vec![int(0), int(0)]).unwrap();
        b.leaf(Some((f, "share")), vec![int(2), int(2)]).unwrap();
        b.build().unwrap()
    }

    #[test]
    fn fighting_is_an_empty_threat() {
        let t = entry_game();
        // out, fight: a Nash equilibrium resting on a threat.
        let s = TreeStrategyProfile::pure(&t, |_| 0).unwrap();
        let r = verify_etf_ne(&t, &s, &int(0)).unwrap();
        assert!(r.nash.accepted);
        assert!(!r.accepted);
        // The entrant is threatened too: once fighting is ruled out, entering
        // guarantees 2.
        let at: Vec<_> = r.threats.iter().map(|v| (v.node, v.witness)).collect();
        assert_eq!(at, vec![(0, Some(1)), (2, Some(1))]);
        let ok = TreeStrategyProfile::pure(&t, |_| 1).unwrap();
        assert!(verify_etf_ne(&t, &ok, &int(0)).unwrap().accepted);
    }

    #[test]
    fn cont_set_basics() {
        let t = entry_game();
        let s = TreeStrategyProfile::pure(&t, |_| 0).unwrap();
        assert!(matches!(cont_set(&t, 1, &s, None), Err(TreeError::Terminal(1))));
        let own = s.at(2).to_vec();
        let c = cont_set(&t, 2, &s, Some(&own)).unwrap();
        assert!(c.contains(&s));
        assert_eq!(c.len(), 1);
        let all = cont_set(&t, 2, &s, None).unwrap();
        assert_eq!(all.len(), 2);
        assert_eq!(all.completions().count(), 2);
        assert_eq!(cont_set(&t, 0, &s, None).unwrap().len(), 4);
    }

    #[test]
    fn one_level_tree_threat_is_a_mistake() {
        let mut b = TreeBuilder::new(1);
        let r = b.decision(None, 0).unwrap();
        b.leaf(Some((r, "a")), vec![int(1)]).unwrap();
        b.leaf(Some((r, "b")), vec![int(2)]).unwrap();
        let t = b.build().unwrap();
        let s = TreeStrategyProfile::pure(&t, |_| 1).unwrap();
        assert!(!detect_empty_threat(&t, &s, 0).unwrap().threat);
        let bad = TreeStrategyProfile::pure(&t, |_| 0).unwrap();
        assert!(detect_empty_threat(&t, &bad, 0).unwrap().threat);
    }

    #[test]
    fn spot_check_runs() {
        let t = entry_game();
        let s = TreeStrategyProfile::pure(&t, |_| 1).unwrap();
        let r = spot_check_mixed(&t, &s, 0, 50, &mut trial_rng(3, 0)).unwrap();
        assert_eq!(r.samples, 50);
        assert!(r.threat_free_samples > 0);
        assert!(!r.pure_threat);
    }

    #[test]
    fn assessment_flags_irrational_moves() {
        let t = entry_game();
        let s = TreeStrategyProfile::pure(&t, |_| 0).unwrap();
        let a = Assessment::perfect_information(&t, s);
        a.validate(&t).unwrap();
        assert_eq!(a.irrational_histories(&t), vec![2]);
    }
}
