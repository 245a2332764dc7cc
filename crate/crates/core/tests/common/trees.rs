//! Random perfect-information trees and brute-force oracles over them.

use blinded_core::extensive::{ExtensiveTree, TreeBuilder, TreeStrategyProfile};
use blinded_core::int;
use rand::Rng;

/// Preorder arena kept by the oracle, independent of the library's tree.
#[derive(Debug, Clone)]
pub enum ONode {
    Leaf(Vec<i64>),
    Dec { owner: usize, kids: Vec<usize> },
}

struct Gen {
    nodes: Vec<ONode>,
}

fn grow<R: Rng>(g: &mut Gen, depth: usize, players: usize, max_actions: usize, rng: &mut R) -> usize {
    let id = g.nodes.len();
    let leaf = depth == 0 || (id > 0 && rng.gen_bool(0.3));
    if leaf {
        g.nodes.push(ONode::Leaf((0..players).map(|_| rng.gen_range(0..5)).collect()));
        return id;
    }
    g.nodes.push(ONode::Dec { owner: rng.gen_range(0..players), kids: Vec::new() });
    let k = rng.gen_range(1..=max_actions);
    let mut kids = Vec::new();
    for _ in 0..k {
        kids.push(grow(g, depth - 1, players, max_actions, rng));
    }
    if let ONode::Dec { kids: slot, .. } = &mut g.nodes[id] {
        *slot = kids;
    }
    id
}

pub fn random_tree<R: Rng>(depth: usize, max_actions: usize, rng: &mut R) -> (Vec<ONode>, ExtensiveTree) {
    let players = rng.gen_range(1..=3);
    let mut g = Gen { nodes: Vec::new() };
    grow(&mut g, depth, players, max_actions, rng);
    let mut b = TreeBuilder::new(players);
    let mut ids = vec![0; g.nodes.len()];
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; g.nodes.len()];
    for (x, n) in g.nodes.iter().enumerate() {
        if let ONode::Dec { kids, .. } = n {
            for (a, &c) in kids.iter().enumerate() {
                parent[c] = Some((x, a));
            }
        }
    }
    let names = ["x", "y", "z"];
    for (x, n) in g.nodes.iter().enumerate() {
        let p = parent[x].map(|(q, a)| (ids[q], names[a]));
        ids[x] = match n {
            ONode::Leaf(u) => b.leaf(p, u.iter().map(|&v| int(v)).collect()).unwrap(),
            ONode::Dec { owner, .. } => b.decision(p, *owner).unwrap(),
        };
        assert_eq!(ids[x], x);
    }
    (g.nodes, b.build().unwrap())
}

pub fn play(nodes: &[ONode], prof: &[usize], x: usize) -> Vec<i64> {
    match &nodes[x] {
        ONode::Leaf(u) => u.clone(),
        ONode::Dec { kids, .. } => play(nodes, prof, kids[prof[x]]),
    }
}

pub fn decision_ids(nodes: &[ONode]) -> Vec<usize> {
    (0..nodes.len()).filter(|&x| matches!(nodes[x], ONode::Dec { .. })).collect()
}

pub fn width(nodes: &[ONode], x: usize) -> usize {
    match &nodes[x] {
        ONode::Dec { kids, .. } => kids.len(),
        ONode::Leaf(_) => 0,
    }
}

/// Every assignment to `free`, starting from `base`.
pub fn assignments(nodes: &[ONode], base: &[usize], free: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![base.to_vec()];
    for &x in free {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..width(nodes, x)).map(move |a| {
                    let mut q = p.clone();
                    q[x] = a;
                    q
                })
            })
            .collect();
    }
    out
}

/// Nash by enumerating every pure strategy of every player.
pub fn oracle_nash(nodes: &[ONode], prof: &[usize]) -> Option<bool> {
    let root = play(nodes, prof, 0);
    for i in 0..root.len() {
        let mine: Vec<usize> = decision_ids(nodes)
            .into_iter()
            .filter(|&x| matches!(nodes[x], ONode::Dec { owner, .. } if owner == i))
            .collect();
        let count: usize = mine.iter().map(|&x| width(nodes, x)).product();
        if count > 5000 {
            return None;
        }
        if assignments(nodes, prof, &mine).iter().any(|q| play(nodes, q, 0)[i] > root[i]) {
            return Some(false);
        }
    }
    Some(true)
}

pub fn below(nodes: &[ONode], x: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut stack = vec![x];
    while let Some(y) = stack.pop() {
        if let ONode::Dec { kids, .. } = &nodes[y] {
            if y != x {
                out.push(y);
            }
            stack.extend(kids.iter().copied());
        }
    }
    out.sort_unstable();
    out
}

pub fn oracle_etf(nodes: &[ONode], prof: &[usize], x: usize) -> bool {
    below(nodes, x).into_iter().all(|y| !oracle_threat(nodes, prof, y))
}

/// The definition, quantifying over empty-threat-free pure completions.
pub fn oracle_threat(nodes: &[ONode], prof: &[usize], x: usize) -> bool {
    let ONode::Dec { owner: i, .. } = nodes[x] else { return false };
    let free = below(nodes, x);
    let values = |tau: usize| -> Vec<i64> {
        let mut base = prof.to_vec();
        base[x] = tau;
        assignments(nodes, &base, &free)
            .into_iter()
            .filter(|q| oracle_etf(nodes, q, x))
            .map(|q| play(nodes, &q, x)[i])
            .collect()
    };
    let follow = values(prof[x]);
    let ceiling = *follow.iter().max().expect("some completion is threat-free");
    (0..width(nodes, x)).any(|tau| *values(tau).iter().min().expect("non-empty") > ceiling)
}

pub fn to_profile(tree: &ExtensiveTree, prof: &[usize]) -> TreeStrategyProfile {
    TreeStrategyProfile::pure(tree, |x| prof[x]).unwrap()
}

/// Subgame-perfect profile by backward induction, first maximiser wins.
pub fn backward_induction(nodes: &[ONode]) -> Vec<usize> {
    let mut prof = vec![0; nodes.len()];
    let mut val: Vec<Vec<i64>> = vec![Vec::new(); nodes.len()];
    for x in (0..nodes.len()).rev() {
        val[x] = match &nodes[x] {
            ONode::Leaf(u) => u.clone(),
            ONode::Dec { owner, kids } => {
                let mut best = 0;
                for (a, &c) in kids.iter().enumerate() {
                    if val[c][*owner] > val[kids[best]][*owner] {
                        best = a;
                    }
                }
                prof[x] = best;
                val[kids[best]].clone()
            }
        };
    }
    prof
}

