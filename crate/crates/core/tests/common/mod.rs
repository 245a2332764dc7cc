//! Independent oracles and generators shared by the integration tests.
#![allow(dead_code)]

pub mod trees;

use blinded_core::{int, ratio, trial_rng, ActionProfile, ProfileDistribution, Rational, StrategicGame};
use num_traits::Zero;
use rand::Rng;

pub fn labels(sizes: &[usize]) -> Vec<Vec<String>> {
    sizes
        .iter()
        .map(|&k| (0..k).map(|a| format!("a{a}")).collect())
        .collect()
}

/// All profiles of the given shape, last player fastest.
pub fn all_profiles(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &k in sizes {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..k).map(move |a| {
                    let mut q = p.clone();
                    q.push(a);
                    q
                })
            })
            .collect();
    }
    out
}

pub fn random_game<R: Rng>(sizes: &[usize], rng: &mut R) -> StrategicGame {
    let n = sizes.len();
    StrategicGame::from_fn(labels(sizes), |_| (0..n).map(|_| int(rng.gen_range(-4..=6))).collect())
        .expect("generated game is well formed")
}

/// A random joint distribution with at most `max_support` profiles.
pub fn random_dist<R: Rng>(sizes: &[usize], max_support: usize, rng: &mut R) -> ProfileDistribution {
    let profiles = all_profiles(sizes);
    let k = rng.gen_range(1..=max_support.min(profiles.len()));
    let weights: Vec<i64> = (0..k).map(|_| rng.gen_range(1..=4)).collect();
    let total: i64 = weights.iter().sum();
    ProfileDistribution::joint((0..k).map(|j| {
        let p = profiles[rng.gen_range(0..profiles.len())].clone();
        (ActionProfile(p), ratio(weights[j], total))
    }))
    .expect("weights sum to one")
}

pub fn random_product<R: Rng>(sizes: &[usize], rng: &mut R) -> ProfileDistribution {
    let marginals: Vec<Vec<Rational>> = sizes
        .iter()
        .map(|&k| {
            let w: Vec<i64> = (0..k).map(|_| rng.gen_range(0..=2)).collect();
            let t: i64 = w.iter().sum();
            if t == 0 {
                (0..k).map(|a| if a == 0 { int(1) } else { int(0) }).collect()
            } else {
                w.into_iter().map(|x| ratio(x, t)).collect()
            }
        })
        .collect();
    ProfileDistribution::product(&marginals).expect("normalised marginals")
}

pub fn rng(seed: u64) -> rand_chacha::ChaCha20Rng {
    trial_rng(seed, 0)
}

fn u(game: &StrategicGame, p: &[usize], i: usize) -> Rational {
    game.payoff(&ActionProfile(p.to_vec()), i).clone()
}

/// Largest gain from an unconditional switch to a fixed action.
pub fn oracle_cce_gain(game: &StrategicGame, dist: &ProfileDistribution, i: usize) -> Rational {
    (0..game.num_actions(i))
        .map(|d| {
            dist.support().iter().fold(Rational::zero(), |acc, (p, w)| {
                let mut q = p.0.clone();
                q[i] = d;
                acc + w * (u(game, &q, i) - u(game, &p.0, i))
            })
        })
        .max()
        .expect("non-empty action set")
}

/// Largest gain over every swap function `phi: A_i -> A_i`.
pub fn oracle_ce_gain(game: &StrategicGame, dist: &ProfileDistribution, i: usize) -> Rational {
    let k = game.num_actions(i);
    let phis = all_profiles(&vec![k; k]);
    phis.iter()
        .map(|phi| {
            dist.support().iter().fold(Rational::zero(), |acc, (p, w)| {
                let mut q = p.0.clone();
                q[i] = phi[p.0[i]];
                acc + w * (u(game, &q, i) - u(game, &p.0, i))
            })
        })
        .max()
        .expect("identity swap exists")
}

/// The mixture `dist` factors into its marginals.
pub fn oracle_is_product(game: &StrategicGame, dist: &ProfileDistribution) -> bool {
    let sizes = game.action_counts();
    let marg: Vec<Vec<Rational>> = (0..sizes.len())
        .map(|i| {
            let mut m = vec![Rational::zero(); sizes[i]];
            for (p, w) in dist.support() {
                m[p.0[i]] += w;
            }
            m
        })
        .collect();
    all_profiles(&sizes).into_iter().all(|p| {
        let prod = p.iter().enumerate().fold(int(1), |acc, (i, &a)| acc * &marg[i][a]);
        dist.probability(&ActionProfile(p)) == prod
    })
}

#[derive(Debug, Default)]
pub struct SuiteOutcome {
    pub cases: usize,
    pub mismatches: Vec<String>,
    pub containment_violations: usize,
}

/// Every shape with at most three players and three actions each, several
/// seeded payoff tables per shape, and a mix of point, product and joint
/// distributions. Each verdict and gain is compared with the oracles.
pub fn hierarchy_suite() -> SuiteOutcome {
    use blinded_core::{verify_equilibrium, Concept, Tolerance};
    let tol = Tolerance::exact();
    let mut out = SuiteOutcome::default();
    let mut shapes = Vec::new();
    for n in 1..=3 {
        shapes.extend(all_profiles(&vec![3; n]).into_iter().map(|s| s.into_iter().map(|a| a + 1).collect::<Vec<_>>()));
    }
    for (si, sizes) in shapes.iter().enumerate() {
        let mut r = rng(1000 + si as u64);
        for _ in 0..12 {
            let game = random_game(sizes, &mut r);
            let mut dists: Vec<ProfileDistribution> = all_profiles(sizes)
                .into_iter()
                .take(9)
                .map(|p| ProfileDistribution::point(ActionProfile(p)))
                .collect();
            dists.extend((0..3).map(|_| random_product(sizes, &mut r)));
            dists.extend((0..6).map(|_| random_dist(sizes, 6, &mut r)));
            for dist in &dists {
                out.cases += 1;
                let ce = verify_equilibrium(&game, dist, Concept::Ce, &tol).expect("domain ok");
                let cce = verify_equilibrium(&game, dist, Concept::Cce, &tol).expect("domain ok");
                for i in 0..sizes.len() {
                    let oc = oracle_ce_gain(&game, dist, i);
                    let occ = oracle_cce_gain(&game, dist, i);
                    if ce.players[i].gain != oc || cce.players[i].gain != occ {
                        out.mismatches.push(format!("shape {sizes:?} player {i}: ce {} vs {oc}, cce {} vs {occ}", ce.players[i].gain, cce.players[i].gain));
                    }
                }
                let oracle_ce = (0..sizes.len()).all(|i| oracle_ce_gain(&game, dist, i) <= Rational::zero());
                let oracle_cce = (0..sizes.len()).all(|i| oracle_cce_gain(&game, dist, i) <= Rational::zero());
                if ce.accepted != oracle_ce || cce.accepted != oracle_cce {
                    out.mismatches.push(format!("shape {sizes:?}: verdict mismatch"));
                }
                let nash = if dist.kind() == blinded_core::DistKind::Product {
                    let rep = verify_equilibrium(&game, dist, Concept::Nash, &tol).expect("product");
                    let oracle = oracle_is_product(&game, dist) && oracle_cce;
                    if rep.accepted != oracle {
                        out.mismatches.push(format!("shape {sizes:?}: nash mismatch"));
                    }
                    rep.accepted
                } else {
                    false
                };
                if (nash && !ce.accepted) || (ce.accepted && !cce.accepted) {
                    out.containment_violations += 1;
                }
            }
        }
    }
    out
}
