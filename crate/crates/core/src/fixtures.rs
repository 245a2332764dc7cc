//! Small reference games and their correlated devices.

use crate::game::{ActionProfile, ProfileDistribution, StrategicGame};
use crate::{int, Rational};

fn labels(sets: &[&[&str]]) -> Vec<Vec<String>> {
    sets.iter()
        .map(|s| s.iter().map(|l| l.to_string()).collect())
        .collect()
}

fn matrix(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
    rows.iter()
        .map(|r| r.iter().map(|&x| int(x)).collect())
        .collect()
}

fn ap(v: &[usize]) -> ActionProfile {
    ActionProfile(v.to_vec())
}

/// Battle of the Sexes: `(B,B) = (2,5)`, `(S,S) = (5,2)`, zero otherwise.
pub fn battle_of_sexes() -> StrategicGame {
    StrategicGame::bimatrix(
        &["B", "S"],
        &["B", "S"],
        &matrix(&[&[2, 0], &[0, 5]]),
        &matrix(&[&[5, 0], &[0, 2]]),
    )
    .expect("fixture is well formed")
}

/// The public coin `1/2 (B,B) + 1/2 (S,S)`.
pub fn bos_alpha() -> ProfileDistribution {
    ProfileDistribution::uniform(vec![ap(&[0, 0]), ap(&[1, 1])]).expect("fixture is well formed")
}

/// Row payoffs of the symmetric game `G*` (own action by opponent action).
const G_STAR_ROW: [[i64; 3]; 3] = [[0, -1, 0], [101, -1, -1], [-1, 101, 0]];

/// A symmetric three-action game whose device `1/2 (A,B) + 1/2 (B,A)` is a
/// coarse correlated equilibrium but not a correlated one: a player told `A`
/// knows the opponent plays `B` and gains 102 by switching to `C`.
pub fn g_star() -> StrategicGame {
    StrategicGame::from_fn(labels(&[&["A", "B", "C"], &["A", "B", "C"]]), |p| {
        let (x, y) = (p.get(0), p.get(1));
        vec![int(G_STAR_ROW[x][y]), int(G_STAR_ROW[y][x])]
    })
    .expect("fixture is well formed")
}

pub fn g_star_alpha() -> ProfileDistribution {
    ProfileDistribution::uniform(vec![ap(&[0, 1]), ap(&[1, 0])]).expect("fixture is well formed")
}

/// `G*` with a third player who has a single action and payoff zero.
pub fn g_star_3() -> StrategicGame {
    StrategicGame::from_fn(
        labels(&[&["A", "B", "C"], &["A", "B", "C"], &["Z"]]),
        |p| {
            let (x, y) = (p.get(0), p.get(1));
            vec![int(G_STAR_ROW[x][y]), int(G_STAR_ROW[y][x]), int(0)]
        },
    )
    .expect("fixture is well formed")
}

pub fn g_star_3_alpha() -> ProfileDistribution {
    ProfileDistribution::uniform(vec![ap(&[0, 1, 0]), ap(&[1, 0, 0])])
        .expect("fixture is well formed")
}

/// Two independent copies of `G*`, played by players (1,2) and (3,4).
pub fn g_star_4() -> StrategicGame {
    let s: &[&str] = &["A", "B", "C"];
    StrategicGame::from_fn(labels(&[s, s, s, s]), |p| {
        let a: Vec<usize> = p.0.clone();
        vec![
            int(G_STAR_ROW[a[0]][a[1]]),
            int(G_STAR_ROW[a[1]][a[0]]),
            int(G_STAR_ROW[a[2]][a[3]]),
            int(G_STAR_ROW[a[3]][a[2]]),
        ]
    })
    .expect("fixture is well formed")
}

/// Product of the `G*` device on each pair.
pub fn g_star_4_alpha() -> ProfileDistribution {
    let pairs = [(0, 1), (1, 0)];
    let mut support = Vec::new();
    for &(a, b) in &pairs {
        for &(c, d) in &pairs {
            support.push(ap(&[a, b, c, d]));
        }
    }
    ProfileDistribution::uniform(support).expect("fixture is well formed")
}

pub fn matching_pennies() -> StrategicGame {
    StrategicGame::bimatrix(
        &["H", "T"],
        &["H", "T"],
        &matrix(&[&[1, -1], &[-1, 1]]),
        &matrix(&[&[-1, 1], &[1, -1]]),
    )
    .expect("fixture is well formed")
}

/// Every payoff zero.
pub fn zero_game(actions: &[usize]) -> StrategicGame {
    let sets: Vec<Vec<String>> = actions
        .iter()
        .map(|&k| (0..k).map(|a| format!("a{a}")).collect())
        .collect();
    let n = actions.len();
    StrategicGame::from_fn(sets, |_| vec![int(0); n]).expect("fixture is well formed")
}

/// A game where holding player 1 to the minmax value forces player 2 onto a
/// strictly worse action: `u1 = 2` if the column is `L` and 0 otherwise, while
/// `u2 = 2` at `L` and 0 at `R`.
pub fn costly_punishment() -> StrategicGame {
    StrategicGame::bimatrix(
        &["T", "B"],
        &["L", "R"],
        &matrix(&[&[2, 0], &[2, 0]]),
        &matrix(&[&[2, 0], &[2, 0]]),
    )
    .expect("fixture is well formed")
}

pub fn costly_punishment_alpha() -> ProfileDistribution {
    ProfileDistribution::point(ap(&[0, 0]))
}

/// Looks up a fixture game and its device by name.
pub fn by_name(name: &str) -> Option<(StrategicGame, ProfileDistribution)> {
    Some(match name {
        "bos" => (battle_of_sexes(), bos_alpha()),
        "gstar" => (g_star(), g_star_alpha()),
        "gstar3" => (g_star_3(), g_star_3_alpha()),
        "gstar4" => (g_star_4(), g_star_4_alpha()),
        "costly" => (costly_punishment(), costly_punishment_alpha()),
        "pennies" => {
            let h = crate::ratio(1, 2);
            let d = ProfileDistribution::product(&[vec![h.clone(), h.clone()], vec![h.clone(), h]])
                .expect("fixture is well formed");
            (matching_pennies(), d)
        }
        _ => return None,
    })
}

pub const NAMES: &[&str] = &["bos", "gstar", "gstar3", "gstar4", "costly", "pennies"];
