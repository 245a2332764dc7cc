use num_traits::{One, Signed, Zero};

use super::{PunishmentMode, PunishmentSpec, SolveError};
use crate::game::{
    deviation_gain, expected_utility, verify_equilibrium, ActionProfile, Concept, GameError,
    PlayerId, ProfileDistribution, StrategicGame, Tolerance,
};
use crate::Rational;

/// Largest action count per player accepted by support enumeration.
const MAX_SUPPORT_ACTIONS: usize = 12;

/// Profiles from which no player has a profitable pure deviation.
pub fn enumerate_pure_nash(game: &StrategicGame) -> Vec<ActionProfile> {
    game.profiles()
        .filter(|p| {
            let d = ProfileDistribution::point(p.clone());
            (0..game.num_players()).all(|i| {
                !deviation_gain(game, &d, i, Concept::Nash)
                    .expect("profile comes from the game")
                    .is_positive()
            })
        })
        .collect()
}

/// Solves `a x = b` exactly. Returns `None` unless the system is consistent and
/// its solution unique.
pub fn solve_linear_system(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(r, v)| {
            let mut row = r.clone();
            row.push(v.clone());
            row
        })
        .collect();
    let mut pivot_row = 0;
    for c in 0..cols {
        let Some(p) = (pivot_row..rows).find(|&r| !m[r][c].is_zero()) else {
            return None;
        };
        m.swap(pivot_row, p);
        let pv = m[pivot_row][c].clone();
        for x in m[pivot_row].iter_mut() {
            *x /= &pv;
        }
        let pr = m[pivot_row].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != pivot_row && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&pr) {
                    *x -= &f * y;
                }
            }
        }
        pivot_row += 1;
    }
    // Remaining rows must read 0 = 0.
    if m[pivot_row..].iter().any(|r| !r[cols].is_zero()) {
        return None;
    }
    Some(m[..cols].iter().map(|r| r[cols].clone()).collect())
}

fn subsets(k: usize) -> impl Iterator<Item = Vec<usize>> {
    (1u32..(1 << k)).map(move |mask| (0..k).filter(|&i| mask & (1 << i) != 0).collect())
}

/// Mixture of the player whose support is `own` that makes the opponent
/// indifferent over `opp`: returns the full-length mixture and the opponent's
/// value. `payoff(own_action, opp_action)` is the opponent's payoff.
fn indifference<F>(own: &[usize], own_len: usize, opp: &[usize], payoff: F) -> Option<(Vec<Rational>, Rational)>
where
    F: Fn(usize, usize) -> Rational,
{
    let mut a = Vec::with_capacity(opp.len() + 1);
    let mut b = Vec::with_capacity(opp.len() + 1);
    for &j in opp {
        let mut row: Vec<Rational> = own.iter().map(|&i| payoff(i, j)).collect();
        row.push(-Rational::one());
        a.push(row);
        b.push(Rational::zero());
    }
    let mut sum_row = vec![Rational::one(); own.len()];
    sum_row.push(Rational::zero());
    a.push(sum_row);
    b.push(Rational::one());
    let sol = solve_linear_system(&a, &b)?;
    if sol[..own.len()].iter().any(Signed::is_negative) {
        return None;
    }
    let mut mix = vec![Rational::zero(); own_len];
    for (k, &i) in own.iter().enumerate() {
        mix[i] = sol[k].clone();
    }
    Some((mix, sol[own.len()].clone()))
}

/// All Nash equilibria of a two-player game reachable by support enumeration.
///
/// Support pairs whose indifference systems have no unique solution are
/// skipped, so degenerate games yield representatives rather than whole
/// equilibrium components.
pub fn bimatrix_mixed_nash(game: &StrategicGame) -> Result<Vec<ProfileDistribution>, SolveError> {
    if game.num_players() != 2 {
        return Err(SolveError::Unsupported(format!(
            "support enumeration needs exactly 2 players, game has {}",
            game.num_players()
        )));
    }
    let (m, n) = (game.num_actions(0), game.num_actions(1));
    if m > MAX_SUPPORT_ACTIONS || n > MAX_SUPPORT_ACTIONS {
        return Err(SolveError::Unsupported(format!(
            "support enumeration is limited to {MAX_SUPPORT_ACTIONS} actions per player"
        )));
    }
    let u = |p: usize, i: usize, j: usize| game.payoff(&ActionProfile(vec![i, j]), p).clone();
    let mut found: Vec<ProfileDistribution> = Vec::new();
    for rows in subsets(m) {
        for cols in subsets(n) {
            // Row mixture keeps the column player indifferent on `cols`, and vice versa.
            let Some((x, w)) = indifference(&rows, m, &cols, |i, j| u(1, i, j)) else {
                continue;
            };
            let Some((y, v)) = indifference(&cols, n, &rows, |j, i| u(0, i, j)) else {
                continue;
            };
            let row_ok = (0..m).all(|i| {
                let val = (0..n).fold(Rational::zero(), |acc, j| acc + &y[j] * u(0, i, j));
                val <= v
            });
            let col_ok = (0..n).all(|j| {
                let val = (0..m).fold(Rational::zero(), |acc, i| acc + &x[i] * u(1, i, j));
                val <= w
            });
            if !(row_ok && col_ok) {
                continue;
            }
            let d = ProfileDistribution::product(&[x, y])?;
            if !found.contains(&d) {
                let report = verify_equilibrium(game, &d, Concept::Nash, &Tolerance::exact())?;
                if !report.accepted {
                    return Err(SolveError::Certification(
                        "support enumeration produced a non-equilibrium".into(),
                    ));
                }
                found.push(d);
            }
        }
    }
    Ok(found)
}

/// The Nash equilibrium worst for `target` among pure and mixed equilibria for
/// two players, or among pure equilibria otherwise.
pub fn worst_nash_for(game: &StrategicGame, target: PlayerId) -> Result<PunishmentSpec, SolveError> {
    if target >= game.num_players() {
        return Err(GameError::UnknownPlayer(target).into());
    }
    let pure_only = game.num_players() != 2;
    let candidates = if pure_only {
        enumerate_pure_nash(game)
            .into_iter()
            .map(ProfileDistribution::point)
            .collect()
    } else {
        bimatrix_mixed_nash(game)?
    };
    let mut best: Option<(ProfileDistribution, Rational)> = None;
    for d in candidates {
        let v = expected_utility(game, &d)?[target].clone();
        if best.as_ref().map_or(true, |(_, bv)| v < *bv) {
            best = Some((d, v));
        }
    }
    let (strategy, value) = best.ok_or_else(|| {
        SolveError::NotFound(if pure_only {
            format!(
                "no pure Nash equilibrium exists and mixed search is limited to two players ({} players here)",
                game.num_players()
            )
        } else {
            "support enumeration found no equilibrium".into()
        })
    })?;
    Ok(PunishmentSpec {
        target,
        mode: PunishmentMode::WorstNash,
        strategy,
        value,
        pure_only,
        correlated_punishers: false,
    })
}
