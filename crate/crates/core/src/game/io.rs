//! Plain-text formats for games and profile distributions.
//!
//! Game files:
//!
//! ```text
//! # Battle of the Sexes
//! players 2
//! actions B S
//! actions B S
//! B B : 2 5
//! B S : 0 0
//! S B : 0 0
//! S S : 5 2
//! ```
//!
//! Distribution files (the `kind` line is optional and defaults to `joint`):
//!
//! ```text
//! kind joint
//! (B, B): 1/2
//! (S, S): 1/2
//! ```
//!
//! Payoffs and probabilities are integers, fractions `p/q` or finite decimals.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use super::{valid_label, ActionProfile, DistKind, GameError, ProfileDistribution, StrategicGame};
use crate::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

fn err(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        column,
        message: message.into(),
    }
}

/// Whitespace-separated tokens of a line with 1-based starting columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter().map(|(s, t)| (s + 1, t)).collect()
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("")
}

/// Parses `7`, `-3/4` or `0.25` into an exact rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.parse().ok()?;
        let d: BigInt = d.parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    if let Some((int_part, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let neg = int_part.starts_with('-');
        let whole: BigInt = match int_part {
            "" | "-" | "+" => BigInt::zero(),
            _ => int_part.parse().ok()?,
        };
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let f: BigInt = frac.parse().ok()?;
        let mag = Rational::from_integer(whole.magnitude().clone().into())
            + Rational::new(f, scale);
        return Some(if neg { -mag } else { mag });
    }
    s.parse::<BigInt>().ok().map(Rational::from_integer)
}

/// Formats a rational as `n` or `n/d`.
pub fn fmt_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses a game file.
pub fn parse_game(text: &str) -> Result<StrategicGame, ParseError> {
    let mut players: Option<usize> = None;
    let mut labels: Vec<Vec<String>> = Vec::new();
    let mut rows: HashMap<Vec<usize>, (usize, Vec<Rational>)> = HashMap::new();
    let mut last_line = 0;

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        last_line = lineno;
        let line = strip_comment(raw);
        let toks = tokens(line);
        let Some(&(col, head)) = toks.first() else {
            continue;
        };
        match head {
            "players" => {
                if players.is_some() {
                    return Err(err(lineno, col, "duplicate `players` line"));
                }
                let (c, v) = toks
                    .get(1)
                    .copied()
                    .ok_or_else(|| err(lineno, col, "expected player count"))?;
                let n: usize = v
                    .parse()
                    .map_err(|_| err(lineno, c, format!("invalid player count `{v}`")))?;
                if n == 0 {
                    return Err(err(lineno, c, "player count must be positive"));
                }
                if toks.len() > 2 {
                    return Err(err(lineno, toks[2].0, "unexpected token"));
                }
                players = Some(n);
            }
            "actions" => {
                let n = players.ok_or_else(|| err(lineno, col, "`actions` before `players`"))?;
                if labels.len() == n {
                    return Err(err(lineno, col, "more `actions` lines than players"));
                }
                if toks.len() < 2 {
                    return Err(err(lineno, col, "empty action set"));
                }
                let mut set: Vec<String> = Vec::new();
                for &(c, t) in &toks[1..] {
                    if !valid_label(t) {
                        return Err(err(lineno, c, format!("invalid action label `{t}`")));
                    }
                    if set.iter().any(|s| s == t) {
                        return Err(err(lineno, c, format!("duplicate action label `{t}`")));
                    }
                    set.push(t.to_string());
                }
                labels.push(set);
            }
            _ => {
                let n = players.ok_or_else(|| err(lineno, col, "payoff row before `players`"))?;
                if labels.len() != n {
                    return Err(err(lineno, col, "payoff row before all `actions` lines"));
                }
                let (lhs, rhs, rhs_offset) = match line.find(':') {
                    Some(i) => (&line[..i], &line[i + 1..], i + 1),
                    None => return Err(err(lineno, col, "expected `:` in payoff row")),
                };
                let lt = tokens(lhs);
                if lt.len() != n {
                    return Err(err(
                        lineno,
                        col,
                        format!("expected {n} action labels, found {}", lt.len()),
                    ));
                }
                let mut profile = Vec::with_capacity(n);
                for (p, &(c, t)) in lt.iter().enumerate() {
                    let a = labels[p].iter().position(|l| l == t).ok_or_else(|| {
                        err(lineno, c, format!("unknown action `{t}` for player {}", p + 1))
                    })?;
                    profile.push(a);
                }
                let rt = tokens(rhs);
                if rt.len() != n {
                    return Err(err(
                        lineno,
                        rhs_offset + 1,
                        format!("expected {n} payoffs, found {}", rt.len()),
                    ));
                }
                let mut us = Vec::with_capacity(n);
                for &(c, t) in &rt {
                    us.push(parse_rational(t).ok_or_else(|| {
                        err(lineno, rhs_offset + c, format!("invalid number `{t}`"))
                    })?);
                }
                if let Some((prev, _)) = rows.get(&profile) {
                    return Err(err(
                        lineno,
                        col,
                        format!("profile already given on line {prev}"),
                    ));
                }
                rows.insert(profile, (lineno, us));
            }
        }
    }

    let n = players.ok_or_else(|| err(last_line.max(1), 1, "missing `players` line"))?;
    if labels.len() != n {
        return Err(err(
            last_line.max(1),
            1,
            format!("expected {n} `actions` lines, found {}", labels.len()),
        ));
    }
    let sizes: Vec<usize> = labels.iter().map(Vec::len).collect();
    let mut payoffs = Vec::with_capacity(rows.len());
    for p in super::ProfileIter::new(sizes) {
        match rows.remove(&p.0) {
            Some((_, us)) => payoffs.push(us),
            None => {
                let names: Vec<&str> = p
                    .0
                    .iter()
                    .enumerate()
                    .map(|(i, &a)| labels[i][a].as_str())
                    .collect();
                return Err(err(
                    last_line.max(1),
                    1,
                    format!("payoff table is not total: missing profile {}", names.join(" ")),
                ));
            }
        }
    }
    StrategicGame::new(labels, payoffs).map_err(|e| err(1, 1, e.to_string()))
}

/// Writes a game in the canonical text format.
pub fn write_game(game: &StrategicGame) -> String {
    let mut s = format!("players {}\n", game.num_players());
    for p in 0..game.num_players() {
        s.push_str("actions ");
        s.push_str(&game.labels(p).join(" "));
        s.push('\n');
    }
    for prof in game.profiles() {
        let names: Vec<&str> = prof
            .0
            .iter()
            .enumerate()
            .map(|(i, &a)| game.action_label(i, a))
            .collect();
        let us: Vec<String> = game.payoffs(&prof).iter().map(fmt_rational).collect();
        s.push_str(&format!("{} : {}\n", names.join(" "), us.join(" ")));
    }
    s
}

#[derive(Debug, Error)]
pub enum DistParseError {
    #[error(transparent)]
    Syntax(#[from] ParseError),
    #[error("invalid distribution: {0}")]
    Invalid(GameError),
}

// Not `#[from]`: that would also make the error its own source and print twice.
impl From<GameError> for DistParseError {
    fn from(e: GameError) -> Self {
        DistParseError::Invalid(e)
    }
}

/// Parses a distribution file against the action labels of `game`.
pub fn parse_distribution(
    game: &StrategicGame,
    text: &str,
) -> Result<ProfileDistribution, DistParseError> {
    let n = game.num_players();
    let mut kind = DistKind::Joint;
    let mut entries = Vec::new();
    let mut seen_entry = false;
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = strip_comment(raw);
        let toks = tokens(line);
        let Some(&(col, head)) = toks.first() else {
            continue;
        };
        if head == "kind" {
            if seen_entry {
                return Err(err(lineno, col, "`kind` must precede entries").into());
            }
            kind = match toks.get(1).map(|t| t.1) {
                Some("joint") => DistKind::Joint,
                Some("product") => DistKind::Product,
                _ => {
                    return Err(err(lineno, col, "expected `kind joint` or `kind product`").into())
                }
            };
            continue;
        }
        seen_entry = true;
        let open = line
            .find('(')
            .ok_or_else(|| err(lineno, col, "expected `(` starting a profile"))?;
        let close = line
            .find(')')
            .ok_or_else(|| err(lineno, open + 1, "unclosed `(`"))?;
        let inner = &line[open + 1..close];
        let parts: Vec<&str> = inner.split(',').collect();
        if parts.len() != n {
            return Err(err(
                lineno,
                open + 1,
                format!("expected {n} action labels, found {}", parts.len()),
            )
            .into());
        }
        let mut profile = Vec::with_capacity(n);
        let mut offset = open + 1;
        for (p, part) in parts.iter().enumerate() {
            let label = part.trim();
            let c = offset + part.find(label).unwrap_or(0) + 1;
            let a = game.action_index(p, label).ok_or_else(|| {
                err(lineno, c, format!("unknown action `{label}` for player {}", p + 1))
            })?;
            profile.push(a);
            offset += part.len() + 1;
        }
        let rest = &line[close + 1..];
        let rest_trim = rest.trim_start();
        let colon_col = close + 2 + (rest.len() - rest_trim.len());
        let value = rest_trim
            .strip_prefix(':')
            .ok_or_else(|| err(lineno, colon_col, "expected `:` after profile"))?;
        let vt = tokens(value);
        if vt.len() != 1 {
            return Err(err(lineno, colon_col, "expected exactly one probability").into());
        }
        let (vc, v) = vt[0];
        let w = parse_rational(v)
            .ok_or_else(|| err(lineno, colon_col + vc, format!("invalid number `{v}`")))?;
        entries.push((ActionProfile(profile), w));
    }
    Ok(ProfileDistribution::with_kind(entries, kind)?)
}

/// Writes a distribution in the canonical text format.
pub fn write_distribution(game: &StrategicGame, dist: &ProfileDistribution) -> String {
    let mut s = String::from(match dist.kind() {
        DistKind::Joint => "kind joint\n",
        DistKind::Product => "kind product\n",
    });
    for (p, w) in dist.support() {
        s.push_str(&format!("{}: {}\n", game.format_profile(p), fmt_rational(w)));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{fixtures, int, ratio};

    const BOS: &str = "# bos\nplayers 2\nactions B S\nactions B S\nB B : 2 5\nB S : 0 0\nS B : 0 0\nS S : 5 2\n";

    #[test]
    fn game_roundtrip() {
        let g = parse_game(BOS).unwrap();
        assert_eq!(g, fixtures::battle_of_sexes());
        assert_eq!(parse_game(&write_game(&g)).unwrap(), g);
    }

    #[test]
    fn non_total_table_rejected() {
        let text = BOS.replace("S S : 5 2\n", "");
        let e = parse_game(&text).unwrap_err();
        assert!(e.message.contains("not total"), "{e}");
    }

    #[test]
    fn error_positions() {
        let text = BOS.replace("B S : 0 0", "B S : 0 x");
        let e = parse_game(&text).unwrap_err();
        assert_eq!((e.line, e.column), (6, 9));
        let text = BOS.replace("S B : 0 0", "S Q : 0 0");
        let e = parse_game(&text).unwrap_err();
        assert_eq!((e.line, e.column), (7, 3));
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("-3/4"), Some(ratio(-3, 4)));
        assert_eq!(parse_rational("0.25"), Some(ratio(1, 4)));
        assert_eq!(parse_rational("-1.5"), Some(ratio(-3, 2)));
        assert_eq!(parse_rational("12"), Some(int(12)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
    }

    #[test]
    fn distribution_roundtrip() {
        let g = fixtures::battle_of_sexes();
        let d = parse_distribution(&g, "(B, B): 1/2\n(S, S): 1/2\n").unwrap();
        assert_eq!(d, fixtures::bos_alpha());
        assert_eq!(parse_distribution(&g, &write_distribution(&g, &d)).unwrap(), d);
    }

    #[test]
    fn distribution_must_sum_to_one() {
        let g = fixtures::battle_of_sexes();
        let e = parse_distribution(&g, "(B, B): 1/2\n(S, S): 1/3\n").unwrap_err();
        assert!(matches!(e, DistParseError::Invalid(GameError::NotNormalized(_))));
        let e = parse_distribution(&g, "(B, X): 1\n").unwrap_err();
        match e {
            DistParseError::Syntax(p) => assert_eq!((p.line, p.column), (1, 5)),
            other => panic!("{other}"),
        }
    }
}
