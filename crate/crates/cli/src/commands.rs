use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use blinded_core::blinded::{check_super_equivalence, BlindedGame};
use blinded_core::crypto::{pke_gen, SkeInstance};
use blinded_core::extensive::{build_cheaptalk_abstraction, verify_etf_ne, AbstractionProtocol};
use blinded_core::game::io::{fmt_rational, write_distribution, write_game};
use blinded_core::manifest::RunManifest;
use blinded_core::solve::{bimatrix_mixed_nash, enumerate_pure_nash, punishment, solve_lp_equilibrium, PunishmentMode};
use blinded_core::{expected_utility, trial_rng, verify_equilibrium, Concept, Rational, Tolerance};

use crate::input::{self, GameArgs};
use crate::Report;

fn payoff_line(values: &[Rational]) -> String {
    let parts: Vec<String> = values.iter().map(fmt_rational).collect();
    format!("expected payoffs ({})\n", parts.join(", "))
}

pub fn verify(args: &GameArgs, concept: Concept, eps: Rational) -> Result<Report> {
    let input = args.load()?;
    let dist = input.require_dist()?;
    let report = verify_equilibrium(&input.game, dist, concept, &Tolerance::new(eps))?;
    let manifest = input.record(RunManifest::new(format!("verify {concept}")));
    let mut body = report.render(&input.game);
    body.push_str(&payoff_line(&expected_utility(&input.game, dist)?));
    Ok(Report::new(manifest, body, report.accepted))
}

pub fn solve(args: &GameArgs, concept: Concept, weights: Option<Vec<Rational>>, out: Option<PathBuf>) -> Result<Report> {
    let input = args.load()?;
    let g = &input.game;
    let w = weights.unwrap_or_else(|| vec![Rational::from_integer(1.into()); g.num_players()]);
    anyhow::ensure!(w.len() == g.num_players(), "expected {} weights, got {}", g.num_players(), w.len());
    let dist = solve_lp_equilibrium(g, concept, &w)?;
    let check = verify_equilibrium(g, &dist, concept, &Tolerance::exact())?;
    let text = write_distribution(g, &dist);
    let mut manifest = input.record(RunManifest::new(format!("solve {concept}")));
    if let Some(path) = &out {
        fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
        manifest = manifest.output(path.display().to_string());
    }
    let mut body = format!("optimal {concept} for weights ({})\n", w.iter().map(fmt_rational).collect::<Vec<_>>().join(", "));
    body.push_str(&text);
    body.push_str(&payoff_line(&expected_utility(g, &dist)?));
    body.push_str(&check.render(g));
    Ok(Report::new(manifest, body, check.accepted))
}

pub fn nash(args: &GameArgs) -> Result<Report> {
    let input = args.load()?;
    let g = &input.game;
    let mut body = String::new();
    let pure = enumerate_pure_nash(g);
    writeln!(body, "pure equilibria: {}", pure.len())?;
    for p in &pure {
        writeln!(body, "  {} payoffs ({})", g.format_profile(p), g.payoffs(p).iter().map(fmt_rational).collect::<Vec<_>>().join(", "))?;
    }
    if g.num_players() == 2 {
        let mixed = bimatrix_mixed_nash(g)?;
        writeln!(body, "all equilibria by support enumeration: {}", mixed.len())?;
        for d in &mixed {
            body.push_str("---\n");
            body.push_str(&write_distribution(g, d));
            body.push_str(&payoff_line(&expected_utility(g, d)?));
        }
    }
    Ok(Report::new(input.record(RunManifest::new("nash")), body, true))
}

pub fn punish(args: &GameArgs, target: Option<usize>, mode: PunishmentMode) -> Result<Report> {
    let input = args.load()?;
    let g = &input.game;
    let targets = match target {
        Some(t) => vec![input::player(g, t)?],
        None => (0..g.num_players()).collect(),
    };
    let mut body = String::new();
    for t in targets {
        let spec = punishment(g, t, mode)?;
        writeln!(body, "target player {} mode {} value {}", t + 1, spec.mode, fmt_rational(&spec.value))?;
        if spec.pure_only {
            body.push_str("note: restricted to pure equilibria\n");
        }
        if spec.correlated_punishers {
            body.push_str("note: punishers correlate\n");
        }
        body.push_str(&write_distribution(g, &spec.strategy));
    }
    Ok(Report::new(input.record(RunManifest::new(format!("punish {mode}"))), body, true))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum BlindScheme {
    Ske,
    Pke,
}

pub fn blind(args: &GameArgs, scheme: BlindScheme, seed: u64, modulus: u64, k: u32, reveal: bool) -> Result<Report> {
    let input = args.load()?;
    let g = &input.game;
    let mut rng = trial_rng(seed, 0);
    let b = match scheme {
        BlindScheme::Ske => BlindedGame::blind_ske(g, SkeInstance::generate(modulus, g.num_players(), &mut rng)?)?,
        BlindScheme::Pke => BlindedGame::blind_pke(g, pke_gen(k, &mut rng)?, seed)?,
    };
    let se = check_super_equivalence(&b);
    let mut body = b.dump(reveal);
    writeln!(body, "super-equivalence {}", if se.accepted { "PASS" } else { "FAIL" })?;
    writeln!(body, "blinded profiles {}", b.game().profile_count())?;
    let manifest = input.record(RunManifest::new(format!("blind {scheme:?}").to_lowercase()).seed(seed));
    Ok(Report::new(manifest, body, se.accepted))
}

pub fn threat(args: &GameArgs, protocol: AbstractionProtocol) -> Result<Report> {
    let input = args.load()?;
    let g = &input.game;
    let alpha = input.require_dist()?;
    let specs = (0..g.num_players())
        .map(|t| punishment(g, t, protocol.punishment_mode()))
        .collect::<Result<Vec<_>, _>>()?;
    let (tree, sigma) = build_cheaptalk_abstraction(g, alpha, &specs, protocol)?;
    let rep = verify_etf_ne(&tree, &sigma, &Rational::from_integer(0.into()))?;
    let mut body = format!("follow/abort abstraction of {protocol}\n");
    body.push_str(&tree.dump(Some(&sigma)));
    body.push_str(&rep.render(&tree));
    let manifest = input.record(RunManifest::new(format!("threat {protocol}")));
    Ok(Report::new(manifest, body, rep.accepted))
}

pub fn fixture(name: Option<&str>, game_out: Option<PathBuf>, dist_out: Option<PathBuf>) -> Result<Report> {
    let Some(name) = name else {
        let body = blinded_core::fixtures::NAMES.iter().map(|n| format!("{n}\n")).collect();
        return Ok(Report::new(RunManifest::new("fixture"), body, true));
    };
    let (g, d) = input::fixture(name)?;
    let (gt, dt) = (write_game(&g), write_distribution(&g, &d));
    let mut manifest = RunManifest::new(format!("fixture {name}")).input("game", &gt).input("dist", &dt);
    let mut body = String::new();
    for (path, text) in [(game_out, &gt), (dist_out, &dt)] {
        match path {
            Some(p) => {
                fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?;
                manifest = manifest.output(p.display().to_string());
            }
            None => body.push_str(text),
        }
    }
    Ok(Report::new(manifest, body, true))
}
