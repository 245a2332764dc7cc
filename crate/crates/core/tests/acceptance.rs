//! Acceptance gate: one PASS/FAIL line per criterion.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use blinded_core::blinded::{advice_independent, project_distribution, verify_ske_lift_ce, BlindedGame};
use blinded_core::crypto::experiment::Scheme;
use blinded_core::crypto::{
    exact_nonmalleability_check, exact_secrecy_check, run_security_experiment, Adversary, ExperimentKind,
    Relation, SkeInstance, SkeVariant,
};
use blinded_core::extensive::{
    build_cheaptalk_abstraction, detect_empty_threat, verify_etf_ne, verify_tree_nash, AbstractionProtocol,
};
use blinded_core::field::is_prime;
use blinded_core::sharing::{privacy_check_exhaustive, reconstruct, share_with_coefficients, ShareIndices};
use blinded_core::sim::{
    run_library, run_protocol, DeviationClass, DeviationHook, Honest, Mode, ProtocolConfig, ProtocolId,
    StrategyHook, Transform,
};
use blinded_core::solve::{minmax_punishment, punishment, worst_nash_for, PunishmentMode};
use blinded_core::{
    expected_utility, fixtures, int, ratio, verify_equilibrium, Concept, Tolerance,
};
use common::trees::*;
use common::{all_profiles, hierarchy_suite, rng};
use num_traits::ToPrimitive;
use rand::Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn c1_hierarchy() -> Outcome {
    let start = Instant::now();
    let out = hierarchy_suite();
    let secs = start.elapsed().as_secs_f64();
    ensure(out.mismatches.is_empty(), format!("{} oracle mismatches, first: {:?}", out.mismatches.len(), out.mismatches.first()))?;
    ensure(out.containment_violations == 0, format!("{} containment violations", out.containment_violations))?;
    ensure(secs < 60.0, format!("took {secs:.1}s"))?;
    Ok(format!("{} cases agree with the oracle, {secs:.1}s", out.cases))
}

fn c2_cce_gap() -> Outcome {
    let g = fixtures::g_star();
    let a = fixtures::g_star_alpha();
    let cce = verify_equilibrium(&g, &a, Concept::Cce, &Tolerance::exact()).unwrap();
    let ce = verify_equilibrium(&g, &a, Concept::Ce, &Tolerance::exact()).unwrap();
    ensure(cce.accepted, "not a CCE")?;
    ensure(!ce.accepted, "accepted as CE")?;
    let w = ce.violator().and_then(|v| v.witness());
    let (adv, dev) = w.ok_or("no witness")?;
    let advice = g.action_label(0, adv.ok_or("witness lacks advice")?);
    let deviation = g.action_label(0, dev);
    // Told A, the opponent plays B; C earns 101 against B.
    ensure(advice == "A" && deviation == "C", format!("witness {advice}->{deviation}"))?;
    let eu = expected_utility(&g, &a).unwrap();
    ensure(eu == vec![int(50), int(50)], format!("payoffs {eu:?}"))?;
    Ok(format!("CCE yes, CE no (advice {advice} -> {deviation}), payoff (50, 50)"))
}

fn c3_bos() -> Outcome {
    let g = fixtures::battle_of_sexes();
    let a = fixtures::bos_alpha();
    ensure(verify_equilibrium(&g, &a, Concept::Ce, &Tolerance::exact()).unwrap().accepted, "not a CE")?;
    ensure(expected_utility(&g, &a).unwrap() == vec![ratio(7, 2), ratio(7, 2)], "payoffs")?;
    for t in 0..2 {
        ensure(worst_nash_for(&g, t).unwrap().value == ratio(10, 7), format!("worst nash p{}", t + 1))?;
        ensure(minmax_punishment(&g, t).unwrap().value == ratio(10, 7), format!("minmax p{}", t + 1))?;
    }
    Ok("CE, payoffs (7/2, 7/2), worst-Nash 10/7, minmax 10/7".into())
}

fn c4_ske() -> Outcome {
    let primes: Vec<u64> = (3..=31).filter(|&p| is_prime(p)).collect();
    for &p in &primes {
        ensure(exact_secrecy_check(p, SkeVariant::Affine).unwrap().accepted, format!("secrecy p={p}"))?;
        let nm = exact_nonmalleability_check(p, SkeVariant::Affine, &Relation::library(p)).unwrap();
        ensure(nm.accepted, format!("nm p={p}"))?;
        let fixed = exact_secrecy_check(p, SkeVariant::FixedZeroOffset).unwrap();
        ensure(!fixed.accepted && fixed.witness.is_some(), format!("fixed-b accepted p={p}"))?;
        let add = exact_nonmalleability_check(p, SkeVariant::AdditiveOnly, &Relation::library(p)).unwrap();
        ensure(!add.accepted && add.witness.is_some(), format!("additive-only accepted p={p}"))?;
    }
    Ok(format!("affine passes for {} primes, both broken variants rejected with witnesses", primes.len()))
}

fn c5_experiments() -> Outcome {
    let run = |kind, scheme, adv: &Adversary| run_security_experiment(kind, scheme, adv, 16, 10_000, 2024, true).unwrap();
    let adv = Adversary::FlipAndRelate;
    let gap = |scheme| {
        let a = run(ExperimentKind::Nm, scheme, &adv);
        let b = run(ExperimentKind::NmDollar, scheme, &adv);
        ((a.estimate - b.estimate).abs(), (a.sigma.powi(2) + b.sigma.powi(2)).sqrt())
    };
    let (mg, _) = gap(Scheme::Malleable);
    ensure(mg >= 0.9, format!("malleable gap {mg:.4}"))?;
    let (rg, rs) = gap(Scheme::Reference);
    ensure(rg <= 3.0 * rs, format!("reference gap {rg:.4} > 3 sigma {:.4}", 3.0 * rs))?;
    let cca = run(ExperimentKind::Cca, Scheme::Reference, &Adversary::RandomGuess);
    ensure((cca.estimate - 0.5).abs() <= cca.radius(), format!("random guess {:.4}", cca.estimate))?;
    Ok(format!(
        "malleable gap {mg:.4}, reference gap {rg:.4} (3 sigma {:.4}), random-guess CCA {:.4} +- {:.4}",
        3.0 * rs,
        cca.estimate,
        cca.radius()
    ))
}

fn c6_shamir() -> Outcome {
    let mut configs = 0;
    for p in (2..=13).filter(|&p| is_prime(p)) {
        for n in (1..=4usize).filter(|&n| (n as u64) < p) {
            for k in 1..=n {
                configs += 1;
                for secret in 0..p {
                    for coeffs in all_profiles(&vec![p as usize; k - 1]) {
                        let c: Vec<u64> = coeffs.into_iter().map(|x| x as u64).collect();
                        let shares = share_with_coefficients(secret, &c, n, p).unwrap();
                        for mask in 1u32..(1 << n) {
                            let sub: Vec<_> = (0..n).filter(|j| mask & (1 << j) != 0).map(|j| shares[j]).collect();
                            if sub.len() >= k {
                                ensure(reconstruct(&sub, k).unwrap() == Some(secret), format!("p={p} n={n} k={k}"))?;
                            }
                        }
                    }
                }
                ensure(
                    privacy_check_exhaustive(k, n, p, ShareIndices::Standard).unwrap().accepted,
                    format!("privacy p={p} n={n} k={k}"),
                )?;
            }
        }
    }
    Ok(format!("correctness and privacy hold for {configs} (p, N, k) configurations"))
}

fn c7_lemmas() -> Outcome {
    let g = fixtures::g_star();
    let a = fixtures::g_star_alpha();
    let eu = expected_utility(&g, &a).unwrap();
    for p in [3, 5, 7] {
        let rep = verify_ske_lift_ce(&g, &a, p).unwrap();
        ensure(rep.accepted && advice_independent(&rep), format!("lift not CE at p={p}"))?;
    }
    let mut r = rng(77);
    for p in [3, 5, 7] {
        let b = BlindedGame::blind_ske(&g, SkeInstance::generate(p, 2, &mut r).unwrap()).unwrap();
        let lifted = b.lift_exact(&a).unwrap();
        ensure(
            verify_equilibrium(b.game(), &lifted, Concept::Cce, &Tolerance::exact()).unwrap().accepted,
            "lift not a CCE of the blinded game",
        )?;
        let down = project_distribution(b.renaming(), &lifted).unwrap();
        ensure(down == a.clone().into_joint(), "projection differs from the device")?;
        ensure(expected_utility(b.game(), &lifted).unwrap() == eu, "payoffs differ")?;
    }
    Ok("SKE lift is a CE for p in {3, 5, 7}; projection and payoffs exact".into())
}

fn library_ok(cfg: &ProtocolConfig, players: &[usize]) -> Result<usize, String> {
    let mut count = 0;
    for &i in players {
        for rep in run_library(cfg, i).map_err(|e| e.to_string())? {
            count += 1;
            ensure(
                rep.accepted,
                format!("{} p{} {} gain {} radius {:.4}", cfg.protocol(), i + 1, rep.class, rep.gain, rep.radius),
            )?;
        }
    }
    Ok(count)
}

fn honest_ok(cfg: &ProtocolConfig) -> Result<(), String> {
    let hooks: Vec<&dyn StrategyHook> = vec![&Honest; cfg.game().num_players()];
    let run = run_protocol(cfg, &hooks).map_err(|e| e.to_string())?;
    let eu = expected_utility(cfg.game(), cfg.alpha()).unwrap();
    for i in 0..eu.len() {
        let diff = (&run.expected[i] - &eu[i]).to_f64().unwrap().abs();
        let ok = match cfg.mode {
            Mode::Exact => run.expected[i] == eu[i],
            Mode::MonteCarlo => diff <= run.radius(i),
        };
        ensure(ok, format!("{} honest p{} off by {diff}", cfg.protocol(), i + 1))?;
    }
    Ok(())
}

fn c8_protocols() -> Outcome {
    let cfg = |p, name: &str| {
        let (g, a) = fixtures::by_name(name).unwrap();
        let mut c = ProtocolConfig::new(p, g, a).unwrap();
        c.seed = 8;
        c.parallel = true;
        c
    };
    let p1 = cfg(ProtocolId::P1, "gstar3");
    let p2 = cfg(ProtocolId::P2, "bos");
    let p2g = cfg(ProtocolId::P2, "gstar");
    let p3 = cfg(ProtocolId::P3, "gstar4");
    ensure(p1.trials >= 10_000 && p2.trials >= 10_000, "too few trials")?;
    ensure(p3.mode == Mode::Exact, "p3 not exact")?;
    let mut classes = 0;
    for c in [&p1, &p2, &p2g, &p3] {
        honest_ok(c)?;
    }
    classes += library_ok(&p1, &[0, 1])?;
    classes += library_ok(&p2, &[0, 1])?;
    classes += library_ok(&p2g, &[0, 1])?;
    classes += library_ok(&p3, &[0, 1, 2, 3])?;

    let abort = DeviationHook::new(0, DeviationClass::AbortAtMpc);
    let mut e1 = p1.clone();
    e1.mode = Mode::Exact;
    let r = run_protocol(&e1, &[&abort, &Honest, &Honest]).unwrap();
    ensure(r.outcome == p1.alpha().clone().into_joint(), "abort in P1 changed the outcome")?;
    let mut e2 = p2.clone();
    e2.mode = Mode::Exact;
    let r = run_protocol(&e2, &[&abort, &Honest]).unwrap();
    ensure(r.punishment_rate == int(1), "abort in P2 not punished")?;
    Ok(format!("{classes} deviation runs within tolerance; honest payoffs match; delivery rule holds"))
}

fn c9_threats() -> Outcome {
    let bos = fixtures::battle_of_sexes();
    let sp = |g, m| (0..2).map(|t| punishment(g, t, m).unwrap()).collect::<Vec<_>>();
    let (t, s) = build_cheaptalk_abstraction(&bos, &fixtures::bos_alpha(), &sp(&bos, PunishmentMode::WorstNash), AbstractionProtocol::P2).unwrap();
    ensure(verify_etf_ne(&t, &s, &int(0)).unwrap().accepted, "P2 abstraction rejected")?;
    let costly = fixtures::costly_punishment();
    let (t, s) = build_cheaptalk_abstraction(
        &costly,
        &fixtures::costly_punishment_alpha(),
        &sp(&costly, PunishmentMode::Minmax),
        AbstractionProtocol::P4,
    )
    .unwrap();
    let rep = verify_etf_ne(&t, &s, &int(0)).unwrap();
    ensure(!rep.accepted, "P4 abstraction accepted")?;
    let w = rep.threats.first().ok_or("no threat reported")?;
    let tau = t.label(t.children(w.node)[w.witness.ok_or("no witness")?]).to_string();

    let mut r = rng(9);
    let mut trees = 0;
    for _ in 0..300 {
        let (nodes, tree) = random_tree(3, 3, &mut r);
        let prof: Vec<usize> = (0..nodes.len()).map(|x| r.gen_range(0..width(&nodes, x).max(1))).collect();
        if let Some(expected) = oracle_nash(&nodes, &prof) {
            let got = verify_tree_nash(&tree, &to_profile(&tree, &prof), &int(0)).unwrap().accepted;
            ensure(got == expected, "tree nash disagrees with oracle")?;
            trees += 1;
        }
        let spe = to_profile(&tree, &backward_induction(&nodes));
        ensure(verify_etf_ne(&tree, &spe, &int(0)).unwrap().accepted, "backward induction profile rejected")?;
    }
    for _ in 0..150 {
        let (nodes, tree) = random_tree(3, 2, &mut r);
        let prof: Vec<usize> = (0..nodes.len()).map(|x| r.gen_range(0..width(&nodes, x).max(1))).collect();
        let sigma = to_profile(&tree, &prof);
        for x in decision_ids(&nodes) {
            ensure(
                detect_empty_threat(&tree, &sigma, x).unwrap().threat == oracle_threat(&nodes, &prof, x),
                "threat check disagrees with oracle",
            )?;
        }
    }
    Ok(format!(
        "P2 accepted; P4 rejected at {} with tau={tau}; {trees} generated trees agree with the oracle",
        t.history_string(w.node)
    ))
}

fn c10_replay() -> Outcome {
    let mut digests = 0;
    for (p, name) in [(ProtocolId::P1, "gstar3"), (ProtocolId::P2, "bos"), (ProtocolId::P3, "gstar4"), (ProtocolId::P4, "bos")] {
        let (g, a) = fixtures::by_name(name).unwrap();
        let mut c = ProtocolConfig::new(p, g, a).unwrap();
        c.trials = 500;
        c.seed = 10;
        let n = c.game().num_players();
        for class in [DeviationClass::AbortAtMpc, DeviationClass::PlayIndependent(1), DeviationClass::Malleate(Transform::Add(1))] {
            let dev = DeviationHook::new(0, class);
            if class.check(&c, 0).is_err() {
                continue;
            }
            let mut hooks: Vec<&dyn StrategyHook> = vec![&Honest; n];
            hooks[0] = &dev;
            c.parallel = false;
            let a = run_protocol(&c, &hooks).unwrap();
            let b = run_protocol(&c, &hooks).unwrap();
            c.parallel = true;
            let par = run_protocol(&c, &hooks).unwrap();
            ensure(
                a.transcript.digest() == b.transcript.digest() && a.transcript.digest() == par.transcript.digest(),
                format!("{p} {class} digests differ"),
            )?;
            digests += 1;
        }
    }
    Ok(format!("{digests} runs replay to identical digests"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("equilibrium hierarchy and verifiers", c1_hierarchy),
        ("CCE/CE gap on G*", c2_cce_gap),
        ("Battle of the Sexes values", c3_bos),
        ("SKE secrecy and non-malleability", c4_ske),
        ("NM/CCA experiment harness", c5_experiments),
        ("Shamir correctness and privacy", c6_shamir),
        ("lift, projection and payoff equivalence", c7_lemmas),
        ("protocol deviations and delivery", c8_protocols),
        ("empty threats", c9_threats),
        ("transcript reproducibility", c10_replay),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
