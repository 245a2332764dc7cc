use blinded_core::sim::{
    deviation_harness, run_protocol, DeviationClass, DeviationHook, Honest, Mode, ProtocolConfig, ProtocolId,
    StrategyHook, Transform, Visibility,
};
use blinded_core::{fixtures, ratio, Rational};
use num_traits::Zero;

fn config(protocol: ProtocolId, fixture: &str) -> ProtocolConfig {
    let (g, a) = fixtures::by_name(fixture).unwrap();
    ProtocolConfig::new(protocol, g, a).unwrap()
}

#[test]
fn same_seed_same_digest() {
    let mut c = config(ProtocolId::P1, "gstar3");
    c.trials = 300;
    c.seed = 17;
    c.keep_transcript = true;
    let dev = DeviationHook::new(0, DeviationClass::Malleate(Transform::FlipByte(24)));
    let hooks: [&dyn StrategyHook; 3] = [&dev, &Honest, &Honest];
    let a = run_protocol(&c, &hooks).unwrap();
    let b = run_protocol(&c, &hooks).unwrap();
    c.parallel = true;
    let par = run_protocol(&c, &hooks).unwrap();
    assert_eq!(a.transcript.digest(), b.transcript.digest());
    assert_eq!(a.transcript.text(), par.transcript.text());
    c.seed = 18;
    assert_ne!(run_protocol(&c, &hooks).unwrap().transcript.digest(), a.transcript.digest());
}

#[test]
fn pairwise_messages_reach_only_endpoints() {
    let mut c = config(ProtocolId::P3, "gstar4");
    c.keep_transcript = true;
    let dev = DeviationHook::new(2, DeviationClass::WithholdShare);
    let r = run_protocol(&c, &[&Honest, &Honest, &dev, &Honest]).unwrap();
    let mut seen = 0;
    for (vis, event) in r.transcript.events() {
        if !event.starts_with("msg ") {
            continue;
        }
        assert!(event.contains("chan=pairwise"), "{event}");
        let mut ends: Vec<String> = event
            .split_whitespace()
            .filter_map(|t| t.strip_prefix("from=").or_else(|| t.strip_prefix("to=")))
            .filter(|p| p.starts_with('p') && p[1..].parse::<usize>().is_ok())
            .map(str::to_string)
            .collect();
        ends.sort();
        assert_eq!(vis.to_string(), ends.join("+"), "{event}");
        assert_ne!(vis, Visibility::All);
        seen += 1;
    }
    assert!(seen >= 4 * 4, "{seen} messages");
}

/// Number of non-honest hooks decides whether an abort can stop delivery.
fn check_delivery(c: &ProtocolConfig, hooks: &[&dyn StrategyHook]) -> usize {
    let t = hooks.iter().filter(|h| !h.is_honest()).count();
    let n = hooks.len();
    let r = run_protocol(c, hooks).unwrap();
    let mut aborts = 0;
    for (_, e) in r.transcript.events() {
        if e.starts_with("mpc-abort by=") {
            let effective = e.ends_with("effective=true");
            assert_eq!(effective, 2 * t >= n, "{e}");
            aborts += 1;
        }
    }
    aborts
}

#[test]
fn delivery_rule_matches_corruption_count() {
    let abort = |i| DeviationHook::new(i, DeviationClass::AbortAtMpc);
    let (a0, a1) = (abort(0), abort(1));

    let mut p1 = config(ProtocolId::P1, "gstar3");
    p1.mode = Mode::Exact;
    p1.keep_transcript = true;
    assert!(check_delivery(&p1, &[&a0, &Honest, &Honest]) > 0);
    assert!(check_delivery(&p1, &[&a0, &a1, &Honest]) > 0);
    // One aborter of three changes nothing for anyone.
    let r = run_protocol(&p1, &[&a0, &Honest, &Honest]).unwrap();
    assert_eq!(r.outcome, fixtures::g_star_3_alpha().into_joint());
    assert!(r.punishment_rate.is_zero());

    let mut p2 = config(ProtocolId::P2, "bos");
    p2.mode = Mode::Exact;
    p2.keep_transcript = true;
    assert!(check_delivery(&p2, &[&a0, &Honest]) > 0);
    let r = run_protocol(&p2, &[&a0, &Honest]).unwrap();
    assert_eq!(r.punishment_rate, Rational::from_integer(1.into()));

    let mut p3 = config(ProtocolId::P3, "gstar4");
    p3.keep_transcript = true;
    assert!(check_delivery(&p3, &[&a0, &Honest, &Honest, &Honest]) > 0);
}

/// Row payoffs of the fixture game, own action first.
const ROW: [[i64; 3]; 3] = [[0, -1, 0], [101, -1, -1], [-1, 101, 0]];

/// Player 1's value when the advice ciphertext is transformed, averaged over
/// the device and every key of the affine cipher.
fn malleation_oracle(p: u64, t: impl Fn(u64) -> u64) -> Rational {
    let inv = |a: u64| (1..p).find(|x| a * x % p == 1).unwrap();
    let mut total = Rational::zero();
    let w = ratio(1, 2 * (p * (p - 1)) as i64);
    for (m, y) in [(0u64, 1usize), (1, 0)] {
        for a in 1..p {
            for b in 0..p {
                let c = (a * m + b) % p;
                let m2 = ((t(c) + p - b) % p) * inv(a) % p;
                let v = if m2 < 3 {
                    Rational::from_integer(ROW[m2 as usize][y].into())
                } else {
                    ratio((0..3).map(|x| ROW[x][y]).sum(), 3)
                };
                total += &w * v;
            }
        }
    }
    total
}

#[test]
fn malleated_advice_matches_oracle() {
    let c = config(ProtocolId::P3, "gstar4");
    let p = c.modulus;
    assert_eq!(p, 5);
    for d in 1..p {
        let r = deviation_harness(&c, 0, DeviationClass::Malleate(Transform::Add(d))).unwrap();
        assert_eq!(r.deviant, malleation_oracle(p, |x| (x + d) % p));
        assert_eq!(r.baseline, Rational::from_integer(50.into()));
        assert_eq!(r.gain, ratio(-505, 24));
        assert!(r.accepted);
    }
    for l in 2..p {
        let r = deviation_harness(&c, 0, DeviationClass::Malleate(Transform::Mul(l))).unwrap();
        assert_eq!(r.deviant, malleation_oracle(p, |x| x * l % p));
        assert!(r.accepted);
    }
}
