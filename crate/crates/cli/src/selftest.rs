use std::fmt::Write as _;

use anyhow::{bail, Result};
use blinded_core::crypto::experiment::Scheme;
use blinded_core::crypto::{
    exact_nonmalleability_check, exact_secrecy_check, run_security_experiment, Adversary, ExperimentKind, Relation,
    SkeVariant, TOY_BANNER,
};
use blinded_core::field::is_prime;
use blinded_core::manifest::RunManifest;
use blinded_core::sharing::{privacy_check_exhaustive, ShareIndices};

use crate::Report;

pub struct SelftestArgs {
    pub primes: Vec<u64>,
    pub malleable: bool,
    pub trials: u64,
    pub seed: u64,
    pub k: u32,
}

#[derive(Default)]
struct Tally {
    text: String,
    failed: usize,
    total: usize,
}

impl Tally {
    fn check(&mut self, ok: bool, name: impl std::fmt::Display, detail: impl std::fmt::Display) {
        self.total += 1;
        if !ok {
            self.failed += 1;
        }
        let _ = writeln!(self.text, "{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

pub fn run(args: &SelftestArgs) -> Result<Report> {
    for &p in &args.primes {
        if !is_prime(p) {
            bail!("{p} is not prime");
        }
    }
    let mut t = Tally::default();
    let _ = writeln!(t.text, "# {TOY_BANNER}");

    for &p in &args.primes {
        let s = exact_secrecy_check(p, SkeVariant::Affine)?;
        t.check(s.accepted, format_args!("secrecy p={p}"), format_args!("{} keys", s.keys));
        let lib = Relation::library(p);
        let nm = exact_nonmalleability_check(p, SkeVariant::Affine, &lib)?;
        t.check(nm.accepted, format_args!("non-malleability p={p}"), format_args!("{} relations", nm.relations));
        // The checker must also catch the broken variants.
        let fixed = exact_secrecy_check(p, SkeVariant::FixedZeroOffset)?;
        let w = fixed.witness.map(|(m0, m1, c, a, b)| format!("Pr[Enc({m0})={c}]={a} Pr[Enc({m1})={c}]={b}"));
        t.check(!fixed.accepted, format_args!("fixed-offset variant rejected p={p}"), w.unwrap_or_default());
        let add = exact_nonmalleability_check(p, SkeVariant::AdditiveOnly, &lib)?;
        let w = add.witness.as_ref().map(|w| format!("c={} c1={} c2={} {:?}", w.c, w.c1, w.c2, w.relation));
        t.check(!add.accepted, format_args!("additive-only variant rejected p={p}"), w.unwrap_or_default());
    }

    for &p in &args.primes {
        for n in (1..=4usize).filter(|&n| (n as u64) < p) {
            for k in 1..=n {
                let v = privacy_check_exhaustive(k, n, p, ShareIndices::Standard)?;
                t.check(v.accepted, format_args!("shamir privacy k={k} n={n} p={p}"), "exhaustive");
            }
        }
    }

    let exp = |kind, scheme, adv: &Adversary| {
        run_security_experiment(kind, scheme, adv, args.k, args.trials, args.seed, true)
    };
    for adv in [Adversary::RandomGuess, Adversary::ConstantGuess, Adversary::FlipAndQuery] {
        let r = exp(ExperimentKind::Cca, Scheme::Reference, &adv)?;
        let ok = (r.estimate - 0.5).abs() <= r.radius();
        t.check(ok, format_args!("cca {adv} vs reference"), format_args!("{:.4} +- {:.4}", r.estimate, r.radius()));
    }
    let cheat = exp(ExperimentKind::Cca, Scheme::Reference, &Adversary::CheatingQuery)?;
    t.check(cheat.voided == cheat.trials, "cca challenge queries voided", format_args!("{} of {}", cheat.voided, cheat.trials));

    let mut schemes = vec![Scheme::Reference];
    if args.malleable {
        schemes.push(Scheme::Malleable);
    }
    for scheme in schemes {
        let a = exp(ExperimentKind::Nm, scheme, &Adversary::FlipAndRelate)?;
        let b = exp(ExperimentKind::NmDollar, scheme, &Adversary::FlipAndRelate)?;
        let gap = (a.estimate - b.estimate).abs();
        let bound = 3.0 * (a.sigma.powi(2) + b.sigma.powi(2)).sqrt();
        let detail = format!("gap {gap:.4} bound {bound:.4}{}", if gap > bound { " NM GAP" } else { "" });
        t.check(gap <= bound, format_args!("nm flip-and-relate vs {scheme}"), detail);
    }

    let _ = writeln!(t.text, "{} of {} checks passed", t.total - t.failed, t.total);
    let primes: Vec<String> = args.primes.iter().map(u64::to_string).collect();
    let manifest = RunManifest::new(format!(
        "crypto-selftest primes={} trials={} k={}{}",
        primes.join(","),
        args.trials,
        args.k,
        if args.malleable { " malleable" } else { "" }
    ))
    .seed(args.seed);
    Ok(Report::new(manifest, t.text, t.failed == 0))
}
