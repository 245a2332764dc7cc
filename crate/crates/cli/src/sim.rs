use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use blinded_core::game::io::fmt_rational;
use blinded_core::manifest::{sha256_hex, RunManifest};
use blinded_core::sim::{
    deviation_harness, run_protocol, DeviationClass, DeviationHook, DeviationReport, Honest, Mode,
    ProtocolConfig, ProtocolId, StrategyHook,
};
use blinded_core::{expected_utility, Rational, Tolerance};
use clap::Args;
use num_traits::{Signed, ToPrimitive};
use serde::Deserialize;

use crate::input::{self, GameArgs};
use crate::Report;

/// Knobs shared by `simulate` and `attack`; flags override the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub source: GameArgs,
    #[arg(long)]
    pub protocol: Option<ProtocolId>,
    /// Mandatory, here or in the config file
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Enumerate every outcome-relevant branch instead of sampling
    #[arg(long)]
    pub exact: bool,
    /// Run trials on all cores; results are identical either way
    #[arg(long)]
    pub parallel: bool,
    /// PKE security parameter in bits
    #[arg(long)]
    pub security_parameter: Option<u32>,
    /// Field size for secret-key advice
    #[arg(long)]
    pub modulus: Option<u64>,
    #[arg(long, value_parser = input::rational)]
    pub eps: Option<Rational>,
    /// Let the proxy cheat (its proofs then fail to verify)
    #[arg(long)]
    pub tamper_proxy: bool,
}

/// On-disk form of a run configuration. Paths are relative to the file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    protocol: Option<String>,
    fixture: Option<String>,
    game: Option<PathBuf>,
    dist: Option<PathBuf>,
    seed: Option<u64>,
    trials: Option<u64>,
    mode: Option<String>,
    parallel: Option<bool>,
    security_parameter: Option<u32>,
    modulus: Option<u64>,
    epsilon: Option<String>,
    tamper_proxy: Option<bool>,
    max_paths: Option<usize>,
    transcript: Option<PathBuf>,
    deviation: Option<DeviationSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviationSpec {
    /// 1-based.
    player: usize,
    class: String,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let mut c: ConfigFile =
            toml::from_str(&input::read(path)?).with_context(|| format!("parsing {}", path.display()))?;
        let dir = path.parent().unwrap_or(Path::new(""));
        for p in [&mut c.game, &mut c.dist, &mut c.transcript].into_iter().flatten() {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        Ok(c)
    }
}

pub struct Setup {
    pub config: ProtocolConfig,
    pub manifest: RunManifest,
    pub deviation: Option<(usize, String)>,
    pub transcript: Option<PathBuf>,
}

/// Merges file and flags into a validated protocol config.
pub fn setup(command: &str, file: ConfigFile, args: &RunArgs) -> Result<Setup> {
    let mut source = args.source.clone();
    if source.game.is_none() && source.fixture.is_none() {
        source.game = file.game;
        source.fixture = file.fixture;
    }
    if source.dist.is_none() {
        source.dist = file.dist;
    }
    let input = source.load()?;
    let protocol = match (args.protocol, &file.protocol) {
        (Some(p), _) => p,
        (None, Some(s)) => s.parse().map_err(anyhow::Error::msg)?,
        (None, None) => bail!("no protocol given (--protocol or `protocol` in the config)"),
    };
    let Some(seed) = args.seed.or(file.seed) else {
        bail!("a seed is required (--seed or `seed` in the config)");
    };
    let mut c = ProtocolConfig::new(protocol, input.game.clone(), input.require_dist()?.clone())?;
    c.seed = seed;
    if let Some(t) = args.trials.or(file.trials) {
        c.trials = t;
    }
    if args.exact {
        c.mode = Mode::Exact;
    } else if let Some(m) = &file.mode {
        c.mode = m.parse().map_err(anyhow::Error::msg)?;
    }
    c.parallel = args.parallel || file.parallel.unwrap_or(false);
    if let Some(k) = args.security_parameter.or(file.security_parameter) {
        c.security_parameter = k;
    }
    if let Some(p) = args.modulus.or(file.modulus) {
        c.modulus = p;
    }
    if let Some(e) = args.eps.clone() {
        c.tolerance = Tolerance::new(e);
    } else if let Some(e) = &file.epsilon {
        c.tolerance = Tolerance::new(input::rational(e).map_err(anyhow::Error::msg)?);
    }
    c.tamper_proxy = args.tamper_proxy || file.tamper_proxy.unwrap_or(false);
    if let Some(m) = file.max_paths {
        c.max_paths = m;
    }
    c.validate()?;
    let manifest = input.record(RunManifest::new(format!("{command} {protocol}")).config(c.config_hash()).seed(seed));
    Ok(Setup {
        config: c,
        manifest,
        deviation: file.deviation.map(|d| (d.player, d.class)),
        transcript: file.transcript,
    })
}

fn honest_check(config: &ProtocolConfig, run: &blinded_core::sim::RunReport) -> Result<(bool, String)> {
    let eu = expected_utility(config.game(), config.alpha())?;
    let mut ok = true;
    let mut s = String::new();
    for (i, (got, want)) in run.expected.iter().zip(&eu).enumerate() {
        let diff = got - want;
        let pass = match run.mode {
            Mode::Exact => diff == Rational::from_integer(0.into()),
            Mode::MonteCarlo => diff.abs().to_f64().unwrap_or(f64::INFINITY) <= run.radius(i),
        };
        ok &= pass;
        writeln!(s, "player {} expected {} observed {} diff {}", i + 1, fmt_rational(want), fmt_rational(got), fmt_rational(&diff))?;
    }
    writeln!(s, "payoff-equivalence check {}", if ok { "PASS" } else { "FAIL" })?;
    Ok((ok, s))
}

pub fn simulate(setup: Setup, deviation: Option<(usize, String)>, out: Option<PathBuf>) -> Result<Report> {
    let Setup { mut config, mut manifest, .. } = setup;
    let deviation = deviation.or(setup.deviation);
    let out = out.or(setup.transcript);
    let g = config.game().clone();
    let n = g.num_players();
    let dev = match &deviation {
        Some((p, class)) => {
            let i = input::player(&g, *p)?;
            let class = DeviationClass::parse(class, &g, i).map_err(anyhow::Error::msg)?;
            if class == DeviationClass::IgnoreAdviceWorstCase {
                bail!("{class} is a search over independent plays; run it with `attack`");
            }
            class.check(&config, i)?;
            Some(DeviationHook::new(i, class))
        }
        None => None,
    };
    let mut hooks: Vec<&dyn StrategyHook> = vec![&Honest; n];
    if let Some(d) = &dev {
        hooks[d.player] = d;
    }
    config.keep_transcript = out.is_some();
    let run = run_protocol(&config, &hooks)?;
    if let Some(path) = &out {
        fs::write(path, run.transcript.text()).with_context(|| format!("writing {}", path.display()))?;
        manifest = manifest.output(path.display().to_string());
    }
    let mut body = run.render(&g);
    let accepted = match &dev {
        None => {
            let (ok, text) = honest_check(&config, &run)?;
            body.push_str(&text);
            ok
        }
        Some(d) => {
            let i = d.player;
            let rep = deviation_harness(&config, i, d.class)?;
            writeln!(body, "deviation p{} {} gain {} radius {:.4} {}", i + 1, d.class.describe(&g, i), fmt_rational(&rep.gain), rep.radius, if rep.accepted { "PASS" } else { "FAIL" })?;
            rep.accepted
        }
    };
    Ok(Report::new(manifest, body, accepted))
}

pub fn attack(setup: Setup, players: &[usize], classes: &[String]) -> Result<Report> {
    let Setup { config, manifest, .. } = setup;
    let g = config.game();
    let targets = if players.is_empty() {
        (0..g.num_players()).collect()
    } else {
        players.iter().map(|&p| input::player(g, p)).collect::<Result<Vec<_>>>()?
    };
    let mut rows: Vec<DeviationReport> = Vec::new();
    for &i in &targets {
        let lib = if classes.is_empty() {
            DeviationClass::library(&config, i)
        } else {
            classes
                .iter()
                .map(|c| DeviationClass::parse(c, g, i).map_err(anyhow::Error::msg))
                .collect::<Result<_>>()?
        };
        for class in lib {
            rows.push(deviation_harness(&config, i, class)?);
        }
    }
    let mut table = format!("{}\n", DeviationReport::HEADER);
    for r in &rows {
        table.push_str(&r.render_row(g));
        table.push('\n');
    }
    let accepted = rows.iter().all(|r| r.accepted);
    let mut body = format!("protocol {} mode {} seed {}\n", config.protocol(), config.mode, config.seed);
    body.push_str(&table);
    writeln!(body, "{} of {} deviations unprofitable", rows.iter().filter(|r| r.accepted).count(), rows.len())?;
    writeln!(body, "report sha256 {}", sha256_hex(&table))?;
    Ok(Report::new(manifest, body, accepted))
}
