//! `blinded`: verify, solve, blind and simulate correlated play.
//!
//! Exit codes: 0 accept, 1 reject (the report carries a witness), 2 bad input.

mod commands;
mod input;
mod selftest;
mod sim;

use std::path::PathBuf;
use std::process::ExitCode;

use blinded_core::extensive::AbstractionProtocol;
use blinded_core::manifest::RunManifest;
use blinded_core::solve::PunishmentMode;
use blinded_core::{Concept, Rational};
use clap::{Parser, Subcommand};

use input::GameArgs;
use sim::{ConfigFile, RunArgs};

#[derive(Parser)]
#[command(name = "blinded", version, about = "Cryptographically blinded games and cheap-talk protocols")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a distribution against an equilibrium concept
    Verify {
        #[command(flatten)]
        source: GameArgs,
        #[arg(long, default_value = "cce")]
        concept: Concept,
        #[arg(long, default_value = "0", value_parser = input::rational)]
        eps: Rational,
    },
    /// Welfare-maximising CE or CCE by exact linear programming
    Solve {
        #[command(flatten)]
        source: GameArgs,
        #[arg(long, default_value = "cce")]
        concept: Concept,
        /// Comma-separated objective weights, one per player
        #[arg(long, value_delimiter = ',', value_parser = input::rational)]
        weights: Option<Vec<Rational>>,
        /// Also write the distribution here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pure equilibria, plus all equilibria of two-player games
    Nash {
        #[command(flatten)]
        source: GameArgs,
    },
    /// Worst-Nash or minmax punishment of each player
    Punish {
        #[command(flatten)]
        source: GameArgs,
        /// Player to punish (1-based); all players if omitted
        #[arg(long)]
        target: Option<usize>,
        #[arg(long, default_value = "worst-nash")]
        mode: PunishmentMode,
    },
    /// Encrypt a game's actions
    Blind {
        #[command(flatten)]
        source: GameArgs,
        #[arg(long, value_enum, default_value = "ske")]
        scheme: commands::BlindScheme,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        modulus: u64,
        #[arg(long, default_value_t = 16)]
        security_parameter: u32,
        /// Print the renaming map (debugging only; defeats the blinding)
        #[arg(long)]
        reveal: bool,
    },
    /// Run a protocol, honestly or with one scripted deviation
    Simulate {
        /// TOML run configuration
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
        /// Deviating player (1-based)
        #[arg(long, requires = "class")]
        deviator: Option<usize>,
        /// Deviation class, e.g. abort, independent:B, malleate:add:1
        #[arg(long, requires = "deviator")]
        class: Option<String>,
        /// Write the full transcript here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure every deviation in the library against honest opponents
    Attack {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
        /// Deviating players (1-based); all if omitted
        #[arg(long = "player")]
        players: Vec<usize>,
        /// Restrict to these classes; the full library if omitted
        #[arg(long = "class")]
        classes: Vec<String>,
    },
    /// Empty-threat analysis of a two-player follow/abort abstraction
    Threat {
        #[command(flatten)]
        source: GameArgs,
        #[arg(long, default_value = "p2")]
        protocol: AbstractionProtocol,
    },
    /// Exact cipher and sharing checks plus the security experiments
    CryptoSelftest {
        #[arg(long, value_delimiter = ',', default_value = "3,5,7,11")]
        primes: Vec<u64>,
        /// Also run the unauthenticated scheme, whose NM gap must be flagged
        #[arg(long)]
        malleable: bool,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 16)]
        security_parameter: u32,
    },
    /// Write a built-in game and device; lists fixtures without a name
    Fixture {
        name: Option<String>,
        #[arg(long)]
        game_out: Option<PathBuf>,
        #[arg(long)]
        dist_out: Option<PathBuf>,
    },
}

/// A rendered report and its verdict.
pub struct Report {
    manifest: RunManifest,
    body: String,
    accepted: bool,
}

impl Report {
    pub fn new(manifest: RunManifest, body: String, accepted: bool) -> Self {
        Report { manifest, body, accepted }
    }
}

fn load_config(path: Option<&PathBuf>) -> anyhow::Result<ConfigFile> {
    path.map_or_else(|| Ok(ConfigFile::default()), |p| ConfigFile::load(p))
}

fn dispatch(cmd: Command) -> anyhow::Result<Report> {
    match cmd {
        Command::Verify { source, concept, eps } => commands::verify(&source, concept, eps),
        Command::Solve { source, concept, weights, out } => commands::solve(&source, concept, weights, out),
        Command::Nash { source } => commands::nash(&source),
        Command::Punish { source, target, mode } => commands::punish(&source, target, mode),
        Command::Blind { source, scheme, seed, modulus, security_parameter, reveal } => {
            commands::blind(&source, scheme, seed, modulus, security_parameter, reveal)
        }
        Command::Simulate { config, run, deviator, class, out } => {
            let setup = sim::setup("simulate", load_config(config.as_ref())?, &run)?;
            sim::simulate(setup, deviator.zip(class), out)
        }
        Command::Attack { config, run, players, classes } => {
            let setup = sim::setup("attack", load_config(config.as_ref())?, &run)?;
            sim::attack(setup, &players, &classes)
        }
        Command::Threat { source, protocol } => commands::threat(&source, protocol),
        Command::CryptoSelftest { primes, malleable, trials, seed, security_parameter } => {
            selftest::run(&selftest::SelftestArgs { primes, malleable, trials, seed, k: security_parameter })
        }
        Command::Fixture { name, game_out, dist_out } => commands::fixture(name.as_deref(), game_out, dist_out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli.command) {
        Ok(r) => {
            print!("{}{}", r.manifest, r.body);
            if r.accepted {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
