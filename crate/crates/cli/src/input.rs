use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use blinded_core::fixtures;
use blinded_core::game::io::{parse_distribution, parse_game, parse_rational, write_distribution, write_game};
use blinded_core::manifest::RunManifest;
use blinded_core::{PlayerId, ProfileDistribution, Rational, StrategicGame};
use clap::Args;

/// Where the game (and optionally the device) comes from.
#[derive(Debug, Clone, Default, Args)]
pub struct GameArgs {
    /// Game file
    #[arg(long, conflicts_with = "fixture")]
    pub game: Option<PathBuf>,
    /// Distribution file, parsed against the game's action labels
    #[arg(long)]
    pub dist: Option<PathBuf>,
    /// Built-in fixture; supplies the game and its reference device
    #[arg(long)]
    pub fixture: Option<String>,
}

pub struct Loaded {
    pub game: StrategicGame,
    pub dist: Option<ProfileDistribution>,
}

impl Loaded {
    pub fn require_dist(&self) -> Result<&ProfileDistribution> {
        self.dist.as_ref().ok_or_else(|| anyhow!("a distribution is required (--dist or --fixture)"))
    }

    /// Records canonical digests of the inputs.
    pub fn record(&self, mut m: RunManifest) -> RunManifest {
        m = m.input("game", &write_game(&self.game));
        if let Some(d) = &self.dist {
            m = m.input("dist", &write_distribution(&self.game, d));
        }
        m
    }
}

pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn fixture(name: &str) -> Result<(StrategicGame, ProfileDistribution)> {
    fixtures::by_name(name)
        .ok_or_else(|| anyhow!("unknown fixture `{name}` (known: {})", fixtures::NAMES.join(", ")))
}

impl GameArgs {
    pub fn load(&self) -> Result<Loaded> {
        let (game, fixture_dist) = match (&self.game, &self.fixture) {
            (Some(path), _) => {
                let g = parse_game(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
                (g, None)
            }
            (None, Some(name)) => {
                let (g, d) = fixture(name)?;
                (g, Some(d))
            }
            (None, None) => bail!("no game given (--game or --fixture)"),
        };
        let dist = match &self.dist {
            Some(path) => Some(
                parse_distribution(&game, &read(path)?).with_context(|| format!("parsing {}", path.display()))?,
            ),
            None => fixture_dist,
        };
        Ok(Loaded { game, dist })
    }
}

pub fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).ok_or_else(|| format!("`{s}` is not a rational (try 1/10 or 0.1)"))
}

/// Converts a 1-based player number from the command line.
pub fn player(game: &StrategicGame, one_based: usize) -> Result<PlayerId> {
    if one_based == 0 || one_based > game.num_players() {
        bail!("player {one_based} out of range 1..={}", game.num_players());
    }
    Ok(one_based - 1)
}
