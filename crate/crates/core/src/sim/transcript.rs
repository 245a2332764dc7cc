//! Line-oriented event logs with access labels.
//!
//! Every body line reads `<visibility>\t<event>`, where the visibility is
//! `all`, `engine`, or a `+`-separated list of 1-based player ids such as
//! `p1+p3`. The digest covers the header and every body line, whether or not
//! the body is retained.

use std::fmt;

use sha2::{Digest, Sha256};

use crate::game::PlayerId;

pub const TRANSCRIPT_VERSION: &str = "blinded-transcript 1";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Visibility {
    All,
    Engine,
    Players(Vec<PlayerId>),
}

impl Visibility {
    pub fn player(i: PlayerId) -> Self {
        Visibility::Players(vec![i])
    }

    /// True if player `i` may see the payload.
    pub fn allows(&self, i: PlayerId) -> bool {
        match self {
            Visibility::All => true,
            Visibility::Engine => false,
            Visibility::Players(ps) => ps.contains(&i),
        }
    }
}

impl fmt::Display for Visibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Visibility::All => f.write_str("all"),
            Visibility::Engine => f.write_str("engine"),
            Visibility::Players(ps) => {
                let parts: Vec<String> = ps.iter().map(|p| format!("p{}", p + 1)).collect();
                f.write_str(&parts.join("+"))
            }
        }
    }
}

impl std::str::FromStr for Visibility {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all" => Ok(Visibility::All),
            "engine" => Ok(Visibility::Engine),
            _ => s
                .split('+')
                .map(|p| {
                    p.strip_prefix('p')
                        .and_then(|n| n.parse::<usize>().ok())
                        .filter(|&n| n >= 1)
                        .map(|n| n - 1)
                        .ok_or_else(|| format!("bad visibility `{s}`"))
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Visibility::Players),
        }
    }
}

/// Events of a single trial or path, assembled in order afterwards.
#[derive(Debug, Clone, Default)]
pub struct TrialLog {
    lines: Vec<String>,
}

impl TrialLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, vis: Visibility, event: impl fmt::Display) {
        self.lines.push(format!("{vis}\t{event}"));
    }

    pub fn lines(&self) -> &[String] {
        &self.lines
    }
}

#[derive(Debug, Clone)]
pub struct Transcript {
    header: Vec<String>,
    body: Option<Vec<String>>,
    line_count: usize,
    digest: String,
}

pub(crate) struct TranscriptBuilder {
    header: Vec<String>,
    body: Option<Vec<String>>,
    line_count: usize,
    hasher: Sha256,
}

impl TranscriptBuilder {
    pub fn new(header: Vec<String>, keep_body: bool) -> Self {
        let mut hasher = Sha256::new();
        for l in &header {
            hasher.update(l.as_bytes());
            hasher.update(b"\n");
        }
        TranscriptBuilder {
            header,
            body: keep_body.then(Vec::new),
            line_count: 0,
            hasher,
        }
    }

    pub fn append(&mut self, log: TrialLog) {
        for l in &log.lines {
            self.hasher.update(l.as_bytes());
            self.hasher.update(b"\n");
        }
        self.line_count += log.lines.len();
        if let Some(body) = &mut self.body {
            body.extend(log.lines);
        }
    }

    pub fn finish(self) -> Transcript {
        Transcript {
            header: self.header,
            body: self.body,
            line_count: self.line_count,
            digest: hex::encode(self.hasher.finalize()),
        }
    }
}

impl Transcript {
    pub fn header(&self) -> &[String] {
        &self.header
    }

    /// Body lines, if they were retained.
    pub fn body(&self) -> Option<&[String]> {
        self.body.as_deref()
    }

    pub fn line_count(&self) -> usize {
        self.line_count
    }

    /// SHA-256 of the full text, hex encoded.
    pub fn digest(&self) -> &str {
        &self.digest
    }

    /// Parsed body events as `(visibility, event)`.
    pub fn events(&self) -> impl Iterator<Item = (Visibility, &str)> {
        self.body.iter().flatten().filter_map(|l| {
            let (v, e) = l.split_once('\t')?;
            Some((v.parse().ok()?, e))
        })
    }

    /// Full text, or only the header and digest when the body was dropped.
    pub fn text(&self) -> String {
        let mut s = self.header.join("\n");
        s.push('\n');
        match &self.body {
            Some(body) => {
                for l in body {
                    s.push_str(l);
                    s.push('\n');
                }
            }
            None => s.push_str(&format!("# body omitted, {} lines\n", self.line_count)),
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn visibility_round_trip() {
        for v in [
            Visibility::All,
            Visibility::Engine,
            Visibility::Players(vec![0, 2]),
        ] {
            assert_eq!(v.to_string().parse::<Visibility>().unwrap(), v);
        }
        assert!("p0".parse::<Visibility>().is_err());
    }

    #[test]
    fn digest_ignores_retention() {
        let mk = |keep| {
            let mut b = TranscriptBuilder::new(vec!["h".into()], keep);
            let mut log = TrialLog::new();
            log.push(Visibility::All, "x");
            b.append(log);
            b.finish()
        };
        let (a, b) = (mk(true), mk(false));
        assert_eq!(a.digest(), b.digest());
        assert_eq!(a.events().count(), 1);
        assert_eq!(b.line_count(), 1);
    }
}
