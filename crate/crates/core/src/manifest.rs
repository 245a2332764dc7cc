//! Provenance block embedded in every emitted report.

use std::fmt;

use sha2::{Digest, Sha256};

/// Version strings of the artifacts a report depends on.
pub const ARTIFACT_VERSIONS: &[(&str, &str)] = &[
    ("blinded-core", env!("CARGO_PKG_VERSION")),
    ("transcript", crate::sim::TRANSCRIPT_VERSION),
];

/// Hex SHA-256 of a byte string.
pub fn sha256_hex(bytes: impl AsRef<[u8]>) -> String {
    hex::encode(Sha256::digest(bytes.as_ref()))
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: Option<String>,
    pub seed: Option<u64>,
    /// (name, digest of the canonical encoding).
    pub inputs: Vec<(String, String)>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: impl Into<String>) -> Self {
        RunManifest {
            command: command.into(),
            ..Default::default()
        }
    }

    pub fn config(mut self, hash: impl Into<String>) -> Self {
        self.config_hash = Some(hash.into());
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    /// Records an input by the digest of its canonical text.
    pub fn input(mut self, name: impl Into<String>, canonical: &str) -> Self {
        self.inputs.push((name.into(), sha256_hex(canonical)));
        self
    }

    pub fn output(mut self, path: impl Into<String>) -> Self {
        self.outputs.push(path.into());
        self
    }
}

impl fmt::Display for RunManifest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# manifest")?;
        writeln!(f, "# command {}", self.command)?;
        if let Some(h) = &self.config_hash {
            writeln!(f, "# config {h}")?;
        }
        if let Some(s) = self.seed {
            writeln!(f, "# seed {s}")?;
        }
        for (name, v) in ARTIFACT_VERSIONS {
            writeln!(f, "# version {name} {v}")?;
        }
        for (name, d) in &self.inputs {
            writeln!(f, "# input {name} sha256:{d}")?;
        }
        for o in &self.outputs {
            writeln!(f, "# output {o}")?;
        }
        Ok(())
    }
}
