use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Everything that determines a command's output.
#[derive(Debug, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub inputs: Vec<InputDigest>,
    pub seed: u64,
    pub samples: Option<usize>,
    pub format: Format,
    pub params: serde_json::Value,
}

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Metadata {
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub config_hash: String,
}

impl RunConfig {
    pub fn metadata(&self) -> Metadata {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        Metadata {
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            seed: self.seed,
            config_hash: hex::encode(Sha256::digest(bytes)),
        }
    }
}

/// Reads an input file and records its digest in the config.
pub fn read_input(path: &Path, inputs: &mut Vec<InputDigest>) -> Result<String> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
    inputs.push(InputDigest {
        path: path.to_path_buf(),
        sha256: hex::encode(Sha256::digest(text.as_bytes())),
    });
    Ok(text)
}

pub fn parse_json<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|source| CliError::Json { path: path.to_path_buf(), source })
}

fn sink(output: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match output {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

#[derive(Serialize)]
struct WithMetadata<'a, T> {
    metadata: &'a Metadata,
    #[serde(flatten)]
    body: &'a T,
}

pub fn write_json<T: Serialize>(output: Option<&Path>, metadata: &Metadata, body: &T) -> Result<()> {
    let mut w = sink(output)?;
    serde_json::to_writer_pretty(&mut w, &WithMetadata { metadata, body })
        .map_err(io::Error::from)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// CSV rows preceded by `#` comment lines carrying the metadata.
pub fn write_csv<R: Serialize>(output: Option<&Path>, metadata: &Metadata, rows: &[R]) -> Result<()> {
    let mut w = sink(output)?;
    writeln!(w, "# version: {}", metadata.version)?;
    writeln!(w, "# command: {}", metadata.command)?;
    writeln!(w, "# seed: {}", metadata.seed)?;
    writeln!(w, "# config_hash: {}", metadata.config_hash)?;
    let mut csv = csv::Writer::from_writer(w);
    for row in rows {
        csv.serialize(row)?;
    }
    csv.flush()?;
    Ok(())
}
