//! Versioned CBOR checkpoints of the full trainer state.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Trainer;
use crate::error::{Error, Result};

const FORMAT: &str = "truck-tactics-checkpoint";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub format: String,
    pub version: u32,
    pub config_hash: String,
    pub seed: u64,
    pub step: u64,
    pub revision: String,
}

#[derive(Serialize)]
struct EnvelopeRef<'a> {
    header: CheckpointHeader,
    trainer: &'a Trainer,
}

#[derive(Deserialize)]
struct Envelope {
    header: CheckpointHeader,
    trainer: Trainer,
}

pub fn save_checkpoint(trainer: &Trainer, path: &Path) -> Result<()> {
    let header = CheckpointHeader {
        format: FORMAT.into(),
        version: VERSION,
        config_hash: trainer.config_hash().to_string(),
        seed: trainer.seed(),
        step: trainer.step(),
        revision: super::revision(),
    };
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    ciborium::into_writer(&EnvelopeRef { header, trainer }, &mut w).map_err(|e| Error::Codec(e.to_string()))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a checkpoint and returns its header with the trainer state.
pub fn read_checkpoint(path: &Path) -> Result<(CheckpointHeader, Trainer)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let env: Envelope =
        ciborium::from_reader(BufReader::new(file)).map_err(|e| Error::Codec(format!("{}: {e}", path.display())))?;
    if env.header.format != FORMAT {
        return Err(Error::Codec(format!("{} is not a checkpoint", path.display())));
    }
    if env.header.version != VERSION {
        return Err(Error::Codec(format!(
            "unsupported checkpoint version {} (expected {VERSION})",
            env.header.version
        )));
    }
    if env.header.config_hash != env.trainer.config_hash() {
        return Err(Error::Codec("checkpoint header and body disagree on the config hash".into()));
    }
    Ok((env.header, env.trainer))
}

pub fn load_checkpoint(path: &Path) -> Result<Trainer> {
    read_checkpoint(path).map(|(_, t)| t)
}
