//! Versioned chain checkpoints: terminal model state plus RNG, enough to
//! verify bit-exact state round-trips and reseed continuation runs.

use std::path::Path;

use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use stsae_core::model::ModelState;

use crate::error::{CliError, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub iteration: usize,
    pub chain_stream: u64,
    pub state: ModelState,
    pub rng: ChaCha20Rng,
}

pub fn save(path: &Path, checkpoint: &Checkpoint) -> Result<()> {
    let json = serde_json::to_string(checkpoint)
        .map_err(|e| CliError::data(format!("cannot serialize checkpoint: {e}")))?;
    std::fs::write(path, json)
        .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Checkpoint> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
    let checkpoint: Checkpoint = serde_json::from_str(&text)
        .map_err(|e| CliError::data(format!("{}: malformed checkpoint: {e}", path.display())))?;
    if checkpoint.format_version != FORMAT_VERSION {
        return Err(CliError::data(format!(
            "{}: unsupported checkpoint version {}",
            path.display(),
            checkpoint.format_version
        )));
    }
    Ok(checkpoint)
}
