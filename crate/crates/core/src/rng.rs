//! Per-sample, per-stage random streams.
//!
//! A stream is keyed by `(global_seed, sample_index, stage_tag)` through
//! SHA-256, so the draws a stage sees never depend on how many other samples
//! or stages ran before it, or on which worker thread ran them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// The random stream type handed to every stochastic stage.
pub type StageRng = ChaCha8Rng;

const DOMAIN: &[u8] = b"camdepth/rng/v1";

pub fn derive_rng(global_seed: u64, sample_index: u64, stage_tag: &str) -> StageRng {
    let mut hasher = Sha256::new();
    hasher.update(DOMAIN);
    hasher.update(global_seed.to_le_bytes());
    hasher.update(sample_index.to_le_bytes());
    hasher.update((stage_tag.len() as u64).to_le_bytes());
    hasher.update(stage_tag.as_bytes());
    let digest = hasher.finalize();
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(seed)
}
