//! Counter-based random streams.
//!
//! Every draw in a run is addressed by `(seed, domain, node, iteration)` and an
//! in-stream draw index, so the values seen by a node never depend on how the
//! other nodes were scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Separates the independent uses of one global seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Oracle = 1,
    NoiseEstimate = 2,
    Output = 3,
    Data = 4,
    Partition = 5,
}

/// Returns the generator for one `(seed, domain, node, iteration)` cell. Draws
/// taken from it in order are the cell's draw indices 0, 1, 2, ...
pub fn stream(seed: u64, domain: Domain, node: u64, iteration: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(domain as u64).to_le_bytes());
    key[16..24].copy_from_slice(&node.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(iteration);
    rng
}
