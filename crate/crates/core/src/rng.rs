use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// ChaCha8 keyed by `seed`, on an independent `stream`.
///
/// Streams separate folds, trees and trials so results do not depend on
/// evaluation order.
pub(crate) fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A child seed for unit `n` (a fold, a replicate, a trial).
pub(crate) fn derive(seed: u64, n: u64) -> u64 {
    use rand::RngCore;
    stream(seed, n.wrapping_add(1 << 32)).next_u64()
}
