use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent stream for replication `index` under `seed`. Streams depend only
/// on `(seed, index)`, so results do not depend on how work is scheduled.
pub fn replication_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
