//! Counter-based random streams: sample `k` of a run seeded with `seed`
//! depends only on `(seed, k)`, never on evaluation order or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Independent generator for sample `index` of the run keyed by `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One standard-normal draw for sample `index`.
pub fn normal(seed: u64, index: u64) -> f64 {
    StandardNormal.sample(&mut stream(seed, index))
}
