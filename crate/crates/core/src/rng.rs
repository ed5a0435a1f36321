//! Seeded random streams.
//!
//! Every stream is ChaCha8 seeded with `seed_from_u64(seed)` and switched to
//! a numbered stream, so streams of one seed never overlap.
//!
//! | stream | seed | use |
//! |---|---|---|
//! | 0 | `init_seed` | weight init |
//! | 1 | `rng_seed` | dropout masks |
//! | 256 + e | `rng_seed` | training data of epoch `e` (256 for every epoch with a fixed set) |
//! | 2 | `test_seed` | test messages |
//! | 3 | `test_seed` | baseline messages |

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const INIT: u64 = 0;
pub const DROPOUT: u64 = 1;
pub const TEST: u64 = 2;
pub const BASELINE: u64 = 3;
pub const TRAIN_DATA: u64 = 256;

pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = stream(7, TEST).random();
        assert_eq!(a, stream(7, TEST).random::<u64>());
        assert_ne!(a, stream(7, BASELINE).random::<u64>());
        assert_ne!(a, stream(8, TEST).random::<u64>());
    }
}
