//! Deterministic synthetic datasets, IDX loading, and the dataset CSV format.

mod digits;
mod idx;
mod io;
mod planted;

pub use digits::{gen_digit_records, pair_adjacent, Confusion, DigitData, DigitGenConfig, PairRule, Split};
pub use idx::{load_idx, parse_idx_images, parse_idx_labels};
pub use io::{read_dataset, read_dataset_from, read_features_from, write_dataset, write_features};
pub use planted::{gen_planted_dataset, PlantedConfig, PlantedData, RatingMap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent generator for sub-stream `stream` of `seed` (splitmix64 mixing).
pub fn derive_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    ChaCha8Rng::seed_from_u64(z)
}
