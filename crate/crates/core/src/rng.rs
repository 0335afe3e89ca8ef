//! Seeded, platform-independent random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// ChaCha20 stream `stream` of the generator seeded with `seed`.
///
/// Independent streams let parallel replicates draw numbers without
/// depending on the schedule.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
