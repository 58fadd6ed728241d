//! Named sub-seeds. Every random draw in the crate flows from one user seed
//! through a ChaCha stream selected by purpose, so changing how one stage
//! consumes randomness never shifts another stage.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Generate = 1,
    Inject = 2,
    Split = 3,
    LabelNoise = 4,
}

pub fn rng_for(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}
