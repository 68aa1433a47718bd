//! Reproducible random streams.
//!
//! Every experiment is driven by one master seed. Independent streams for
//! trials (and, when paths are resampled per sample size, for each `N`) are
//! obtained by hashing the master seed together with the stream coordinates,
//! so a trial's draws never depend on which worker runs it or in which order.
//!
//! Standard normals come from `rand_distr::StandardNormal` (ziggurat on top of
//! ChaCha8 uniform words), which is portable across platforms.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub type StreamRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a master seed with a list of stream coordinates.
pub fn derive_seed(master: u64, coords: &[u64]) -> u64 {
    coords
        .iter()
        .fold(splitmix64(master), |acc, &c| splitmix64(acc ^ splitmix64(c)))
}

pub fn rng_from_seed(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream(master: u64, coords: &[u64]) -> StreamRng {
    rng_from_seed(derive_seed(master, coords))
}

pub fn fill_standard_normal<R: rand::Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    for x in out {
        *x = StandardNormal.sample(rng);
    }
}
