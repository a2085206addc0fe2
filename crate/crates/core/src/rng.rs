//! Counter-based random streams.
//!
//! Every Monte Carlo trial and every seed-averaged evaluation draws from its own
//! ChaCha stream keyed by `(master seed, stream index)`. The stream a trial sees
//! depends only on its index, so results do not depend on how trials are
//! scheduled across threads.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type StreamRng = ChaCha8Rng;

/// Generator for stream `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Circularly-symmetric complex Gaussian vector with unit variance per entry.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<Complex64> {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    (0..len)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * scale, im * scale)
        })
        .collect()
}
