//! Seeded randomness helpers. All randomness in the crate flows through
//! explicit seeds; there is no global RNG state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

pub(crate) fn seeded(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Derive an independent stream for a sub-task (restart index, trial index).
pub(crate) fn derived(seed: u64, index: u64) -> ChaCha12Rng {
    let mut root = ChaCha12Rng::seed_from_u64(seed);
    root.set_stream(index.wrapping_add(1));
    root
}

/// Standard normal draw (Marsaglia polar method).
pub(crate) fn normal<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random_range(-1.0..1.0);
        let v: f64 = rng.random_range(-1.0..1.0);
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            return u * (-2.0 * s.ln() / s).sqrt();
        }
    }
}

/// Log-uniform draw on `[lo, hi]`, `1 <= lo <= hi`.
pub(crate) fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return lo;
    }
    (rng.random_range(lo.ln()..hi.ln())).exp()
}
