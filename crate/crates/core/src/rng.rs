//! Deterministic per-trial random streams.
//!
//! Every Monte Carlo trial gets its own generator derived from the master
//! seed and the trial counter, so results do not depend on the worker count
//! and extending a run by one trial leaves all earlier trials' draws intact.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// SplitMix64 step; bijective mixing of a 64-bit state.
#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream for trial `trial` of the run seeded with `master`.
///
/// The (master, trial) pair is folded through SplitMix64 into a full 256-bit
/// ChaCha key, so distinct trials get distinct, decorrelated streams.
pub fn trial_rng(master: u64, trial: u64) -> ChaCha8Rng {
    let mut state = master ^ trial.wrapping_mul(0xA076_1D64_78BD_642F);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Standard complex Gaussian: real and imaginary parts independent,
/// mean zero, variance 1/2 each, so `E|z|^2 = 1`.
#[inline]
pub fn complex_standard_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}
