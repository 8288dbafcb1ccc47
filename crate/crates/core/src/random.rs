//! Seeded randomness used by every generator.
//!
//! The stream is ChaCha8 keyed by a `u64` seed, which is portable across
//! platforms and word sizes. Normals come from the Box–Muller transform,
//! `√(−2 ln u₁)·cos(2πu₂)` with its sine partner cached for the next call,
//! where `u₁ = 1 − U` keeps the logarithm finite.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform on `[0, 1)`.
#[inline]
pub fn uniform01<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>()
}

/// Uniform on `[lo, hi)`; returns `lo` when the interval is empty.
#[inline]
pub fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * uniform01(rng)
}

/// Standard normal sampler with a cached spare.
#[derive(Debug, Clone, Default)]
pub struct Gaussian {
    spare: Option<f64>,
}

impl Gaussian {
    pub fn new() -> Self {
        Self { spare: None }
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        if let Some(v) = self.spare.take() {
            return v;
        }
        let u1 = 1.0 - uniform01(rng);
        let u2 = uniform01(rng);
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = std::f64::consts::TAU * u2;
        self.spare = Some(radius * angle.sin());
        radius * angle.cos()
    }

    /// `N(mean, sd²)`.
    pub fn sample_with<R: Rng + ?Sized>(&mut self, rng: &mut R, mean: f64, sd: f64) -> f64 {
        mean + sd * self.sample(rng)
    }
}

/// `k` distinct indices from `0..m`, uniform, sorted ascending.
/// Uses a Fisher–Yates prefix shuffle. Panics if `k > m`.
pub fn sample_indices<R: Rng + ?Sized>(rng: &mut R, m: usize, k: usize) -> Vec<usize> {
    assert!(k <= m, "cannot draw {k} of {m}");
    let mut pool: Vec<usize> = (0..m).collect();
    let (chosen, _) = pool.partial_shuffle(rng, k);
    let mut out = chosen.to_vec();
    out.sort_unstable();
    out
}
