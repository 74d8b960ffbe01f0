//! Deterministic random substrate.
//!
//! [`RandomStream`] wraps a ChaCha8 keystream. Child streams are obtained in
//! O(1) by hashing the parent key with the child index, so per-path streams
//! can be handed to worker threads without any coordination and the result
//! of a simulation depends only on the root seed.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson};

use crate::error::{ensure, Result};

/// Seed used when the caller does not supply one.
pub const DEFAULT_SEED: u64 = 0;

const ROOT_STREAM: u64 = 0;
const DERIVED_STREAM: u64 = 1;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seeded uniform source. Single owner; move it between threads, never share.
#[derive(Debug, Clone)]
pub struct RandomStream {
    key: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(ROOT_STREAM);
        Self { key: seed, rng }
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    /// Independent child stream. Depends only on this stream's key and
    /// `index`, not on how many draws have been taken from it.
    pub fn derive_substream(&self, index: u64) -> RandomStream {
        let key = splitmix64(splitmix64(self.key) ^ splitmix64(index.wrapping_add(0x5851_f42d_4c95_7f2d)));
        let mut rng = ChaCha8Rng::seed_from_u64(key);
        rng.set_stream(DERIVED_STREAM);
        Self { key, rng }
    }

    /// Uniform on the open interval (0, 1).
    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        loop {
            let u = (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
            if u > 0.0 {
                return u;
            }
        }
    }

    /// Standard exponential variate.
    #[inline]
    pub fn next_exp(&mut self) -> f64 {
        -self.next_uniform().ln()
    }

    pub fn draw_gamma(&mut self, shape: f64, rate: f64) -> Result<f64> {
        Ok(GammaSampler::new(shape, rate)?.sample(self))
    }

    pub fn draw_poisson(&mut self, mean: f64) -> Result<u64> {
        ensure!(mean.is_finite() && mean >= 0.0, Parameter, "Poisson mean must be finite and ≥ 0, got {mean}");
        if mean == 0.0 {
            return Ok(0);
        }
        let dist = Poisson::new(mean).map_err(|e| crate::Error::Parameter(format!("Poisson({mean}): {e}")))?;
        Ok(dist.sample(self) as u64)
    }
}

impl RngCore for RandomStream {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Prebuilt `Ga(shape, rate)` sampler for hot loops.
#[derive(Debug, Clone, Copy)]
pub struct GammaSampler {
    dist: Gamma<f64>,
}

impl GammaSampler {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        ensure!(shape.is_finite() && shape > 0.0, Parameter, "gamma shape must be > 0, got {shape}");
        ensure!(rate.is_finite() && rate > 0.0, Parameter, "gamma rate must be > 0, got {rate}");
        let dist = Gamma::new(shape, 1.0 / rate)
            .map_err(|e| crate::Error::Parameter(format!("Ga({shape}, {rate}): {e}")))?;
        Ok(Self { dist })
    }

    #[inline]
    pub fn sample(&self, s: &mut RandomStream) -> f64 {
        // Marsaglia–Tsang can return an exact zero for tiny shapes
        loop {
            let x = self.dist.sample(s);
            if x > 0.0 {
                return x;
            }
        }
    }
}
