//! Seedable, forkable random streams.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};

use crate::error::{MemError, Result};

/// Stream ids used internally so each consumer of randomness draws from its own
/// reproducible sequence regardless of what other consumers did.
pub mod streams {
    pub const MCMC_CHAIN: u64 = 1;
    pub const EXACT_DRAWS: u64 = 2;
    pub const ANNEAL: u64 = 3;
    pub const RESAMPLE: u64 = 4;
}

/// A ChaCha8 generator identified by `(seed, stream)`.
///
/// ChaCha output is specified bit-for-bit, so draws are identical across
/// platforms and releases of this crate.
#[derive(Clone, Debug)]
pub struct RngState {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { seed, stream, inner }
    }

    /// A fresh generator on another stream of the same seed.
    pub fn fork(&self, stream: u64) -> Self {
        Self::with_stream(self.seed, stream)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Uniform draw on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniform integer on `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }
}

impl RngCore for RngState {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// One draw from Beta(a, b).
pub fn beta_sample(rng: &mut RngState, a: f64, b: f64) -> Result<f64> {
    let dist = Beta::new(a, b)
        .map_err(|e| MemError::Domain(format!("invalid beta shapes ({a}, {b}): {e}")))?;
    Ok(dist.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::special::beta_cdf;

    #[test]
    fn identical_seeds_identical_streams() {
        let mut a = RngState::with_stream(7, 3);
        let mut b = RngState::with_stream(7, 3);
        let xs: Vec<u64> = (0..64).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..64).map(|_| b.next_u64()).collect();
        assert_eq!(xs, ys);

        let mut c = a.fork(4);
        let mut d = RngState::with_stream(7, 3);
        assert_ne!(c.next_u64(), d.next_u64());
    }

    #[test]
    fn beta_moments() {
        let mut rng = RngState::new(11);
        let n = 1_000_000;
        let draws: Vec<f64> = (0..n).map(|_| beta_sample(&mut rng, 2.0, 2.0).unwrap()).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.002, "mean {mean}");

        let draws: Vec<f64> = (0..n).map(|_| beta_sample(&mut rng, 0.5, 0.5).unwrap()).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((var - 0.125).abs() < 0.002, "var {var}");
    }

    #[test]
    fn beta_ks_against_cdf() {
        let mut rng = RngState::new(12);
        let n = 100_000;
        let mut draws: Vec<f64> = (0..n).map(|_| beta_sample(&mut rng, 3.0, 7.0).unwrap()).collect();
        draws.sort_by(f64::total_cmp);
        let mut ks = 0.0_f64;
        for (i, &x) in draws.iter().enumerate() {
            let f = beta_cdf(x, 3.0, 7.0).unwrap();
            ks = ks.max((f - i as f64 / n as f64).abs()).max(((i + 1) as f64 / n as f64 - f).abs());
        }
        assert!(ks < 0.01, "KS {ks}");
    }

    #[test]
    fn invalid_shapes_rejected() {
        let mut rng = RngState::new(1);
        assert!(beta_sample(&mut rng, 0.0, 1.0).is_err());
    }
}
