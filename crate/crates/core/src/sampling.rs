//! Seeded, stream-split random sampling of every channel quantity.
//!
//! A (seed, stream id) pair pins down the entire draw sequence; distinct
//! stream ids give independent streams, which is how parallel sweeps stay
//! reproducible.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::Distribution;

use crate::gamma::GammaParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SampleError {
    #[error("distribution parameters out of domain")]
    Domain,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn rng(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// Derive a per-point stream id from a base seed and a grid index
/// (splitmix64 finalizer).
pub fn derive_stream(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn sample_gamma<R: Rng>(rng: &mut R, params: GammaParams<f64>) -> f64 {
    let dist = rand_distr::Gamma::new(params.shape, params.scale()).expect("valid gamma params");
    dist.sample(rng)
}

pub fn sample_exponential<R: Rng>(rng: &mut R, mean: f64) -> Result<f64, SampleError> {
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(SampleError::Domain);
    }
    Ok(rand_distr::Exp::new(1.0 / mean).unwrap().sample(rng))
}

/// i.i.d. circularly symmetric complex Gaussian entries with per-entry
/// power `variance` (so each component is N(0, variance/2)).
pub fn sample_complex_gaussian_vector<R: Rng>(
    rng: &mut R,
    n: usize,
    variance: f64,
) -> Result<Vec<Complex64>, SampleError> {
    if !(variance > 0.0 && variance.is_finite()) {
        return Err(SampleError::Domain);
    }
    let sigma = (variance / 2.0).sqrt();
    let normal = rand_distr::Normal::new(0.0, sigma).unwrap();
    Ok((0..n)
        .map(|_| Complex64::new(normal.sample(rng), normal.sample(rng)))
        .collect())
}

/// Entries with Nakagami-m magnitudes (so |entry|² ~ Gamma(m, Ω/m)) and
/// uniform phases.
pub fn sample_nakagami_vector<R: Rng>(
    rng: &mut R,
    n: usize,
    m: u32,
    omega: f64,
) -> Result<Vec<Complex64>, SampleError> {
    if m == 0 || !(omega > 0.0 && omega.is_finite()) {
        return Err(SampleError::Domain);
    }
    let power = rand_distr::Gamma::new(m as f64, omega / m as f64).unwrap();
    Ok((0..n)
        .map(|_| {
            let mag = power.sample(rng).sqrt();
            let phase = rng.gen::<f64>() * std::f64::consts::TAU;
            Complex64::from_polar(mag, phase)
        })
        .collect())
}
