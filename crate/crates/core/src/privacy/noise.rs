//! Seedable Laplace noise.

use rand::distributions::{Distribution, Open01};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Source of Laplace variates: a seeded generator, or the zero-noise test mode.
#[derive(Clone, Debug)]
pub struct NoiseSource {
    rng: Option<ChaCha8Rng>,
}

impl NoiseSource {
    pub fn seeded(seed: u64) -> Self {
        NoiseSource {
            rng: Some(ChaCha8Rng::seed_from_u64(seed)),
        }
    }

    /// Every sample is exactly zero.
    pub fn zero() -> Self {
        NoiseSource { rng: None }
    }

    pub fn is_zero(&self) -> bool {
        self.rng.is_none()
    }

    /// One uniform draw on the open interval (0, 1); 0.5 in zero-noise mode.
    pub fn uniform(&mut self) -> f64 {
        match &mut self.rng {
            Some(rng) => Open01.sample(rng),
            None => 0.5,
        }
    }

    /// A fresh 64-bit value for deriving child seeds; 0 in zero-noise mode.
    pub fn next_seed(&mut self) -> u64 {
        match &mut self.rng {
            Some(rng) => rng.next_u64(),
            None => 0,
        }
    }

    /// One Laplace(`scale`) variate.
    pub fn laplace(&mut self, scale: f64) -> Result<f64> {
        laplace_sample(scale, self)
    }
}

/// Inverse CDF of the Laplace law with location 0 at probability `u ∈ (0, 1)`.
pub fn laplace_from_uniform(scale: f64, u: f64) -> f64 {
    let x = if u < 0.5 {
        scale * (2.0 * u).ln()
    } else {
        -scale * (2.0 * (1.0 - u)).ln()
    };
    x + 0.0
}

/// Draws Laplace(`scale`) noise from `src` using a single uniform.
pub fn laplace_sample(scale: f64, src: &mut NoiseSource) -> Result<f64> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidScale(scale));
    }
    if src.is_zero() {
        return Ok(0.0);
    }
    Ok(laplace_from_uniform(scale, src.uniform()))
}

/// Laplace CDF, used by calibration checks.
pub fn laplace_cdf(scale: f64, x: f64) -> f64 {
    if x < 0.0 {
        0.5 * (x / scale).exp()
    } else {
        1.0 - 0.5 * (-x / scale).exp()
    }
}
