use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::image::GrayImage;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Standard deviation in intensity units.
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(sigma: f64, seed: u64) -> Self {
        Self { sigma, seed }
    }
}

/// Adds i.i.d. `N(0, sigma^2)` noise to every pixel. The result is not
/// clipped.
pub fn add_gaussian_noise(img: &GrayImage, spec: &NoiseSpec) -> Result<GrayImage> {
    if !(spec.sigma >= 0.0 && spec.sigma.is_finite()) {
        return Err(invalid("noise sigma must be finite and nonnegative"));
    }
    if spec.sigma == 0.0 {
        return Ok(img.clone());
    }
    let normal = Normal::new(0.0, spec.sigma).map_err(|e| invalid(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = img.clone();
    for v in out.pixels_mut() {
        *v += normal.sample(&mut rng);
    }
    Ok(out)
}
