//! Additive white Gaussian noise at a prescribed signal-to-noise ratio.

use rand_distr::{Distribution, StandardNormal};

use crate::cube::HsiCube;
use crate::error::{Error, Result};
use crate::seed;

/// Mean squared value over every element of the cube.
pub fn mean_power(cube: &HsiCube) -> f64 {
    let n = cube.as_slice().len() as f64;
    cube.as_slice()
        .iter()
        .map(|&v| f64::from(v).powi(2))
        .sum::<f64>()
        / n
}

/// `I + eps * sqrt(P / snr)` with `eps` standard normal per element and `P`
/// the cube's mean power. `snr_linear` is a power ratio, not decibels. The
/// result is not clamped.
pub fn apply_noise(cube: &HsiCube, snr_linear: f64, seed: u64) -> Result<HsiCube> {
    if snr_linear.is_nan() || snr_linear <= 0.0 {
        return Err(Error::Parameter(format!(
            "SNR must be positive, got {snr_linear}"
        )));
    }
    let sigma = (mean_power(cube) / snr_linear).sqrt();
    let mut rng = seed::rng(seed);
    let mut out = cube.to_f64();
    for v in out.iter_mut() {
        let eps: f64 = StandardNormal.sample(&mut rng);
        *v += sigma * eps;
    }
    cube.rebuild_from_f64(&out)
}
