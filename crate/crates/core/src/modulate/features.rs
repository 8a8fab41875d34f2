use ndarray::{Array2, Array3, Axis};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::freq::{fft2_band, ifft2_centered, split_low_high};

use super::descriptor::ControllerPair;

/// Largest imaginary part tolerated when returning to the spatial domain.
pub const IMAG_TOLERANCE: f64 = 1e-5;

/// `[channels x height x width]` feature tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    pub data: Array3<f64>,
}

impl FeatureMap {
    pub fn new(data: Array3<f64>) -> Result<Self> {
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invariant(
                "feature map contains non-finite values".into(),
            ));
        }
        if data.is_empty() {
            return Err(Error::Size("feature map must be non-empty".into()));
        }
        Ok(FeatureMap { data })
    }

    pub fn channels(&self) -> usize {
        self.data.dim().0
    }

    pub fn height(&self) -> usize {
        self.data.dim().1
    }

    pub fn width(&self) -> usize {
        self.data.dim().2
    }

    /// Row-major spatial positions as tokens: `[height*width x channels]`.
    pub fn to_tokens(&self) -> Array2<f64> {
        let (c, h, w) = self.data.dim();
        Array2::from_shape_fn((h * w, c), |(t, k)| self.data[[k, t / w, t % w]])
    }

    pub fn from_tokens(tokens: &Array2<f64>, height: usize, width: usize) -> Result<Self> {
        let (n, c) = tokens.dim();
        if n != height * width {
            return Err(Error::shape(
                format!("{n} tokens"),
                format!("{height}x{width} grid"),
            ));
        }
        FeatureMap::new(Array3::from_shape_fn((c, height, width), |(k, i, j)| {
            tokens[[i * width + j, k]]
        }))
    }
}

/// Per channel: `(1 + λ_low) low + (1 + λ_high) high` in the frequency
/// domain, back to space, then `+ μ`.
pub fn modulate_features(
    features: &FeatureMap,
    ctrl: &ControllerPair,
    cutoff_radius: f64,
) -> Result<FeatureMap> {
    let c = features.channels();
    for (name, len) in [
        ("lambda_low", ctrl.lambda_low.len()),
        ("lambda_high", ctrl.lambda_high.len()),
        ("mu", ctrl.mu.len()),
    ] {
        if len != c {
            return Err(Error::shape(
                format!("{name} of length {len}"),
                format!("{c} channels"),
            ));
        }
    }
    let planes: Vec<Array2<f64>> = (0..c)
        .into_par_iter()
        .map(|k| {
            let spectrum = fft2_band(features.data.index_axis(Axis(0), k))?;
            let split = split_low_high(&spectrum, cutoff_radius)?;
            let combined = split.low.mapv(|z| z * (1.0 + ctrl.lambda_low[k]))
                + split.high.mapv(|z| z * (1.0 + ctrl.lambda_high[k]));
            let spatial = ifft2_centered(&combined);
            let residue = spatial.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
            if residue >= IMAG_TOLERANCE {
                return Err(Error::Invariant(format!(
                    "channel {k} left an imaginary residue of {residue:e}"
                )));
            }
            Ok(spatial.mapv(|z| z.re + ctrl.mu[k]))
        })
        .collect::<Result<_>>()?;
    let mut out = Array3::zeros(features.data.raw_dim());
    for (mut dst, plane) in out.axis_iter_mut(Axis(0)).zip(&planes) {
        dst.assign(plane);
    }
    FeatureMap::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array1;

    fn features(c: usize, h: usize, w: usize) -> FeatureMap {
        FeatureMap::new(Array3::from_shape_fn((c, h, w), |(k, i, j)| {
            ((k * 7 + i * 5 + j * 3) % 11) as f64 / 11.0 - 0.4
        }))
        .unwrap()
    }

    #[test]
    fn zero_controllers_are_identity() {
        let f = features(3, 8, 6);
        let out = modulate_features(&f, &ControllerPair::zeros(3), 0.25).unwrap();
        for (a, b) in f.data.iter().zip(out.data.iter()) {
            assert!((a - b).abs() < 1e-5);
        }
    }

    #[test]
    fn bias_adds_per_channel() {
        let f = features(2, 8, 8);
        let mut ctrl = ControllerPair::zeros(2);
        ctrl.mu = Array1::from(vec![0.5, -1.25]);
        let out = modulate_features(&f, &ctrl, 0.3).unwrap();
        for ((k, i, j), v) in out.data.indexed_iter() {
            assert!((v - f.data[[k, i, j]] - ctrl.mu[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn only_high_band_scaling_removes_detail() {
        let f = FeatureMap::new(Array3::from_elem((1, 8, 8), 0.7)).unwrap();
        let mut ctrl = ControllerPair::zeros(1);
        ctrl.lambda_high[0] = -1.0;
        let out = modulate_features(&f, &ctrl, 0.25).unwrap();
        assert!(out.data.iter().all(|v| (v - 0.7).abs() < 1e-12));
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let f = features(3, 4, 4);
        assert!(matches!(
            modulate_features(&f, &ControllerPair::zeros(2), 0.25),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn tokens_round_trip() {
        let f = features(3, 4, 5);
        let t = f.to_tokens();
        assert_eq!(t.dim(), (20, 3));
        assert_eq!(t[[7, 2]], f.data[[2, 1, 2]]);
        assert_eq!(FeatureMap::from_tokens(&t, 4, 5).unwrap(), f);
    }
}
