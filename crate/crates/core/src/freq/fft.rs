//! Unitary, DC-centred 2-D spectra.

use ndarray::{Array2, ArrayView2, Axis};
use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{Error, Result};

/// Unitary 2-D DFT of one band, with DC moved to index `(height/2, width/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandSpectrum {
    pub coeffs: Array2<Complex64>,
}

impl BandSpectrum {
    pub fn height(&self) -> usize {
        self.coeffs.dim().0
    }

    pub fn width(&self) -> usize {
        self.coeffs.dim().1
    }

    /// Inverse transform; the complex field before discarding imaginary parts.
    pub fn inverse(&self) -> Array2<Complex64> {
        ifft2_centered(&self.coeffs)
    }

    /// Inverse transform, real part.
    pub fn inverse_real(&self) -> Array2<f64> {
        self.inverse().mapv(|c| c.re)
    }
}

/// Signed frequency in cycles per sample of centred index `i` on an axis of
/// length `n`.
pub fn centred_frequency(i: usize, n: usize) -> f64 {
    (i as f64 - (n / 2) as f64) / n as f64
}

/// Radius in cycles per sample of a centred coefficient; at most `sqrt(2)/2`.
pub fn radius(i: usize, j: usize, height: usize, width: usize) -> f64 {
    centred_frequency(i, height).hypot(centred_frequency(j, width))
}

fn transform_axis(
    data: &mut Array2<Complex64>,
    axis: Axis,
    direction: FftDirection,
    planner: &mut FftPlanner<f64>,
) {
    let len = data.len_of(axis);
    let fft = planner.plan_fft(len, direction);
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    for mut lane in data.lanes_mut(axis) {
        for (b, v) in buf.iter_mut().zip(lane.iter()) {
            *b = *v;
        }
        fft.process(&mut buf);
        for (v, b) in lane.iter_mut().zip(&buf) {
            *v = *b;
        }
    }
}

fn transform(mut data: Array2<Complex64>, direction: FftDirection) -> Array2<Complex64> {
    let (h, w) = data.dim();
    let mut planner = FftPlanner::new();
    transform_axis(&mut data, Axis(1), direction, &mut planner);
    transform_axis(&mut data, Axis(0), direction, &mut planner);
    let scale = 1.0 / ((h * w) as f64).sqrt();
    data.mapv_inplace(|c| c * scale);
    data
}

/// Moves DC from `(0, 0)` to `(h/2, w/2)`.
pub fn fftshift<T: Clone>(a: &Array2<T>) -> Array2<T> {
    let (h, w) = a.dim();
    Array2::from_shape_fn((h, w), |(i, j)| {
        a[[(i + h - h / 2) % h, (j + w - w / 2) % w]].clone()
    })
}

/// Inverse of [`fftshift`].
pub fn ifftshift<T: Clone>(a: &Array2<T>) -> Array2<T> {
    let (h, w) = a.dim();
    Array2::from_shape_fn((h, w), |(i, j)| {
        a[[(i + h / 2) % h, (j + w / 2) % w]].clone()
    })
}

pub fn fft2_complex(field: &Array2<Complex64>) -> Array2<Complex64> {
    fftshift(&transform(field.clone(), FftDirection::Forward))
}

pub fn ifft2_centered(coeffs: &Array2<Complex64>) -> Array2<Complex64> {
    transform(ifftshift(coeffs), FftDirection::Inverse)
}

/// Spectrum of a real band. Any size of at least 2x2 is accepted.
pub fn fft2_band(band: ArrayView2<'_, f64>) -> Result<BandSpectrum> {
    let (h, w) = band.dim();
    if h < 2 || w < 2 {
        return Err(Error::Size(format!(
            "spectrum needs at least 2x2 samples, got {h}x{w}"
        )));
    }
    let field = band.mapv(|v| Complex64::new(v, 0.0));
    Ok(BandSpectrum {
        coeffs: fft2_complex(&field),
    })
}
