use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};

use super::fft::{centred_frequency, BandSpectrum};

pub const DEFAULT_CUTOFF: f64 = 0.25;

/// Complementary low/high partition of a spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqSplit {
    pub low: Array2<Complex64>,
    pub high: Array2<Complex64>,
    pub cutoff_radius: f64,
}

impl FreqSplit {
    pub fn recombine(&self) -> Array2<Complex64> {
        &self.low + &self.high
    }
}

/// Radius of a centred coefficient relative to the per-axis Nyquist
/// frequency: 1 on the axis edges, up to `sqrt(2)` in the corners.
pub fn nyquist_radius(i: usize, j: usize, height: usize, width: usize) -> f64 {
    2.0 * centred_frequency(i, height).hypot(centred_frequency(j, width))
}

/// `true` where the Nyquist-normalised radius is below `cutoff`.
pub fn low_mask(height: usize, width: usize, cutoff: f64) -> Result<Array2<bool>> {
    if !(cutoff > 0.0 && cutoff < 1.0) {
        return Err(Error::Parameter(format!(
            "cutoff radius must lie in (0, 1), got {cutoff}"
        )));
    }
    Ok(Array2::from_shape_fn((height, width), |(i, j)| {
        nyquist_radius(i, j, height, width) < cutoff
    }))
}

pub fn split_low_high(spectrum: &BandSpectrum, cutoff_radius: f64) -> Result<FreqSplit> {
    let mask = low_mask(spectrum.height(), spectrum.width(), cutoff_radius)?;
    let zero = Complex64::new(0.0, 0.0);
    let mut low = spectrum.coeffs.clone();
    let mut high = spectrum.coeffs.clone();
    ndarray::Zip::from(&mut low)
        .and(&mut high)
        .and(&mask)
        .for_each(|l, h, &m| if m { *h = zero } else { *l = zero });
    Ok(FreqSplit {
        low,
        high,
        cutoff_radius,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freq::fft2_band;

    fn spectrum(h: usize, w: usize) -> BandSpectrum {
        let x = Array2::from_shape_fn((h, w), |(y, x)| {
            ((y * 7 + x * 3) % 5) as f64 * 0.1 + (x as f64).sin()
        });
        fft2_band(x.view()).unwrap()
    }

    #[test]
    fn parts_sum_to_spectrum_exactly() {
        for (h, w) in [(8, 8), (7, 10)] {
            let s = spectrum(h, w);
            for cutoff in [0.05, 0.25, 0.5, 0.99] {
                let split = split_low_high(&s, cutoff).unwrap();
                assert_eq!(split.recombine(), s.coeffs);
                for (l, hi) in split.low.iter().zip(split.high.iter()) {
                    assert!(l.norm() == 0.0 || hi.norm() == 0.0);
                }
            }
        }
    }

    #[test]
    fn constant_image_has_no_high_part() {
        let s = fft2_band(Array2::from_elem((16, 16), 0.4).view()).unwrap();
        let split = split_low_high(&s, DEFAULT_CUTOFF).unwrap();
        assert!(split.high.iter().all(|c| c.norm() < 1e-12));
    }

    #[test]
    fn cutoff_near_one_keeps_only_outer_ring_high() {
        let (h, w) = (16, 16);
        let mask = low_mask(h, w, 1.0 - 1e-9).unwrap();
        for ((i, j), &low) in mask.indexed_iter() {
            assert_eq!(low, nyquist_radius(i, j, h, w) < 1.0 - 1e-9);
            if !low {
                assert!(i == 0 || j == 0 || nyquist_radius(i, j, h, w) >= 1.0 - 1e-9);
            }
        }
        let high = mask.iter().filter(|&&m| !m).count();
        assert!(high < h * w / 4, "{high}");
        assert!(!mask[[0, 0]]);
    }

    #[test]
    fn cutoff_outside_unit_interval_is_rejected() {
        let s = spectrum(4, 4);
        for c in [0.0, 1.0, -0.5, 1.5, f64::NAN] {
            assert!(matches!(split_low_high(&s, c), Err(Error::Parameter(_))));
        }
    }
}
