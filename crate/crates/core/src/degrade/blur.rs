//! Spatial and spectral resolution loss.

use ndarray::{Array2, Array3, ArrayView2, Axis};

use crate::cube::HsiCube;
use crate::error::{Error, Result};

pub const SPATIAL_FACTOR: usize = 4;
pub const SPECTRAL_WINDOW: usize = 5;
pub const SPECTRAL_STRIDE: usize = 4;
pub const SPECTRAL_SIGMA: f64 = 1.0;

/// Source coordinate and blend weight for one output sample of a bilinear
/// resize with half-pixel centres (the `align_corners = false` convention).
fn bilinear_taps(out_len: usize, in_len: usize) -> Vec<(usize, usize, f64)> {
    let scale = in_len as f64 / out_len as f64;
    (0..out_len)
        .map(|i| {
            let src = ((i as f64 + 0.5) * scale - 0.5).max(0.0);
            let lo = (src.floor() as usize).min(in_len - 1);
            let hi = (lo + 1).min(in_len - 1);
            (lo, hi, src - lo as f64)
        })
        .collect()
}

/// Bilinear resize of one plane.
pub fn resize_bilinear(src: ArrayView2<'_, f64>, out_h: usize, out_w: usize) -> Array2<f64> {
    let (in_h, in_w) = src.dim();
    let rows = bilinear_taps(out_h, in_h);
    let cols = bilinear_taps(out_w, in_w);
    Array2::from_shape_fn((out_h, out_w), |(y, x)| {
        let (y0, y1, fy) = rows[y];
        let (x0, x1, fx) = cols[x];
        let top = src[[y0, x0]] * (1.0 - fx) + src[[y0, x1]] * fx;
        let bottom = src[[y1, x0]] * (1.0 - fx) + src[[y1, x1]] * fx;
        top * (1.0 - fy) + bottom * fy
    })
}

/// Bilinear downsample by 4 followed by bilinear upsample to the original
/// size, independently per band.
pub fn apply_spatial_blur(cube: &HsiCube) -> Result<HsiCube> {
    let (h, w) = (cube.height(), cube.width());
    if h < SPATIAL_FACTOR || w < SPATIAL_FACTOR {
        return Err(Error::Size(format!(
            "spatial blur needs at least {SPATIAL_FACTOR}x{SPATIAL_FACTOR} pixels, cube is {h}x{w}"
        )));
    }
    let (lh, lw) = (h / SPATIAL_FACTOR, w / SPATIAL_FACTOR);
    let mut out = Array3::<f64>::zeros((cube.bands(), h, w));
    for (mut dst, src) in out
        .axis_iter_mut(Axis(0))
        .zip(cube.data().axis_iter(Axis(0)))
    {
        let plane = src.mapv(f64::from);
        let low = resize_bilinear(plane.view(), lh, lw);
        dst.assign(&resize_bilinear(low.view(), h, w));
    }
    cube.rebuild_from_f64(&out)
}

/// Normalised Gaussian taps of the spectral window.
pub fn spectral_window() -> [f64; SPECTRAL_WINDOW] {
    let centre = (SPECTRAL_WINDOW / 2) as f64;
    let mut w = [0.0; SPECTRAL_WINDOW];
    for (i, v) in w.iter_mut().enumerate() {
        *v = (-0.5 * ((i as f64 - centre) / SPECTRAL_SIGMA).powi(2)).exp();
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    w
}

/// Gaussian window (size 5, stride 4, clamped band indices) along the
/// spectrum, then nearest-neighbour replication back to the full band count.
/// Window `j` covers bands `4j .. 4j + 4`; band `b` takes window `b / 4`.
pub fn apply_spectral_blur(cube: &HsiCube) -> Result<HsiCube> {
    let bands = cube.bands();
    if bands < SPECTRAL_WINDOW {
        return Err(Error::Size(format!(
            "spectral blur needs at least {SPECTRAL_WINDOW} bands, cube has {bands}"
        )));
    }
    let taps = spectral_window();
    let reduced = bands.div_ceil(SPECTRAL_STRIDE);
    let src = cube.to_f64();
    let mut low = Array3::<f64>::zeros((reduced, cube.height(), cube.width()));
    for (j, mut dst) in low.axis_iter_mut(Axis(0)).enumerate() {
        for (i, wt) in taps.iter().enumerate() {
            let b = (j * SPECTRAL_STRIDE + i).min(bands - 1);
            dst.scaled_add(*wt, &src.index_axis(Axis(0), b));
        }
    }
    let mut out = Array3::<f64>::zeros(src.dim());
    for (b, mut dst) in out.axis_iter_mut(Axis(0)).enumerate() {
        dst.assign(&low.index_axis(Axis(0), (b / SPECTRAL_STRIDE).min(reduced - 1)));
    }
    cube.rebuild_from_f64(&out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_survive_spatial_blur() {
        let cube = HsiCube::filled(12, 10, 2, 0.375).unwrap();
        let out = apply_spatial_blur(&cube).unwrap();
        assert!(out.as_slice().iter().all(|&v| (v - 0.375).abs() < 1e-7));
    }

    #[test]
    fn horizontal_ramp_is_preserved_away_from_border() {
        let (h, w) = (16, 32);
        let data = Array3::from_shape_fn((1, h, w), |(_, _, x)| 0.01 + 0.03 * x as f32);
        let cube = HsiCube::new(data).unwrap();
        let out = apply_spatial_blur(&cube).unwrap();
        for y in 0..h {
            for x in 2..w - 2 {
                let expected = 0.01 + 0.03 * x as f64;
                let got = f64::from(out.data()[[0, y, x]]);
                assert!(
                    (got - expected).abs() < 1e-5,
                    "({y},{x}) {got} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn impulse_spreads_out() {
        let mut cube = HsiCube::filled(16, 16, 1, 0.0).unwrap();
        // Row 5 and column 9 lie under the 4i + 1.5 sampling grid of the downsample.
        cube.data_mut()[[0, 5, 9]] = 1.0;
        let out = apply_spatial_blur(&cube).unwrap();
        let peak = out.as_slice().iter().copied().fold(0.0f32, f32::max);
        assert!(peak < 1.0 && peak > 0.0);
        assert!(out.as_slice().iter().filter(|&&v| v > 0.0).count() > 1);
    }

    #[test]
    fn spatial_blur_rejects_tiny_cubes() {
        let cube = HsiCube::filled(3, 8, 1, 0.1).unwrap();
        assert!(matches!(apply_spatial_blur(&cube), Err(Error::Size(_))));
    }

    #[test]
    fn spectrally_constant_pixels_survive() {
        let cube = HsiCube::filled(3, 3, 13, 0.6).unwrap();
        let out = apply_spectral_blur(&cube).unwrap();
        assert!(out.as_slice().iter().all(|&v| (v - 0.6).abs() < 1e-6));
    }

    #[test]
    fn output_is_piecewise_constant_in_runs_of_four() {
        let bands = 18;
        let data = Array3::from_shape_fn((bands, 2, 2), |(b, y, x)| {
            ((b * 7 + y + x) % 11) as f32 / 11.0
        });
        let out = apply_spectral_blur(&HsiCube::new(data).unwrap()).unwrap();
        let spectrum = out.pixel(1, 0);
        for (b, v) in spectrum.iter().enumerate() {
            assert_eq!(*v, spectrum[b / 4 * 4], "band {b}");
        }
        assert_ne!(spectrum[3], spectrum[4]);
    }

    #[test]
    fn alternating_spectrum_matches_direct_convolution() {
        let bands = 16;
        let spectrum: Vec<f64> = (0..bands).map(|b| (b % 2) as f64).collect();
        let data = Array3::from_shape_fn((bands, 1, 1), |(b, _, _)| spectrum[b] as f32);
        let out = apply_spectral_blur(&HsiCube::new(data).unwrap()).unwrap();

        // Direct oracle: unnormalised Gaussian, explicit clamp, explicit normalisation.
        let g: Vec<f64> = (0..5)
            .map(|i| (-0.5 * (i as f64 - 2.0).powi(2)).exp())
            .collect();
        let norm: f64 = g.iter().sum();
        for b in 0..bands {
            let start = (b / 4) * 4;
            let mut acc = 0.0;
            for (i, gi) in g.iter().enumerate() {
                acc += gi * spectrum[(start + i).min(bands - 1)];
            }
            let expected = acc / norm;
            let got = f64::from(out.data()[[b, 0, 0]]);
            assert!((got - expected).abs() < 1e-6);
            assert!(got > 0.0 && got < 1.0);
        }
    }

    #[test]
    fn spectral_blur_rejects_short_spectra() {
        let cube = HsiCube::filled(2, 2, 4, 0.1).unwrap();
        assert!(matches!(apply_spectral_blur(&cube), Err(Error::Size(_))));
    }
}
