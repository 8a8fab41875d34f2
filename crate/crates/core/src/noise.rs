//! Seeded multi-octave value noise, shared by scene synthesis and cloud masks.

use ndarray::Array2;
use rand::Rng;

/// Uniform draw in the open interval (0, 1).
pub(crate) fn open_unit<R: Rng>(rng: &mut R) -> f64 {
    (f64::from(rng.random::<u32>()) + 0.5) / 4_294_967_296.0
}

fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// One octave on a `cells x cells` lattice sampled at pixel centres.
fn octave<R: Rng>(height: usize, width: usize, cells: usize, rng: &mut R) -> Array2<f64> {
    let lattice = Array2::from_shape_simple_fn((cells + 1, cells + 1), || open_unit(rng));
    Array2::from_shape_fn((height, width), |(y, x)| {
        let v = (y as f64 + 0.5) / height as f64 * cells as f64;
        let u = (x as f64 + 0.5) / width as f64 * cells as f64;
        let (i, j) = (
            (v.floor() as usize).min(cells - 1),
            (u.floor() as usize).min(cells - 1),
        );
        let (fy, fx) = (smoothstep(v - i as f64), smoothstep(u - j as f64));
        let top = lattice[[i, j]] * (1.0 - fx) + lattice[[i, j + 1]] * fx;
        let bottom = lattice[[i + 1, j]] * (1.0 - fx) + lattice[[i + 1, j + 1]] * fx;
        top * (1.0 - fy) + bottom * fy
    })
}

/// Sum of `octaves` octaves, octave `o` on a lattice of `base_cells * 2^o`
/// cells with amplitude `2^-o`, normalised by the amplitude sum.
///
/// Every sample is a convex combination of lattice values, so the field lies
/// strictly inside (0, 1).
pub(crate) fn value_noise<R: Rng>(
    height: usize,
    width: usize,
    octaves: u32,
    base_cells: usize,
    rng: &mut R,
) -> Array2<f64> {
    let octaves = octaves.max(1);
    let mut acc = Array2::<f64>::zeros((height, width));
    let mut total = 0.0;
    for o in 0..octaves {
        let amp = 0.5f64.powi(o as i32);
        let layer = octave(height, width, base_cells.max(1) << o, rng);
        acc.scaled_add(amp, &layer);
        total += amp;
    }
    acc /= total;
    acc
}
