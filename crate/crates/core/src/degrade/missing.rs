//! Band-missing (stripe) degradations.

use rand::Rng;

use crate::cube::HsiCube;
use crate::error::{Error, Result};
use crate::seed::{self, stream};

use super::recipe::MissingKind;

/// Row-drop probability of the partial pattern.
pub const PARTIAL_ROW_PROB: f64 = 0.3;

/// `k` distinct bands out of `bands`, sorted ascending.
pub fn choose_bands(bands: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k > bands {
        return Err(Error::Parameter(format!(
            "cannot choose {k} missing bands out of {bands}"
        )));
    }
    let mut rng = seed::rng(seed);
    let mut chosen = rand::seq::index::sample(&mut rng, bands, k).into_vec();
    chosen.sort_unstable();
    Ok(chosen)
}

/// Which rows are zeroed in each chosen band, in the order of `chosen`.
///
/// * complete: every row;
/// * band-wise: rows 0, 2, 4, ... (the 1st, 3rd, 5th, ... rows);
/// * partial: each row independently with probability 0.3, drawn band by
///   band from `seed`.
pub fn missing_rows(
    kind: MissingKind,
    chosen: &[usize],
    height: usize,
    seed: u64,
) -> Vec<Vec<bool>> {
    match kind {
        MissingKind::Complete => vec![vec![true; height]; chosen.len()],
        MissingKind::BandWise => vec![(0..height).map(|r| r % 2 == 0).collect(); chosen.len()],
        MissingKind::Partial => {
            let mut rng = seed::rng(seed);
            chosen
                .iter()
                .map(|_| {
                    (0..height)
                        .map(|_| rng.random_bool(PARTIAL_ROW_PROB))
                        .collect()
                })
                .collect()
        }
    }
}

/// Zeroes the pattern of `kind` on an explicit band list. `seed` drives the
/// partial row draws only.
pub fn apply_band_missing_to(
    cube: &HsiCube,
    kind: MissingKind,
    chosen: &[usize],
    seed: u64,
) -> Result<HsiCube> {
    if let Some(&b) = chosen.iter().find(|&&b| b >= cube.bands()) {
        return Err(Error::Bounds(format!(
            "missing band {b} out of range for {} bands",
            cube.bands()
        )));
    }
    let rows = missing_rows(kind, chosen, cube.height(), seed);
    let mut out = cube.clone();
    for (&band, drop) in chosen.iter().zip(&rows) {
        let mut plane = out.band_mut(band);
        for (r, mut row) in plane.rows_mut().into_iter().enumerate() {
            if drop[r] {
                row.fill(0.0);
            }
        }
    }
    Ok(out)
}

/// Picks `k` bands with the seeded generator and zeroes them according to
/// `kind`. Returns the degraded cube and the chosen bands.
pub fn apply_band_missing(
    cube: &HsiCube,
    kind: MissingKind,
    k: usize,
    seed: u64,
) -> Result<(HsiCube, Vec<usize>)> {
    let chosen = choose_bands(cube.bands(), k, seed::mix64(seed, stream::MISSING_BANDS))?;
    let out = apply_band_missing_to(cube, kind, &chosen, seed::mix64(seed, stream::MISSING_ROWS))?;
    Ok((out, chosen))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array3;

    fn positive_cube(h: usize, w: usize, b: usize) -> HsiCube {
        HsiCube::new(Array3::from_shape_fn((b, h, w), |(k, y, x)| {
            0.1 + ((k + 2 * y + 3 * x) % 7) as f32 / 10.0
        }))
        .unwrap()
    }

    #[test]
    fn zero_k_is_identity() {
        let cube = positive_cube(4, 4, 6);
        for kind in MissingKind::ALL {
            let (out, chosen) = apply_band_missing(&cube, *kind, 0, 9).unwrap();
            assert!(chosen.is_empty());
            assert_eq!(out, cube);
        }
    }

    #[test]
    fn complete_zeroes_exactly_k_bands() {
        let cube = positive_cube(5, 6, 10);
        let (out, chosen) = apply_band_missing(&cube, MissingKind::Complete, 3, 4).unwrap();
        assert_eq!(chosen.len(), 3);
        let zero_bands: Vec<usize> = (0..10)
            .filter(|&b| out.band(b).iter().all(|&v| v == 0.0))
            .collect();
        assert_eq!(zero_bands, chosen);
    }

    #[test]
    fn band_wise_zeroes_even_rows() {
        let cube = positive_cube(8, 8, 4);
        let (out, chosen) = apply_band_missing(&cube, MissingKind::BandWise, 2, 1).unwrap();
        for b in 0..4 {
            let zero_rows: Vec<usize> = (0..8)
                .filter(|&r| out.band(b).row(r).iter().all(|&v| v == 0.0))
                .collect();
            if chosen.contains(&b) {
                assert_eq!(zero_rows, vec![0, 2, 4, 6]);
            } else {
                assert!(zero_rows.is_empty());
            }
        }
    }

    #[test]
    fn partial_rate_is_near_three_tenths() {
        let rows = missing_rows(MissingKind::Partial, &[0; 50], 200, 77);
        let dropped = rows.iter().flatten().filter(|&&d| d).count();
        let rate = dropped as f64 / 10_000.0;
        assert!((rate - 0.3).abs() < 0.02, "{rate}");
    }

    #[test]
    fn k_above_band_count_is_rejected() {
        let cube = positive_cube(2, 2, 3);
        assert!(matches!(
            apply_band_missing(&cube, MissingKind::Complete, 4, 0),
            Err(Error::Parameter(_))
        ));
    }
}
