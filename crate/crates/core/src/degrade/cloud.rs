//! Procedural cloud occlusion.
//!
//! The transparency mask `M` is built from seeded value noise:
//!
//! 1. `locality_degree` octaves of value noise, every sample in (0, 1);
//! 2. samples at or below `clear_threshold` are clear (`M = 0`), the rest are
//!    rescaled from `(clear_threshold, 1)` onto `(min_lvl, max_lvl]`;
//! 3. a Gaussian blur with sigma `blur_scaling`.
//!
//! The cloud plate is spectrally flat with per-band amplitude
//! `decay_factor^(-b / (bands - 1))`, and the blend is `(1 - M) I + M C`,
//! clamped to [0, 1].

use ndarray::{Array2, Array3, Axis};
use rand::Rng;

use crate::cube::HsiCube;
use crate::error::{Error, Result};
use crate::noise::value_noise;
use crate::seed;

use super::recipe::CloudKind;

/// Lattice cells of the coarsest octave.
const BASE_CELLS: usize = 2;

/// Parameter ranges of the cloud generator. Ranges are inclusive `(lo, hi)`
/// pairs; a fixed value is a range with `lo == hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloudParams {
    pub locality_degree: (u32, u32),
    pub min_lvl: (f64, f64),
    pub max_lvl: (f64, f64),
    pub clear_threshold: (f64, f64),
    pub blur_scaling: f64,
    pub decay_factor: f64,
    /// Horizontal mask shift in pixels per band index.
    pub channel_offset: i64,
}

impl CloudParams {
    pub fn thick() -> Self {
        CloudParams {
            locality_degree: (2, 4),
            min_lvl: (0.0, 0.0),
            max_lvl: (1.0, 1.0),
            clear_threshold: (0.0, 0.4),
            blur_scaling: 1.0,
            decay_factor: 1.0,
            channel_offset: 0,
        }
    }

    pub fn thin() -> Self {
        CloudParams {
            locality_degree: (1, 1),
            min_lvl: (0.0, 0.4),
            max_lvl: (0.4, 0.6),
            clear_threshold: (0.0, 0.0),
            blur_scaling: 2.0,
            decay_factor: 1.0,
            channel_offset: 0,
        }
    }

    pub fn for_kind(kind: CloudKind) -> Self {
        match kind {
            CloudKind::Thick => CloudParams::thick(),
            CloudKind::Thin => CloudParams::thin(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, (lo, hi): (f64, f64)| {
            if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
                Err(Error::Parameter(format!(
                    "{name} range ({lo}, {hi}) invalid"
                )))
            } else {
                Ok(())
            }
        };
        unit("min_lvl", self.min_lvl)?;
        unit("max_lvl", self.max_lvl)?;
        unit("clear_threshold", self.clear_threshold)?;
        if self.min_lvl.0 > self.max_lvl.0 || self.min_lvl.1 > self.max_lvl.1 {
            return Err(Error::Parameter("min_lvl must not exceed max_lvl".into()));
        }
        let (l0, l1) = self.locality_degree;
        if l0 == 0 || l0 > l1 || l1 > 12 {
            return Err(Error::Parameter(format!(
                "locality_degree range ({l0}, {l1}) invalid"
            )));
        }
        if !(self.blur_scaling > 0.0 && self.blur_scaling.is_finite()) {
            return Err(Error::Parameter("blur_scaling must be positive".into()));
        }
        if !(self.decay_factor > 0.0 && self.decay_factor.is_finite()) {
            return Err(Error::Parameter("decay_factor must be positive".into()));
        }
        Ok(())
    }
}

/// Concrete values drawn from a [`CloudParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloudDraw {
    pub octaves: u32,
    pub min_lvl: f64,
    pub max_lvl: f64,
    pub clear_threshold: f64,
}

fn draw_range<R: Rng>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    let u: f64 = rng.random();
    lo + (hi - lo) * u
}

pub(crate) fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil().max(1.0) as isize;
    let raw: Vec<f64> = (-radius..=radius)
        .map(|i| (-0.5 * (i as f64 / sigma).powi(2)).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Separable Gaussian blur with clamped edges.
pub(crate) fn gaussian_blur(field: &Array2<f64>, sigma: f64) -> Array2<f64> {
    let kernel = gaussian_kernel(sigma);
    let radius = (kernel.len() / 2) as isize;
    let (h, w) = field.dim();
    let clamp = |i: isize, n: usize| i.clamp(0, n as isize - 1) as usize;
    let rows: Array2<f64> = Array2::from_shape_fn((h, w), |(y, x)| {
        kernel
            .iter()
            .enumerate()
            .map(|(k, wt)| wt * field[[y, clamp(x as isize + k as isize - radius, w)]])
            .sum()
    });
    Array2::from_shape_fn((h, w), |(y, x)| {
        kernel
            .iter()
            .enumerate()
            .map(|(k, wt)| wt * rows[[clamp(y as isize + k as isize - radius, h), x]])
            .sum::<f64>()
    })
}

/// Builds the transparency mask and returns it with the drawn parameters.
pub fn cloud_mask(
    height: usize,
    width: usize,
    params: &CloudParams,
    seed: u64,
) -> Result<(Array2<f64>, CloudDraw)> {
    params.validate()?;
    let mut rng = seed::rng(seed);
    let octaves = rng.random_range(params.locality_degree.0..=params.locality_degree.1);
    let min_lvl = draw_range(&mut rng, params.min_lvl);
    let max_lvl = draw_range(&mut rng, params.max_lvl).max(min_lvl);
    let clear_threshold = draw_range(&mut rng, params.clear_threshold);
    let noise = value_noise(height, width, octaves, BASE_CELLS, &mut rng);

    let raw = noise.mapv(|n| {
        if n <= clear_threshold {
            0.0
        } else {
            min_lvl + (max_lvl - min_lvl) * (n - clear_threshold) / (1.0 - clear_threshold)
        }
    });
    let mask = gaussian_blur(&raw, params.blur_scaling).mapv(|m| m.clamp(0.0, 1.0));
    Ok((
        mask,
        CloudDraw {
            octaves,
            min_lvl,
            max_lvl,
            clear_threshold,
        },
    ))
}

/// Per-band amplitude of the cloud plate.
pub fn cloud_plate(bands: usize, decay_factor: f64) -> Vec<f64> {
    (0..bands)
        .map(|b| {
            let t = if bands > 1 {
                b as f64 / (bands - 1) as f64
            } else {
                0.0
            };
            decay_factor.powf(-t)
        })
        .collect()
}

/// Blends `cube` with an explicit mask and plate. Exposed so the blend rule
/// can be exercised with hand-made masks.
pub fn blend_cloud(
    cube: &HsiCube,
    mask: &Array2<f64>,
    plate: &[f64],
    channel_offset: i64,
) -> Result<HsiCube> {
    let (h, w) = mask.dim();
    if h != cube.height() || w != cube.width() {
        return Err(Error::shape(
            format!("{h}x{w} mask"),
            format!("{}x{} cube", cube.height(), cube.width()),
        ));
    }
    if plate.len() != cube.bands() {
        return Err(Error::shape(
            format!("{} plate bands", plate.len()),
            format!("{} cube bands", cube.bands()),
        ));
    }
    let mut out = Array3::<f32>::zeros(cube.data().dim());
    for (b, (mut dst, src)) in out
        .axis_iter_mut(Axis(0))
        .zip(cube.data().axis_iter(Axis(0)))
        .enumerate()
    {
        let shift = channel_offset * b as i64;
        for ((y, x), d) in dst.indexed_iter_mut() {
            let sx = (x as i64 - shift).clamp(0, w as i64 - 1) as usize;
            let m = mask[[y, sx]];
            let v = (1.0 - m) * f64::from(src[[y, x]]) + m * plate[b];
            *d = v.clamp(0.0, 1.0) as f32;
        }
    }
    let cube = cube.with_data(out);
    cube.validate()?;
    Ok(cube)
}

/// Cloud occlusion. `kind` only labels the draw; every number comes from
/// `params` (see [`CloudParams::for_kind`] for the presets).
pub fn apply_cloud(
    cube: &HsiCube,
    _kind: CloudKind,
    params: &CloudParams,
    seed: u64,
) -> Result<HsiCube> {
    let (mask, _) = cloud_mask(cube.height(), cube.width(), params, seed)?;
    let plate = cloud_plate(cube.bands(), params.decay_factor);
    blend_cloud(cube, &mask, &plate, params.channel_offset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::{synth_scene, SceneSpec};

    fn scene() -> HsiCube {
        synth_scene(&SceneSpec::new(24, 20, 6, 11)).unwrap()
    }

    #[test]
    fn all_clear_threshold_is_identity() {
        let cube = scene();
        let params = CloudParams {
            clear_threshold: (1.0, 1.0),
            ..CloudParams::thick()
        };
        let (mask, _) = cloud_mask(24, 20, &params, 5).unwrap();
        assert!(mask.iter().all(|&m| m == 0.0));
        let out = apply_cloud(&cube, CloudKind::Thick, &params, 5).unwrap();
        assert_eq!(out, cube);
    }

    #[test]
    fn full_occlusion_saturates() {
        let cube = scene();
        let params = CloudParams {
            min_lvl: (1.0, 1.0),
            max_lvl: (1.0, 1.0),
            clear_threshold: (0.0, 0.0),
            ..CloudParams::thick()
        };
        let out = apply_cloud(&cube, CloudKind::Thick, &params, 8).unwrap();
        assert!(out.as_slice().iter().all(|&v| (v - 1.0).abs() < 1e-6));
    }

    #[test]
    fn outputs_stay_in_unit_range() {
        let cube = scene();
        for (kind, s) in [(CloudKind::Thick, 1), (CloudKind::Thin, 2)] {
            let out = apply_cloud(&cube, kind, &CloudParams::for_kind(kind), s).unwrap();
            assert!(out.as_slice().iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn thin_preset_never_exceeds_its_max_level() {
        for s in 0..10 {
            let (mask, draw) = cloud_mask(32, 32, &CloudParams::thin(), s).unwrap();
            assert!((0.4..=0.6).contains(&draw.max_lvl));
            assert!(mask.iter().all(|&m| m <= draw.max_lvl + 1e-12));
        }
    }

    #[test]
    fn invalid_ranges_are_rejected() {
        let bad = CloudParams {
            min_lvl: (0.5, 0.9),
            max_lvl: (0.2, 0.6),
            ..CloudParams::thin()
        };
        assert!(matches!(
            cloud_mask(8, 8, &bad, 0),
            Err(Error::Parameter(_))
        ));
        let bad = CloudParams {
            clear_threshold: (0.2, 1.4),
            ..CloudParams::thick()
        };
        assert!(cloud_mask(8, 8, &bad, 0).is_err());
        let bad = CloudParams {
            blur_scaling: 0.0,
            ..CloudParams::thick()
        };
        assert!(cloud_mask(8, 8, &bad, 0).is_err());
    }

    #[test]
    fn plate_decay() {
        assert!(cloud_plate(5, 1.0).iter().all(|&v| v == 1.0));
        let p = cloud_plate(3, 4.0);
        assert_eq!(p[0], 1.0);
        assert!((p[1] - 0.5).abs() < 1e-12);
        assert!((p[2] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn channel_offset_shifts_mask_per_band() {
        let cube = HsiCube::filled(1, 4, 2, 0.0).unwrap();
        let mask = Array2::from_shape_vec((1, 4), vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let out = blend_cloud(&cube, &mask, &[1.0, 1.0], 1).unwrap();
        assert_eq!(
            out.band(0).iter().copied().collect::<Vec<f32>>(),
            vec![1.0, 0.0, 0.0, 0.0]
        );
        assert_eq!(
            out.band(1).iter().copied().collect::<Vec<f32>>(),
            vec![1.0, 1.0, 0.0, 0.0]
        );
    }
}
