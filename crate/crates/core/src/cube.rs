//! Band-sequential hyperspectral cubes and their on-disk formats.
//!
//! An [`HsiCube`] stores reflectance as 32-bit floats in BSQ order: the
//! backing array has shape `[bands, height, width]`, band-major then
//! row-major, which is exactly the order of the HSC payload.
//!
//! HSC layout:
//!
//! ```text
//! HSC1
//! height=<u>
//! width=<u>
//! bands=<u>
//! dtype=f32le
//! order=bsq
//! wavelengths=<r>,<r>,...      (optional)
//! <blank line>
//! <height*width*bands little-endian f32>
//! ```

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::{s, Array2, Array3, ArrayView2, ArrayViewMut2, Axis};

use crate::error::{Error, Result};
use crate::noise::{open_unit, value_noise};
use crate::seed::{self, stream};

pub const HSC_MAGIC: &str = "HSC1";

#[derive(Debug, Clone, PartialEq)]
pub struct HsiCube {
    data: Array3<f32>,
    wavelengths_nm: Option<Vec<f64>>,
}

impl HsiCube {
    /// Builds a cube from a `[bands, height, width]` array.
    pub fn new(data: Array3<f32>) -> Result<Self> {
        let cube = HsiCube {
            data: data.as_standard_layout().into_owned(),
            wavelengths_nm: None,
        };
        cube.validate()?;
        Ok(cube)
    }

    /// Builds a cube from a flat BSQ buffer.
    pub fn from_bsq(height: usize, width: usize, bands: usize, values: Vec<f32>) -> Result<Self> {
        let expected = height * width * bands;
        if values.len() != expected {
            return Err(Error::SizeMismatch {
                expected: expected * 4,
                found: values.len() * 4,
            });
        }
        let data = Array3::from_shape_vec((bands, height, width), values)
            .map_err(|e| Error::Invariant(e.to_string()))?;
        HsiCube::new(data)
    }

    pub fn filled(height: usize, width: usize, bands: usize, value: f32) -> Result<Self> {
        HsiCube::new(Array3::from_elem((bands, height, width), value))
    }

    pub fn with_wavelengths(mut self, wavelengths_nm: Vec<f64>) -> Result<Self> {
        self.wavelengths_nm = Some(wavelengths_nm);
        self.validate()?;
        Ok(self)
    }

    /// Checks every cube invariant: non-empty dimensions, finite values and
    /// strictly increasing wavelengths matching the band count.
    pub fn validate(&self) -> Result<()> {
        let (b, h, w) = self.data.dim();
        if b == 0 || h == 0 || w == 0 {
            return Err(Error::Invariant(format!(
                "cube dimensions must be positive, got {h}x{w}x{b}"
            )));
        }
        if let Some(pos) = self.data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Invariant(format!(
                "non-finite value at flat BSQ index {pos}"
            )));
        }
        if let Some(wl) = &self.wavelengths_nm {
            if wl.len() != b {
                return Err(Error::Invariant(format!(
                    "{} wavelengths for {b} bands",
                    wl.len()
                )));
            }
            if wl.iter().any(|v| !v.is_finite()) || wl.windows(2).any(|p| p[1] <= p[0]) {
                return Err(Error::Invariant(
                    "wavelengths must be finite and strictly increasing".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn height(&self) -> usize {
        self.data.dim().1
    }

    pub fn width(&self) -> usize {
        self.data.dim().2
    }

    pub fn bands(&self) -> usize {
        self.data.dim().0
    }

    /// `height x width x bands`, the conventional way to name a cube's shape.
    pub fn shape_string(&self) -> String {
        format!("{}x{}x{}", self.height(), self.width(), self.bands())
    }

    pub fn same_shape(&self, other: &HsiCube) -> bool {
        self.data.dim() == other.data.dim()
    }

    pub(crate) fn check_same_shape(&self, other: &HsiCube) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::shape(self.shape_string(), other.shape_string()))
        }
    }

    pub fn wavelengths_nm(&self) -> Option<&[f64]> {
        self.wavelengths_nm.as_deref()
    }

    /// The `[bands, height, width]` array.
    pub fn data(&self) -> &Array3<f32> {
        &self.data
    }

    /// Mutable access to the payload. Invariants are re-checked on write.
    pub fn data_mut(&mut self) -> &mut Array3<f32> {
        &mut self.data
    }

    pub fn band(&self, band: usize) -> ArrayView2<'_, f32> {
        self.data.index_axis(Axis(0), band)
    }

    pub fn band_mut(&mut self, band: usize) -> ArrayViewMut2<'_, f32> {
        self.data.index_axis_mut(Axis(0), band)
    }

    /// Spectrum of one pixel.
    pub fn pixel(&self, row: usize, col: usize) -> Vec<f32> {
        self.data.slice(s![.., row, col]).to_vec()
    }

    /// Flat BSQ payload, in file order.
    pub fn as_slice(&self) -> &[f32] {
        self.data
            .as_slice()
            .expect("cube data is kept in standard layout")
    }

    /// A spatial window `[row, row + height) x [col, col + width)` over all
    /// bands. Windows that do not fit are rejected rather than padded.
    pub fn crop(&self, row: usize, col: usize, height: usize, width: usize) -> Result<HsiCube> {
        if height == 0 || width == 0 || row + height > self.height() || col + width > self.width() {
            return Err(Error::Bounds(format!(
                "crop {height}x{width} at ({row},{col}) exceeds {}",
                self.shape_string()
            )));
        }
        let data = self
            .data
            .slice(s![.., row..row + height, col..col + width])
            .to_owned();
        Ok(HsiCube {
            data,
            wavelengths_nm: self.wavelengths_nm.clone(),
        })
    }

    /// Replaces the payload while keeping metadata. Shapes must agree.
    pub(crate) fn with_data(&self, data: Array3<f32>) -> HsiCube {
        debug_assert_eq!(data.dim(), self.data.dim());
        HsiCube {
            data,
            wavelengths_nm: self.wavelengths_nm.clone(),
        }
    }

    /// Band-wise f64 copy, `[band][row][col]`.
    pub fn to_f64(&self) -> Array3<f64> {
        self.data.mapv(f64::from)
    }

    /// Rounds an f64 array back into a cube carrying this cube's metadata.
    pub(crate) fn rebuild_from_f64(&self, values: &Array3<f64>) -> Result<HsiCube> {
        let cube = self.with_data(values.mapv(|v| v as f32));
        cube.validate()?;
        Ok(cube)
    }
}

// ---------------------------------------------------------------------------
// HSC I/O

fn header_string(cube: &HsiCube) -> String {
    let mut header = format!(
        "{HSC_MAGIC}\nheight={}\nwidth={}\nbands={}\ndtype=f32le\norder=bsq\n",
        cube.height(),
        cube.width(),
        cube.bands()
    );
    if let Some(wl) = cube.wavelengths_nm() {
        let joined: Vec<String> = wl.iter().map(|v| format!("{v:?}")).collect();
        header.push_str(&format!("wavelengths={}\n", joined.join(",")));
    }
    header.push('\n');
    header
}

/// Serialises a cube to HSC bytes.
pub fn encode_hsc(cube: &HsiCube) -> Result<Vec<u8>> {
    cube.validate()?;
    let header = header_string(cube);
    let mut out = Vec::with_capacity(header.len() + cube.as_slice().len() * 4);
    out.extend_from_slice(header.as_bytes());
    for v in cube.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn write_cube(cube: &HsiCube, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_hsc(cube)?;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = BufWriter::new(file);
    writer
        .write_all(&bytes)
        .and_then(|_| writer.flush())
        .map_err(|e| Error::io(path, e))
}

fn parse_usize(line_no: usize, line: &str, value: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .map_err(|_| Error::format(line_no, line, "expected an unsigned integer"))
}

/// Parses HSC bytes.
pub fn decode_hsc(bytes: &[u8]) -> Result<HsiCube> {
    let header_end = bytes
        .windows(2)
        .position(|w| w == b"\n\n")
        .ok_or_else(|| Error::format(1, "", "missing blank line terminating the header"))?;
    let header = std::str::from_utf8(&bytes[..header_end])
        .map_err(|_| Error::format(1, "", "header is not valid UTF-8"))?;
    let payload = &bytes[header_end + 2..];

    let mut lines = header.split('\n').enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, HSC_MAGIC)) => {}
        Some((n, other)) => return Err(Error::format(n, other, "expected magic `HSC1`")),
        None => return Err(Error::format(1, "", "empty header")),
    }

    let (mut height, mut width, mut bands) = (None, None, None);
    let (mut dtype_seen, mut order_seen) = (false, false);
    let mut wavelengths = None;
    for (n, line) in lines {
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::format(n, line, "expected key=value"))?;
        match key {
            "height" => height = Some(parse_usize(n, line, value)?),
            "width" => width = Some(parse_usize(n, line, value)?),
            "bands" => bands = Some(parse_usize(n, line, value)?),
            "dtype" if value == "f32le" => dtype_seen = true,
            "dtype" => return Err(Error::format(n, line, "only dtype=f32le is supported")),
            "order" if value == "bsq" => order_seen = true,
            "order" => return Err(Error::format(n, line, "only order=bsq is supported")),
            "wavelengths" => {
                let parsed: std::result::Result<Vec<f64>, _> =
                    value.split(',').map(|v| v.trim().parse::<f64>()).collect();
                wavelengths =
                    Some(parsed.map_err(|_| Error::format(n, line, "bad wavelength list"))?);
            }
            _ => return Err(Error::format(n, line, "unknown header key")),
        }
    }
    let missing = |name: &str| Error::format(1, HSC_MAGIC, format!("header lacks `{name}`"));
    let height = height.ok_or_else(|| missing("height"))?;
    let width = width.ok_or_else(|| missing("width"))?;
    let bands = bands.ok_or_else(|| missing("bands"))?;
    if !dtype_seen {
        return Err(missing("dtype"));
    }
    if !order_seen {
        return Err(missing("order"));
    }

    let expected = height
        .checked_mul(width)
        .and_then(|v| v.checked_mul(bands))
        .and_then(|v| v.checked_mul(4))
        .ok_or_else(|| Error::format(1, HSC_MAGIC, "cube dimensions overflow"))?;
    if payload.len() != expected {
        return Err(Error::SizeMismatch {
            expected,
            found: payload.len(),
        });
    }
    let values: Vec<f32> = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    let cube = HsiCube::from_bsq(height, width, bands, values)?;
    match wavelengths {
        Some(wl) => cube.with_wavelengths(wl),
        None => Ok(cube),
    }
}

pub fn read_cube(path: impl AsRef<Path>) -> Result<HsiCube> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_hsc(&bytes)
}

// ---------------------------------------------------------------------------
// Band exclusion

/// Inclusive, 1-based band ranges to drop.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BandExclusionList {
    pub excluded_ranges: Vec<(usize, usize)>,
}

impl BandExclusionList {
    pub fn new(excluded_ranges: Vec<(usize, usize)>) -> Self {
        BandExclusionList { excluded_ranges }
    }

    /// Low-quality AVIRIS bands (water absorption and detector edges); applied
    /// to the 224-band product this leaves 172 bands.
    pub fn aviris_default() -> Self {
        BandExclusionList::new(vec![(1, 10), (104, 116), (152, 170), (215, 224)])
    }

    pub fn validate(&self, bands: usize) -> Result<()> {
        let mut sorted = self.excluded_ranges.clone();
        sorted.sort_unstable();
        for &(lo, hi) in &sorted {
            if lo == 0 || lo > hi || hi > bands {
                return Err(Error::Bounds(format!(
                    "exclusion range [{lo},{hi}] invalid for {bands} bands"
                )));
            }
        }
        if let Some(p) = sorted.windows(2).find(|p| p[1].0 <= p[0].1) {
            return Err(Error::Bounds(format!(
                "exclusion ranges [{},{}] and [{},{}] overlap",
                p[0].0, p[0].1, p[1].0, p[1].1
            )));
        }
        Ok(())
    }

    /// Number of bands removed.
    pub fn excluded_count(&self) -> usize {
        self.excluded_ranges
            .iter()
            .map(|&(lo, hi)| hi - lo + 1)
            .sum()
    }

    fn is_excluded(&self, band_1based: usize) -> bool {
        self.excluded_ranges
            .iter()
            .any(|&(lo, hi)| (lo..=hi).contains(&band_1based))
    }
}

/// Drops the listed bands, keeping the order of the rest.
pub fn exclude_bands(cube: &HsiCube, list: &BandExclusionList) -> Result<HsiCube> {
    list.validate(cube.bands())?;
    let keep: Vec<usize> = (0..cube.bands())
        .filter(|&b| !list.is_excluded(b + 1))
        .collect();
    if keep.is_empty() {
        return Err(Error::Bounds("exclusion list removes every band".into()));
    }
    let data = cube.data.select(Axis(0), &keep);
    let wavelengths_nm = cube
        .wavelengths_nm
        .as_ref()
        .map(|wl| keep.iter().map(|&b| wl[b]).collect());
    Ok(HsiCube {
        data,
        wavelengths_nm,
    })
}

// ---------------------------------------------------------------------------
// Procedural scenes

pub const MAX_MATERIALS: usize = 16;

/// Parameters of a procedural test scene.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SceneSpec {
    pub height: usize,
    pub width: usize,
    pub bands: usize,
    pub seed: u64,
    pub n_materials: usize,
}

impl SceneSpec {
    pub fn new(height: usize, width: usize, bands: usize, seed: u64) -> Self {
        SceneSpec {
            height,
            width,
            bands,
            seed,
            n_materials: 6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.height == 0 || self.width == 0 || self.bands == 0 {
            return Err(Error::Parameter("scene dimensions must be positive".into()));
        }
        if self.n_materials == 0 || self.n_materials > MAX_MATERIALS {
            return Err(Error::Parameter(format!(
                "n_materials must be in 1..={MAX_MATERIALS}, got {}",
                self.n_materials
            )));
        }
        Ok(())
    }
}

/// Sharpness of the soft arg-max that turns noise fields into abundances;
/// high enough that material boundaries are edges rather than gradients.
const ABUNDANCE_SHARPNESS: f64 = 100.0;

/// A smooth endmember: bright baseline with a few Gaussian features.
fn endmember<R: rand::Rng>(bands: usize, rng: &mut R) -> Vec<f64> {
    let base = 0.62 + 0.18 * open_unit(rng);
    let features: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| {
            let amp = 0.4 * open_unit(rng) - 0.2;
            let centre = open_unit(rng);
            let width = 0.06 + 0.25 * open_unit(rng);
            (amp, centre, width)
        })
        .collect();
    (0..bands)
        .map(|b| {
            let t = if bands > 1 {
                b as f64 / (bands - 1) as f64
            } else {
                0.5
            };
            let v = features.iter().fold(base, |acc, &(a, c, w)| {
                acc + a * (-0.5 * ((t - c) / w).powi(2)).exp()
            });
            v.clamp(0.05, 0.98)
        })
        .collect()
}

/// Linear mixture of smooth endmember spectra with piecewise-smooth
/// abundance maps. Pure function of `spec`; values lie in [0, 1].
pub fn synth_scene(spec: &SceneSpec) -> Result<HsiCube> {
    spec.validate()?;
    let mut rng = seed::rng(seed::mix64(spec.seed, stream::SCENE));
    let spectra: Vec<Vec<f64>> = (0..spec.n_materials)
        .map(|_| endmember(spec.bands, &mut rng))
        .collect();
    let fields: Vec<Array2<f64>> = (0..spec.n_materials)
        .map(|_| value_noise(spec.height, spec.width, 4, 3, &mut rng))
        .collect();

    let mut data = Array3::<f32>::zeros((spec.bands, spec.height, spec.width));
    let mut weights = vec![0.0f64; spec.n_materials];
    for y in 0..spec.height {
        for x in 0..spec.width {
            let peak = fields
                .iter()
                .map(|f| f[[y, x]])
                .fold(f64::NEG_INFINITY, f64::max);
            let mut total = 0.0;
            for (w, f) in weights.iter_mut().zip(&fields) {
                *w = (ABUNDANCE_SHARPNESS * (f[[y, x]] - peak)).exp();
                total += *w;
            }
            for b in 0..spec.bands {
                let v: f64 = weights
                    .iter()
                    .zip(&spectra)
                    .map(|(w, s)| w / total * s[b])
                    .sum();
                data[[b, y, x]] = v.clamp(0.0, 1.0) as f32;
            }
        }
    }
    HsiCube::new(data)
}

// ---------------------------------------------------------------------------
// PGM export

/// Min-max maps `values` to 8 bits and writes a binary P5 image. A constant
/// input maps to mid-grey 128.
pub fn write_pgm(values: ArrayView2<'_, f64>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_pgm(values)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn encode_pgm(values: ArrayView2<'_, f64>) -> Result<Vec<u8>> {
    let (h, w) = values.dim();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invariant(
            "PGM source contains non-finite values".into(),
        ));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    out.extend(values.iter().map(|&v| {
        if range > 0.0 {
            ((v - lo) / range * 255.0).round().clamp(0.0, 255.0) as u8
        } else {
            128
        }
    }));
    Ok(out)
}

pub fn export_band_pgm(cube: &HsiCube, band: usize, path: impl AsRef<Path>) -> Result<()> {
    if band >= cube.bands() {
        return Err(Error::Bounds(format!(
            "band {band} out of range for {} bands",
            cube.bands()
        )));
    }
    write_pgm(cube.band(band).mapv(f64::from).view(), path)
}
