use ndarray::{Array2, ArrayView2, Axis};

use crate::error::{Error, Result};

pub const DEFAULT_SWT_LEVELS: usize = 2;

/// Undecimated 2-D Haar decomposition. `subbands[0]` is the final
/// approximation; then for each level `1..=levels` come the `LH`, `HL` and
/// `HH` details (first letter: filter along width, second: along height).
#[derive(Debug, Clone, PartialEq)]
pub struct SwtBands {
    pub levels: usize,
    pub subbands: Vec<Array2<f64>>,
}

impl SwtBands {
    pub fn count_for(levels: usize) -> usize {
        3 * levels + 1
    }

    pub fn approximation(&self) -> &Array2<f64> {
        &self.subbands[0]
    }

    /// `(LH, HL, HH)` of `level` (1-based).
    pub fn details(&self, level: usize) -> (&Array2<f64>, &Array2<f64>, &Array2<f64>) {
        let base = 1 + 3 * (level - 1);
        (
            &self.subbands[base],
            &self.subbands[base + 1],
            &self.subbands[base + 2],
        )
    }
}

/// Periodic two-tap analysis along `axis` at dilation `step`:
/// `lo[n] = (x[n] + x[n+step]) / 2`, `hi[n] = (x[n] - x[n+step]) / 2`.
fn analyse(x: ArrayView2<'_, f64>, axis: Axis, step: usize) -> (Array2<f64>, Array2<f64>) {
    let (h, w) = x.dim();
    let n = x.len_of(axis);
    let mut lo = Array2::zeros((h, w));
    let mut hi = Array2::zeros((h, w));
    for i in 0..h {
        for j in 0..w {
            let (pi, pj) = if axis == Axis(0) {
                ((i + step) % n, j)
            } else {
                (i, (j + step) % n)
            };
            let (a, b) = (x[[i, j]], x[[pi, pj]]);
            lo[[i, j]] = 0.5 * (a + b);
            hi[[i, j]] = 0.5 * (a - b);
        }
    }
    (lo, hi)
}

/// Inverse of [`analyse`], averaging the two polyphase reconstructions
/// `x[n] = lo[n] + hi[n]` and `x[n] = lo[n-step] - hi[n-step]`.
fn synthesise(lo: &Array2<f64>, hi: &Array2<f64>, axis: Axis, step: usize) -> Array2<f64> {
    let (h, w) = lo.dim();
    let n = lo.len_of(axis);
    Array2::from_shape_fn((h, w), |(i, j)| {
        let (pi, pj) = if axis == Axis(0) {
            ((i + n - step % n) % n, j)
        } else {
            (i, (j + n - step % n) % n)
        };
        0.5 * (lo[[i, j]] + hi[[i, j]] + lo[[pi, pj]] - hi[[pi, pj]])
    })
}

fn check_size(h: usize, w: usize, levels: usize) -> Result<()> {
    if levels == 0 {
        return Err(Error::Parameter("wavelet levels must be at least 1".into()));
    }
    let need = 1usize.checked_shl(levels as u32).unwrap_or(usize::MAX);
    if h < need || w < need {
        return Err(Error::Size(format!(
            "{levels}-level wavelet transform needs at least {need}x{need} pixels, got {h}x{w}"
        )));
    }
    Ok(())
}

pub fn swt2(image: ArrayView2<'_, f64>, levels: usize) -> Result<SwtBands> {
    let (h, w) = image.dim();
    check_size(h, w, levels)?;
    let mut approx = image.to_owned();
    let mut details = Vec::with_capacity(3 * levels);
    for level in 1..=levels {
        let step = 1 << (level - 1);
        let (l, hgh) = analyse(approx.view(), Axis(1), step);
        let (ll, lh) = analyse(l.view(), Axis(0), step);
        let (hl, hh) = analyse(hgh.view(), Axis(0), step);
        details.extend([lh, hl, hh]);
        approx = ll;
    }
    let mut subbands = Vec::with_capacity(3 * levels + 1);
    subbands.push(approx);
    subbands.extend(details);
    Ok(SwtBands { levels, subbands })
}

pub fn iswt2(bands: &SwtBands) -> Result<Array2<f64>> {
    if bands.subbands.len() != SwtBands::count_for(bands.levels) {
        return Err(Error::Invariant(format!(
            "{} levels need {} sub-bands, got {}",
            bands.levels,
            SwtBands::count_for(bands.levels),
            bands.subbands.len()
        )));
    }
    let (h, w) = bands.approximation().dim();
    check_size(h, w, bands.levels)?;
    let mut approx = bands.approximation().clone();
    for level in (1..=bands.levels).rev() {
        let step = 1 << (level - 1);
        let (lh, hl, hh) = bands.details(level);
        let l = synthesise(&approx, lh, Axis(0), step);
        let hgh = synthesise(hl, hh, Axis(0), step);
        approx = synthesise(&l, &hgh, Axis(1), step);
    }
    Ok(approx)
}
