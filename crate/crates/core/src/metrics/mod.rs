//! Image-quality metrics and training loss terms.

mod loss;
mod swt;

pub use loss::{
    bmse_loss, l1_loss, sam_loss, swt_loss, total_loss, total_loss_with, LossReport, LossWeights,
    LOSS_CSV_HEADER,
};
pub use swt::{iswt2, swt2, SwtBands, DEFAULT_SWT_LEVELS};

use ndarray::Axis;

use crate::cube::HsiCube;
use crate::error::{Error, Result};

pub const PSNR_CAP_DB: f64 = 100.0;
pub const SAM_EPS: f64 = 1e-8;
pub const ERGAS_EPS: f64 = 1e-8;

pub const METRICS_CSV_HEADER: &str = "psnr_db,sam_deg,rmse,ergas";

fn sq_err_sum(a: &HsiCube, b: &HsiCube) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum()
}

pub fn mse(reference: &HsiCube, test: &HsiCube) -> Result<f64> {
    reference.check_same_shape(test)?;
    Ok(sq_err_sum(reference, test) / reference.as_slice().len() as f64)
}

/// `10 log10(range^2 / MSE)` over the whole cube, capped at 100 dB.
pub fn psnr(reference: &HsiCube, test: &HsiCube, data_range: f64) -> Result<f64> {
    if !(data_range > 0.0 && data_range.is_finite()) {
        return Err(Error::Parameter(format!(
            "data range must be positive, got {data_range}"
        )));
    }
    let m = mse(reference, test)?;
    if m == 0.0 {
        return Ok(PSNR_CAP_DB);
    }
    Ok((10.0 * (data_range * data_range / m).log10()).min(PSNR_CAP_DB))
}

pub fn rmse(reference: &HsiCube, test: &HsiCube) -> Result<f64> {
    Ok(mse(reference, test)?.sqrt())
}

/// Angle in radians between two spectra, with the `ε`-stabilised cosine.
pub fn spectral_angle(x: &[f64], y: &[f64]) -> f64 {
    let (mut dot, mut nx, mut ny) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        dot += a * b;
        nx += a * a;
        ny += b * b;
    }
    ((dot + SAM_EPS) / (nx.sqrt() * ny.sqrt() + SAM_EPS))
        .clamp(-1.0, 1.0)
        .acos()
}

/// Spectral angle in degrees between two pixel spectra.
pub fn sam_pixel_deg(x: &[f32], y: &[f32]) -> f64 {
    let a: Vec<f64> = x.iter().map(|&v| v as f64).collect();
    let b: Vec<f64> = y.iter().map(|&v| v as f64).collect();
    spectral_angle(&a, &b).to_degrees()
}

/// Mean per-pixel spectral angle in radians.
pub fn sam_rad(reference: &HsiCube, test: &HsiCube) -> Result<f64> {
    reference.check_same_shape(test)?;
    if reference.bands() < 2 {
        return Err(Error::Size(format!(
            "spectral angle needs at least 2 bands, got {}",
            reference.bands()
        )));
    }
    let (b, h, w) = reference.data().dim();
    let r = reference.data();
    let t = test.data();
    let mut x = vec![0.0; b];
    let mut y = vec![0.0; b];
    let mut total = 0.0;
    for i in 0..h {
        for j in 0..w {
            for k in 0..b {
                x[k] = r[[k, i, j]] as f64;
                y[k] = t[[k, i, j]] as f64;
            }
            total += spectral_angle(&x, &y);
        }
    }
    Ok(total / (h * w) as f64)
}

/// Mean per-pixel spectral angle in degrees.
pub fn sam(reference: &HsiCube, test: &HsiCube) -> Result<f64> {
    Ok(sam_rad(reference, test)?.to_degrees())
}

/// `100 * ratio * sqrt(mean_b (RMSE_b / mean_b)^2)`. Band means with
/// magnitude below `1e-8` are replaced by `1e-8`.
pub fn ergas(reference: &HsiCube, test: &HsiCube, scale_ratio: f64) -> Result<f64> {
    reference.check_same_shape(test)?;
    let n = (reference.height() * reference.width()) as f64;
    let mut acc = 0.0;
    for (rb, tb) in reference
        .data()
        .axis_iter(Axis(0))
        .zip(test.data().axis_iter(Axis(0)))
    {
        let mut sum = 0.0;
        let mut err = 0.0;
        for (&x, &y) in rb.iter().zip(tb.iter()) {
            sum += x as f64;
            let d = x as f64 - y as f64;
            err += d * d;
        }
        let mut mean = sum / n;
        if mean.abs() < ERGAS_EPS {
            mean = ERGAS_EPS;
        }
        acc += err / n / (mean * mean);
    }
    Ok(100.0 * scale_ratio * (acc / reference.bands() as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub psnr_db: f64,
    pub sam_deg: f64,
    pub rmse: f64,
    pub ergas: f64,
}

impl MetricsReport {
    /// All four metrics with ERGAS scale ratio 1. SAM is reported as 0 for
    /// single-band cubes.
    pub fn compute(reference: &HsiCube, test: &HsiCube, data_range: f64) -> Result<Self> {
        Ok(MetricsReport {
            psnr_db: psnr(reference, test, data_range)?,
            sam_deg: if reference.bands() >= 2 {
                sam(reference, test)?
            } else {
                0.0
            },
            rmse: rmse(reference, test)?,
            ergas: ergas(reference, test, 1.0)?,
        })
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{:?},{:?},{:?},{:?}",
            self.psnr_db, self.sam_deg, self.rmse, self.ergas
        )
    }
}
