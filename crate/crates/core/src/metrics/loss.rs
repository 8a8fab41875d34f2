use ndarray::Axis;
use rayon::prelude::*;

use crate::cube::HsiCube;
use crate::error::{Error, Result};

use super::swt::{swt2, SwtBands, DEFAULT_SWT_LEVELS};

pub const LOSS_CSV_HEADER: &str = "l1,sam_loss_rad,swt,bmse,total,w1,w2,w3,w4";

/// Coefficients of the weighted total loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub l1: f64,
    pub sam: f64,
    pub swt: f64,
    pub bmse: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            l1: 1.0,
            sam: 0.001,
            swt: 0.01,
            bmse: 0.01,
        }
    }
}

impl LossWeights {
    pub fn as_tuple(&self) -> (f64, f64, f64, f64) {
        (self.l1, self.sam, self.swt, self.bmse)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossReport {
    pub l1: f64,
    pub sam_loss_rad: f64,
    pub swt: f64,
    pub bmse: f64,
    pub total: f64,
    pub weights: LossWeights,
}

impl LossReport {
    pub fn recompute_total(&self) -> f64 {
        let w = self.weights;
        w.l1 * self.l1 + w.sam * self.sam_loss_rad + w.swt * self.swt + w.bmse * self.bmse
    }

    pub fn csv_row(&self) -> String {
        let w = self.weights;
        format!(
            "{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
            self.l1, self.sam_loss_rad, self.swt, self.bmse, self.total, w.l1, w.sam, w.swt, w.bmse
        )
    }
}

/// Mean absolute error over the cube.
pub fn l1_loss(reference: &HsiCube, test: &HsiCube) -> Result<f64> {
    reference.check_same_shape(test)?;
    let sum: f64 = reference
        .as_slice()
        .iter()
        .zip(test.as_slice())
        .map(|(&a, &b)| (a as f64 - b as f64).abs())
        .sum();
    Ok(sum / reference.as_slice().len() as f64)
}

/// Mean spectral angle in radians.
pub fn sam_loss(reference: &HsiCube, test: &HsiCube) -> Result<f64> {
    super::sam_rad(reference, test)
}

/// Mean over bands of each band's RMS error.
pub fn bmse_loss(reference: &HsiCube, test: &HsiCube) -> Result<f64> {
    reference.check_same_shape(test)?;
    let n = (reference.height() * reference.width()) as f64;
    let total: f64 = reference
        .data()
        .axis_iter(Axis(0))
        .zip(test.data().axis_iter(Axis(0)))
        .map(|(r, t)| {
            let ss: f64 = r
                .iter()
                .zip(t.iter())
                .map(|(&a, &b)| {
                    let d = a as f64 - b as f64;
                    d * d
                })
                .sum();
            (ss / n).sqrt()
        })
        .sum();
    Ok(total / reference.bands() as f64)
}

/// `sum_j weight_j * mean|SWT_j(ref) - SWT_j(test)|`, averaged over bands.
pub fn swt_loss(
    reference: &HsiCube,
    test: &HsiCube,
    levels: usize,
    weights: &[f64],
) -> Result<f64> {
    reference.check_same_shape(test)?;
    if weights.len() != SwtBands::count_for(levels) {
        return Err(Error::Parameter(format!(
            "{levels} wavelet levels need {} sub-band weights, got {}",
            SwtBands::count_for(levels),
            weights.len()
        )));
    }
    let per_band: Vec<f64> = (0..reference.bands())
        .into_par_iter()
        .map(|b| {
            let r = swt2(reference.band(b).mapv(f64::from).view(), levels)?;
            let t = swt2(test.band(b).mapv(f64::from).view(), levels)?;
            Ok(r.subbands
                .iter()
                .zip(&t.subbands)
                .zip(weights)
                .map(|((x, y), w)| {
                    let mad: f64 = x
                        .iter()
                        .zip(y.iter())
                        .map(|(a, b)| (a - b).abs())
                        .sum::<f64>()
                        / x.len() as f64;
                    w * mad
                })
                .sum())
        })
        .collect::<Result<_>>()?;
    Ok(per_band.iter().sum::<f64>() / per_band.len() as f64)
}

/// All four loss terms with explicit weights. The SAM term is 0 for
/// single-band cubes.
pub fn total_loss_with(
    reference: &HsiCube,
    test: &HsiCube,
    weights: LossWeights,
    swt_levels: usize,
    subband_weights: &[f64],
) -> Result<LossReport> {
    let l1 = l1_loss(reference, test)?;
    let sam_loss_rad = if reference.bands() >= 2 {
        sam_loss(reference, test)?
    } else {
        0.0
    };
    let swt = swt_loss(reference, test, swt_levels, subband_weights)?;
    let bmse = bmse_loss(reference, test)?;
    let mut report = LossReport {
        l1,
        sam_loss_rad,
        swt,
        bmse,
        total: 0.0,
        weights,
    };
    report.total = report.recompute_total();
    Ok(report)
}

/// Default weights `(1, 0.001, 0.01, 0.01)`, two wavelet levels, unit
/// sub-band weights.
pub fn total_loss(reference: &HsiCube, test: &HsiCube) -> Result<LossReport> {
    let subband_weights = vec![1.0; SwtBands::count_for(DEFAULT_SWT_LEVELS)];
    total_loss_with(
        reference,
        test,
        LossWeights::default(),
        DEFAULT_SWT_LEVELS,
        &subband_weights,
    )
}
