//! Per-radial-bin affine degradation models in the Fourier domain.
//!
//! For every radial bin `b` the model states
//!
//! ```text
//! F(degraded) = (1 + lambda_b) * F(clean) + mu_b
//! ```
//!
//! for all coefficients of all bands whose radius falls in the bin. Fitting is
//! a complex least-squares problem with two unknowns per bin. Alongside
//! `(lambda, mu)` the fit records the bin's residual-to-signal power ratio,
//! which the inverse uses as a Wiener term.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::{Array2, Array3, Axis};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::cube::HsiCube;
use crate::error::{Error, Result};

use super::fft::{fft2_band, radius, BandSpectrum};

/// Largest radius of a centred coefficient, in cycles per sample.
pub const MAX_RADIUS: f64 = std::f64::consts::FRAC_1_SQRT_2;
pub const DEFAULT_BINS: usize = 16;
pub const DEFAULT_EPSILON: f64 = 1e-3;

pub const CSV_HEADER: &str = "bin,edge_lo,edge_hi,lambda_re,lambda_im,mu_re,mu_im,nsr";
const CSV_HEADER_BASIC: &str = "bin,edge_lo,edge_hi,lambda_re,lambda_im,mu_re,mu_im";

/// Uniform bin edges over `[0, sqrt(2)/2]`.
pub fn uniform_edges(n_bins: usize) -> Vec<f64> {
    let mut edges: Vec<f64> = (0..=n_bins)
        .map(|b| MAX_RADIUS * b as f64 / n_bins as f64)
        .collect();
    edges[n_bins] = MAX_RADIUS;
    edges
}

/// Bin index of radius `r`; radii beyond the last edge land in the last bin.
pub fn bin_index(edges: &[f64], r: f64) -> usize {
    let n = edges.len() - 1;
    edges[1..n].partition_point(|&e| e <= r)
}

/// Bin index of every centred coefficient of an `height x width` spectrum.
pub fn bin_map(edges: &[f64], height: usize, width: usize) -> Array2<usize> {
    Array2::from_shape_fn((height, width), |(i, j)| {
        bin_index(edges, radius(i, j, height, width))
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffineFreqModel {
    pub bin_edges: Vec<f64>,
    pub lambda: Vec<Complex64>,
    pub mu: Vec<Complex64>,
    /// Per-bin residual power over clean-signal power from the fit; zero for
    /// models that were not fitted.
    pub nsr: Vec<f64>,
}

impl AffineFreqModel {
    /// `lambda = mu = 0`: the identity degradation.
    pub fn identity(n_bins: usize) -> Self {
        AffineFreqModel::uniform(n_bins, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    }

    /// The same `(lambda, mu)` in every bin.
    pub fn uniform(n_bins: usize, lambda: Complex64, mu: Complex64) -> Self {
        AffineFreqModel {
            bin_edges: uniform_edges(n_bins),
            lambda: vec![lambda; n_bins],
            mu: vec![mu; n_bins],
            nsr: vec![0.0; n_bins],
        }
    }

    pub fn n_bins(&self) -> usize {
        self.lambda.len()
    }

    /// `1 + lambda_b`.
    pub fn gain(&self, bin: usize) -> Complex64 {
        Complex64::new(1.0, 0.0) + self.lambda[bin]
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.lambda.len();
        if n == 0 || self.mu.len() != n || self.nsr.len() != n || self.bin_edges.len() != n + 1 {
            return Err(Error::Invariant(format!(
                "model arrays disagree: {} lambda, {} mu, {} nsr, {} edges",
                n,
                self.mu.len(),
                self.nsr.len(),
                self.bin_edges.len()
            )));
        }
        if self.bin_edges.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::Invariant(
                "bin edges must be strictly increasing".into(),
            ));
        }
        let finite = |c: &Complex64| c.re.is_finite() && c.im.is_finite();
        if !self.lambda.iter().all(finite)
            || !self.mu.iter().all(finite)
            || !self.nsr.iter().all(|v| v.is_finite() && *v >= 0.0)
        {
            return Err(Error::Invariant("model coefficients must be finite".into()));
        }
        Ok(())
    }

    /// Bins whose gain `|1 + lambda|^2` falls below `epsilon`, where the
    /// inverse relies on the regularisation floor. `lambda = -1` is always
    /// flagged.
    pub fn non_invertible_bins(&self, epsilon: f64) -> Vec<usize> {
        (0..self.n_bins())
            .filter(|&b| {
                let g = self.gain(b).norm_sqr();
                g == 0.0 || g < epsilon
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for b in 0..self.n_bins() {
            let _ = writeln!(
                out,
                "{b},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
                self.bin_edges[b],
                self.bin_edges[b + 1],
                self.lambda[b].re,
                self.lambda[b].im,
                self.mu[b].re,
                self.mu[b].im,
                self.nsr[b]
            );
        }
        out
    }

    /// Parses the CSV form. The trailing `nsr` column is optional; files
    /// without it load with `nsr = 0`.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::format(1, "", "empty model file"))?;
        let columns = match header.trim() {
            CSV_HEADER => 8,
            CSV_HEADER_BASIC => 7,
            other => return Err(Error::format(1, other, "unexpected model header")),
        };
        let mut edges = Vec::new();
        let mut model = AffineFreqModel {
            bin_edges: Vec::new(),
            lambda: Vec::new(),
            mu: Vec::new(),
            nsr: Vec::new(),
        };
        for (i, line) in lines {
            let n = i + 1;
            let fields: Vec<&str> = line.trim().split(',').collect();
            if fields.len() != columns {
                return Err(Error::format(
                    n,
                    line,
                    format!("expected {columns} columns"),
                ));
            }
            let bin: usize = fields[0]
                .parse()
                .map_err(|_| Error::format(n, line, "bad bin index"))?;
            if bin != model.lambda.len() {
                return Err(Error::format(
                    n,
                    line,
                    "bins must be listed in order from 0",
                ));
            }
            let mut v = [0.0f64; 7];
            for (slot, f) in v.iter_mut().zip(&fields[1..]) {
                *slot = f
                    .parse()
                    .map_err(|_| Error::format(n, line, "bad number"))?;
            }
            if edges.is_empty() {
                edges.push(v[0]);
            } else if *edges.last().unwrap() != v[0] {
                return Err(Error::format(n, line, "bin edges are not contiguous"));
            }
            edges.push(v[1]);
            model.lambda.push(Complex64::new(v[2], v[3]));
            model.mu.push(Complex64::new(v[4], v[5]));
            model.nsr.push(if columns == 8 { v[6] } else { 0.0 });
        }
        model.bin_edges = edges;
        model.validate()?;
        Ok(model)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        AffineFreqModel::from_csv(&text)
    }
}

/// Spectra of every band, computed concurrently and returned in band order.
pub fn cube_spectra(cube: &HsiCube, bands: &[usize]) -> Result<Vec<BandSpectrum>> {
    bands
        .par_iter()
        .map(|&b| fft2_band(cube.band(b).mapv(f64::from).view()))
        .collect()
}

/// Paired clean/degraded coefficients of one radial bin, band-major then
/// row-major.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BinSamples {
    pub clean: Vec<Complex64>,
    pub degraded: Vec<Complex64>,
}

impl BinSamples {
    pub fn len(&self) -> usize {
        self.clean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clean.is_empty()
    }

    /// `sum |d - gain * c - mu|^2` over the bin.
    pub fn residual_sum_squares(&self, gain: Complex64, mu: Complex64) -> f64 {
        self.clean
            .iter()
            .zip(&self.degraded)
            .map(|(c, d)| (d - gain * c - mu).norm_sqr())
            .sum()
    }
}

fn check_bands(cube: &HsiCube, bands: &[usize]) -> Result<()> {
    match bands.iter().find(|&&b| b >= cube.bands()) {
        Some(b) => Err(Error::Bounds(format!(
            "band {b} out of range for {} bands",
            cube.bands()
        ))),
        None if bands.is_empty() => Err(Error::Parameter("no bands selected".into())),
        None => Ok(()),
    }
}

/// Groups the coefficients of the selected bands by radial bin.
pub fn gather_bin_samples(
    clean: &HsiCube,
    degraded: &HsiCube,
    edges: &[f64],
    bands: &[usize],
) -> Result<Vec<BinSamples>> {
    clean.check_same_shape(degraded)?;
    check_bands(clean, bands)?;
    let (h, w) = (clean.height(), clean.width());
    let bins = bin_map(edges, h, w);
    let clean_spectra = cube_spectra(clean, bands)?;
    let degraded_spectra = cube_spectra(degraded, bands)?;
    let mut samples = vec![BinSamples::default(); edges.len() - 1];
    for (cs, ds) in clean_spectra.iter().zip(&degraded_spectra) {
        for ((idx, &b), (c, d)) in bins
            .indexed_iter()
            .zip(cs.coeffs.iter().zip(ds.coeffs.iter()))
        {
            let _ = idx;
            samples[b].clean.push(*c);
            samples[b].degraded.push(*d);
        }
    }
    Ok(samples)
}

/// Least-squares `(gain, mu, nsr)` of one bin, via the centred normal
/// equations. A bin whose clean coefficients are all equal cannot identify
/// the gain; it gets `gain = 1` and the intercept that is then optimal.
pub fn fit_bin(samples: &BinSamples) -> (Complex64, Complex64, f64) {
    let n = samples.len() as f64;
    let mean = |v: &[Complex64]| v.iter().sum::<Complex64>() / n;
    let (mc, md) = (mean(&samples.clean), mean(&samples.degraded));
    let mut scc = 0.0;
    let mut total = 0.0;
    let mut scd = Complex64::new(0.0, 0.0);
    for (c, d) in samples.clean.iter().zip(&samples.degraded) {
        let dc = c - mc;
        scc += dc.norm_sqr();
        total += c.norm_sqr();
        scd += dc.conj() * (d - md);
    }
    let gain = if scc > 1e-24 * total && scc > 0.0 {
        scd / scc
    } else {
        Complex64::new(1.0, 0.0)
    };
    let mu = md - gain * mc;
    let signal = scc / n;
    let nsr = if signal > 0.0 {
        samples.residual_sum_squares(gain, mu) / n / signal
    } else {
        0.0
    };
    (gain, mu, nsr)
}

/// Fits a model on a subset of bands.
pub fn fit_affine_model_bands(
    clean: &HsiCube,
    degraded: &HsiCube,
    n_bins: usize,
    bands: &[usize],
) -> Result<AffineFreqModel> {
    if n_bins == 0 {
        return Err(Error::Parameter("n_bins must be at least 1".into()));
    }
    let edges = uniform_edges(n_bins);
    let samples = gather_bin_samples(clean, degraded, &edges, bands)?;
    let degenerate: Vec<usize> = samples
        .iter()
        .enumerate()
        .filter(|(_, s)| s.len() < 2)
        .map(|(b, _)| b)
        .collect();
    if !degenerate.is_empty() {
        return Err(Error::DegenerateBins(degenerate));
    }
    let fits: Vec<(Complex64, Complex64, f64)> = samples.par_iter().map(fit_bin).collect();
    let one = Complex64::new(1.0, 0.0);
    let model = AffineFreqModel {
        bin_edges: edges,
        lambda: fits.iter().map(|f| f.0 - one).collect(),
        mu: fits.iter().map(|f| f.1).collect(),
        nsr: fits.iter().map(|f| f.2).collect(),
    };
    model.validate()?;
    Ok(model)
}

/// Fits a model jointly over all bands.
pub fn fit_affine_model(
    clean: &HsiCube,
    degraded: &HsiCube,
    n_bins: usize,
) -> Result<AffineFreqModel> {
    let bands: Vec<usize> = (0..clean.bands()).collect();
    fit_affine_model_bands(clean, degraded, n_bins, &bands)
}

/// Applies `f(bin, coefficient)` to every band's spectrum and transforms back.
fn map_spectra<F>(cube: &HsiCube, edges: &[f64], f: F) -> Result<HsiCube>
where
    F: Fn(usize, Complex64) -> Complex64 + Sync,
{
    let (h, w) = (cube.height(), cube.width());
    let bins = bin_map(edges, h, w);
    let bands: Vec<usize> = (0..cube.bands()).collect();
    let planes: Vec<Array2<f64>> = cube_spectra(cube, &bands)?
        .into_par_iter()
        .map(|mut spec| {
            spec.coeffs.zip_mut_with(&bins, |c, &b| *c = f(b, *c));
            spec.inverse_real()
        })
        .collect();
    let mut out = Array3::<f64>::zeros((cube.bands(), h, w));
    for (mut dst, plane) in out.axis_iter_mut(Axis(0)).zip(&planes) {
        dst.assign(plane);
    }
    cube.rebuild_from_f64(&out)
}

/// Degrades `cube` by the model: `F' = (1 + lambda_b) F + mu_b` per bin, then
/// the real part of the inverse transform. Used to synthesise degradations
/// with known coefficients.
pub fn apply_affine_model(cube: &HsiCube, model: &AffineFreqModel) -> Result<HsiCube> {
    model.validate()?;
    map_spectra(cube, &model.bin_edges, |b, c| {
        model.gain(b) * c + model.mu[b]
    })
}

/// Regularised inverse of the model:
///
/// ```text
/// F_rest = (F_deg - mu_b) * conj(g_b) / max(|g_b|^2 + nsr_b, epsilon),  g_b = 1 + lambda_b
/// ```
///
/// With `nsr = 0` this is the plain inverse guarded by `epsilon`; a fitted
/// `nsr` turns it into the per-bin Wiener estimate.
pub fn invert_affine_model(
    degraded: &HsiCube,
    model: &AffineFreqModel,
    epsilon: f64,
) -> Result<HsiCube> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Parameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    model.validate()?;
    let factors: Vec<Complex64> = (0..model.n_bins())
        .map(|b| {
            let g = model.gain(b);
            g.conj() / (g.norm_sqr() + model.nsr[b]).max(epsilon)
        })
        .collect();
    map_spectra(degraded, &model.bin_edges, |b, c| {
        (c - model.mu[b]) * factors[b]
    })
}

/// `log(1 + |F(clean - degraded)|)` of one band, DC-centred.
pub fn residual_spectrum(clean: &HsiCube, degraded: &HsiCube, band: usize) -> Result<Array2<f64>> {
    clean.check_same_shape(degraded)?;
    check_bands(clean, &[band])?;
    let diff = clean.band(band).mapv(f64::from) - degraded.band(band).mapv(f64::from);
    let spec = fft2_band(diff.view())?;
    Ok(spec.coeffs.mapv(|c| c.norm().ln_1p()))
}

/// Mean of `values` within each radial bin.
pub fn radial_profile(values: &Array2<f64>, n_bins: usize) -> Vec<f64> {
    let (h, w) = values.dim();
    let bins = bin_map(&uniform_edges(n_bins), h, w);
    let mut sums = vec![0.0; n_bins];
    let mut counts = vec![0usize; n_bins];
    for (v, &b) in values.iter().zip(bins.iter()) {
        sums[b] += v;
        counts[b] += 1;
    }
    sums.iter()
        .zip(&counts)
        .map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect()
}
