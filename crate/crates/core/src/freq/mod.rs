//! Fourier-domain analysis of degradations.
//!
//! Spectra are unitary and DC-centred. Degradations are summarised per
//! radial frequency bin by an affine model `F(deg) = (1 + λ) F(clean) + μ`,
//! which can be fitted from a clean/degraded pair and inverted as a
//! restoration baseline.

mod affine;
mod fft;
mod split;

pub use affine::{
    apply_affine_model, bin_index, bin_map, cube_spectra, fit_affine_model, fit_affine_model_bands,
    fit_bin, gather_bin_samples, invert_affine_model, radial_profile, residual_spectrum,
    uniform_edges, AffineFreqModel, BinSamples, CSV_HEADER, DEFAULT_BINS, DEFAULT_EPSILON,
    MAX_RADIUS,
};
pub use fft::{
    centred_frequency, fft2_band, fft2_complex, fftshift, ifft2_centered, ifftshift, radius,
    BandSpectrum,
};
pub use split::{low_mask, nyquist_radius, split_low_high, FreqSplit, DEFAULT_CUTOFF};
