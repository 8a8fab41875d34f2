//! Hyperspectral composite-degradation toolkit.
//!
//! * [`cube`]: the band-sequential [`HsiCube`] model, HSC file I/O, band
//!   exclusion, procedural scenes and PGM export.
//! * [`degrade`]: cloud, blur, noise and band-missing operators, the gated
//!   degradation sampler and prompt rendering.
//! * [`freq`]: unitary 2-D spectra, per-radial-bin affine models
//!   `F(deg) = (1 + λ) F(clean) + μ`, their fitting and regularised inversion.
//! * [`modulate`]: forward reference ops for prompt-driven frequency
//!   modulation and query-exchanging attention.
//! * [`metrics`]: PSNR, SAM, RMSE, ERGAS and the training loss terms.

pub mod cube;
pub mod degrade;
pub mod error;
pub mod freq;
pub mod metrics;
pub mod modulate;
mod noise;
pub mod seed;

pub use cube::{BandExclusionList, HsiCube, SceneSpec};
pub use error::{Error, Result};
