//! Composite degradation synthesis.
//!
//! Fired families are applied in the order of the classical imaging model:
//! cloud occlusion, resolution loss, additive noise, then band-missing
//! stripes. Every random draw is keyed by a sub-seed of the recipe seed, so
//! [`degrade_pipeline`] is a pure function of `(cube, recipe)`.

mod awgn;
mod blur;
mod cloud;
mod missing;
mod prompt;
mod recipe;

pub use awgn::{apply_noise, mean_power};
pub use blur::{apply_spatial_blur, apply_spectral_blur, resize_bilinear, spectral_window};
pub use cloud::{apply_cloud, blend_cloud, cloud_mask, cloud_plate, CloudDraw, CloudParams};
pub use missing::{
    apply_band_missing, apply_band_missing_to, choose_bands, missing_rows, PARTIAL_ROW_PROB,
};
pub use prompt::{render_prompt, render_tags, PromptDescription, PromptFormat, Tag, CLEAN_TOKEN};
pub use recipe::{
    sample_recipe, BandMissing, BlurKind, CloudKind, DegradationRecipe, Family, MissingKind,
    RecipeSampler, DEFAULT_BANDS,
};

use crate::cube::HsiCube;
use crate::error::Result;
use crate::seed::{self, stream};

/// Sub-seed of a recipe used by the cloud generator.
pub fn cloud_seed(recipe: &DegradationRecipe) -> u64 {
    seed::mix64(recipe.seed, stream::CLOUD)
}

/// Sub-seed of a recipe used by the noise generator.
pub fn noise_seed(recipe: &DegradationRecipe) -> u64 {
    seed::mix64(recipe.seed, stream::NOISE)
}

/// Sub-seed of a recipe used for partial row draws.
pub fn missing_rows_seed(recipe: &DegradationRecipe) -> u64 {
    seed::mix64(recipe.seed, stream::MISSING_ROWS)
}

/// Applies the fired families of `recipe` and describes the result.
pub fn degrade_pipeline(
    cube: &HsiCube,
    recipe: &DegradationRecipe,
) -> Result<(HsiCube, PromptDescription)> {
    recipe.validate_for(cube.height(), cube.width(), cube.bands())?;
    let mut out = cube.clone();
    if let Some(kind) = recipe.cloud {
        out = apply_cloud(&out, kind, &CloudParams::for_kind(kind), cloud_seed(recipe))?;
    }
    if let Some(kind) = recipe.blur {
        out = match kind {
            BlurKind::Spatial => apply_spatial_blur(&out)?,
            BlurKind::Spectral => apply_spectral_blur(&out)?,
        };
    }
    if let Some(snr) = recipe.noise_snr {
        out = apply_noise(&out, snr, noise_seed(recipe))?;
    }
    if let Some(m) = &recipe.missing {
        out = apply_band_missing_to(&out, m.kind, &m.bands, missing_rows_seed(recipe))?;
    }
    Ok((out, PromptDescription::from_recipe(recipe)))
}
