//! Degradation descriptions in the short and long prompt formats.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

use super::recipe::{BlurKind, CloudKind, DegradationRecipe, Family, MissingKind};

/// The eight canonical degradation tokens, in vocabulary order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tag {
    ThicklyCloudy,
    ThinlyCloudy,
    Noisy,
    SpatialBlurring,
    SpectralBlurring,
    CompleteMissing,
    BandWiseMissing,
    PartialMissing,
}

impl Tag {
    pub const VOCABULARY: [Tag; 8] = [
        Tag::ThicklyCloudy,
        Tag::ThinlyCloudy,
        Tag::Noisy,
        Tag::SpatialBlurring,
        Tag::SpectralBlurring,
        Tag::CompleteMissing,
        Tag::BandWiseMissing,
        Tag::PartialMissing,
    ];

    pub fn token(self) -> &'static str {
        match self {
            Tag::ThicklyCloudy => "thickly cloudy",
            Tag::ThinlyCloudy => "thinly cloudy",
            Tag::Noisy => "noisy",
            Tag::SpatialBlurring => "spatial blurring",
            Tag::SpectralBlurring => "spectral blurring",
            Tag::CompleteMissing => "complete missing",
            Tag::BandWiseMissing => "band-wise missing",
            Tag::PartialMissing => "partial missing",
        }
    }

    /// Position in [`Tag::VOCABULARY`].
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn family(self) -> Family {
        match self {
            Tag::ThicklyCloudy | Tag::ThinlyCloudy => Family::Cloud,
            Tag::Noisy => Family::Noise,
            Tag::SpatialBlurring | Tag::SpectralBlurring => Family::Blur,
            Tag::CompleteMissing | Tag::BandWiseMissing | Tag::PartialMissing => {
                Family::BandMissing
            }
        }
    }

    /// Rank in prompt order: cloud, noise, blur, band-missing.
    fn prompt_rank(self) -> (usize, usize) {
        let family = match self.family() {
            Family::Cloud => 0,
            Family::Noise => 1,
            Family::Blur => 2,
            Family::BandMissing => 3,
        };
        (family, self.index())
    }

    fn blur_domain(self) -> Option<&'static str> {
        match self {
            Tag::SpatialBlurring => Some("spatial"),
            Tag::SpectralBlurring => Some("spectral"),
            _ => None,
        }
    }
}

impl FromStr for Tag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Tag::VOCABULARY
            .into_iter()
            .find(|t| t.token() == s.trim())
            .ok_or_else(|| Error::Vocabulary(s.to_string()))
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PromptFormat {
    #[default]
    Short,
    Long,
}

impl FromStr for PromptFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "short" => Ok(PromptFormat::Short),
            "long" => Ok(PromptFormat::Long),
            other => Err(Error::Parameter(format!("unknown prompt format `{other}`"))),
        }
    }
}

/// Rendering of an empty tag set in the short format.
pub const CLEAN_TOKEN: &str = "clean";
const LONG_PREFIX: &str = "This hyperspectral image";

fn canonical(tags: &[Tag]) -> Vec<Tag> {
    let mut sorted = tags.to_vec();
    sorted.sort_by_key(|t| t.prompt_rank());
    sorted.dedup();
    sorted
}

fn quoted(tags: &[Tag]) -> String {
    tags.iter()
        .map(|t| format!("'{}'", t.token()))
        .collect::<Vec<_>>()
        .join(", ")
}

fn render_long(tags: &[Tag], n_missing_bands: usize) -> String {
    let missing: Vec<Tag> = tags
        .iter()
        .copied()
        .filter(|t| t.family() == Family::BandMissing)
        .collect();
    let confront: Vec<Tag> = tags
        .iter()
        .copied()
        .filter(|t| matches!(t.family(), Family::Cloud | Family::Noise))
        .collect();
    let blur: Vec<String> = tags
        .iter()
        .filter_map(|t| t.blur_domain())
        .map(|d| format!("'blurring effect in {d} domain'"))
        .collect();

    let mut clauses: Vec<String> = Vec::new();
    if !missing.is_empty() {
        let unit = if n_missing_bands == 1 {
            "band"
        } else {
            "bands"
        };
        clauses.push(format!(
            "faces with {} on {n_missing_bands} {unit}",
            quoted(&missing)
        ));
    }
    if !confront.is_empty() {
        let lead = if clauses.is_empty() {
            "faces with"
        } else {
            "it also confronts"
        };
        clauses.push(format!("{lead} {}", quoted(&confront)));
    }
    if !blur.is_empty() {
        let lead = if clauses.is_empty() {
            "faces with"
        } else {
            "besides, there exists"
        };
        clauses.push(format!("{lead} {}", blur.join(", ")));
    }
    if clauses.is_empty() {
        return format!("{LONG_PREFIX} is clean.");
    }
    format!("{LONG_PREFIX} {}.", clauses.join("; "))
}

/// Renders typed tags.
pub fn render_tags(tags: &[Tag], n_missing_bands: usize, format: PromptFormat) -> String {
    let tags = canonical(tags);
    match format {
        PromptFormat::Short if tags.is_empty() => CLEAN_TOKEN.to_string(),
        PromptFormat::Short => tags
            .iter()
            .map(|t| t.token())
            .collect::<Vec<_>>()
            .join(", "),
        PromptFormat::Long => render_long(&tags, n_missing_bands),
    }
}

/// Renders canonical token strings; unknown tokens are a vocabulary error.
pub fn render_prompt<S: AsRef<str>>(
    tags: &[S],
    n_missing_bands: usize,
    format: PromptFormat,
) -> Result<String> {
    let parsed = tags
        .iter()
        .map(|t| t.as_ref().parse::<Tag>())
        .collect::<Result<Vec<_>>>()?;
    Ok(render_tags(&parsed, n_missing_bands, format))
}

/// Structured description of a degradation plus both renderings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptDescription {
    pub tags: Vec<Tag>,
    pub n_missing_bands: usize,
    pub short_text: String,
    pub long_text: String,
}

impl PromptDescription {
    pub fn from_tags(tags: &[Tag], n_missing_bands: usize) -> Self {
        let tags = canonical(tags);
        PromptDescription {
            short_text: render_tags(&tags, n_missing_bands, PromptFormat::Short),
            long_text: render_tags(&tags, n_missing_bands, PromptFormat::Long),
            tags,
            n_missing_bands,
        }
    }

    /// One tag per fired family of `recipe`.
    pub fn from_recipe(recipe: &DegradationRecipe) -> Self {
        let mut tags = Vec::new();
        if let Some(c) = recipe.cloud {
            tags.push(match c {
                CloudKind::Thick => Tag::ThicklyCloudy,
                CloudKind::Thin => Tag::ThinlyCloudy,
            });
        }
        if recipe.noise_snr.is_some() {
            tags.push(Tag::Noisy);
        }
        if let Some(b) = recipe.blur {
            tags.push(match b {
                BlurKind::Spatial => Tag::SpatialBlurring,
                BlurKind::Spectral => Tag::SpectralBlurring,
            });
        }
        if let Some(m) = &recipe.missing {
            tags.push(match m.kind {
                MissingKind::Complete => Tag::CompleteMissing,
                MissingKind::BandWise => Tag::BandWiseMissing,
                MissingKind::Partial => Tag::PartialMissing,
            });
        }
        let n = recipe.missing.as_ref().map_or(0, |m| m.k());
        PromptDescription::from_tags(&tags, n)
    }

    pub fn text(&self, format: PromptFormat) -> &str {
        match format {
            PromptFormat::Short => &self.short_text,
            PromptFormat::Long => &self.long_text,
        }
    }

    pub fn token_strings(&self) -> Vec<&'static str> {
        self.tags.iter().map(|t| t.token()).collect()
    }
}
