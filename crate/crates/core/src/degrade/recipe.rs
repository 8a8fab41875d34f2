//! Gated degradation recipes and their key=value text form.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::seed::{self, stream};

use super::missing::choose_bands;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Cloud,
    Blur,
    Noise,
    BandMissing,
}

impl Family {
    /// Application order of the composite model.
    pub const ALL: [Family; 4] = [
        Family::Cloud,
        Family::Blur,
        Family::Noise,
        Family::BandMissing,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Family::Cloud => "cloud",
            Family::Blur => "blur",
            Family::Noise => "noise",
            Family::BandMissing => "band_missing",
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.id() == s)
            .ok_or_else(|| Error::Vocabulary(s.to_string()))
    }
}

macro_rules! subtype_enum {
    ($name:ident { $($variant:ident => $id:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn id(self) -> &'static str {
                match self {
                    $($name::$variant => $id),+
                }
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                $name::ALL
                    .iter()
                    .copied()
                    .find(|v| v.id() == s)
                    .ok_or_else(|| Error::Vocabulary(s.to_string()))
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.id())
            }
        }
    };
}

subtype_enum!(CloudKind { Thick => "thick", Thin => "thin" });
subtype_enum!(BlurKind { Spatial => "spatial", Spectral => "spectral" });
subtype_enum!(MissingKind { Complete => "complete", BandWise => "band_wise", Partial => "partial" });

#[derive(Debug, Clone, PartialEq)]
pub struct BandMissing {
    pub kind: MissingKind,
    /// Sorted, distinct, 0-based band indices.
    pub bands: Vec<usize>,
}

impl BandMissing {
    pub fn k(&self) -> usize {
        self.bands.len()
    }
}

/// Fully resolved record of one gated degradation draw.
///
/// A family has fired exactly when its field is `Some`, so the "subtype
/// present iff fired" rule holds by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DegradationRecipe {
    pub seed: u64,
    pub gate_prob: f64,
    pub cloud: Option<CloudKind>,
    pub blur: Option<BlurKind>,
    /// Linear signal-to-noise power ratio.
    pub noise_snr: Option<f64>,
    pub missing: Option<BandMissing>,
}

impl DegradationRecipe {
    /// The identity recipe.
    pub fn clean(seed: u64) -> Self {
        DegradationRecipe {
            seed,
            gate_prob: 0.0,
            cloud: None,
            blur: None,
            noise_snr: None,
            missing: None,
        }
    }

    pub fn fired(&self) -> Vec<Family> {
        let mut out = Vec::with_capacity(4);
        if self.cloud.is_some() {
            out.push(Family::Cloud);
        }
        if self.blur.is_some() {
            out.push(Family::Blur);
        }
        if self.noise_snr.is_some() {
            out.push(Family::Noise);
        }
        if self.missing.is_some() {
            out.push(Family::BandMissing);
        }
        out
    }

    pub fn has_fired(&self, family: Family) -> bool {
        self.fired().contains(&family)
    }

    /// Checks the recipe against a cube shape.
    pub fn validate_for(&self, height: usize, width: usize, bands: usize) -> Result<()> {
        if !(0.0..=1.0).contains(&self.gate_prob) {
            return Err(Error::Parameter(format!(
                "gate_prob {} outside [0, 1]",
                self.gate_prob
            )));
        }
        if let Some(snr) = self.noise_snr {
            if !(snr > 0.0 && snr.is_finite()) {
                return Err(Error::Parameter(format!(
                    "noise_snr {snr} must be positive"
                )));
            }
        }
        if self.blur == Some(BlurKind::Spatial) && (height < 4 || width < 4) {
            return Err(Error::Size(format!(
                "spatial blur needs at least 4x4 pixels, cube is {height}x{width}"
            )));
        }
        if self.blur == Some(BlurKind::Spectral) && bands < 5 {
            return Err(Error::Size(format!(
                "spectral blur needs at least 5 bands, cube has {bands}"
            )));
        }
        if let Some(m) = &self.missing {
            if m.bands.windows(2).any(|p| p[1] <= p[0]) {
                return Err(Error::Invariant(
                    "missing_bands must be sorted and distinct".into(),
                ));
            }
            if let Some(&last) = m.bands.last() {
                if last >= bands {
                    return Err(Error::Bounds(format!(
                        "missing band {last} out of range for {bands} bands"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Key=value text form, one key per line.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# hsikit degradation recipe\n");
        out.push_str(&format!("seed={}\n", self.seed));
        out.push_str(&format!("gate_prob={:?}\n", self.gate_prob));
        let fired: Vec<&str> = self.fired().iter().map(|f| f.id()).collect();
        out.push_str(&format!("fired={}\n", fired.join(",")));
        if let Some(c) = self.cloud {
            out.push_str(&format!("cloud_subtype={c}\n"));
        }
        if let Some(b) = self.blur {
            out.push_str(&format!("blur_subtype={b}\n"));
        }
        if let Some(snr) = self.noise_snr {
            out.push_str(&format!("noise_snr={snr:?}\n"));
        }
        if let Some(m) = &self.missing {
            let bands: Vec<String> = m.bands.iter().map(|b| b.to_string()).collect();
            out.push_str(&format!("missing_subtype={}\n", m.kind));
            out.push_str(&format!("missing_k={}\n", m.k()));
            out.push_str(&format!("missing_bands={}\n", bands.join(",")));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut seed = None;
        let mut gate_prob = None;
        let mut fired: Option<Vec<Family>> = None;
        let mut recipe = DegradationRecipe::clean(0);
        let mut missing_kind = None;
        let mut missing_k = None;
        let mut missing_bands = None;

        for (i, raw) in text.lines().enumerate() {
            let n = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::format(n, raw, "expected key=value"))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| Error::format(n, raw, format!("invalid {what}"));
            match key {
                "seed" => seed = Some(value.parse::<u64>().map_err(|_| bad("seed"))?),
                "gate_prob" => {
                    gate_prob = Some(value.parse::<f64>().map_err(|_| bad("gate_prob"))?)
                }
                "fired" => {
                    let list = if value.is_empty() {
                        Vec::new()
                    } else {
                        value
                            .split(',')
                            .map(|s| s.trim().parse::<Family>())
                            .collect::<Result<Vec<_>>>()
                            .map_err(|_| bad("family list"))?
                    };
                    fired = Some(list);
                }
                "cloud_subtype" => {
                    recipe.cloud = Some(value.parse().map_err(|_| bad("cloud subtype"))?)
                }
                "blur_subtype" => {
                    recipe.blur = Some(value.parse().map_err(|_| bad("blur subtype"))?)
                }
                "noise_snr" => {
                    recipe.noise_snr = Some(value.parse::<f64>().map_err(|_| bad("noise_snr"))?)
                }
                "missing_subtype" => {
                    missing_kind = Some(
                        value
                            .parse::<MissingKind>()
                            .map_err(|_| bad("missing subtype"))?,
                    )
                }
                "missing_k" => {
                    missing_k = Some(value.parse::<usize>().map_err(|_| bad("missing_k"))?)
                }
                "missing_bands" => {
                    let bands = if value.is_empty() {
                        Vec::new()
                    } else {
                        value
                            .split(',')
                            .map(|s| s.trim().parse::<usize>())
                            .collect::<std::result::Result<Vec<_>, _>>()
                            .map_err(|_| bad("band list"))?
                    };
                    missing_bands = Some(bands);
                }
                _ => return Err(Error::format(n, raw, "unknown recipe key")),
            }
        }

        let whole = |msg: &str| Error::format(0, "", msg.to_string());
        recipe.seed = seed.ok_or_else(|| whole("recipe lacks `seed`"))?;
        recipe.gate_prob = gate_prob.ok_or_else(|| whole("recipe lacks `gate_prob`"))?;
        recipe.missing = match (missing_kind, missing_k, missing_bands) {
            (Some(kind), Some(k), Some(bands)) => {
                if bands.len() != k {
                    return Err(whole("missing_k does not match missing_bands"));
                }
                Some(BandMissing { kind, bands })
            }
            (None, None, None) => None,
            _ => return Err(whole("band-missing keys must appear together")),
        };
        let mut declared = fired.ok_or_else(|| whole("recipe lacks `fired`"))?;
        declared.sort();
        declared.dedup();
        if declared != recipe.fired() {
            return Err(whole("`fired` disagrees with the subtype keys present"));
        }
        Ok(recipe)
    }
}

/// Sampling configuration of the gated model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecipeSampler {
    /// Probability that each family's gate opens.
    pub gate_prob: f64,
    /// Band count of the cubes the recipe will be applied to.
    pub bands: usize,
    /// Largest band-missing count; `None` means `bands / 2`.
    pub max_missing: Option<usize>,
    pub snr_mean: f64,
    pub snr_std: f64,
}

pub const DEFAULT_BANDS: usize = 172;

impl RecipeSampler {
    pub fn new(gate_prob: f64, bands: usize) -> Self {
        RecipeSampler {
            gate_prob,
            bands,
            max_missing: None,
            snr_mean: 35.0,
            snr_std: 5.0,
        }
    }

    pub fn k_range(&self) -> (usize, usize) {
        let hi = self
            .max_missing
            .unwrap_or(self.bands / 2)
            .clamp(1, self.bands.max(1));
        (1, hi)
    }

    /// Draws a recipe.
    ///
    /// The four gates are drawn first, then every subtype and parameter is
    /// drawn unconditionally, so the same seed yields the same subtypes for
    /// any gate probability.
    pub fn sample(&self, seed: u64) -> Result<DegradationRecipe> {
        if !(0.0..=1.0).contains(&self.gate_prob) {
            return Err(Error::Parameter(format!(
                "gate probability {} outside [0, 1]",
                self.gate_prob
            )));
        }
        if self.bands == 0 {
            return Err(Error::Parameter("band count must be positive".into()));
        }
        let snr_dist = Normal::new(self.snr_mean, self.snr_std)
            .map_err(|e| Error::Parameter(format!("SNR distribution: {e}")))?;

        let mut rng = seed::rng(seed);
        let gates: [bool; 4] = std::array::from_fn(|_| rng.random_bool(self.gate_prob));

        let cloud = CloudKind::ALL[rng.random_range(0..CloudKind::ALL.len())];
        let blur = BlurKind::ALL[rng.random_range(0..BlurKind::ALL.len())];
        let snr = loop {
            let v = snr_dist.sample(&mut rng);
            if v >= 1.0 {
                break v;
            }
        };
        let missing_kind = MissingKind::ALL[rng.random_range(0..MissingKind::ALL.len())];
        let (k_lo, k_hi) = self.k_range();
        let k = rng.random_range(k_lo..=k_hi);
        let bands = choose_bands(self.bands, k, seed::mix64(seed, stream::MISSING_BANDS))?;

        Ok(DegradationRecipe {
            seed,
            gate_prob: self.gate_prob,
            cloud: gates[0].then_some(cloud),
            blur: gates[1].then_some(blur),
            noise_snr: gates[2].then_some(snr),
            missing: gates[3].then_some(BandMissing {
                kind: missing_kind,
                bands,
            }),
        })
    }
}

/// Draws a recipe for the default 172-band cube layout.
pub fn sample_recipe(seed: u64, gate_prob: f64) -> Result<DegradationRecipe> {
    RecipeSampler::new(gate_prob, DEFAULT_BANDS).sample(seed)
}
