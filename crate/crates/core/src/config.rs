//! Tunable cutoffs for stroke matching and star scoring.
//!
//! Every field has a default, so a thresholds file only needs the keys it
//! overrides. The shipped `config/thresholds.json` spells out all defaults.

use std::cmp::Ordering;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::normalize::{DEFAULT_RESAMPLE_POINTS, DEFAULT_SQUARE_SIZE};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read thresholds file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("thresholds schema violation at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("invalid thresholds: {0}")]
    Invalid(String),
}

/// Star regions for a metric where higher is better (ratios in [0, 1]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RatioCutoffs {
    pub three_star_min: f64,
    pub two_star_min: f64,
}

impl Default for RatioCutoffs {
    fn default() -> Self {
        RatioCutoffs {
            three_star_min: 0.9,
            two_star_min: 0.6,
        }
    }
}

impl RatioCutoffs {
    pub fn stars(&self, value: f64) -> u8 {
        if value >= self.three_star_min {
            3
        } else if value >= self.two_star_min {
            2
        } else {
            1
        }
    }
}

/// Star regions for a distance where lower is better.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct DistanceCutoffs {
    pub three_star_max: f64,
    pub two_star_max: f64,
}

impl Default for DistanceCutoffs {
    fn default() -> Self {
        DistanceCutoffs {
            three_star_max: 12.0,
            two_star_max: 30.0,
        }
    }
}

impl DistanceCutoffs {
    pub fn stars(&self, value: f64) -> u8 {
        if value <= self.three_star_max {
            3
        } else if value <= self.two_star_max {
            2
        } else {
            1
        }
    }
}

/// Star regions for a ratio that should stay near 1: closed intervals
/// `[low, high]`, the three-star band nested inside the two-star band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct BandCutoffs {
    pub three_star: [f64; 2],
    pub two_star: [f64; 2],
}

impl Default for BandCutoffs {
    fn default() -> Self {
        BandCutoffs {
            three_star: [0.75, 1.33],
            two_star: [0.5, 2.0],
        }
    }
}

impl BandCutoffs {
    pub fn stars(&self, value: f64) -> u8 {
        let within = |band: [f64; 2]| value >= band[0] && value <= band[1];
        if within(self.three_star) {
            3
        } else if within(self.two_star) {
            2
        } else {
            1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct EditCutoffs {
    pub three_star_max: u32,
    pub two_star_max: u32,
}

impl Default for EditCutoffs {
    fn default() -> Self {
        EditCutoffs {
            three_star_max: 0,
            two_star_max: 2,
        }
    }
}

impl EditCutoffs {
    pub fn stars(&self, edits: f64) -> u8 {
        if edits <= self.three_star_max as f64 {
            3
        } else if edits <= self.two_star_max as f64 {
            2
        } else {
            1
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct StarCutoffs {
    pub stroke_match: RatioCutoffs,
    pub stroke_valid: RatioCutoffs,
    pub stroke_exist: RatioCutoffs,
    pub stroke_order: RatioCutoffs,
    pub stroke_direction: RatioCutoffs,
    pub stroke_edit: EditCutoffs,
    pub stroke_length: BandCutoffs,
    pub stroke_closeness: DistanceCutoffs,
    pub stroke_speed: BandCutoffs,
    pub symbol_speed: BandCutoffs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct ThresholdConfig {
    pub version: u32,
    pub resample_n: usize,
    pub scale_size: f64,
    /// Largest Hausdorff distance (normalized frame) accepted as a match.
    pub match_threshold: f64,
    pub stars: StarCutoffs,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        ThresholdConfig {
            version: CONFIG_VERSION,
            resample_n: DEFAULT_RESAMPLE_POINTS,
            scale_size: DEFAULT_SQUARE_SIZE,
            match_threshold: 60.0,
            stars: StarCutoffs::default(),
        }
    }
}

impl ThresholdConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ThresholdConfig =
            serde_path_to_error::deserialize(de).map_err(|e| ConfigError::Schema {
                path: e.path().to_string(),
                message: e.inner().to_string(),
            })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization cannot fail")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |msg: String| Err(ConfigError::Invalid(msg));
        if self.version != CONFIG_VERSION {
            return fail(format!("unsupported version {}", self.version));
        }
        if self.resample_n < 2 {
            return fail(format!("resampleN must be at least 2, got {}", self.resample_n));
        }
        if !(self.scale_size.is_finite() && self.scale_size > 0.0) {
            return fail(format!("scaleSize must be positive, got {}", self.scale_size));
        }
        if !(self.match_threshold.is_finite() && self.match_threshold >= 0.0) {
            return fail(format!("matchThreshold must be non-negative, got {}", self.match_threshold));
        }
        let s = &self.stars;
        for (name, r) in [
            ("strokeMatch", s.stroke_match),
            ("strokeValid", s.stroke_valid),
            ("strokeExist", s.stroke_exist),
            ("strokeOrder", s.stroke_order),
            ("strokeDirection", s.stroke_direction),
        ] {
            let ordered = matches!(
                r.two_star_min.partial_cmp(&r.three_star_min),
                Some(Ordering::Less | Ordering::Equal)
            );
            if !ordered {
                return fail(format!("{name}: twoStarMin must not exceed threeStarMin"));
            }
        }
        if s.stroke_edit.three_star_max > s.stroke_edit.two_star_max {
            return fail("strokeEdit: threeStarMax must not exceed twoStarMax".into());
        }
        let c = s.stroke_closeness;
        if !(0.0 <= c.three_star_max && c.three_star_max <= c.two_star_max) {
            return fail("strokeCloseness: need 0 <= threeStarMax <= twoStarMax".into());
        }
        for (name, b) in [
            ("strokeLength", s.stroke_length),
            ("strokeSpeed", s.stroke_speed),
            ("symbolSpeed", s.symbol_speed),
        ] {
            let nested = b.two_star[0] <= b.three_star[0]
                && b.three_star[0] <= b.three_star[1]
                && b.three_star[1] <= b.two_star[1];
            if !nested {
                return fail(format!("{name}: threeStar band must lie inside twoStar band"));
            }
        }
        Ok(())
    }
}
