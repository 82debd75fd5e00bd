//! The ten metric identifiers and their conversion to one to three stars.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::ThresholdConfig;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScoreError {
    #[error("unknown metric id `{0}`")]
    UnknownMetric(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Structure,
    Technique,
    Precision,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricId {
    StrokeMatch,
    StrokeValid,
    StrokeExist,
    StrokeOrder,
    StrokeDirection,
    StrokeEdit,
    StrokeLength,
    StrokeCloseness,
    StrokeSpeed,
    SymbolSpeed,
}

impl MetricId {
    /// Report order.
    pub const ALL: [MetricId; 10] = [
        MetricId::StrokeMatch,
        MetricId::StrokeValid,
        MetricId::StrokeExist,
        MetricId::StrokeOrder,
        MetricId::StrokeDirection,
        MetricId::StrokeEdit,
        MetricId::StrokeLength,
        MetricId::StrokeCloseness,
        MetricId::StrokeSpeed,
        MetricId::SymbolSpeed,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MetricId::StrokeMatch => "stroke_match",
            MetricId::StrokeValid => "stroke_valid",
            MetricId::StrokeExist => "stroke_exist",
            MetricId::StrokeOrder => "stroke_order",
            MetricId::StrokeDirection => "stroke_direction",
            MetricId::StrokeEdit => "stroke_edit",
            MetricId::StrokeLength => "stroke_length",
            MetricId::StrokeCloseness => "stroke_closeness",
            MetricId::StrokeSpeed => "stroke_speed",
            MetricId::SymbolSpeed => "symbol_speed",
        }
    }

    pub fn family(self) -> Family {
        match self {
            MetricId::StrokeMatch | MetricId::StrokeValid | MetricId::StrokeExist => Family::Structure,
            MetricId::StrokeOrder | MetricId::StrokeDirection => Family::Technique,
            _ => Family::Precision,
        }
    }

    /// Stars for a reduced raw value. `None` means there was nothing
    /// comparable to measure and scores the minimum.
    pub fn stars(self, raw: Option<f64>, cfg: &ThresholdConfig) -> u8 {
        let Some(v) = raw else { return 1 };
        if v.is_nan() {
            return 1;
        }
        let s = &cfg.stars;
        match self {
            MetricId::StrokeMatch => s.stroke_match.stars(v),
            MetricId::StrokeValid => s.stroke_valid.stars(v),
            MetricId::StrokeExist => s.stroke_exist.stars(v),
            MetricId::StrokeOrder => s.stroke_order.stars(v),
            MetricId::StrokeDirection => s.stroke_direction.stars(v),
            MetricId::StrokeEdit => s.stroke_edit.stars(v),
            MetricId::StrokeLength => s.stroke_length.stars(v),
            MetricId::StrokeCloseness => s.stroke_closeness.stars(v),
            MetricId::StrokeSpeed => s.stroke_speed.stars(v),
            MetricId::SymbolSpeed => s.symbol_speed.stars(v),
        }
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricId {
    type Err = ScoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MetricId::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| ScoreError::UnknownMetric(s.to_string()))
    }
}

/// Looks up a metric by id and scores `raw` under `cfg`.
pub fn score_metric(metric_id: &str, raw: Option<f64>, cfg: &ThresholdConfig) -> Result<u8, ScoreError> {
    Ok(metric_id.parse::<MetricId>()?.stars(raw, cfg))
}

/// Mean of the comparable per-pair values; `None` when there are none.
pub fn reduce_mean(values: impl IntoIterator<Item = Option<f64>>) -> Option<f64> {
    let (sum, count) = values
        .into_iter()
        .flatten()
        .fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}
