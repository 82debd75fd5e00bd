//! Lesson-wide summary of a quiz run.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::report::AssessmentReport;
use crate::scoring::MetricId;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuizError {
    #[error("a quiz summary needs at least one report")]
    NoReports,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MetricStars {
    pub id: MetricId,
    pub stars: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CharacterSummary {
    pub label: String,
    pub metrics: Vec<MetricStars>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MetricMean {
    pub id: MetricId,
    pub mean: f64,
    /// `mean` rounded half-up to one decimal.
    pub display: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct QuizReport {
    pub lesson_id: String,
    pub characters: Vec<CharacterSummary>,
    pub metric_means: Vec<MetricMean>,
    pub overall_mean: f64,
    pub overall_display: f64,
}

/// Half-up rounding of `sum / count` to one decimal, computed on integers so
/// values such as 2.25 never drift below the midpoint.
pub fn round_half_up_tenths(sum: u64, count: u64) -> f64 {
    debug_assert!(count > 0);
    let tenths = (20 * sum + count) / (2 * count);
    tenths as f64 / 10.0
}

pub fn quiz_summary(lesson_id: &str, reports: &[AssessmentReport]) -> Result<QuizReport, QuizError> {
    if reports.is_empty() {
        return Err(QuizError::NoReports);
    }
    let characters = reports
        .iter()
        .map(|r| CharacterSummary {
            label: r.label.clone(),
            metrics: MetricId::ALL
                .iter()
                .map(|&id| MetricStars { id, stars: r.stars(id) })
                .collect(),
        })
        .collect();
    let count = reports.len() as u64;
    let mut overall = 0u64;
    let metric_means = MetricId::ALL
        .iter()
        .map(|&id| {
            let sum: u64 = reports.iter().map(|r| u64::from(r.stars(id))).sum();
            overall += sum;
            MetricMean {
                id,
                mean: sum as f64 / count as f64,
                display: round_half_up_tenths(sum, count),
            }
        })
        .collect();
    let entries = count * MetricId::ALL.len() as u64;
    Ok(QuizReport {
        lesson_id: lesson_id.to_string(),
        characters,
        metric_means,
        overall_mean: overall as f64 / entries as f64,
        overall_display: round_half_up_tenths(overall, entries),
    })
}
