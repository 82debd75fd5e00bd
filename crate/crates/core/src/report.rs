//! Full assessment of one written character against its model template.
//!
//! Structure matching happens in the whole-sketch normalized frame. Direction
//! and the geometric precision metrics are then measured in a frame fitted to
//! the matched strokes only (on both sides), so a missing or extraneous stroke
//! does not shift or rescale the strokes that did match.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::ThresholdConfig;
use crate::ink::{InkError, SessionEvents, Sketch};
use crate::normalize::{normalize, normalize_to_reference, NormalizeError, NormalizedSketch};
use crate::precision::{assess_edit, assess_length_closeness, assess_speed, PrecisionResult};
use crate::scoring::{reduce_mean, Family, MetricId};
use crate::store::{StoreError, Template, TemplateStore};
use crate::structure::{match_strokes, structure_metrics, MatchMap, StructureError, StructureResult};
use crate::technique::{assess_direction, assess_order, TechniqueError, TechniqueResult};

#[derive(Debug, Error)]
pub enum AssessError {
    #[error(transparent)]
    Ink(#[from] InkError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Technique(#[from] TechniqueError),
}

impl AssessError {
    pub fn is_empty_sketch(&self) -> bool {
        matches!(
            self,
            AssessError::Ink(InkError::EmptySketch)
                | AssessError::Structure(StructureError::EmptyInput)
                | AssessError::Normalize(NormalizeError::EmptySketch)
        )
    }

    pub fn is_not_found(&self) -> bool {
        matches!(self, AssessError::Store(e) if e.is_not_found())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MetricEntry {
    pub id: MetricId,
    pub family: Family,
    /// Reduced value the stars are computed from; `null` when nothing was
    /// comparable.
    pub raw: Option<f64>,
    pub stars: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_pair: Option<Vec<Option<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flags: Option<Vec<bool>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OverlayTag {
    Matched,
    Missing,
    Extraneous,
    OrderWrong,
    DirectionWrong,
}

impl OverlayTag {
    pub const ALL: [OverlayTag; 5] = [
        OverlayTag::Matched,
        OverlayTag::Missing,
        OverlayTag::Extraneous,
        OverlayTag::OrderWrong,
        OverlayTag::DirectionWrong,
    ];

    pub fn color(self) -> &'static str {
        match self {
            OverlayTag::Matched => "green",
            OverlayTag::Missing => "gray",
            OverlayTag::Extraneous => "red",
            OverlayTag::OrderWrong => "orange",
            OverlayTag::DirectionWrong => "purple",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OverlayStroke {
    pub input_index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_index: Option<usize>,
    pub tags: Vec<OverlayTag>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OverlayMissing {
    pub model_index: usize,
    pub tags: Vec<OverlayTag>,
}

/// Per-stroke tags that drive the replay animations, plus the legend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Overlay {
    pub strokes: Vec<OverlayStroke>,
    pub missing: Vec<OverlayMissing>,
    pub color_key: BTreeMap<OverlayTag, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AssessmentReport {
    pub label: String,
    pub metrics: Vec<MetricEntry>,
    pub match_map: MatchMap,
    pub overlay: Overlay,
}

impl AssessmentReport {
    pub fn metric(&self, id: MetricId) -> &MetricEntry {
        self.metrics
            .iter()
            .find(|m| m.id == id)
            .expect("reports carry all ten metrics")
    }

    pub fn stars(&self, id: MetricId) -> u8 {
        self.metric(id).stars
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serialization cannot fail")
    }
}

/// Every intermediate result of one assessment.
#[derive(Debug, Clone, PartialEq)]
pub struct Assessment {
    pub structure: StructureResult,
    pub technique: TechniqueResult,
    pub precision: PrecisionResult,
    pub report: AssessmentReport,
}

/// Scores `input` against `template`. Session events default to the ones
/// embedded in the sketch.
pub fn assess_character(
    template: &Template,
    input: &Sketch,
    events: Option<&SessionEvents>,
    cfg: &ThresholdConfig,
) -> Result<AssessmentReport, AssessError> {
    assess_detailed(template, input, events, cfg).map(|a| a.report)
}

/// Looks up the template named by the sketch's label and assesses it.
pub fn assess_with_store(
    store: &TemplateStore,
    input: &Sketch,
    cfg: &ThresholdConfig,
) -> Result<AssessmentReport, AssessError> {
    let template = store.lookup_template(input.label())?;
    assess_character(template, input, None, cfg)
}

pub fn assess_detailed(
    template: &Template,
    input: &Sketch,
    events: Option<&SessionEvents>,
    cfg: &ThresholdConfig,
) -> Result<Assessment, AssessError> {
    input.validate()?;
    let events = events.or(input.events.as_ref());
    let (n, size) = (cfg.resample_n, cfg.scale_size);

    let model_frame = model_frame(template, n, size)?;
    let input_frame = normalize(input, n, size)?;
    let map = match_strokes(&input_frame, &model_frame, cfg.match_threshold)?;
    let structure = structure_metrics(&map);

    let input_ref: Vec<usize> = map.pairs.iter().map(|p| p.input_index).collect();
    let model_ref: Vec<usize> = map.pairs.iter().map(|p| p.model_index).collect();
    let input_pairs = normalize_to_reference(input, &input_ref, n, size)?;
    let model_pairs = normalize_to_reference(&template.raw, &model_ref, n, size)?;

    let order = assess_order(&map);
    let direction = assess_direction(&map, &input_pairs.strokes, &model_pairs.strokes)?;
    let technique = TechniqueResult::new(order, direction);

    let (length_ratios, closeness) =
        assess_length_closeness(&map, &input_pairs.strokes, &model_pairs.strokes)?;
    let (stroke_speed_ratios, symbol_speed_ratio) = assess_speed(&map, input, &template.raw);
    let precision = PrecisionResult {
        edit_count: assess_edit(events)?,
        length_ratios,
        closeness_distances: closeness,
        stroke_speed_ratios,
        symbol_speed_ratio,
    };

    let report = build_report(&template.label, &structure, &technique, &precision, cfg);
    Ok(Assessment {
        structure,
        technique,
        precision,
        report,
    })
}

fn model_frame(template: &Template, n: usize, size: f64) -> Result<NormalizedSketch, NormalizeError> {
    let cached = &template.normalized;
    if cached.resample_points == n && cached.size == size {
        Ok(cached.clone())
    } else {
        normalize(&template.raw, n, size)
    }
}

fn build_report(
    label: &str,
    structure: &StructureResult,
    technique: &TechniqueResult,
    precision: &PrecisionResult,
    cfg: &ThresholdConfig,
) -> AssessmentReport {
    let entry = |id: MetricId, raw: Option<f64>, per_pair: Option<Vec<Option<f64>>>, flags: Option<Vec<bool>>| {
        MetricEntry {
            id,
            family: id.family(),
            raw,
            stars: id.stars(raw, cfg),
            per_pair,
            flags,
        }
    };
    let closeness: Vec<Option<f64>> = precision.closeness_distances.iter().copied().map(Some).collect();
    let metrics = vec![
        entry(MetricId::StrokeMatch, Some(structure.match_ratio), None, None),
        entry(MetricId::StrokeValid, Some(structure.valid_ratio), None, None),
        entry(MetricId::StrokeExist, Some(structure.exist_ratio), None, None),
        entry(
            MetricId::StrokeOrder,
            Some(technique.order_ratio),
            None,
            Some(technique.order_correct.clone()),
        ),
        entry(
            MetricId::StrokeDirection,
            Some(technique.direction_ratio),
            None,
            Some(technique.direction_correct.clone()),
        ),
        entry(MetricId::StrokeEdit, Some(precision.edit_count as f64), None, None),
        entry(
            MetricId::StrokeLength,
            reduce_mean(precision.length_ratios.iter().copied()),
            Some(precision.length_ratios.clone()),
            None,
        ),
        entry(
            MetricId::StrokeCloseness,
            reduce_mean(closeness.iter().copied()),
            Some(closeness),
            None,
        ),
        entry(
            MetricId::StrokeSpeed,
            reduce_mean(precision.stroke_speed_ratios.iter().copied()),
            Some(precision.stroke_speed_ratios.clone()),
            None,
        ),
        entry(MetricId::SymbolSpeed, precision.symbol_speed_ratio, None, None),
    ];

    AssessmentReport {
        label: label.to_string(),
        metrics,
        match_map: structure.match_map.clone(),
        overlay: build_overlay(&structure.match_map, technique),
    }
}

fn build_overlay(map: &MatchMap, technique: &TechniqueResult) -> Overlay {
    let mut strokes: Vec<OverlayStroke> = map
        .pairs
        .iter()
        .enumerate()
        .map(|(k, pair)| {
            let mut tags = vec![OverlayTag::Matched];
            if !technique.order_correct.get(k).copied().unwrap_or(true) {
                tags.push(OverlayTag::OrderWrong);
            }
            if !technique.direction_correct.get(k).copied().unwrap_or(true) {
                tags.push(OverlayTag::DirectionWrong);
            }
            OverlayStroke {
                input_index: pair.input_index,
                model_index: Some(pair.model_index),
                tags,
            }
        })
        .chain(map.unmatched_input.iter().map(|&i| OverlayStroke {
            input_index: i,
            model_index: None,
            tags: vec![OverlayTag::Extraneous],
        }))
        .collect();
    strokes.sort_by_key(|s| s.input_index);
    Overlay {
        strokes,
        missing: map
            .unmatched_model
            .iter()
            .map(|&j| OverlayMissing {
                model_index: j,
                tags: vec![OverlayTag::Missing],
            })
            .collect(),
        color_key: OverlayTag::ALL
            .into_iter()
            .map(|t| (t, t.color().to_string()))
            .collect(),
    }
}
