//! Precision metrics: stroke edit, stroke length, stroke closeness, stroke
//! speed and symbol speed.
//!
//! Ratios are input over model. A model measure of zero cannot be divided by,
//! so those entries are `None` (incomparable) rather than a number.

use serde::{Deserialize, Serialize};

use crate::ink::{EditKind, InkError, SessionEvents, Sketch, Stroke};
use crate::structure::MatchMap;
use crate::technique::{oriented_distances, TechniqueError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PrecisionResult {
    pub edit_count: usize,
    pub length_ratios: Vec<Option<f64>>,
    pub closeness_distances: Vec<f64>,
    pub stroke_speed_ratios: Vec<Option<f64>>,
    pub symbol_speed_ratio: Option<f64>,
}

/// Input measure over model measure; `None` when the model measure is zero.
pub fn measure_ratio(input: f64, model: f64) -> Option<f64> {
    if model > 0.0 {
        Some(input / model)
    } else {
        None
    }
}

/// Number of undo and clear presses. A clear counts once however many
/// strokes it erased.
pub fn assess_edit(events: Option<&SessionEvents>) -> Result<usize, InkError> {
    let Some(events) = events else { return Ok(0) };
    events.validate()?;
    Ok(events
        .edits
        .iter()
        .filter(|e| matches!(e.kind, EditKind::Undo | EditKind::Clear))
        .count())
}

/// Per matched pair: path-length ratio and mean pointwise distance, with the
/// input stroke taken in whichever orientation lies closer to the model.
/// `input` and `model` must be resampled into one shared frame.
pub fn assess_length_closeness(
    map: &MatchMap,
    input: &[Stroke],
    model: &[Stroke],
) -> Result<(Vec<Option<f64>>, Vec<f64>), TechniqueError> {
    let mut lengths = Vec::with_capacity(map.pairs.len());
    let mut closeness = Vec::with_capacity(map.pairs.len());
    for pair in &map.pairs {
        let (a, b) = match (input.get(pair.input_index), model.get(pair.model_index)) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(TechniqueError::MissingStroke {
                    input: pair.input_index,
                    model: pair.model_index,
                })
            }
        };
        lengths.push(measure_ratio(a.path_length(), b.path_length()));
        let (forward, backward) = oriented_distances(a, b)?;
        closeness.push(if forward <= backward { forward } else { backward });
    }
    Ok((lengths, closeness))
}

/// Per-pair stroke duration ratios and the whole-sketch duration ratio,
/// measured on the raw (timed) ink.
pub fn assess_speed(map: &MatchMap, input: &Sketch, model: &Sketch) -> (Vec<Option<f64>>, Option<f64>) {
    let per_pair = map
        .pairs
        .iter()
        .map(|pair| {
            let a = input.strokes.get(pair.input_index).map_or(0, Stroke::duration);
            let b = model.strokes.get(pair.model_index).map_or(0, Stroke::duration);
            measure_ratio(a as f64, b as f64)
        })
        .collect();
    let symbol = measure_ratio(input.duration() as f64, model.duration() as f64);
    (per_pair, symbol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ink::{EditEvent, Metadata, Point};
    use crate::structure::MatchPair;

    fn identity_map(n: usize) -> MatchMap {
        MatchMap {
            pairs: (0..n)
                .map(|i| MatchPair { input_index: i, model_index: i, distance: 0.0 })
                .collect(),
            unmatched_input: vec![],
            unmatched_model: vec![],
        }
    }

    fn hline(x0: f64, x1: f64, y: f64, t0: u64, dt: u64) -> Stroke {
        Stroke::new(
            (0..8)
                .map(|i| Point::new(x0 + (x1 - x0) * i as f64 / 7.0, y, t0 + dt * i as u64))
                .collect(),
        )
    }

    fn sketch(strokes: Vec<Stroke>) -> Sketch {
        Sketch::new(
            Metadata { label: "s".into(), canvas_width: 100.0, canvas_height: 100.0 },
            strokes,
        )
    }

    #[test]
    fn edit_counts() {
        assert_eq!(assess_edit(None).unwrap(), 0);
        let ev = SessionEvents {
            started_at: 0,
            submitted_at: 100,
            edits: vec![
                EditEvent { kind: EditKind::Undo, t: 10 },
                EditEvent { kind: EditKind::Undo, t: 20 },
                EditEvent { kind: EditKind::Clear, t: 30 },
            ],
        };
        assert_eq!(assess_edit(Some(&ev)).unwrap(), 3);
        let bad = SessionEvents { started_at: 50, ..ev };
        assert!(assess_edit(Some(&bad)).is_err());
    }

    #[test]
    fn identical_strokes_are_perfect() {
        let strokes = vec![hline(0.0, 100.0, 0.0, 0, 10), hline(0.0, 50.0, 40.0, 200, 10)];
        let (lengths, close) = assess_length_closeness(&identity_map(2), &strokes, &strokes).unwrap();
        assert_eq!(lengths, vec![Some(1.0), Some(1.0)]);
        assert_eq!(close, vec![0.0, 0.0]);
    }

    #[test]
    fn parallel_offset_gives_constant_closeness() {
        let model = vec![hline(0.0, 100.0, 0.0, 0, 10)];
        let input = vec![hline(0.0, 100.0, 10.0, 0, 10)];
        let (_, close) = assess_length_closeness(&identity_map(1), &input, &model).unwrap();
        assert!((close[0] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn closeness_uses_better_orientation() {
        let model = vec![hline(0.0, 100.0, 0.0, 0, 10)];
        let input = vec![model[0].reversed()];
        let (_, close) = assess_length_closeness(&identity_map(1), &input, &model).unwrap();
        assert_eq!(close[0], 0.0);
    }

    #[test]
    fn dot_model_is_incomparable() {
        let model = vec![Stroke::new(vec![Point::new(1.0, 1.0, 0); 8])];
        let input = vec![hline(0.0, 10.0, 0.0, 0, 1)];
        let (lengths, _) = assess_length_closeness(&identity_map(1), &input, &model).unwrap();
        assert_eq!(lengths, vec![None]);
    }

    #[test]
    fn speed_ratios() {
        let model = sketch(vec![hline(0.0, 100.0, 0.0, 0, 10), hline(0.0, 100.0, 50.0, 200, 20)]);
        let same = assess_speed(&identity_map(2), &model, &model);
        assert_eq!(same, (vec![Some(1.0), Some(1.0)], Some(1.0)));

        let fast = sketch(vec![hline(0.0, 100.0, 0.0, 0, 5), hline(0.0, 100.0, 50.0, 100, 10)]);
        let (per, symbol) = assess_speed(&identity_map(2), &fast, &model);
        assert_eq!(per, vec![Some(0.5), Some(0.5)]);
        assert_eq!(symbol, Some(0.5));
    }

    #[test]
    fn zero_durations() {
        let dot = Stroke::new(vec![Point::new(0.0, 0.0, 5)]);
        let model = sketch(vec![dot.clone()]);
        let input = sketch(vec![hline(0.0, 1.0, 0.0, 0, 1)]);
        assert_eq!(assess_speed(&identity_map(1), &input, &model), (vec![None], None));
        let (per, _) = assess_speed(&identity_map(1), &sketch(vec![dot]), &input);
        assert_eq!(per, vec![Some(0.0)]);
    }
}
