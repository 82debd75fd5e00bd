//! Stroke order and stroke direction over matched stroke pairs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ink::Stroke;
use crate::structure::MatchMap;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TechniqueError {
    #[error("strokes must have equal point counts ({0} vs {1})")]
    UnequalPointCounts(usize, usize),
    #[error("pair refers to missing stroke (input {input}, model {model})")]
    MissingStroke { input: usize, model: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TechniqueResult {
    /// One flag per matched pair, in input order.
    pub order_correct: Vec<bool>,
    pub direction_correct: Vec<bool>,
    pub order_ratio: f64,
    pub direction_ratio: f64,
}

impl TechniqueResult {
    pub fn new(order_correct: Vec<bool>, direction_correct: Vec<bool>) -> Self {
        TechniqueResult {
            order_ratio: fraction_true(&order_correct),
            direction_ratio: fraction_true(&direction_correct),
            order_correct,
            direction_correct,
        }
    }
}

/// Share of `true` flags; zero for an empty list.
pub fn fraction_true(flags: &[bool]) -> f64 {
    if flags.is_empty() {
        0.0
    } else {
        flags.iter().filter(|f| **f).count() as f64 / flags.len() as f64
    }
}

/// Mean distance between same-index points of two equally resampled strokes.
pub fn path_distance(a: &Stroke, b: &Stroke) -> Result<f64, TechniqueError> {
    if a.points.len() != b.points.len() {
        return Err(TechniqueError::UnequalPointCounts(a.points.len(), b.points.len()));
    }
    if a.points.is_empty() {
        return Ok(0.0);
    }
    let total: f64 = a
        .points
        .iter()
        .zip(&b.points)
        .map(|(p, q)| p.distance(q))
        .sum();
    Ok(total / a.points.len() as f64)
}

/// Forward and reversed full-path distances of `input` against `model`.
pub fn oriented_distances(input: &Stroke, model: &Stroke) -> Result<(f64, f64), TechniqueError> {
    let forward = path_distance(input, model)?;
    let backward = path_distance(&input.reversed(), model)?;
    Ok((forward, backward))
}

/// A pair's direction is correct when the stroke as written lies at least as
/// close to the model along its whole path as the reversed stroke does.
pub fn assess_direction(
    map: &MatchMap,
    input: &[Stroke],
    model: &[Stroke],
) -> Result<Vec<bool>, TechniqueError> {
    map.pairs
        .iter()
        .map(|pair| {
            let (a, b) = match (input.get(pair.input_index), model.get(pair.model_index)) {
                (Some(a), Some(b)) => (a, b),
                _ => {
                    return Err(TechniqueError::MissingStroke {
                        input: pair.input_index,
                        model: pair.model_index,
                    })
                }
            };
            let (forward, backward) = oriented_distances(a, b)?;
            Ok(forward <= backward)
        })
        .collect()
}

/// Walks matched pairs in input order; a pair is in order when its model
/// index equals the model index found at the same position of the sorted
/// sequence.
pub fn assess_order(map: &MatchMap) -> Vec<bool> {
    let mut by_input: Vec<_> = map.pairs.iter().collect();
    by_input.sort_by_key(|p| p.input_index);
    let mut sorted: Vec<usize> = by_input.iter().map(|p| p.model_index).collect();
    sorted.sort_unstable();
    by_input
        .iter()
        .zip(&sorted)
        .map(|(p, want)| p.model_index == *want)
        .collect()
}
