//! Stroke correspondence between a student's sketch and the model, and the
//! structure metrics derived from it (stroke match, valid and exist).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assignment::min_cost_assignment;
use crate::ink::Stroke;
use crate::normalize::NormalizedSketch;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StructureError {
    #[error("no assessable strokes in input")]
    EmptyInput,
    #[error("model has no strokes")]
    EmptyModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MatchPair {
    pub input_index: usize,
    pub model_index: usize,
    /// Hausdorff distance in the normalized frame.
    pub distance: f64,
}

/// One-to-one correspondence between input and model strokes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MatchMap {
    /// Sorted by input index.
    pub pairs: Vec<MatchPair>,
    pub unmatched_input: Vec<usize>,
    pub unmatched_model: Vec<usize>,
}

impl MatchMap {
    pub fn input_count(&self) -> usize {
        self.pairs.len() + self.unmatched_input.len()
    }

    pub fn model_count(&self) -> usize {
        self.pairs.len() + self.unmatched_model.len()
    }

    pub fn total_distance(&self) -> f64 {
        self.pairs.iter().map(|p| p.distance).sum()
    }

    pub fn model_index_of(&self, input_index: usize) -> Option<usize> {
        self.pairs
            .iter()
            .find(|p| p.input_index == input_index)
            .map(|p| p.model_index)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StructureResult {
    pub match_ratio: f64,
    pub valid_ratio: f64,
    pub exist_ratio: f64,
    pub match_map: MatchMap,
}

/// Symmetric Hausdorff distance between two point sequences.
pub fn hausdorff(a: &Stroke, b: &Stroke) -> f64 {
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}

// Early-exit scan: once a point of `from` has a neighbour closer than the
// running maximum it cannot raise the result.
fn directed_hausdorff(from: &Stroke, to: &Stroke) -> f64 {
    let mut cmax2 = 0.0f64;
    for p in &from.points {
        let mut cmin2 = f64::INFINITY;
        for q in &to.points {
            let (dx, dy) = (p.x - q.x, p.y - q.y);
            let d2 = dx * dx + dy * dy;
            if d2 < cmin2 {
                cmin2 = d2;
                if cmin2 < cmax2 {
                    break;
                }
            }
        }
        if cmin2 > cmax2 && cmin2.is_finite() {
            cmax2 = cmin2;
        }
    }
    cmax2.sqrt()
}

/// Pairwise Hausdorff costs, rows = input strokes, columns = model strokes.
pub fn cost_matrix(input: &[Stroke], model: &[Stroke]) -> Vec<Vec<f64>> {
    input
        .iter()
        .map(|a| model.iter().map(|b| hausdorff(a, b)).collect())
        .collect()
}

/// Finds the assignment of input strokes to model strokes with minimum total
/// Hausdorff distance, then drops pairs farther apart than `threshold`.
pub fn match_strokes(
    input: &NormalizedSketch,
    model: &NormalizedSketch,
    threshold: f64,
) -> Result<MatchMap, StructureError> {
    if input.strokes.is_empty() {
        return Err(StructureError::EmptyInput);
    }
    if model.strokes.is_empty() {
        return Err(StructureError::EmptyModel);
    }
    let cost = cost_matrix(&input.strokes, &model.strokes);
    let assigned = min_cost_assignment(&cost);

    let mut pairs = Vec::new();
    let mut unmatched_input = Vec::new();
    let mut model_taken = vec![false; model.strokes.len()];
    for (i, col) in assigned.iter().enumerate() {
        match col {
            Some(j) if cost[i][*j] <= threshold => {
                model_taken[*j] = true;
                pairs.push(MatchPair {
                    input_index: i,
                    model_index: *j,
                    distance: cost[i][*j],
                });
            }
            _ => unmatched_input.push(i),
        }
    }
    let unmatched_model = model_taken
        .iter()
        .enumerate()
        .filter(|(_, taken)| !**taken)
        .map(|(j, _)| j)
        .collect();
    Ok(MatchMap {
        pairs,
        unmatched_input,
        unmatched_model,
    })
}

pub fn structure_metrics(map: &MatchMap) -> StructureResult {
    let pairs = map.pairs.len() as f64;
    let ratio = |den: usize| if den == 0 { 0.0 } else { pairs / den as f64 };
    StructureResult {
        match_ratio: ratio(map.input_count().max(map.model_count())),
        valid_ratio: ratio(map.model_count()),
        exist_ratio: ratio(map.input_count()),
        match_map: map.clone(),
    }
}
