//! Digital ink: timestamped points grouped into strokes and sketches, and the
//! JSON document format used to exchange them.
//!
//! The serialized form keeps a fixed key order (`metadata`, `strokes`,
//! `events`; `x`, `y`, `t`; ...) so two serializations of the same sketch are
//! byte-identical and golden files stay stable.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InkError {
    #[error("schema violation at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("invalid ink at `{path}`: {message}")]
    Invalid { path: String, message: String },
    #[error("empty sketch: no strokes to assess")]
    EmptySketch,
}

impl InkError {
    /// Path of the offending element, if the error names one.
    pub fn path(&self) -> Option<&str> {
        match self {
            InkError::Schema { path, .. } | InkError::Invalid { path, .. } => Some(path),
            InkError::EmptySketch => None,
        }
    }

    fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        InkError::Invalid {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// A sampled pen position. `t` is milliseconds since the start of the
/// writing session.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub t: u64,
}

impl Point {
    pub const fn new(x: f64, y: f64, t: u64) -> Self {
        Point { x, y, t }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// One pen-down to pen-up trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stroke {
    pub points: Vec<Point>,
}

impl Stroke {
    pub fn new(points: Vec<Point>) -> Self {
        Stroke { points }
    }

    /// Sum of the segment lengths; zero for a dot.
    pub fn path_length(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| w[0].distance(&w[1]))
            .sum()
    }

    /// Last timestamp minus first timestamp.
    pub fn duration(&self) -> u64 {
        match (self.points.first(), self.points.last()) {
            (Some(first), Some(last)) => last.t.saturating_sub(first.t),
            _ => 0,
        }
    }

    pub fn start_time(&self) -> Option<u64> {
        self.points.first().map(|p| p.t)
    }

    pub fn end_time(&self) -> Option<u64> {
        self.points.last().map(|p| p.t)
    }

    pub fn bounding_box(&self) -> Option<BoundingBox> {
        BoundingBox::from_points(self.points.iter())
    }

    /// Same geometry traversed the other way. Timestamps keep their original
    /// sequence so the stroke still runs forward in time.
    pub fn reversed(&self) -> Stroke {
        let points = self
            .points
            .iter()
            .rev()
            .zip(self.points.iter())
            .map(|(geom, time)| Point::new(geom.x, geom.y, time.t))
            .collect();
        Stroke { points }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Metadata {
    pub label: String,
    pub canvas_width: f64,
    pub canvas_height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EditKind {
    Undo,
    Clear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EditEvent {
    pub kind: EditKind,
    pub t: u64,
}

/// Canvas session bookkeeping captured alongside the ink: when writing began,
/// when the character was submitted, and every undo/clear press in between.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SessionEvents {
    pub started_at: u64,
    pub submitted_at: u64,
    #[serde(default)]
    pub edits: Vec<EditEvent>,
}

impl SessionEvents {
    pub fn validate(&self) -> Result<(), InkError> {
        if self.started_at > self.submitted_at {
            return Err(InkError::invalid(
                "events.submittedAt",
                format!(
                    "submittedAt {} precedes startedAt {}",
                    self.submitted_at, self.started_at
                ),
            ));
        }
        for (i, edit) in self.edits.iter().enumerate() {
            if edit.t < self.started_at || edit.t > self.submitted_at {
                return Err(InkError::invalid(
                    format!("events.edits[{i}].t"),
                    format!(
                        "edit at {} outside session [{}, {}]",
                        edit.t, self.started_at, self.submitted_at
                    ),
                ));
            }
        }
        Ok(())
    }
}

/// One character-writing attempt: strokes in writing order plus metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sketch {
    pub metadata: Metadata,
    pub strokes: Vec<Stroke>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub events: Option<SessionEvents>,
}

impl Sketch {
    pub fn new(metadata: Metadata, strokes: Vec<Stroke>) -> Self {
        Sketch {
            metadata,
            strokes,
            events: None,
        }
    }

    pub fn label(&self) -> &str {
        &self.metadata.label
    }

    pub fn points(&self) -> impl Iterator<Item = &Point> {
        self.strokes.iter().flat_map(|s| s.points.iter())
    }

    pub fn bounding_box(&self) -> Option<BoundingBox> {
        BoundingBox::from_points(self.points())
    }

    /// First point of the first stroke to last point of the last stroke.
    pub fn duration(&self) -> u64 {
        let start = self.strokes.first().and_then(Stroke::start_time);
        let end = self.strokes.last().and_then(Stroke::end_time);
        match (start, end) {
            (Some(s), Some(e)) => e.saturating_sub(s),
            _ => 0,
        }
    }

    /// Checks every structural invariant of a sketch that is about to be
    /// assessed.
    pub fn validate(&self) -> Result<(), InkError> {
        if self.metadata.label.is_empty() {
            return Err(InkError::invalid("metadata.label", "label must be non-empty"));
        }
        if !(self.metadata.canvas_width.is_finite() && self.metadata.canvas_width > 0.0) {
            return Err(InkError::invalid(
                "metadata.canvasWidth",
                "canvas width must be positive",
            ));
        }
        if !(self.metadata.canvas_height.is_finite() && self.metadata.canvas_height > 0.0) {
            return Err(InkError::invalid(
                "metadata.canvasHeight",
                "canvas height must be positive",
            ));
        }
        if self.strokes.is_empty() {
            return Err(InkError::EmptySketch);
        }
        let mut prev_start = 0u64;
        for (i, stroke) in self.strokes.iter().enumerate() {
            if stroke.points.is_empty() {
                return Err(InkError::invalid(
                    format!("strokes[{i}].points"),
                    "stroke has no points",
                ));
            }
            let mut prev_t = stroke.points[0].t;
            for (j, p) in stroke.points.iter().enumerate() {
                if !(p.x.is_finite() && p.y.is_finite()) {
                    return Err(InkError::invalid(
                        format!("strokes[{i}].points[{j}]"),
                        "coordinates must be finite",
                    ));
                }
                if p.t < prev_t {
                    return Err(InkError::invalid(
                        format!("strokes[{i}].points[{j}].t"),
                        format!("timestamp {} decreases from {}", p.t, prev_t),
                    ));
                }
                prev_t = p.t;
            }
            let start = stroke.points[0].t;
            if start < prev_start {
                return Err(InkError::invalid(
                    format!("strokes[{i}]"),
                    format!("stroke starts at {start}, before the previous stroke ({prev_start})"),
                ));
            }
            prev_start = start;
        }
        if let Some(events) = &self.events {
            events.validate()?;
        }
        Ok(())
    }
}

/// Tight axis-aligned box around a set of points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundingBox {
    pub min_x: f64,
    pub min_y: f64,
    pub width: f64,
    pub height: f64,
}

impl BoundingBox {
    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Point>) -> Option<Self> {
        let mut iter = points.into_iter();
        let first = iter.next()?;
        let (mut min_x, mut min_y, mut max_x, mut max_y) = (first.x, first.y, first.x, first.y);
        for p in iter {
            min_x = min_x.min(p.x);
            min_y = min_y.min(p.y);
            max_x = max_x.max(p.x);
            max_y = max_y.max(p.y);
        }
        Some(BoundingBox {
            min_x,
            min_y,
            width: max_x - min_x,
            height: max_y - min_y,
        })
    }

    pub fn max_side(&self) -> f64 {
        self.width.max(self.height)
    }
}

/// Parses an ink JSON document and checks the sketch invariants.
pub fn parse_ink(text: &str) -> Result<Sketch, InkError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let sketch: Sketch = serde_path_to_error::deserialize(de).map_err(|err| {
        let mut path = err.path().to_string();
        let message = err.inner().to_string();
        if let Some(field) = missing_field(&message) {
            path = if path == "." || path.is_empty() {
                field.to_string()
            } else {
                format!("{path}.{field}")
            };
        }
        InkError::Schema { path, message }
    })?;
    sketch.validate()?;
    Ok(sketch)
}

fn missing_field(message: &str) -> Option<&str> {
    let rest = message.strip_prefix("missing field `")?;
    rest.split('`').next()
}

/// Canonical serialization: fixed key order, no insignificant whitespace.
pub fn serialize_ink(sketch: &Sketch) -> String {
    serde_json::to_string(sketch).expect("sketch serialization cannot fail")
}
