//! Puts templates and student ink into one comparable frame: every stroke is
//! resampled to a fixed number of equally spaced points, the whole sketch is
//! scaled uniformly so its larger bounding-box side has a fixed size, and the
//! box is moved to the origin.
//!
//! Resampling places points so that consecutive points are the same straight
//! distance apart (an equal-chord polygon inscribed in the stroke, in arc
//! order). Unlike equal arc-length sampling this is a fixed point:
//! resampling an already resampled stroke returns it unchanged.
//!
//! Such a polygon does not always exist: a hairpin whose two legs have equal
//! length admits none for an even point count. Strokes like that are first
//! smoothed by repeated equal arc-length passes, which trim the reversal,
//! so their resampled points follow the stroke closely but not exactly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ink::{BoundingBox, Metadata, Point, Sketch, Stroke};

pub const DEFAULT_RESAMPLE_POINTS: usize = 64;
pub const DEFAULT_SQUARE_SIZE: f64 = 250.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NormalizeError {
    #[error("resample count must be at least 2, got {0}")]
    TooFewSamples(usize),
    #[error("square size must be positive and finite, got {0}")]
    BadSize(f64),
    #[error("stroke {0} has no points")]
    EmptyStroke(usize),
    #[error("sketch has no strokes")]
    EmptySketch,
}

/// A sketch in the shared comparison frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NormalizedSketch {
    pub label: String,
    pub resample_points: usize,
    pub size: f64,
    /// True when the source had zero extent and scaling was skipped.
    pub degenerate: bool,
    pub strokes: Vec<Stroke>,
}

impl NormalizedSketch {
    /// Views the normalized strokes as an ordinary sketch on a `size`-square
    /// canvas.
    pub fn to_sketch(&self) -> Sketch {
        Sketch::new(
            Metadata {
                label: self.label.clone(),
                canvas_width: self.size,
                canvas_height: self.size,
            },
            self.strokes.clone(),
        )
    }
}

/// Result of [`scale_to_square`].
#[derive(Debug, Clone, PartialEq)]
pub struct Scaled {
    pub sketch: Sketch,
    pub degenerate: bool,
}

/// Resamples `stroke` to `n` points that are equally spaced along it, keeping
/// both endpoints exactly. Timestamps are interpolated along the segment each
/// new point falls on.
///
/// The points are found by Newton iteration on their arc-length positions,
/// starting from equal arc-length spacing, until every chord has the same
/// length. On an already equal-chord stroke the start is the solution.
pub fn resample(stroke: &Stroke, n: usize) -> Result<Stroke, NormalizeError> {
    if n < 2 {
        return Err(NormalizeError::TooFewSamples(n));
    }
    let pts = &stroke.points;
    let (first, last) = match (pts.first(), pts.last()) {
        (Some(f), Some(l)) => (*f, *l),
        _ => return Err(NormalizeError::EmptyStroke(0)),
    };
    if stroke.path_length() <= 0.0 {
        let mut out = vec![first; n];
        out[n - 1] = last;
        return Ok(Stroke::new(out));
    }

    if n == 2 {
        return Ok(Stroke::new(vec![first, last]));
    }
    // Sharp reversals can leave no equal-chord polygon inscribed in the
    // stroke. Each equal arc-length pass cuts such corners a little, so
    // retry on the smoothed polyline until one exists.
    let mut current: Vec<Point> = pts.clone();
    for _ in 0..=MAX_SMOOTHING_PASSES {
        let path = Polyline::new(&current);
        if let Some(positions) = equal_chord_positions(&path, n) {
            let mut out: Vec<Point> = positions.iter().map(|&s| path.at(s)).collect();
            out[0] = first;
            out[n - 1] = last;
            return Ok(Stroke::new(out));
        }
        let length = path.length();
        let mut next: Vec<Point> = (0..n).map(|k| path.at(length * k as f64 / (n - 1) as f64)).collect();
        next[0] = first;
        next[n - 1] = last;
        current = next;
    }
    Ok(Stroke::new(current))
}

const MAX_SMOOTHING_PASSES: usize = 64;

/// Arc-length parametrization of a polyline.
struct Polyline<'a> {
    pts: &'a [Point],
    cum: Vec<f64>,
}

impl<'a> Polyline<'a> {
    fn new(pts: &'a [Point]) -> Self {
        let mut cum = Vec::with_capacity(pts.len());
        let mut acc = 0.0;
        cum.push(0.0);
        for w in pts.windows(2) {
            acc += w[0].distance(&w[1]);
            cum.push(acc);
        }
        Polyline { pts, cum }
    }

    fn length(&self) -> f64 {
        *self.cum.last().unwrap_or(&0.0)
    }

    /// Segment holding arc position `s`; a vertex belongs to the segment
    /// leaving it. Zero-length segments are never returned.
    fn segment(&self, s: f64) -> usize {
        let last = self.pts.len().saturating_sub(2);
        let mut i = self.cum.partition_point(|&c| c <= s).saturating_sub(1).min(last);
        while i < last && self.cum[i + 1] <= self.cum[i] {
            i += 1;
        }
        while i > 0 && self.cum[i + 1] <= self.cum[i] {
            i -= 1;
        }
        i
    }

    fn at(&self, s: f64) -> Point {
        if self.pts.len() == 1 {
            return self.pts[0];
        }
        let i = self.segment(s);
        let (a, b) = (self.pts[i], self.pts[i + 1]);
        let len = self.cum[i + 1] - self.cum[i];
        let u = if len > 0.0 { ((s - self.cum[i]) / len).clamp(0.0, 1.0) } else { 0.0 };
        let t = a.t as f64 + u * (b.t as f64 - a.t as f64);
        Point::new(a.x + u * (b.x - a.x), a.y + u * (b.y - a.y), t.round() as u64)
    }

    fn tangent(&self, s: f64) -> (f64, f64) {
        let i = self.segment(s);
        let (a, b) = (self.pts[i], self.pts[i + 1]);
        let len = self.cum[i + 1] - self.cum[i];
        if len > 0.0 {
            ((b.x - a.x) / len, (b.y - a.y) / len)
        } else {
            (0.0, 0.0)
        }
    }
}

/// Chord residuals `|P(s[k+1]) - P(s[k])| - d`, the largest magnitude and
/// the sum of squares.
fn chord_residuals(path: &Polyline, s: &[f64], d: f64) -> (Vec<f64>, f64, f64) {
    let at: Vec<Point> = s.iter().map(|&v| path.at(v)).collect();
    let res: Vec<f64> = at.windows(2).map(|w| w[0].distance(&w[1]) - d).collect();
    let worst = res.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let energy = res.iter().map(|r| r * r).sum();
    (res, worst, energy)
}

/// Arc-length positions of `n` points with equal chords on `path`, or
/// `None` if Newton from equal arc-length spacing does not settle.
fn equal_chord_positions(path: &Polyline, n: usize) -> Option<Vec<f64>> {
    let length = path.length();
    let mut s: Vec<f64> = (0..n).map(|k| length * k as f64 / (n - 1) as f64).collect();
    s[n - 1] = length;
    let mut d = length / (n - 1) as f64;
    let residual = solve_chain(path, &mut s, &mut d, length * 1e-13, 60);
    (residual <= length * 1e-13).then_some(s)
}

/// Damped Newton on the interior positions of `s` (endpoints fixed) and the
/// common chord `d`. Returns the largest remaining chord residual.
fn solve_chain(path: &Polyline, s: &mut [f64], d: &mut f64, tolerance: f64, max_iters: usize) -> f64 {
    let n = s.len();
    let (lo, hi) = (s[0], s[n - 1]);
    let (res, _, _) = chord_residuals(path, s, *d);
    *d += res.iter().sum::<f64>() / res.len() as f64;
    let (mut res, mut worst, mut energy) = chord_residuals(path, s, *d);
    let mut short_steps = 0;

    for _ in 0..max_iters {
        if worst <= tolerance {
            break;
        }
        let Some((ds, dd)) = newton_step(path, s, &res) else {
            break;
        };
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda >= 1e-9 {
            let mut trial = s.to_vec();
            for k in 1..n - 1 {
                trial[k] = s[k] + lambda * ds[k];
            }
            let ordered = trial.windows(2).all(|w| w[0] <= w[1]) && trial[1] >= lo && trial[n - 2] <= hi;
            if ordered {
                let td = *d + lambda * dd;
                let (tres, tworst, tenergy) = chord_residuals(path, &trial, td);
                if tenergy < energy {
                    s.copy_from_slice(&trial);
                    *d = td;
                    res = tres;
                    worst = tworst;
                    energy = tenergy;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
        // Newton converging near a solution takes full steps; a run of
        // heavily damped steps means it is stuck at a corner.
        short_steps = if lambda < 0.1 { short_steps + 1 } else { 0 };
        if short_steps >= 4 {
            break;
        }
    }
    worst
}

/// Solves the bordered bidiagonal Newton system for position updates
/// (indexed like `s`, endpoints zero) and the chord-length update.
fn newton_step(path: &Polyline, s: &[f64], res: &[f64]) -> Option<(Vec<f64>, f64)> {
    let n = s.len();
    let at: Vec<Point> = s.iter().map(|&v| path.at(v)).collect();
    let tan: Vec<(f64, f64)> = s.iter().map(|&v| path.tangent(v)).collect();
    // Row k: a[k]·Δs[k] + b[k]·Δs[k+1] - Δd = -res[k].
    let mut a = vec![0.0; n - 1];
    let mut b = vec![0.0; n - 1];
    for k in 0..n - 1 {
        let (dx, dy) = (at[k + 1].x - at[k].x, at[k + 1].y - at[k].y);
        let c = (dx * dx + dy * dy).sqrt();
        let (ux, uy) = if c > 0.0 { (dx / c, dy / c) } else { tan[k] };
        a[k] = -(ux * tan[k].0 + uy * tan[k].1);
        b[k] = ux * tan[k + 1].0 + uy * tan[k + 1].1;
    }

    // Row held over between columns: coefficient on the current column, on
    // the border (Δd) and the right-hand side.
    struct Pivot {
        this: f64,
        next: f64,
        border: f64,
        rhs: f64,
    }
    let (mut c_this, mut c_border, mut c_rhs) = (b[0], -1.0, -res[0]);
    let mut pivots = Vec::with_capacity(n - 2);
    for j in 1..n - 1 {
        let row_next = if j + 1 < n - 1 { b[j] } else { 0.0 };
        let row = (a[j], row_next, -1.0, -res[j]);
        let carry = (c_this, 0.0, c_border, c_rhs);
        let (p, o) = if row.0.abs() > carry.0.abs() { (row, carry) } else { (carry, row) };
        if p.0 == 0.0 {
            return None;
        }
        let f = o.0 / p.0;
        c_this = o.1 - f * p.1;
        c_border = o.2 - f * p.2;
        c_rhs = o.3 - f * p.3;
        pivots.push(Pivot {
            this: p.0,
            next: p.1,
            border: p.2,
            rhs: p.3,
        });
    }
    if c_border == 0.0 {
        return None;
    }
    let dd = c_rhs / c_border;
    let mut ds = vec![0.0; n];
    for j in (1..n - 1).rev() {
        let p = &pivots[j - 1];
        ds[j] = (p.rhs - p.next * ds[j + 1] - p.border * dd) / p.this;
    }
    ds.iter().all(|v| v.is_finite()).then_some((ds, dd))
}

/// Uniformly scales the sketch so the larger side of its bounding box equals
/// `size`. A sketch with zero extent in both axes is returned unchanged and
/// flagged degenerate.
pub fn scale_to_square(sketch: &Sketch, size: f64) -> Result<Scaled, NormalizeError> {
    if !(size.is_finite() && size > 0.0) {
        return Err(NormalizeError::BadSize(size));
    }
    let bb = sketch.bounding_box().ok_or(NormalizeError::EmptySketch)?;
    let side = bb.max_side();
    if side <= 0.0 {
        return Ok(Scaled {
            sketch: sketch.clone(),
            degenerate: true,
        });
    }
    let factor = size / side;
    Ok(Scaled {
        sketch: map_points(sketch, |p| Point::new(p.x * factor, p.y * factor, p.t)),
        degenerate: false,
    })
}

/// Shifts the sketch so its bounding box's min corner sits at the origin.
pub fn translate_to_origin(sketch: &Sketch) -> Result<Sketch, NormalizeError> {
    let BoundingBox { min_x, min_y, .. } =
        sketch.bounding_box().ok_or(NormalizeError::EmptySketch)?;
    Ok(map_points(sketch, |p| Point::new(p.x - min_x, p.y - min_y, p.t)))
}

/// Resample every stroke, then scale and translate the whole sketch.
pub fn normalize(sketch: &Sketch, n: usize, size: f64) -> Result<NormalizedSketch, NormalizeError> {
    let resampled = resample_all(sketch, n)?;
    let scaled = scale_to_square(&resampled, size)?;
    let placed = translate_to_origin(&scaled.sketch)?;
    Ok(NormalizedSketch {
        label: sketch.metadata.label.clone(),
        resample_points: n,
        size,
        degenerate: scaled.degenerate,
        strokes: placed.strokes,
    })
}

/// Like [`normalize`], but the scale and offset are taken from the bounding
/// box of the `reference` strokes only; the remaining strokes follow the same
/// mapping. With every stroke as reference this equals [`normalize`].
pub fn normalize_to_reference(
    sketch: &Sketch,
    reference: &[usize],
    n: usize,
    size: f64,
) -> Result<NormalizedSketch, NormalizeError> {
    let resampled = resample_all(sketch, n)?;
    let subset = |s: &Sketch| {
        Sketch::new(
            s.metadata.clone(),
            reference
                .iter()
                .filter_map(|&i| s.strokes.get(i).cloned())
                .collect(),
        )
    };
    let reference_sketch = subset(&resampled);
    if reference_sketch.strokes.is_empty() {
        return normalize(sketch, n, size);
    }
    let scaled = scale_to_square(&reference_sketch, size)?;
    let factor = if scaled.degenerate {
        1.0
    } else {
        size / reference_sketch.bounding_box().map_or(1.0, |bb| bb.max_side())
    };
    let whole = if scaled.degenerate {
        resampled
    } else {
        map_points(&resampled, |p| Point::new(p.x * factor, p.y * factor, p.t))
    };
    let BoundingBox { min_x, min_y, .. } = subset(&whole)
        .bounding_box()
        .ok_or(NormalizeError::EmptySketch)?;
    let placed = map_points(&whole, |p| Point::new(p.x - min_x, p.y - min_y, p.t));
    Ok(NormalizedSketch {
        label: sketch.metadata.label.clone(),
        resample_points: n,
        size,
        degenerate: scaled.degenerate,
        strokes: placed.strokes,
    })
}

fn resample_all(sketch: &Sketch, n: usize) -> Result<Sketch, NormalizeError> {
    if sketch.strokes.is_empty() {
        return Err(NormalizeError::EmptySketch);
    }
    let strokes = sketch
        .strokes
        .iter()
        .enumerate()
        .map(|(i, st)| {
            resample(st, n).map_err(|e| match e {
                NormalizeError::EmptyStroke(_) => NormalizeError::EmptyStroke(i),
                other => other,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Sketch::new(sketch.metadata.clone(), strokes))
}

fn map_points(sketch: &Sketch, f: impl Fn(&Point) -> Point) -> Sketch {
    Sketch {
        metadata: sketch.metadata.clone(),
        strokes: sketch
            .strokes
            .iter()
            .map(|st| Stroke::new(st.points.iter().map(&f).collect()))
            .collect(),
        events: sketch.events.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stroke(xy: &[(f64, f64)]) -> Stroke {
        Stroke::new(
            xy.iter()
                .enumerate()
                .map(|(i, &(x, y))| Point::new(x, y, 10 * i as u64))
                .collect(),
        )
    }

    fn sketch(strokes: Vec<Stroke>) -> Sketch {
        Sketch::new(
            Metadata {
                label: "x".into(),
                canvas_width: 400.0,
                canvas_height: 400.0,
            },
            strokes,
        )
    }

    #[test]
    fn straight_line_resamples_to_unit_steps() {
        let st = stroke(&[(0.0, 0.0), (2.5, 0.0), (7.0, 0.0), (30.1, 0.0), (41.0, 0.0), (55.5, 0.0), (63.0, 0.0)]);
        let out = resample(&st, 64).unwrap();
        assert_eq!(out.points.len(), 64);
        for (i, p) in out.points.iter().enumerate() {
            assert!((p.x - i as f64).abs() < 1e-9, "x[{i}] = {}", p.x);
            assert_eq!(p.y, 0.0);
        }
        assert_eq!(out.points[0], st.points[0]);
        assert_eq!(out.points[63], st.points[6]);
    }

    #[test]
    fn dot_resamples_to_copies() {
        let st = Stroke::new(vec![Point::new(5.0, 5.0, 42)]);
        let out = resample(&st, 64).unwrap();
        assert_eq!(out.points, vec![Point::new(5.0, 5.0, 42); 64]);
    }

    #[test]
    fn resample_rejects_small_counts() {
        let st = stroke(&[(0.0, 0.0), (1.0, 0.0)]);
        assert_eq!(resample(&st, 1).unwrap_err(), NormalizeError::TooFewSamples(1));
    }

    #[test]
    fn corner_stroke_has_equal_chords() {
        let st = stroke(&[(0.0, 0.0), (100.0, 0.0), (100.0, 37.0), (20.0, 80.0)]);
        let out = resample(&st, 64).unwrap();
        let chords: Vec<f64> = out.points.windows(2).map(|w| w[0].distance(&w[1])).collect();
        let d = chords[0];
        for c in &chords {
            assert!(((c - d) / d).abs() < 1e-6, "{c} vs {d}");
        }
    }

    #[test]
    fn timestamps_interpolate_along_segments() {
        let st = Stroke::new(vec![Point::new(0.0, 0.0, 0), Point::new(10.0, 0.0, 100)]);
        let out = resample(&st, 11).unwrap();
        let ts: Vec<u64> = out.points.iter().map(|p| p.t).collect();
        assert_eq!(ts, (0..=10).map(|i| i * 10).collect::<Vec<_>>());
    }

    #[test]
    fn scale_square_and_wide_boxes() {
        let sq = sketch(vec![stroke(&[(0.0, 0.0), (500.0, 500.0)])]);
        let bb = scale_to_square(&sq, 250.0).unwrap().sketch.bounding_box().unwrap();
        assert_eq!((bb.width, bb.height), (250.0, 250.0));

        let wide = sketch(vec![stroke(&[(0.0, 0.0), (500.0, 100.0)])]);
        let bb = scale_to_square(&wide, 250.0).unwrap().sketch.bounding_box().unwrap();
        assert_eq!((bb.width, bb.height), (250.0, 50.0));
    }

    #[test]
    fn horizontal_line_scales_width_only() {
        let line = sketch(vec![stroke(&[(10.0, 7.0), (110.0, 7.0)])]);
        let scaled = scale_to_square(&line, 250.0).unwrap();
        assert!(!scaled.degenerate);
        let bb = scaled.sketch.bounding_box().unwrap();
        assert_eq!((bb.width, bb.height), (250.0, 0.0));
    }

    #[test]
    fn zero_extent_is_flagged_and_untouched() {
        let dot = sketch(vec![stroke(&[(3.0, 4.0)])]);
        let scaled = scale_to_square(&dot, 250.0).unwrap();
        assert!(scaled.degenerate);
        assert_eq!(scaled.sketch, dot);
    }

    #[test]
    fn translate_moves_min_corner() {
        let s = sketch(vec![stroke(&[(30.0, 40.0), (50.0, 90.0)])]);
        let moved = translate_to_origin(&s).unwrap();
        assert_eq!(moved.strokes[0].points[0], Point::new(0.0, 0.0, 0));
        assert_eq!(moved.strokes[0].points[1], Point::new(20.0, 50.0, 10));
        assert_eq!(translate_to_origin(&moved).unwrap(), moved);
    }

    #[test]
    fn normalize_builds_the_frame() {
        let s = sketch(vec![
            stroke(&[(30.0, 40.0), (130.0, 40.0)]),
            stroke(&[(80.0, 10.0), (80.0, 300.0), (60.0, 280.0)]),
        ]);
        let ns = normalize(&s, 64, 250.0).unwrap();
        assert!(ns.strokes.iter().all(|st| st.points.len() == 64));
        let bb = ns.to_sketch().bounding_box().unwrap();
        assert_eq!((bb.min_x, bb.min_y), (0.0, 0.0));
        assert!((bb.max_side() - 250.0).abs() < 1e-9);
    }

    #[test]
    fn reference_frame_matches_whole_frame_when_all_strokes_used() {
        let s = sketch(vec![
            stroke(&[(30.0, 40.0), (130.0, 40.0)]),
            stroke(&[(80.0, 10.0), (80.0, 300.0), (60.0, 280.0)]),
        ]);
        let whole = normalize(&s, 64, 250.0).unwrap();
        let all = normalize_to_reference(&s, &[0, 1], 64, 250.0).unwrap();
        assert_eq!(whole, all);
    }

    #[test]
    fn reference_frame_ignores_other_strokes() {
        let a = stroke(&[(30.0, 40.0), (130.0, 40.0), (130.0, 90.0)]);
        let far = stroke(&[(900.0, 900.0), (950.0, 990.0)]);
        let alone = normalize(&sketch(vec![a.clone()]), 64, 250.0).unwrap();
        let with_far = normalize_to_reference(&sketch(vec![a, far]), &[0], 64, 250.0).unwrap();
        assert_eq!(with_far.strokes[0], alone.strokes[0]);
    }

    #[test]
    fn empty_stroke_index_is_reported() {
        let s = sketch(vec![stroke(&[(0.0, 0.0), (1.0, 1.0)]), Stroke::new(vec![])]);
        assert_eq!(normalize(&s, 64, 250.0).unwrap_err(), NormalizeError::EmptyStroke(1));
    }
}
