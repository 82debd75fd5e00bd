//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::OnceLock;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use kwb_core::ink::{Metadata, Point, Sketch, Stroke};
use kwb_core::report::AssessmentReport;
use kwb_core::scoring::{Family, MetricId};
use kwb_core::service::{router, AppState};
use kwb_core::normalize::normalize;
use kwb_core::structure::hausdorff;
use kwb_core::{ThresholdConfig, TemplateStore};
use proptest::prelude::*;
use tower::ServiceExt;

pub fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn store_dir() -> PathBuf {
    manifest_dir().join("data/store")
}

pub fn sample_store() -> &'static TemplateStore {
    static STORE: OnceLock<TemplateStore> = OnceLock::new();
    STORE.get_or_init(|| TemplateStore::load(&store_dir()).expect("sample store loads"))
}

pub fn raw_template(label: &str) -> Sketch {
    sample_store().lookup_template(label).expect("template").raw.clone()
}

pub fn labels() -> Vec<String> {
    sample_store().templates().map(|t| t.label.clone()).collect()
}

pub fn pt(x: f64, y: f64, t: u64) -> Point {
    Point { x, y, t }
}

pub fn sketch_of(label: &str, strokes: Vec<Stroke>) -> Sketch {
    Sketch::new(
        Metadata {
            label: label.to_string(),
            canvas_width: 400.0,
            canvas_height: 400.0,
        },
        strokes,
    )
}

/// Straight stroke from `a` to `b` with `n` evenly spaced points, one every
/// `dt` ms from `t0`.
pub fn line(a: (f64, f64), b: (f64, f64), n: usize, t0: u64, dt: u64) -> Stroke {
    let pts = (0..n)
        .map(|i| {
            let f = i as f64 / (n - 1) as f64;
            pt(a.0 + (b.0 - a.0) * f, a.1 + (b.1 - a.1) * f, t0 + dt * i as u64)
        })
        .collect();
    Stroke::new(pts)
}

// ---------------------------------------------------------------- oracles

pub fn oracle_dist(a: &Point, b: &Point) -> f64 {
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
}

pub fn oracle_path_length(s: &Stroke) -> f64 {
    let mut total = 0.0;
    for i in 1..s.points.len() {
        total += oracle_dist(&s.points[i - 1], &s.points[i]);
    }
    total
}

/// O(n·m) max-min scan in both directions.
pub fn oracle_hausdorff(a: &Stroke, b: &Stroke) -> f64 {
    let directed = |p: &Stroke, q: &Stroke| {
        let mut worst: f64 = 0.0;
        for x in &p.points {
            let mut best = f64::INFINITY;
            for y in &q.points {
                best = best.min(oracle_dist(x, y));
            }
            worst = worst.max(best);
        }
        worst
    };
    directed(a, b).max(directed(b, a))
}

pub fn oracle_mean_pointwise(a: &Stroke, b: &Stroke) -> f64 {
    assert_eq!(a.points.len(), b.points.len());
    let sum: f64 = a.points.iter().zip(&b.points).map(|(p, q)| oracle_dist(p, q)).sum();
    sum / a.points.len() as f64
}

/// Minimum total cost over all maximum one-to-one assignments, by exhaustive
/// enumeration. Each candidate is summed in input-row order.
pub fn brute_force_min_cost(cost: &[Vec<f64>]) -> f64 {
    let rows = cost.len();
    let cols = cost.first().map_or(0, Vec::len);
    let want = rows.min(cols);
    fn rec(
        cost: &[Vec<f64>],
        row: usize,
        assigned: usize,
        want: usize,
        used: &mut Vec<bool>,
        acc: f64,
        best: &mut f64,
    ) {
        let rows = cost.len();
        if assigned + (rows - row) < want {
            return;
        }
        if row == rows {
            *best = best.min(acc);
            return;
        }
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                rec(cost, row + 1, assigned + 1, want, used, acc + cost[row][j], best);
                used[j] = false;
            }
        }
        rec(cost, row + 1, assigned, want, used, acc, best);
    }
    let mut best = f64::INFINITY;
    rec(cost, 0, 0, want, &mut vec![false; cols], 0.0, &mut best);
    if want == 0 {
        0.0
    } else {
        best
    }
}

// ------------------------------------------------------------- generators

pub fn arb_point_xy() -> impl Strategy<Value = (f64, f64)> {
    (0.0f64..400.0, 0.0f64..400.0)
}

/// Stroke with 1..=max_points points and non-decreasing timestamps from `t0`.
pub fn arb_stroke(max_points: usize) -> impl Strategy<Value = Stroke> {
    (
        prop::collection::vec((arb_point_xy(), 0u64..40), 1..=max_points),
        0u64..5_000,
    )
        .prop_map(|(pts, t0)| {
            let mut t = t0;
            Stroke::new(
                pts.into_iter()
                    .map(|((x, y), dt)| {
                        t += dt;
                        pt(x, y, t)
                    })
                    .collect(),
            )
        })
}

/// Valid sketch: 1..=max_strokes strokes, each starting no earlier than the
/// previous one.
pub fn arb_sketch(max_strokes: usize, max_points: usize) -> impl Strategy<Value = Sketch> {
    prop::collection::vec(arb_stroke(max_points), 1..=max_strokes).prop_map(|mut strokes| {
        let mut clock = 0u64;
        for s in &mut strokes {
            let base = s.points[0].t;
            for p in &mut s.points {
                p.t = p.t - base + clock;
            }
            clock = s.points.last().unwrap().t + 100;
        }
        sketch_of("一", strokes)
    })
}

/// Random sketch with at least two points per stroke and a bounding box
/// whose larger side is at least `min_extent`.
pub fn arb_extended_sketch(max_strokes: usize, max_points: usize, min_extent: f64) -> impl Strategy<Value = Sketch> {
    arb_sketch(max_strokes, max_points).prop_filter("needs extent", move |s| {
        s.strokes.iter().all(|st| st.points.len() >= 2 && oracle_path_length(st) > 1.0)
            && s.bounding_box().unwrap().max_side() >= min_extent
    })
}

pub fn map_sketch(s: &Sketch, f: impl Fn(f64, f64) -> (f64, f64)) -> Sketch {
    let mut out = s.clone();
    for st in &mut out.strokes {
        for p in &mut st.points {
            let (x, y) = f(p.x, p.y);
            p.x = x;
            p.y = y;
        }
    }
    out
}

// -------------------------------------------------------------- mutations

/// Deletes the stroke whose removal disturbs the bounding box least. When
/// that is the first or last stroke, its new neighbour is shifted in time
/// (keeping its own duration) so the character's time span is unchanged.
pub fn delete_stroke(s: &Sketch) -> Option<(Sketch, usize)> {
    let n = s.strokes.len();
    if n < 2 {
        return None;
    }
    let full = s.bounding_box().unwrap();
    let mut best: Option<(f64, usize)> = None;
    for i in 0..n {
        let mut m = s.clone();
        m.strokes.remove(i);
        let b = m.bounding_box().unwrap();
        let change = (b.min_x - full.min_x).abs()
            + (b.min_y - full.min_y).abs()
            + (b.width - full.width).abs()
            + (b.height - full.height).abs();
        if best.is_none_or(|(c, _)| change < c) {
            best = Some((change, i));
        }
    }
    let (_, i) = best?;
    let mut m = s.clone();
    m.strokes.remove(i);
    let shift_stroke = |st: &Stroke, to_start: u64| {
        let base = st.start_time().unwrap();
        Stroke::new(st.points.iter().map(|p| pt(p.x, p.y, p.t - base + to_start)).collect())
    };
    if i == 0 {
        m.strokes[0] = shift_stroke(&m.strokes[0], s.strokes[0].start_time().unwrap());
    } else if i == n - 1 {
        let k = m.strokes.len() - 1;
        let end = s.strokes[n - 1].end_time().unwrap();
        let start = end - m.strokes[k].duration();
        m.strokes[k] = shift_stroke(&m.strokes[k], start);
    }
    Some((m, i))
}

/// Inserts a short stroke that lies inside the template's normalization
/// square but farther than `threshold` (normalized) from every model stroke.
/// It is written inside the existing time span so whole-character timing is
/// unchanged. Returns the mutated sketch and the index of the new stroke.
pub fn add_spurious_stroke(s: &Sketch, cfg: &ThresholdConfig) -> (Sketch, usize) {
    let bb = s.bounding_box().unwrap();
    let side = bb.max_side();
    let model = normalize(s, cfg.resample_n, cfg.scale_size).unwrap();
    let scale = cfg.scale_size / side;
    let seg = side * 0.04;

    let mut best: Option<(f64, Stroke)> = None;
    let steps = 24;
    for gx in 0..=steps {
        for gy in 0..=steps {
            let x0 = bb.min_x + side * gx as f64 / steps as f64;
            let y0 = bb.min_y + side * gy as f64 / steps as f64;
            let x1 = x0 + seg;
            if x1 > bb.min_x + side {
                continue;
            }
            let candidate = line((x0, y0), (x1, y0), 4, 0, 10);
            let norm = map_sketch(&sketch_of("x", vec![candidate.clone()]), |x, y| {
                ((x - bb.min_x) * scale, (y - bb.min_y) * scale)
            });
            let resampled = kwb_core::normalize::resample(&norm.strokes[0], cfg.resample_n).unwrap();
            let nearest = model
                .strokes
                .iter()
                .map(|m| oracle_hausdorff(&resampled, m))
                .fold(f64::INFINITY, f64::min);
            if best.as_ref().is_none_or(|(d, _)| nearest > *d) {
                best = Some((nearest, candidate));
            }
        }
    }
    let (distance, mut stroke) = best.unwrap();
    assert!(
        distance > cfg.match_threshold * 1.2,
        "no room for a spurious stroke in {} ({distance})",
        s.label()
    );

    let mut m = s.clone();
    let index = if s.strokes.len() >= 2 {
        let gap_start = s.strokes[0].end_time().unwrap();
        let gap_end = s.strokes[1].start_time().unwrap();
        let t0 = gap_start + (gap_end - gap_start) / 4;
        for (k, p) in stroke.points.iter_mut().enumerate() {
            p.t = t0 + (k as u64) * ((gap_end - gap_start) / 8);
        }
        1
    } else {
        let t0 = s.strokes[0].start_time().unwrap();
        let span = s.strokes[0].duration();
        for (k, p) in stroke.points.iter_mut().enumerate() {
            p.t = t0 + (k as u64) * (span / 4);
        }
        0
    };
    m.strokes.insert(index, stroke);
    (m, index)
}

/// Reverses the point order of stroke `i` (timestamps keep their order).
pub fn reverse_stroke(s: &Sketch, i: usize) -> Sketch {
    let mut m = s.clone();
    m.strokes[i] = s.strokes[i].reversed();
    m
}

/// Swaps strokes `i` and `i + 1` in writing order. Every stroke keeps its own
/// duration and the pen-up gaps stay where they were, so the character's
/// total time is unchanged.
pub fn swap_adjacent(s: &Sketch, i: usize) -> Sketch {
    let gaps: Vec<u64> = s
        .strokes
        .windows(2)
        .map(|w| w[1].start_time().unwrap() - w[0].end_time().unwrap())
        .collect();
    let mut order: Vec<Stroke> = s.strokes.clone();
    order.swap(i, i + 1);
    let mut clock = s.strokes[0].start_time().unwrap();
    let mut out = Vec::with_capacity(order.len());
    for (k, st) in order.into_iter().enumerate() {
        let base = st.start_time().unwrap();
        let shifted = Stroke::new(
            st.points
                .iter()
                .map(|p| pt(p.x, p.y, p.t - base + clock))
                .collect(),
        );
        clock = shifted.end_time().unwrap() + gaps.get(k).copied().unwrap_or(0);
        out.push(shifted);
    }
    let mut m = s.clone();
    m.strokes = out;
    m
}

/// Multiplies each stroke's duration and each pen-up gap by its own factor.
pub fn jitter_timing(s: &Sketch, stroke_factors: &[f64], gap_factors: &[f64]) -> Sketch {
    let mut clock = s.strokes[0].start_time().unwrap();
    let mut out = Vec::new();
    for (k, st) in s.strokes.iter().enumerate() {
        let base = st.start_time().unwrap();
        let f = stroke_factors[k];
        let shifted = Stroke::new(
            st.points
                .iter()
                .map(|p| pt(p.x, p.y, clock + ((p.t - base) as f64 * f).round() as u64))
                .collect(),
        );
        if k + 1 < s.strokes.len() {
            let gap = s.strokes[k + 1].start_time().unwrap() - st.end_time().unwrap();
            clock = shifted.end_time().unwrap() + (gap as f64 * gap_factors[k]).round() as u64;
        }
        out.push(shifted);
    }
    let mut m = s.clone();
    m.strokes = out;
    m
}

pub fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
    assert!((a - b).abs() <= tol, "{what}: {a} vs {b} (tol {tol})");
}

pub fn default_config() -> ThresholdConfig {
    ThresholdConfig::default()
}

pub fn hausdorff_engine(a: &Stroke, b: &Stroke) -> f64 {
    hausdorff(a, b)
}

/// Raw values of every metric outside `family`, in report order.
pub fn raws_outside(report: &AssessmentReport, family: Family) -> Vec<(MetricId, Option<f64>)> {
    report
        .metrics
        .iter()
        .filter(|m| m.family != family)
        .map(|m| (m.id, m.raw))
        .collect()
}

pub fn raws_close(a: &[(MetricId, Option<f64>)], b: &[(MetricId, Option<f64>)], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|((ia, va), (ib, vb))| {
            ia == ib
                && match (va, vb) {
                    (Some(x), Some(y)) => (x - y).abs() <= tol,
                    (None, None) => true,
                    _ => false,
                }
        })
}

pub fn flags(report: &AssessmentReport, id: MetricId) -> Vec<bool> {
    report.metric(id).flags.clone().unwrap_or_default()
}

pub fn test_router() -> axum::Router {
    router(AppState::new(sample_store().clone(), ThresholdConfig::default()))
}

/// Sends one request through the router and returns status and body bytes.
pub async fn call(app: &axum::Router, method: &str, uri: &str, body: Option<String>) -> (StatusCode, Vec<u8>) {
    call_with_headers(app, method, uri, body, &[]).await
}

pub async fn call_with_headers(
    app: &axum::Router,
    method: &str,
    uri: &str,
    body: Option<String>,
    headers: &[(&str, &str)],
) -> (StatusCode, Vec<u8>) {
    let mut req = Request::builder().method(method).uri(uri);
    for (k, v) in headers {
        req = req.header(*k, *v);
    }
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes)
}

pub fn json_of(bytes: &[u8]) -> serde_json::Value {
    serde_json::from_slice(bytes).unwrap_or_else(|e| panic!("not JSON ({e}): {}", String::from_utf8_lossy(bytes)))
}
