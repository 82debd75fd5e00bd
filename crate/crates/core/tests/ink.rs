mod common;

use common::*;
use kwb_core::ink::{EditEvent, EditKind, SessionEvents};
use kwb_core::{parse_ink, serialize_ink, BoundingBox, Sketch};
use proptest::prelude::*;

fn arb_events() -> impl Strategy<Value = Option<SessionEvents>> {
    prop::option::of((0u64..1000, 0u64..5000, prop::collection::vec((any::<bool>(), 0u64..5000), 0..4)).prop_map(
        |(start, span, edits)| SessionEvents {
            started_at: start,
            submitted_at: start + span,
            edits: edits
                .into_iter()
                .map(|(undo, off)| EditEvent {
                    kind: if undo { EditKind::Undo } else { EditKind::Clear },
                    t: start + off.min(span),
                })
                .collect(),
        },
    ))
}

fn scan_box(s: &Sketch) -> (f64, f64, f64, f64) {
    let (mut x0, mut y0) = (f64::INFINITY, f64::INFINITY);
    let (mut x1, mut y1) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for st in &s.strokes {
        for p in &st.points {
            x0 = x0.min(p.x);
            y0 = y0.min(p.y);
            x1 = x1.max(p.x);
            y1 = y1.max(p.y);
        }
    }
    (x0, y0, x1 - x0, y1 - y0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn serialize_then_parse_is_identity((mut s, ev) in (arb_sketch(5, 12), arb_events())) {
        s.events = ev;
        let text = serialize_ink(&s);
        let back = parse_ink(&text).unwrap();
        prop_assert_eq!(&back, &s);
        prop_assert_eq!(serialize_ink(&back), text);
    }

    #[test]
    fn path_length_matches_summation(st in arb_stroke(20)) {
        assert_close(st.path_length(), oracle_path_length(&st), 1e-9, "path length");
    }

    #[test]
    fn bounding_box_matches_scan(s in arb_sketch(5, 12)) {
        let b = s.bounding_box().unwrap();
        let (x, y, w, h) = scan_box(&s);
        prop_assert_eq!((b.min_x, b.min_y, b.width, b.height), (x, y, w, h));
    }

    #[test]
    fn sketch_duration_spans_first_to_last_point(s in arb_sketch(5, 12)) {
        let first = s.strokes[0].points[0].t;
        let last = s.strokes.last().unwrap().points.last().unwrap().t;
        prop_assert_eq!(s.duration(), last - first);
    }
}

#[test]
fn serialization_is_byte_stable() {
    let s = raw_template("日");
    assert_eq!(serialize_ink(&s), serialize_ink(&s.clone()));
    let v: serde_json::Value = serde_json::from_str(&serialize_ink(&s)).unwrap();
    assert_eq!(v["strokes"].as_array().unwrap().len(), 4);
}

#[test]
fn three_four_five() {
    let st = line((0.0, 0.0), (3.0, 4.0), 2, 0, 10);
    assert_eq!(st.path_length(), 5.0);
    assert_eq!(
        BoundingBox::from_points(&st.points).unwrap(),
        BoundingBox { min_x: 0.0, min_y: 0.0, width: 3.0, height: 4.0 }
    );
}

#[test]
fn keys_in_any_order_parse_the_same() {
    let a = r#"{"strokes":[{"points":[{"t":0,"y":0,"x":0},{"t":50,"x":10,"y":0}]}],"metadata":{"canvasHeight":400,"label":"一","canvasWidth":400}}"#;
    let b = r#"{"metadata":{"label":"一","canvasWidth":400,"canvasHeight":400},"strokes":[{"points":[{"x":0,"y":0,"t":0},{"x":10,"y":0,"t":50}]}]}"#;
    assert_eq!(parse_ink(a).unwrap(), parse_ink(b).unwrap());
}

#[test]
fn schema_errors_name_their_path() {
    let err = parse_ink(r#"{"metadata":{"canvasWidth":400,"canvasHeight":400},"strokes":[]}"#).unwrap_err();
    assert_eq!(err.path(), Some("metadata.label"));
    let err = parse_ink(r#"{"metadata":{"label":"一","canvasWidth":400,"canvasHeight":400},"strokes":[{"points":[{"x":"a","y":0,"t":0}]}]}"#)
        .unwrap_err();
    assert_eq!(err.path(), Some("strokes[0].points[0].x"));
}

#[test]
fn every_sample_template_round_trips() {
    for label in labels() {
        let s = raw_template(&label);
        assert_eq!(parse_ink(&serialize_ink(&s)).unwrap(), s, "{label}");
    }
}
