//! Character-writing assessment engine.
//!
//! A student's handwritten character, captured as timestamped digital ink, is
//! normalized into the same frame as an expert's model template and scored on
//! ten metrics in three families:
//!
//! * structure: stroke match, stroke valid, stroke exist
//! * technique: stroke order, stroke direction
//! * precision: stroke edit, stroke length, stroke closeness, stroke speed,
//!   symbol speed
//!
//! Each metric yields a raw value and one to three stars under a
//! [`ThresholdConfig`]. The [`service`] module serves practice and quiz modes
//! over HTTP; the `kwb` binary wraps everything for the command line.

pub mod assignment;
pub mod cli;
pub mod config;
pub mod ink;
pub mod normalize;
pub mod precision;
pub mod quiz;
pub mod report;
pub mod scoring;
pub mod service;
pub mod store;
pub mod structure;
pub mod technique;

pub use config::ThresholdConfig;
pub use ink::{parse_ink, serialize_ink, BoundingBox, InkError, Point, SessionEvents, Sketch, Stroke};
pub use normalize::{normalize, NormalizedSketch};
pub use quiz::{quiz_summary, QuizReport};
pub use report::{assess_character, assess_with_store, AssessError, AssessmentReport};
pub use scoring::{score_metric, MetricId};
pub use store::{preprocess_templates, Template, TemplateStore};
pub use structure::{hausdorff, match_strokes, MatchMap};
