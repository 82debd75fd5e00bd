//! Expert model templates and the lesson catalog.
//!
//! Raw expert ink is preprocessed once into an on-disk store:
//!
//! ```text
//! <store>/manifest.json          format version, content hash, template index
//! <store>/catalog.json           lessons and character information
//! <store>/templates/u4e00.json   one file per template, named by code points
//! ```
//!
//! Every file is pretty-printed JSON written in a fixed order, so the same
//! input always yields a byte-identical store.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ink::{parse_ink, InkError, Sketch};
use crate::normalize::{normalize, NormalizeError, NormalizedSketch};

pub const STORE_FORMAT_VERSION: u32 = 1;
const CACHE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Ink {
        path: PathBuf,
        #[source]
        source: InkError,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("catalog labels without a raw template: {}", .0.join(", "))]
    MissingTemplates(Vec<String>),
    #[error("labels defined more than once: {}", .0.join(", "))]
    DuplicateLabels(Vec<String>),
    #[error("lesson ids defined more than once: {}", .0.join(", "))]
    DuplicateLessons(Vec<String>),
    #[error("template `{label}` cannot be normalized: {source}")]
    Normalize {
        label: String,
        #[source]
        source: NormalizeError,
    },
    #[error("template `{0}` not found")]
    TemplateNotFound(String),
    #[error("lesson `{0}` not found")]
    LessonNotFound(String),
}

impl StoreError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        StoreError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn format(path: &Path, message: impl Into<String>) -> Self {
        StoreError::Format {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }

    pub fn is_not_found(&self) -> bool {
        matches!(self, StoreError::TemplateNotFound(_) | StoreError::LessonNotFound(_))
    }
}

/// An expert's recording of one character, pre-normalized, with cached
/// per-stroke measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Template {
    pub label: String,
    pub stroke_count: usize,
    /// Path lengths of the normalized strokes.
    pub per_stroke_lengths: Vec<f64>,
    /// Durations of the raw strokes, ms.
    pub per_stroke_durations: Vec<u64>,
    pub total_duration: u64,
    pub normalized: NormalizedSketch,
    pub raw: Sketch,
}

impl Template {
    pub fn from_raw(raw: Sketch, n: usize, size: f64) -> Result<Self, NormalizeError> {
        let normalized = normalize(&raw, n, size)?;
        Ok(Template {
            label: raw.metadata.label.clone(),
            stroke_count: raw.strokes.len(),
            per_stroke_lengths: normalized.strokes.iter().map(|s| s.path_length()).collect(),
            per_stroke_durations: raw.strokes.iter().map(|s| s.duration()).collect(),
            total_duration: raw.duration(),
            normalized,
            raw,
        })
    }

    /// Checks that cached measures agree with the strokes they describe.
    pub fn check_consistency(&self) -> Result<(), String> {
        if self.stroke_count != self.raw.strokes.len()
            || self.stroke_count != self.normalized.strokes.len()
        {
            return Err(format!(
                "stroke count {} disagrees with raw ({}) or normalized ({}) strokes",
                self.stroke_count,
                self.raw.strokes.len(),
                self.normalized.strokes.len()
            ));
        }
        if self.per_stroke_lengths.len() != self.stroke_count
            || self.per_stroke_durations.len() != self.stroke_count
        {
            return Err("cached per-stroke lists have the wrong length".into());
        }
        for (i, (cached, st)) in self.per_stroke_lengths.iter().zip(&self.normalized.strokes).enumerate() {
            if (cached - st.path_length()).abs() > CACHE_TOLERANCE {
                return Err(format!("cached length of stroke {i} is stale"));
            }
        }
        for (i, (cached, st)) in self.per_stroke_durations.iter().zip(&self.raw.strokes).enumerate() {
            if *cached != st.duration() {
                return Err(format!("cached duration of stroke {i} is stale"));
            }
        }
        if self.total_duration != self.raw.duration() {
            return Err("cached total duration is stale".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VocabularyEntry {
    pub word: String,
    pub pronunciation: String,
    pub translation: String,
    #[serde(default)]
    pub highlighted: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharacterInfo {
    pub label: String,
    #[serde(default)]
    pub pronunciations: Vec<String>,
    #[serde(default)]
    pub translations: Vec<String>,
    #[serde(default)]
    pub vocabulary: Vec<VocabularyEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogLesson {
    pub id: String,
    pub title: String,
    pub characters: Vec<CharacterInfo>,
}

/// The catalog file: lessons in teaching order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Catalog {
    pub lessons: Vec<CatalogLesson>,
}

impl Catalog {
    pub fn from_json(text: &str, path: &Path) -> Result<Self, StoreError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let catalog: Catalog = serde_path_to_error::deserialize(de).map_err(|e| {
            StoreError::format(path, format!("at `{}`: {}", e.path(), e.inner()))
        })?;
        catalog.validate()?;
        Ok(catalog)
    }

    pub fn load(path: &Path) -> Result<Self, StoreError> {
        let text = fs::read_to_string(path).map_err(|e| StoreError::io(path, e))?;
        Self::from_json(&text, path)
    }

    /// Every distinct label, in order of first appearance.
    pub fn labels(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        self.lessons
            .iter()
            .flat_map(|l| l.characters.iter())
            .map(|c| c.label.as_str())
            .filter(|l| seen.insert(*l))
            .collect()
    }

    fn validate(&self) -> Result<(), StoreError> {
        let mut ids = HashSet::new();
        let dup_ids: Vec<String> = self
            .lessons
            .iter()
            .filter(|l| !ids.insert(l.id.as_str()))
            .map(|l| l.id.clone())
            .collect();
        if !dup_ids.is_empty() {
            return Err(StoreError::DuplicateLessons(dup_ids));
        }
        let mut dups = Vec::new();
        for lesson in &self.lessons {
            let mut seen = HashSet::new();
            for c in &lesson.characters {
                if !seen.insert(c.label.as_str()) {
                    dups.push(format!("{} (lesson {})", c.label, lesson.id));
                }
            }
        }
        if !dups.is_empty() {
            return Err(StoreError::DuplicateLabels(dups));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Lesson {
    pub id: String,
    pub title: String,
    pub character_labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct ManifestEntry {
    label: String,
    file: String,
    sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct Manifest {
    format_version: u32,
    store_version: String,
    resample_points: usize,
    size: f64,
    templates: Vec<ManifestEntry>,
}

/// Read-only set of templates plus the lesson catalog.
#[derive(Debug, Clone)]
pub struct TemplateStore {
    templates: HashMap<String, Template>,
    order: Vec<String>,
    catalog: Catalog,
    lessons: Vec<Lesson>,
    info: HashMap<String, CharacterInfo>,
    version: String,
}

/// What [`preprocess_templates`] wrote.
#[derive(Debug, Clone)]
pub struct PreprocessSummary {
    pub store_version: String,
    /// (label, stroke count, file) per template, in catalog order.
    pub templates: Vec<(String, usize, String)>,
    pub orphans: Vec<String>,
}

impl TemplateStore {
    /// Builds a store in memory from a catalog and raw expert sketches.
    /// Raw sketches whose label is not in the catalog are ignored.
    pub fn build(catalog: Catalog, raws: Vec<Sketch>, n: usize, size: f64) -> Result<Self, StoreError> {
        let mut by_label: BTreeMap<String, Sketch> = BTreeMap::new();
        let mut dups = Vec::new();
        for raw in raws {
            let label = raw.metadata.label.clone();
            if by_label.insert(label.clone(), raw).is_some() {
                dups.push(label);
            }
        }
        if !dups.is_empty() {
            dups.sort();
            dups.dedup();
            return Err(StoreError::DuplicateLabels(dups));
        }
        let labels: Vec<String> = catalog.labels().into_iter().map(String::from).collect();
        let missing: Vec<String> = labels
            .iter()
            .filter(|l| !by_label.contains_key(*l))
            .cloned()
            .collect();
        if !missing.is_empty() {
            return Err(StoreError::MissingTemplates(missing));
        }
        let mut templates = HashMap::new();
        for label in &labels {
            let raw = by_label.remove(label).expect("checked above");
            let template = Template::from_raw(raw, n, size).map_err(|source| StoreError::Normalize {
                label: label.clone(),
                source,
            })?;
            templates.insert(label.clone(), template);
        }
        let mut store = Self::assemble(catalog, templates, labels, String::new());
        store.version = store.content_hash();
        Ok(store)
    }

    fn assemble(
        catalog: Catalog,
        templates: HashMap<String, Template>,
        order: Vec<String>,
        version: String,
    ) -> Self {
        let lessons = catalog
            .lessons
            .iter()
            .map(|l| Lesson {
                id: l.id.clone(),
                title: l.title.clone(),
                character_labels: l.characters.iter().map(|c| c.label.clone()).collect(),
            })
            .collect();
        let mut info = HashMap::new();
        for c in catalog.lessons.iter().flat_map(|l| l.characters.iter()) {
            info.entry(c.label.clone()).or_insert_with(|| c.clone());
        }
        TemplateStore {
            templates,
            order,
            catalog,
            lessons,
            info,
            version,
        }
    }

    /// Loads a preprocessed store directory, verifying file hashes and
    /// cached template measures.
    pub fn load(dir: &Path) -> Result<Self, StoreError> {
        let manifest_path = dir.join("manifest.json");
        let text = fs::read_to_string(&manifest_path).map_err(|e| StoreError::io(&manifest_path, e))?;
        let manifest: Manifest = serde_json::from_str(&text)
            .map_err(|e| StoreError::format(&manifest_path, e.to_string()))?;
        if manifest.format_version != STORE_FORMAT_VERSION {
            return Err(StoreError::format(
                &manifest_path,
                format!("unsupported store format {}", manifest.format_version),
            ));
        }
        let catalog = Catalog::load(&dir.join("catalog.json"))?;

        let mut templates = HashMap::new();
        let mut order = Vec::new();
        for entry in &manifest.templates {
            let path = dir.join(&entry.file);
            let bytes = fs::read(&path).map_err(|e| StoreError::io(&path, e))?;
            if hex_digest(&bytes) != entry.sha256 {
                return Err(StoreError::format(&path, "content hash does not match manifest"));
            }
            let template: Template = serde_json::from_slice(&bytes)
                .map_err(|e| StoreError::format(&path, e.to_string()))?;
            if template.label != entry.label {
                return Err(StoreError::format(
                    &path,
                    format!("holds `{}`, manifest says `{}`", template.label, entry.label),
                ));
            }
            template
                .check_consistency()
                .map_err(|m| StoreError::format(&path, m))?;
            order.push(template.label.clone());
            templates.insert(template.label.clone(), template);
        }
        let missing: Vec<String> = catalog
            .labels()
            .into_iter()
            .filter(|l| !templates.contains_key(*l))
            .map(String::from)
            .collect();
        if !missing.is_empty() {
            return Err(StoreError::MissingTemplates(missing));
        }
        Ok(Self::assemble(catalog, templates, order, manifest.store_version))
    }

    /// Content hash identifying this version of the store.
    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn lookup_template(&self, label: &str) -> Result<&Template, StoreError> {
        self.templates
            .get(label)
            .ok_or_else(|| StoreError::TemplateNotFound(label.to_string()))
    }

    /// Templates in catalog order.
    pub fn templates(&self) -> impl Iterator<Item = &Template> {
        self.order.iter().filter_map(|l| self.templates.get(l))
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn list_lessons(&self) -> &[Lesson] {
        &self.lessons
    }

    pub fn lesson(&self, id: &str) -> Result<&Lesson, StoreError> {
        self.lessons
            .iter()
            .find(|l| l.id == id)
            .ok_or_else(|| StoreError::LessonNotFound(id.to_string()))
    }

    pub fn lesson_characters(&self, id: &str) -> Result<Vec<&CharacterInfo>, StoreError> {
        let lesson = self.lesson(id)?;
        Ok(lesson
            .character_labels
            .iter()
            .filter_map(|l| self.info.get(l))
            .collect())
    }

    pub fn character_info(&self, label: &str) -> Option<&CharacterInfo> {
        self.info.get(label)
    }

    fn rendered_files(&self) -> Vec<(String, String, String)> {
        self.templates()
            .map(|t| {
                let body = to_pretty(t);
                (t.label.clone(), template_file_name(&t.label), body)
            })
            .collect()
    }

    fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(to_pretty(&self.catalog).as_bytes());
        for (label, file, body) in self.rendered_files() {
            hasher.update(label.as_bytes());
            hasher.update([0]);
            hasher.update(file.as_bytes());
            hasher.update([0]);
            hasher.update(body.as_bytes());
        }
        format!("{:x}", hasher.finalize())
    }

    /// Writes the store to `dir`. An existing store there is replaced; any
    /// other non-empty directory is left alone and reported as an error.
    pub fn write(&self, dir: &Path) -> Result<(), StoreError> {
        if dir.exists() {
            let has_entries = fs::read_dir(dir)
                .map_err(|e| StoreError::io(dir, e))?
                .next()
                .is_some();
            if has_entries && !dir.join("manifest.json").exists() {
                return Err(StoreError::format(dir, "refusing to overwrite a non-store directory"));
            }
            let tdir = dir.join("templates");
            if tdir.exists() {
                fs::remove_dir_all(&tdir).map_err(|e| StoreError::io(&tdir, e))?;
            }
        }
        let tdir = dir.join("templates");
        fs::create_dir_all(&tdir).map_err(|e| StoreError::io(&tdir, e))?;

        let mut entries = Vec::new();
        let n = self.templates().next().map_or(0, |t| t.normalized.resample_points);
        let size = self.templates().next().map_or(0.0, |t| t.normalized.size);
        for (label, file, body) in self.rendered_files() {
            let rel = format!("templates/{file}");
            let path = dir.join(&rel);
            fs::write(&path, body.as_bytes()).map_err(|e| StoreError::io(&path, e))?;
            entries.push(ManifestEntry {
                label,
                file: rel,
                sha256: hex_digest(body.as_bytes()),
            });
        }
        let catalog_path = dir.join("catalog.json");
        fs::write(&catalog_path, to_pretty(&self.catalog)).map_err(|e| StoreError::io(&catalog_path, e))?;
        let manifest = Manifest {
            format_version: STORE_FORMAT_VERSION,
            store_version: self.version.clone(),
            resample_points: n,
            size,
            templates: entries,
        };
        let manifest_path = dir.join("manifest.json");
        fs::write(&manifest_path, to_pretty(&manifest)).map_err(|e| StoreError::io(&manifest_path, e))?;
        Ok(())
    }
}

/// Reads raw expert ink (`*.json`, any file name) from `raw_dir` and the
/// catalog, normalizes every catalogued character once and writes the store
/// to `out_dir`.
pub fn preprocess_templates(
    raw_dir: &Path,
    catalog_path: &Path,
    out_dir: &Path,
    n: usize,
    size: f64,
) -> Result<PreprocessSummary, StoreError> {
    let catalog = Catalog::load(catalog_path)?;
    let raws = read_raw_dir(raw_dir)?;
    let catalogued: HashSet<&str> = catalog.labels().into_iter().collect();
    let mut orphans: Vec<String> = raws
        .iter()
        .map(|s| s.metadata.label.clone())
        .filter(|l| !catalogued.contains(l.as_str()))
        .collect();
    orphans.sort();
    for o in &orphans {
        log::warn!("raw template `{o}` is not referenced by the catalog");
    }
    let store = TemplateStore::build(catalog, raws, n, size)?;
    store.write(out_dir)?;
    Ok(PreprocessSummary {
        store_version: store.version.clone(),
        templates: store
            .templates()
            .map(|t| (t.label.clone(), t.stroke_count, format!("templates/{}", template_file_name(&t.label))))
            .collect(),
        orphans,
    })
}

/// Parses every `*.json` file in `dir`, in file-name order.
pub fn read_raw_dir(dir: &Path) -> Result<Vec<Sketch>, StoreError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| StoreError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|path| {
            let text = fs::read_to_string(&path).map_err(|e| StoreError::io(&path, e))?;
            parse_ink(&text).map_err(|source| StoreError::Ink { path, source })
        })
        .collect()
}

/// `一` -> `u4e00.json`; multi-code-point labels join with `_`.
pub fn template_file_name(label: &str) -> String {
    let stem: Vec<String> = label.chars().map(|c| format!("u{:04x}", c as u32)).collect();
    format!("{}.json", stem.join("_"))
}

fn hex_digest(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("store serialization cannot fail");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ink::{Metadata, Point, Stroke};

    fn raw(label: &str, strokes: usize) -> Sketch {
        Sketch::new(
            Metadata {
                label: label.into(),
                canvas_width: 400.0,
                canvas_height: 400.0,
            },
            (0..strokes)
                .map(|i| {
                    let y = 50.0 + 60.0 * i as f64;
                    let t0 = 500 * i as u64;
                    Stroke::new(vec![Point::new(50.0, y, t0), Point::new(350.0, y + 5.0, t0 + 300)])
                })
                .collect(),
        )
    }

    fn catalog(lessons: &[(&str, &[&str])]) -> Catalog {
        Catalog {
            lessons: lessons
                .iter()
                .map(|(id, labels)| CatalogLesson {
                    id: id.to_string(),
                    title: format!("Lesson {id}"),
                    characters: labels
                        .iter()
                        .map(|l| CharacterInfo {
                            label: l.to_string(),
                            pronunciations: vec![],
                            translations: vec![],
                            vocabulary: vec![],
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    #[test]
    fn file_names() {
        assert_eq!(template_file_name("一"), "u4e00.json");
        assert_eq!(template_file_name("ab"), "u0061_u0062.json");
    }

    #[test]
    fn build_and_lookup() {
        let store = TemplateStore::build(
            catalog(&[("L1", &["一", "二"]), ("L2", &["三"])]),
            vec![raw("一", 1), raw("二", 2), raw("三", 3)],
            64,
            250.0,
        )
        .unwrap();
        assert_eq!(store.lookup_template("一").unwrap().stroke_count, 1);
        assert!(store.lookup_template("☃").unwrap_err().is_not_found());
        assert_eq!(store.list_lessons().len(), 2);
        assert_eq!(store.lesson_characters("L1").unwrap().len(), 2);
        assert!(matches!(store.lesson_characters("L99"), Err(StoreError::LessonNotFound(_))));
        for t in store.templates() {
            t.check_consistency().unwrap();
            assert!(t.normalized.strokes.iter().all(|s| s.points.len() == 64));
        }
    }

    #[test]
    fn missing_templates_are_listed() {
        let err = TemplateStore::build(catalog(&[("L1", &["一", "水"])]), vec![raw("一", 1)], 64, 250.0)
            .unwrap_err();
        match err {
            StoreError::MissingTemplates(labels) => assert_eq!(labels, vec!["水".to_string()]),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn duplicate_raw_labels_are_rejected() {
        let err = TemplateStore::build(catalog(&[("L1", &["一"])]), vec![raw("一", 1), raw("一", 1)], 64, 250.0)
            .unwrap_err();
        assert!(matches!(err, StoreError::DuplicateLabels(l) if l == vec!["一".to_string()]));
    }

    #[test]
    fn duplicate_catalog_entries_are_rejected() {
        let text = r#"{"lessons":[{"id":"L1","title":"t","characters":[{"label":"一"},{"label":"一"}]}]}"#;
        assert!(matches!(
            Catalog::from_json(text, Path::new("c.json")),
            Err(StoreError::DuplicateLabels(_))
        ));
    }

    #[test]
    fn stale_cache_is_detected() {
        let mut t = Template::from_raw(raw("三", 3), 64, 250.0).unwrap();
        t.per_stroke_lengths[1] += 1e-6;
        assert!(t.check_consistency().is_err());
    }
}
