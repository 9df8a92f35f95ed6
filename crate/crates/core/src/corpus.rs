//! Benchmark corpus: program records, manifest I/O, validation and
//! control-flow classification.

use crate::syntax::{self, visit, ParseError, Stmt, StmtKind, SyntaxTree};
use crate::transforms::TransformId;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Control-flow shape of a program, ordered by dominance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ControlFlowClass {
    Sequential,
    Branching,
    SinglePathLoop,
    MultiPathLoop,
    NestedLoop,
}

impl ControlFlowClass {
    pub const ALL: [ControlFlowClass; 5] = [
        ControlFlowClass::Sequential,
        ControlFlowClass::Branching,
        ControlFlowClass::SinglePathLoop,
        ControlFlowClass::MultiPathLoop,
        ControlFlowClass::NestedLoop,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ControlFlowClass::Sequential => "Sequential",
            ControlFlowClass::Branching => "Branching",
            ControlFlowClass::SinglePathLoop => "SinglePathLoop",
            ControlFlowClass::MultiPathLoop => "MultiPathLoop",
            ControlFlowClass::NestedLoop => "NestedLoop",
        }
    }

    pub fn has_loop(self) -> bool {
        self >= ControlFlowClass::SinglePathLoop
    }
}

impl fmt::Display for ControlFlowClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ControlFlowClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s.chars().filter(|c| c.is_alphanumeric()).collect::<String>().to_lowercase();
        ControlFlowClass::ALL
            .into_iter()
            .find(|c| c.as_str().to_lowercase() == key)
            .ok_or_else(|| format!("unknown control-flow class `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Origin {
    #[default]
    Base,
    Transformed {
        parent: String,
        transform: String,
    },
}

impl Origin {
    pub fn transformed(parent: impl Into<String>, transform: TransformId) -> Self {
        Origin::Transformed { parent: parent.into(), transform: transform.as_str().to_string() }
    }

    pub fn parent(&self) -> Option<&str> {
        match self {
            Origin::Base => None,
            Origin::Transformed { parent, .. } => Some(parent),
        }
    }

    pub fn transform(&self) -> Option<TransformId> {
        match self {
            Origin::Base => None,
            Origin::Transformed { transform, .. } => transform.parse().ok(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgramRecord {
    pub id: String,
    /// Path of the source file relative to the corpus directory.
    pub source_path: String,
    pub bare_source: String,
    pub intent: String,
    pub class: ControlFlowClass,
    pub origin: Origin,
}

impl ProgramRecord {
    /// Builds a record, classifying the source.
    pub fn new(
        id: impl Into<String>,
        bare_source: impl Into<String>,
        intent: impl Into<String>,
        origin: Origin,
    ) -> Result<Self, ParseError> {
        let id = id.into();
        let bare_source = syntax::normalize_line_endings(&bare_source.into());
        let class = classify_control_flow(&bare_source)?;
        Ok(ProgramRecord {
            source_path: default_source_path(&id),
            id,
            bare_source,
            intent: intent.into(),
            class,
            origin,
        })
    }
}

pub fn default_source_path(id: &str) -> String {
    format!("src/{id}.java")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    ParseFailure { message: String },
    AnnotationPresent { count: usize },
    DanglingParent { parent: String },
    UnknownTransform { transform: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ParseFailure { message } => write!(f, "source does not parse: {message}"),
            Violation::AnnotationPresent { count } => write!(f, "source contains {count} specification comment(s)"),
            Violation::DanglingParent { parent } => write!(f, "parent `{parent}` is not in the corpus"),
            Violation::UnknownTransform { transform } => write!(f, "unknown transform `{transform}`"),
        }
    }
}

/// Checks the record invariants. `known_ids` resolves parents of transformed records.
pub fn validate_record(record: &ProgramRecord, known_ids: &HashSet<&str>) -> Vec<Violation> {
    let mut out = Vec::new();
    match syntax::parse(&record.bare_source) {
        Ok(tree) => {
            let count = tree.annotation_comments().count();
            if count > 0 {
                out.push(Violation::AnnotationPresent { count });
            }
        }
        Err(e) => out.push(Violation::ParseFailure { message: e.to_string() }),
    }
    if let Origin::Transformed { parent, transform } = &record.origin {
        if !known_ids.contains(parent.as_str()) {
            out.push(Violation::DanglingParent { parent: parent.clone() });
        }
        if transform.parse::<TransformId>().is_err() {
            out.push(Violation::UnknownTransform { transform: transform.clone() });
        }
    }
    out
}

fn body_stmts(l: &Stmt) -> Vec<&Stmt> {
    visit::stmt_children(l).into_iter().flat_map(visit::stmts_in).collect()
}

pub fn classify_control_flow(bare_source: &str) -> Result<ControlFlowClass, ParseError> {
    Ok(classify_tree(&syntax::parse(bare_source)?))
}

/// Syntactic classification: any loop inside a loop is nested; a loop whose
/// body branches or exits early is multi-path; other loops are single-path;
/// statement-level `if`/`switch` without loops is branching.
pub fn classify_tree(tree: &SyntaxTree) -> ControlFlowClass {
    let stmts = visit::all_stmts(tree.unit());
    let loops: Vec<&Stmt> = stmts.iter().copied().filter(|s| s.is_loop()).collect();
    if loops.is_empty() {
        let branches = stmts.iter().any(|s| matches!(s.kind, StmtKind::If { .. } | StmtKind::Switch { .. }));
        return if branches { ControlFlowClass::Branching } else { ControlFlowClass::Sequential };
    }
    let mut multi = false;
    for l in &loops {
        let inner = body_stmts(l);
        if inner.iter().any(|s| s.is_loop()) {
            return ControlFlowClass::NestedLoop;
        }
        multi |= inner.iter().any(|s| {
            matches!(
                s.kind,
                StmtKind::If { .. }
                    | StmtKind::Switch { .. }
                    | StmtKind::Break(_)
                    | StmtKind::Continue(_)
                    | StmtKind::Return(_)
                    | StmtKind::Throw(_)
            )
        });
    }
    if multi {
        ControlFlowClass::MultiPathLoop
    } else {
        ControlFlowClass::SinglePathLoop
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub id: String,
    pub source_path: String,
    #[serde(default)]
    pub intent: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
    #[serde(default, skip_serializing_if = "is_base")]
    pub origin: Origin,
}

fn is_base(o: &Origin) -> bool {
    *o == Origin::Base
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<BTreeMap<String, usize>>,
    pub records: Vec<ManifestRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub name: String,
    pub version: String,
    pub records: Vec<ProgramRecord>,
}

impl Corpus {
    pub fn new(name: impl Into<String>, version: impl Into<String>, records: Vec<ProgramRecord>) -> Self {
        Corpus { name: name.into(), version: version.into(), records }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&ProgramRecord> {
        self.records.iter().find(|r| r.id == id)
    }

    pub fn ids(&self) -> HashSet<&str> {
        self.records.iter().map(|r| r.id.as_str()).collect()
    }

    /// Records per control-flow class; every class is present, possibly with 0.
    pub fn counts(&self) -> BTreeMap<ControlFlowClass, usize> {
        let mut counts: BTreeMap<ControlFlowClass, usize> = ControlFlowClass::ALL.iter().map(|c| (*c, 0)).collect();
        for r in &self.records {
            *counts.entry(r.class).or_default() += 1;
        }
        counts
    }

    pub fn manifest(&self) -> Manifest {
        Manifest {
            name: self.name.clone(),
            version: self.version.clone(),
            counts: Some(self.counts().into_iter().map(|(k, v)| (k.as_str().to_string(), v)).collect()),
            records: self
                .records
                .iter()
                .map(|r| ManifestRecord {
                    id: r.id.clone(),
                    source_path: r.source_path.clone(),
                    intent: r.intent.clone(),
                    class: Some(r.class.as_str().to_string()),
                    origin: r.origin.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("no {MANIFEST_FILE} in {0}")]
    MissingManifest(PathBuf),
    #[error("malformed manifest: {0}")]
    Manifest(String),
    #[error("record `{id}` does not parse: {error}")]
    ParseFailure { id: String, error: ParseError },
    #[error("duplicate record id `{0}`")]
    DuplicateId(String),
    #[error("record `{id}` is invalid: {}", .violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidRecord { id: String, violations: Vec<Violation> },
    #[error("cannot read source of `{id}`: {error}")]
    MissingSource { id: String, error: std::io::Error },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LoadMode {
    /// Any invalid record aborts the load.
    #[default]
    Strict,
    /// Invalid records are skipped and reported.
    Lenient,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadReport {
    /// Records dropped in lenient mode, with their violations.
    pub skipped: Vec<(String, Vec<Violation>)>,
    /// Records whose declared class differs from the computed one: (id, declared, computed).
    pub class_mismatches: Vec<(String, String, ControlFlowClass)>,
    /// Declared manifest counts that differ from the recomputed ones.
    pub count_mismatches: Vec<(String, usize, usize)>,
}

pub fn load_corpus(dir: &Path) -> Result<Corpus, CorpusError> {
    load_corpus_with(dir, LoadMode::Strict).map(|(c, _)| c)
}

pub fn load_corpus_with(dir: &Path, mode: LoadMode) -> Result<(Corpus, LoadReport), CorpusError> {
    let manifest_path = dir.join(MANIFEST_FILE);
    if !manifest_path.is_file() {
        return Err(CorpusError::MissingManifest(dir.to_path_buf()));
    }
    let text = fs::read_to_string(&manifest_path)?;
    let manifest = parse_manifest(&text)?;
    let mut report = LoadReport::default();

    let mut seen = HashSet::new();
    for r in &manifest.records {
        if !seen.insert(r.id.as_str()) {
            return Err(CorpusError::DuplicateId(r.id.clone()));
        }
    }
    let known: HashSet<&str> = seen;

    let mut records = Vec::with_capacity(manifest.records.len());
    for m in &manifest.records {
        let raw = match fs::read_to_string(dir.join(&m.source_path)) {
            Ok(s) => s,
            Err(error) => match mode {
                LoadMode::Strict => return Err(CorpusError::MissingSource { id: m.id.clone(), error }),
                LoadMode::Lenient => {
                    log::warn!("skipping `{}`: {error}", m.id);
                    report.skipped.push((m.id.clone(), vec![Violation::ParseFailure { message: error.to_string() }]));
                    continue;
                }
            },
        };
        let bare_source = syntax::normalize_line_endings(&raw);
        let tree = match syntax::parse(&bare_source) {
            Ok(t) => Some(t),
            Err(error) if mode == LoadMode::Strict => {
                return Err(CorpusError::ParseFailure { id: m.id.clone(), error })
            }
            Err(_) => None,
        };
        let class = tree.as_ref().map(classify_tree).unwrap_or(ControlFlowClass::Sequential);
        let record = ProgramRecord {
            id: m.id.clone(),
            source_path: m.source_path.clone(),
            bare_source,
            intent: m.intent.clone(),
            class,
            origin: m.origin.clone(),
        };
        let violations = validate_record(&record, &known);
        if !violations.is_empty() {
            match mode {
                LoadMode::Strict => {
                    return Err(CorpusError::InvalidRecord { id: record.id, violations });
                }
                LoadMode::Lenient => {
                    log::warn!("skipping invalid record `{}`", record.id);
                    report.skipped.push((record.id, violations));
                    continue;
                }
            }
        }
        if let Some(declared) = &m.class {
            if declared.parse::<ControlFlowClass>().ok() != Some(class) {
                log::warn!("record `{}` declares class {declared} but classifies as {class}", m.id);
                report.class_mismatches.push((m.id.clone(), declared.clone(), class));
            }
        }
        records.push(record);
    }
    let corpus = Corpus::new(manifest.name, manifest.version, records);
    if let Some(declared) = &manifest.counts {
        let actual = corpus.counts();
        for class in ControlFlowClass::ALL {
            let d = declared
                .iter()
                .find(|(k, _)| k.parse::<ControlFlowClass>().ok() == Some(class))
                .map(|(_, v)| *v)
                .unwrap_or(0);
            if d != actual[&class] {
                log::warn!("manifest declares {d} {class} records, found {}", actual[&class]);
                report.count_mismatches.push((class.as_str().to_string(), d, actual[&class]));
            }
        }
    }
    Ok((corpus, report))
}

/// Accepts either a full manifest object or a bare array of records.
pub fn parse_manifest(text: &str) -> Result<Manifest, CorpusError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| CorpusError::Manifest(e.to_string()))?;
    let manifest = if value.is_array() {
        let records = serde_json::from_value(value).map_err(|e| CorpusError::Manifest(e.to_string()))?;
        Manifest { records, ..Default::default() }
    } else {
        serde_json::from_value(value).map_err(|e| CorpusError::Manifest(e.to_string()))?
    };
    Ok(manifest)
}

/// Writes the manifest and every source file under `dir`.
pub fn save_corpus(corpus: &Corpus, dir: &Path) -> Result<(), CorpusError> {
    fs::create_dir_all(dir)?;
    for r in &corpus.records {
        let path = dir.join(&r.source_path);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, &r.bare_source)?;
    }
    let json = serde_json::to_string_pretty(&corpus.manifest()).expect("manifest serializes");
    fs::write(dir.join(MANIFEST_FILE), json + "\n")?;
    Ok(())
}
