//! Driving an external deductive verifier and normalizing what it prints.
//!
//! Three backends share one interface: a real process, a replay store of
//! recorded outputs keyed by program hash, and an in-memory stub.

use crate::syntax::{self, line_start, Span, SpecifiedProgram};
use rayon::prelude::*;
use regex::Regex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io::Read;
use std::path::Path;
use std::process::{Command, Stdio};
use std::sync::LazyLock;
use std::time::{Duration, Instant};
use wait_timeout::ChildExt;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifierConfig {
    /// Whitespace-separated argv. `{file}` is required; `{flags}` expands to
    /// the mode flags and `{solver}` to the solver name.
    pub command_template: String,
    pub mode_flags: Vec<String>,
    pub solver: String,
    pub timeout_secs: f64,
    pub nullable_by_default: bool,
    pub arithmetic_mode: bool,
    /// Substrings that mark a run as inconclusive.
    pub inconclusive_markers: Vec<String>,
    /// Worker-pool bound for batch verification.
    pub workers: usize,
}

impl Default for VerifierConfig {
    fn default() -> Self {
        VerifierConfig {
            command_template: "openjml {flags} -prover {solver} {file}".to_string(),
            mode_flags: vec!["-esc".to_string()],
            solver: "cvc4".to_string(),
            timeout_secs: 300.0,
            nullable_by_default: true,
            arithmetic_mode: true,
            inconclusive_markers: DEFAULT_INCONCLUSIVE.iter().map(|s| s.to_string()).collect(),
            workers: 4,
        }
    }
}

pub const DEFAULT_INCONCLUSIVE: &[&str] = &[
    "timed out",
    "Timeout",
    "The prover reported unknown",
    "Prover aborted",
    "resource limit",
    "Exception in thread",
];

impl VerifierConfig {
    pub fn validate(&self) -> Result<(), VerifyError> {
        if !(self.timeout_secs > 0.0 && self.timeout_secs.is_finite()) {
            return Err(VerifyError::ConfigInvalid(format!("timeout must be positive, got {}", self.timeout_secs)));
        }
        if !self.command_template.split_whitespace().any(|t| t.contains("{file}")) {
            return Err(VerifyError::ConfigInvalid("command_template has no {file} placeholder".into()));
        }
        if self.workers == 0 {
            return Err(VerifyError::ConfigInvalid("workers must be at least 1".into()));
        }
        Ok(())
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout_secs)
    }

    /// Mode flags followed by the nullable/arithmetic switches.
    pub fn flags(&self) -> Vec<String> {
        let mut out = self.mode_flags.clone();
        if self.nullable_by_default {
            out.push("-nullableByDefault".to_string());
        }
        if self.arithmetic_mode {
            out.push("-code-math=java".to_string());
            out.push("-spec-math=bigint".to_string());
        }
        out
    }

    /// The argv for verifying `file`.
    pub fn argv(&self, file: &Path) -> Vec<String> {
        let file = file.to_string_lossy();
        let mut out = Vec::new();
        for tok in self.command_template.split_whitespace() {
            if tok == "{flags}" {
                out.extend(self.flags());
            } else {
                out.push(tok.replace("{file}", &file).replace("{solver}", &self.solver));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Diagnostic {
    /// `None` for output lines that are not `file:line:` records.
    pub file: Option<String>,
    pub line: Option<usize>,
    pub raw_message: String,
    /// Column of the caret line under the echoed source, 1-based.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<Span>,
}

impl Diagnostic {
    /// The message after the `file:line: level:` prefix.
    pub fn message(&self) -> &str {
        match RECORD.captures(&self.raw_message) {
            Some(c) => c.get(4).map_or("", |m| m.as_str()),
            None => &self.raw_message,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OutcomeKind {
    Success,
    Failure,
    Unknown,
    Invalid,
}

impl OutcomeKind {
    pub const ALL: [OutcomeKind; 4] = [OutcomeKind::Success, OutcomeKind::Failure, OutcomeKind::Unknown, OutcomeKind::Invalid];

    pub fn as_str(self) -> &'static str {
        match self {
            OutcomeKind::Success => "Success",
            OutcomeKind::Failure => "Failure",
            OutcomeKind::Unknown => "Unknown",
            OutcomeKind::Invalid => "Invalid",
        }
    }
}

impl fmt::Display for OutcomeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for OutcomeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        OutcomeKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown outcome kind `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationOutcome {
    pub kind: OutcomeKind,
    pub diagnostics: Vec<Diagnostic>,
    pub wall_time: f64,
    pub raw_output: String,
}

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error("verifier backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("invalid verifier config: {0}")]
    ConfigInvalid(String),
    #[error("no recorded output for program hash {0}")]
    ReplayMiss(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// What a backend observed, before classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRun {
    pub raw_output: String,
    pub exit_status: Option<i32>,
    #[serde(default)]
    pub timed_out: bool,
}

impl RawRun {
    pub fn clean(raw_output: impl Into<String>) -> Self {
        RawRun { raw_output: raw_output.into(), exit_status: Some(0), timed_out: false }
    }

    pub fn failed(raw_output: impl Into<String>) -> Self {
        RawRun { raw_output: raw_output.into(), exit_status: Some(1), timed_out: false }
    }

    pub fn timeout() -> Self {
        RawRun { raw_output: String::new(), exit_status: None, timed_out: true }
    }
}

pub trait VerifierBackend: Send + Sync {
    fn run(&self, program: &SpecifiedProgram, config: &VerifierConfig) -> Result<RawRun, VerifyError>;
}

static RECORD: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(.+?):(\d+):(?:\d+:)?\s*(verify|error|warning):\s*(.*)$").unwrap());
static SUMMARY: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^\d+ (verification (failures?|errors?)|errors?|warnings?)\.?$").unwrap()
});

/// One diagnostic per `file:line: verify:` (or `error:`) record, in output
/// order. Echoed source lines and carets following a record belong to it;
/// stray lines before any record become file-less diagnostics. Warnings
/// and count summaries are dropped.
pub fn parse_diagnostics(raw_output: &str) -> Vec<Diagnostic> {
    let mut out: Vec<Diagnostic> = Vec::new();
    // whether the current record is kept (warnings are not)
    let mut current: Option<bool> = None;
    for line in raw_output.lines() {
        let line = line.trim_end_matches('\r');
        if let Some(c) = RECORD.captures(line) {
            let keep = &c[3] != "warning";
            if keep {
                out.push(Diagnostic {
                    file: Some(c[1].to_string()),
                    line: c[2].parse().ok().filter(|&n| n >= 1),
                    raw_message: line.to_string(),
                    column: None,
                    anchor: None,
                });
            }
            current = Some(keep);
            continue;
        }
        let trimmed = line.trim();
        if trimmed.is_empty() || SUMMARY.is_match(trimmed) {
            continue;
        }
        match current {
            Some(true) => {
                let d = out.last_mut().expect("kept record");
                if trimmed.chars().all(|c| c == '^' || c == '~') && d.column.is_none() {
                    d.column = line.find('^').map(|i| i + 1);
                }
            }
            Some(false) => {}
            None => out.push(Diagnostic { file: None, line: None, raw_message: trimmed.to_string(), column: None, anchor: None }),
        }
    }
    out
}

/// Invalid, then Unknown, then Failure, then Success. A non-zero exit with
/// nothing to show for it is Unknown.
pub fn classify_outcome(
    exit_status: Option<i32>,
    diagnostics: &[Diagnostic],
    timed_out: bool,
    spec_parse_ok: bool,
) -> OutcomeKind {
    classify_with_markers(exit_status, diagnostics, timed_out, spec_parse_ok, DEFAULT_INCONCLUSIVE)
}

pub fn classify_with_markers<S: AsRef<str>>(
    exit_status: Option<i32>,
    diagnostics: &[Diagnostic],
    timed_out: bool,
    spec_parse_ok: bool,
    markers: &[S],
) -> OutcomeKind {
    if !spec_parse_ok {
        return OutcomeKind::Invalid;
    }
    let inconclusive = diagnostics.iter().any(|d| markers.iter().any(|m| d.raw_message.contains(m.as_ref())));
    if timed_out || inconclusive {
        return OutcomeKind::Unknown;
    }
    if !diagnostics.is_empty() {
        return OutcomeKind::Failure;
    }
    match exit_status {
        Some(0) => OutcomeKind::Success,
        _ => OutcomeKind::Unknown,
    }
}

/// Hex sha256 of the program text; the replay key.
pub fn program_hash(source: &str) -> String {
    hex::encode(Sha256::digest(source.as_bytes()))
}

pub fn verify(
    program: &SpecifiedProgram,
    config: &VerifierConfig,
    backend: &dyn VerifierBackend,
) -> Result<VerificationOutcome, VerifyError> {
    config.validate()?;
    let start = Instant::now();
    if let Err(e) = syntax::strip_annotations(&program.source) {
        let message = format!("invalid specification: {e}");
        return Ok(VerificationOutcome {
            kind: OutcomeKind::Invalid,
            diagnostics: vec![Diagnostic { file: None, line: Some(e.line), raw_message: message.clone(), column: None, anchor: None }],
            wall_time: start.elapsed().as_secs_f64(),
            raw_output: message,
        });
    }
    let run = backend.run(program, config)?;
    let mut diagnostics = if run.timed_out { Vec::new() } else { parse_diagnostics(&run.raw_output) };
    for d in &mut diagnostics {
        d.anchor = anchor_in(&program.source, d);
    }
    let kind =
        classify_with_markers(run.exit_status, &diagnostics, run.timed_out, true, &config.inconclusive_markers);
    Ok(VerificationOutcome { kind, diagnostics, wall_time: start.elapsed().as_secs_f64(), raw_output: run.raw_output })
}

/// Span of the token under the caret (or the whole line) in `source`.
fn anchor_in(source: &str, d: &Diagnostic) -> Option<Span> {
    let line = d.line?;
    let mut start = 0;
    for _ in 1..line {
        start += source[start..].find('\n')? + 1;
    }
    debug_assert_eq!(line_start(source, start), start);
    let end = source[start..].find('\n').map_or(source.len(), |i| start + i);
    match d.column {
        Some(col) if start + col - 1 < end => {
            let s = start + col - 1;
            let len = source[s..end].find(|c: char| !(c.is_alphanumeric() || c == '_')).unwrap_or(end - s).max(1);
            Some(Span::new(s, (s + len).min(end)))
        }
        _ => Some(Span::new(start, end)),
    }
}

/// Verifies every program on a pool of `config.workers` threads. Results
/// are in submission order.
pub fn verify_all(
    programs: &[SpecifiedProgram],
    config: &VerifierConfig,
    backend: &dyn VerifierBackend,
) -> Result<Vec<Result<VerificationOutcome, VerifyError>>, VerifyError> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| VerifyError::BackendUnavailable(e.to_string()))?;
    Ok(pool.install(|| programs.par_iter().map(|p| verify(p, config, backend)).collect()))
}

/// Runs the configured command on a temp copy of the program.
#[derive(Debug, Clone, Default)]
pub struct ProcessBackend;

/// Public class name, so the temp file satisfies javac's naming rule.
fn file_name(source: &str) -> String {
    static CLASS: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"public\s+(?:final\s+|abstract\s+)*class\s+(\w+)").unwrap());
    CLASS.captures(source).map(|c| format!("{}.java", &c[1])).unwrap_or_else(|| "Main.java".to_string())
}

impl VerifierBackend for ProcessBackend {
    fn run(&self, program: &SpecifiedProgram, config: &VerifierConfig) -> Result<RawRun, VerifyError> {
        let dir = tempfile::tempdir()?;
        let path = dir.path().join(file_name(&program.source));
        fs::write(&path, &program.source)?;
        let argv = config.argv(&path);
        let mut child = Command::new(&argv[0])
            .args(&argv[1..])
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| VerifyError::BackendUnavailable(format!("{}: {e}", argv[0])))?;
        let drain = |r: Option<Box<dyn Read + Send>>| {
            std::thread::spawn(move || {
                let mut buf = String::new();
                if let Some(mut r) = r {
                    let _ = r.read_to_string(&mut buf);
                }
                buf
            })
        };
        let out = drain(child.stdout.take().map(|s| Box::new(s) as Box<dyn Read + Send>));
        let err = drain(child.stderr.take().map(|s| Box::new(s) as Box<dyn Read + Send>));
        let status = match child.wait_timeout(config.timeout())? {
            Some(s) => s,
            None => {
                child.kill()?;
                child.wait()?;
                log::warn!("verifier timed out after {}s on {}", config.timeout_secs, program.base_id);
                return Ok(RawRun::timeout());
            }
        };
        let mut raw = out.join().unwrap_or_default();
        raw.push_str(&err.join().unwrap_or_default());
        Ok(RawRun { raw_output: raw, exit_status: status.code(), timed_out: false })
    }
}

/// Recorded runs keyed by [`program_hash`]. On disk: one `{hash}.json` per run.
#[derive(Debug, Clone, Default)]
pub struct ReplayBackend {
    runs: HashMap<String, RawRun>,
}

impl ReplayBackend {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn load(dir: &Path) -> Result<Self, VerifyError> {
        let mut runs = HashMap::new();
        let entries = fs::read_dir(dir).map_err(|e| VerifyError::BackendUnavailable(format!("{}: {e}", dir.display())))?;
        for entry in entries {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e == "json") {
                let key = path.file_stem().unwrap().to_string_lossy().into_owned();
                let run: RawRun = serde_json::from_str(&fs::read_to_string(&path)?)
                    .map_err(|e| VerifyError::BackendUnavailable(format!("{}: {e}", path.display())))?;
                runs.insert(key, run);
            }
        }
        Ok(ReplayBackend { runs })
    }

    pub fn insert(&mut self, program_source: &str, run: RawRun) {
        self.runs.insert(program_hash(program_source), run);
    }

    pub fn len(&self) -> usize {
        self.runs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn save(&self, dir: &Path) -> Result<(), VerifyError> {
        fs::create_dir_all(dir)?;
        for (hash, run) in &self.runs {
            let text = serde_json::to_string_pretty(run).expect("RawRun serializes");
            fs::write(dir.join(format!("{hash}.json")), text)?;
        }
        Ok(())
    }
}

impl VerifierBackend for ReplayBackend {
    fn run(&self, program: &SpecifiedProgram, _: &VerifierConfig) -> Result<RawRun, VerifyError> {
        let hash = program_hash(&program.source);
        self.runs.get(&hash).cloned().ok_or(VerifyError::ReplayMiss(hash))
    }
}

/// Answers from a table keyed by program id, with a fallback.
#[derive(Debug, Clone)]
pub struct StubBackend {
    pub by_id: HashMap<String, RawRun>,
    pub fallback: RawRun,
}

impl StubBackend {
    pub fn always(run: RawRun) -> Self {
        StubBackend { by_id: HashMap::new(), fallback: run }
    }

    pub fn with(mut self, id: impl Into<String>, run: RawRun) -> Self {
        self.by_id.insert(id.into(), run);
        self
    }
}

impl VerifierBackend for StubBackend {
    fn run(&self, program: &SpecifiedProgram, _: &VerifierConfig) -> Result<RawRun, VerifyError> {
        Ok(self.by_id.get(&program.base_id).cloned().unwrap_or_else(|| self.fallback.clone()))
    }
}
