//! Corpus-level stages: generate, verify, completeness runs, score.

use crate::corpus::{Corpus, ProgramRecord};
use crate::genrepair::{
    extract_specification, Demo, GenError, InvalidReason, ModelClient, ModelConfig, PromptBundle, PromptStyle,
    PromptTemplates,
};
use crate::metrics::{MetricReport, MetricsError, OutcomeEntry, OutcomeLog, ReportOptions};
use crate::mutate::{
    completeness_inputs, generate_mutants, suppress_equivalents, CompletenessError, MutantSet, MutationOperator, SkippedPair,
};
use crate::syntax::{ParseError, SpecifiedProgram};
use crate::verify::{verify, Diagnostic, OutcomeKind, VerificationOutcome, VerifierBackend, VerifierConfig, VerifyError};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, Write};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("mutating `{0}`: {1}")]
    Mutate(String, ParseError),
    #[error("pairing mutants of `{0}`: {1}")]
    Completeness(String, CompletenessError),
    #[error("no record `{0}` in the corpus")]
    UnknownRecord(String),
    #[error("worker pool: {0}")]
    Pool(String),
    #[error("line {line}: {message}")]
    BadLine { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One model response and what was extracted from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generation {
    pub record_id: String,
    pub prompt: PromptBundle,
    pub response: String,
    pub spec: Option<SpecifiedProgram>,
    pub invalid_reason: Option<InvalidReason>,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

impl Generation {
    pub fn tokens(&self) -> u64 {
        self.prompt_tokens + self.completion_tokens
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, PipelineError> {
    rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build().map_err(|e| PipelineError::Pool(e.to_string()))
}

/// One generation per record, in record order.
pub fn generate_all(
    records: &[ProgramRecord],
    model: &dyn ModelClient,
    config: &ModelConfig,
    templates: &PromptTemplates,
    style: &PromptStyle,
    demos: &[Demo],
    workers: usize,
) -> Result<Vec<Generation>, PipelineError> {
    config.validate()?;
    let run = |r: &ProgramRecord| -> Result<Generation, PipelineError> {
        let prompt = templates.build_prompt(style, r, demos)?;
        let resp = model.complete(&prompt, config)?;
        let (spec, invalid_reason) = match extract_specification(&resp.text, r) {
            Ok(p) => (Some(p), None),
            Err(e) => (None, Some(e)),
        };
        Ok(Generation {
            record_id: r.id.clone(),
            prompt,
            response: resp.text,
            spec,
            invalid_reason,
            prompt_tokens: resp.prompt_tokens,
            completion_tokens: resp.completion_tokens,
        })
    };
    pool(workers)?.install(|| records.par_iter().map(run).collect())
}

fn invalid(reason: &InvalidReason) -> VerificationOutcome {
    let message = format!("invalid specification: {reason}");
    VerificationOutcome {
        kind: OutcomeKind::Invalid,
        diagnostics: vec![Diagnostic { file: None, line: None, raw_message: message.clone(), column: None, anchor: None }],
        wall_time: 0.0,
        raw_output: message,
    }
}

/// Verifies every generation. Entries follow generation order; a
/// generation without a specification is Invalid.
pub fn verify_generations(
    generations: &[Generation],
    corpus: &Corpus,
    verifier: &dyn VerifierBackend,
    config: &VerifierConfig,
) -> Result<(OutcomeLog, Vec<VerificationOutcome>), PipelineError> {
    config.validate()?;
    let by_id: HashMap<&str, &ProgramRecord> = corpus.records.iter().map(|r| (r.id.as_str(), r)).collect();
    for g in generations {
        if !by_id.contains_key(g.record_id.as_str()) {
            return Err(PipelineError::UnknownRecord(g.record_id.clone()));
        }
    }
    let outcomes: Vec<VerificationOutcome> = pool(config.workers)?.install(|| {
        generations
            .par_iter()
            .map(|g| match (&g.spec, &g.invalid_reason) {
                (Some(p), _) => verify(p, config, verifier),
                (None, Some(r)) => Ok(invalid(r)),
                (None, None) => Ok(invalid(&InvalidReason::NoCodeBlock)),
            })
            .collect::<Result<_, _>>()
    })?;
    let entries = generations
        .iter()
        .zip(&outcomes)
        .map(|(g, o)| OutcomeEntry {
            record_id: g.record_id.clone(),
            origin: by_id[g.record_id.as_str()].origin.clone(),
            kind: o.kind,
            wall_time: o.wall_time,
            token_cost: Some(g.tokens()),
            mutant_id: None,
        })
        .collect();
    Ok((OutcomeLog::new(entries), outcomes))
}

/// Verifies each base specification that verified against every
/// non-equivalent mutant of its program. Returns the mutant entries and the
/// pairs that could not be formed.
pub fn completeness_runs(
    generations: &[Generation],
    log: &OutcomeLog,
    corpus: &Corpus,
    operators: &BTreeSet<MutationOperator>,
    verifier: &dyn VerifierBackend,
    config: &VerifierConfig,
) -> Result<(Vec<OutcomeEntry>, Vec<SkippedPair>), PipelineError> {
    let verified = verified_base(log);
    let mut sets = Vec::new();
    for id in &verified {
        let Some(record) = corpus.get(id) else { continue };
        let set = generate_mutants(&record.id, &record.bare_source, operators)
            .map_err(|e| PipelineError::Mutate(record.id.clone(), e))?;
        sets.push(suppress_equivalents(set));
    }
    completeness_runs_with(generations, log, &sets, verifier, config)
}

fn verified_base(log: &OutcomeLog) -> BTreeSet<&str> {
    log.entries
        .iter()
        .filter(|e| e.mutant_id.is_none() && e.origin.parent().is_none() && e.kind == OutcomeKind::Success)
        .map(|e| e.record_id.as_str())
        .collect()
}

/// Same as [`completeness_runs`] with mutant sets produced earlier.
pub fn completeness_runs_with(
    generations: &[Generation],
    log: &OutcomeLog,
    sets: &[MutantSet],
    verifier: &dyn VerifierBackend,
    config: &VerifierConfig,
) -> Result<(Vec<OutcomeEntry>, Vec<SkippedPair>), PipelineError> {
    let verified = verified_base(log);
    let by_parent: HashMap<&str, &MutantSet> = sets.iter().map(|s| (s.parent_id.as_str(), s)).collect();
    let mut pairs = Vec::new();
    let mut skipped = Vec::new();
    for g in generations.iter().filter(|g| verified.contains(g.record_id.as_str())) {
        let (Some(spec), Some(set)) = (&g.spec, by_parent.get(g.record_id.as_str())) else { continue };
        let (ps, sk) = completeness_inputs(spec, set).map_err(|e| PipelineError::Completeness(g.record_id.clone(), e))?;
        pairs.extend(ps);
        skipped.extend(sk);
    }
    let entries = pool(config.workers)?.install(|| {
        pairs
            .par_iter()
            .map(|(m, p)| {
                verify(p, config, verifier).map(|o| OutcomeEntry {
                    wall_time: o.wall_time,
                    ..OutcomeEntry::mutant(m.parent_id.clone(), m.id.clone(), o.kind)
                })
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok((entries, skipped))
}

#[derive(Debug, Clone)]
pub struct PipelineOptions {
    pub label: String,
    pub style: PromptStyle,
    pub demos: Vec<Demo>,
    pub operators: BTreeSet<MutationOperator>,
    /// Skip the completeness stage when false.
    pub completeness: bool,
    pub workers: usize,
    pub report: ReportOptions,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            label: "model".into(),
            style: PromptStyle::ZeroShot,
            demos: Vec::new(),
            operators: MutationOperator::all(),
            completeness: true,
            workers: 4,
            report: ReportOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub generations: Vec<Generation>,
    pub outcomes: Vec<VerificationOutcome>,
    pub log: OutcomeLog,
    pub skipped_pairs: Vec<SkippedPair>,
    pub report: MetricReport,
}

/// Every stage in process: generate, verify, completeness, score.
pub fn run_pipeline(
    corpus: &Corpus,
    model: &dyn ModelClient,
    model_config: &ModelConfig,
    templates: &PromptTemplates,
    verifier: &dyn VerifierBackend,
    verifier_config: &VerifierConfig,
    opts: &PipelineOptions,
) -> Result<PipelineRun, PipelineError> {
    let generations =
        generate_all(&corpus.records, model, model_config, templates, &opts.style, &opts.demos, opts.workers)?;
    let (mut log, outcomes) = verify_generations(&generations, corpus, verifier, verifier_config)?;
    let mut skipped_pairs = Vec::new();
    if opts.completeness {
        let (entries, skipped) =
            completeness_runs(&generations, &log, corpus, &opts.operators, verifier, verifier_config)?;
        log.entries.extend(entries);
        skipped_pairs = skipped;
    }
    let report = MetricReport::from_log(&opts.label, &log, Some(corpus), opts.report.clone())?;
    Ok(PipelineRun { generations, outcomes, log, skipped_pairs, report })
}

pub fn write_generations(gens: &[Generation], mut w: impl Write) -> Result<(), PipelineError> {
    for g in gens {
        let line = serde_json::to_string(g).map_err(|e| PipelineError::BadLine { line: 0, message: e.to_string() })?;
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn read_generations(r: impl BufRead) -> Result<Vec<Generation>, PipelineError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| PipelineError::BadLine { line: i + 1, message: e.to_string() })?);
    }
    Ok(out)
}
