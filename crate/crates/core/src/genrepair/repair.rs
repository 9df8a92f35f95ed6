//! Generate, verify, triage, repair.

use super::client::{ModelClient, ModelConfig};
use super::extract::{extract_with, ExtractMode, InvalidReason};
use super::prompts::{Demo, PromptBundle, PromptStyle, PromptTemplates};
use super::GenError;
use crate::corpus::ProgramRecord;
use crate::syntax::{line_start, Placement, SpecifiedProgram};
use crate::triage::{dominant_category, triage, AtomicError, FailureCategory, PatternTable};
use crate::verify::{verify, Diagnostic, OutcomeKind, VerificationOutcome, VerifierBackend, VerifierConfig};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Everything one loop needs. Cheap to share across threads.
#[derive(Clone, Copy)]
pub struct Harness<'a> {
    pub model: &'a dyn ModelClient,
    pub model_config: &'a ModelConfig,
    pub verifier: &'a dyn VerifierBackend,
    pub verifier_config: &'a VerifierConfig,
    pub patterns: &'a PatternTable,
    pub templates: &'a PromptTemplates,
}

#[derive(Debug, Clone)]
pub struct RepairOptions {
    pub style: PromptStyle,
    pub max_iters: usize,
    pub demos: Vec<Demo>,
    /// Run the spec-mutation fallback with this many verifier calls when
    /// the loop ends on a Failure.
    pub mutation_budget: Option<usize>,
}

impl Default for RepairOptions {
    fn default() -> Self {
        RepairOptions { style: PromptStyle::ZeroShot, max_iters: 5, demos: Vec::new(), mutation_budget: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepairIteration {
    /// 1-based.
    pub index: usize,
    pub prompt: PromptBundle,
    pub response: String,
    pub extracted: Option<SpecifiedProgram>,
    pub invalid_reason: Option<InvalidReason>,
    pub outcome: VerificationOutcome,
    pub categories: Vec<AtomicError>,
    /// Category the next repair prompt targets.
    pub dominant: Option<FailureCategory>,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Terminal {
    Success,
    Exhausted,
    Invalid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutationRepair {
    pub program: Option<SpecifiedProgram>,
    /// The edit that produced `program`.
    pub edit: Option<String>,
    pub calls: usize,
    /// Why nothing was found.
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepairTrace {
    pub record_id: String,
    pub iterations: Vec<RepairIteration>,
    pub terminal: Terminal,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mutation: Option<MutationRepair>,
}

impl RepairTrace {
    pub fn last_outcome(&self) -> Option<&VerificationOutcome> {
        self.iterations.last().map(|i| &i.outcome)
    }

    /// The specification of the last iteration that produced one.
    pub fn latest_spec(&self) -> Option<&SpecifiedProgram> {
        self.iterations.iter().rev().find_map(|i| i.extracted.as_ref())
    }

    pub fn tokens(&self) -> u64 {
        self.iterations.iter().map(|i| i.prompt_tokens + i.completion_tokens).sum()
    }
}

/// One model call plus verification.
#[derive(Debug, Clone)]
pub struct Attempt {
    pub prompt: PromptBundle,
    pub response: String,
    pub extracted: Result<SpecifiedProgram, InvalidReason>,
    pub outcome: VerificationOutcome,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

fn invalid_outcome(reason: &InvalidReason) -> VerificationOutcome {
    let message = format!("invalid specification: {reason}");
    VerificationOutcome {
        kind: OutcomeKind::Invalid,
        diagnostics: vec![Diagnostic { file: None, line: None, raw_message: message.clone(), column: None, anchor: None }],
        wall_time: 0.0,
        raw_output: message,
    }
}

impl Harness<'_> {
    pub fn attempt(&self, prompt: PromptBundle, record: &ProgramRecord, mode: ExtractMode) -> Result<Attempt, GenError> {
        let resp = self.model.complete(&prompt, self.model_config)?;
        let extracted = extract_with(&resp.text, record, mode);
        let outcome = match &extracted {
            Ok(p) => verify(p, self.verifier_config, self.verifier)?,
            Err(reason) => invalid_outcome(reason),
        };
        Ok(Attempt {
            prompt,
            response: resp.text,
            extracted,
            outcome,
            prompt_tokens: resp.prompt_tokens,
            completion_tokens: resp.completion_tokens,
        })
    }

    /// A single generation attempt in the given style.
    pub fn generate(&self, record: &ProgramRecord, style: &PromptStyle, demos: &[Demo]) -> Result<Attempt, GenError> {
        let prompt = self.templates.build_prompt(style, record, demos)?;
        self.attempt(prompt, record, ExtractMode::Generation)
    }

    /// Iterates until a specification verifies or `max_iters` model calls
    /// have been made. Until some response yields a specification the
    /// generation prompt is re-issued; afterwards each round repairs the
    /// latest extracted specification against its errors, targeting the
    /// dominant category.
    pub fn self_repair(&self, record: &ProgramRecord, opts: &RepairOptions) -> Result<RepairTrace, GenError> {
        if opts.max_iters == 0 {
            return Err(GenError::InvalidBudget("max_iters"));
        }
        let first = self.templates.build_prompt(&opts.style, record, &opts.demos)?;
        let mut trace =
            RepairTrace { record_id: record.id.clone(), iterations: Vec::new(), terminal: Terminal::Invalid, mutation: None };
        // latest extracted spec with its errors and their dominant category
        let mut current: Option<(SpecifiedProgram, Vec<AtomicError>, FailureCategory)> = None;
        for index in 1..=opts.max_iters {
            let (prompt, mode) = match &current {
                None => (first.clone(), ExtractMode::Generation),
                Some((spec, errors, cat)) => {
                    (self.templates.build_repair_prompt(cat, spec, errors), ExtractMode::Repair)
                }
            };
            let a = match self.attempt(prompt, record, mode) {
                Ok(a) => a,
                Err(e) => return Err(GenError::Aborted { trace: Box::new(trace), source: Box::new(e) }),
            };
            let categories = triage(&a.outcome.diagnostics, self.patterns);
            let dominant = dominant_category(&categories);
            let (extracted, invalid_reason) = match a.extracted {
                Ok(p) => (Some(p), None),
                Err(r) => (None, Some(r)),
            };
            if let Some(p) = &extracted {
                let cat = dominant.clone().unwrap_or_else(FailureCategory::unmatched);
                current = Some((p.clone(), categories.clone(), cat));
            }
            log::debug!("{} iter {index}: {} (dominant {:?})", record.id, a.outcome.kind, dominant);
            let done = a.outcome.kind == OutcomeKind::Success;
            trace.iterations.push(RepairIteration {
                index,
                prompt: a.prompt,
                response: a.response,
                extracted,
                invalid_reason,
                outcome: a.outcome,
                categories,
                dominant,
                prompt_tokens: a.prompt_tokens,
                completion_tokens: a.completion_tokens,
            });
            if done {
                break;
            }
        }
        trace.terminal = match trace.last_outcome().map(|o| o.kind) {
            Some(OutcomeKind::Success) => Terminal::Success,
            Some(OutcomeKind::Invalid) => Terminal::Invalid,
            _ => Terminal::Exhausted,
        };
        if let (Some(budget), Some(OutcomeKind::Failure)) = (opts.mutation_budget, trace.last_outcome().map(|o| o.kind)) {
            let spec = trace.latest_spec().expect("a Failure outcome has a specification").clone();
            trace.mutation = Some(
                spec_mutation_repair(&spec, self.verifier, self.verifier_config, budget)
                    .map_err(|e| GenError::Aborted { trace: Box::new(trace.clone()), source: Box::new(e) })?,
            );
        }
        Ok(trace)
    }
}

/// Requires clauses are assumptions, never weakened or dropped.
fn mutable_clause(keyword: &str) -> bool {
    !matches!(keyword, "requires" | "pre")
}

/// Byte offsets of bare `<` / `>` relational operators in `text`, skipping
/// `<=`, `>=`, `<<`, `>>`, `->`, `==>`, `<==>` and `<==`.
fn relational_sites(text: &str) -> Vec<(usize, char)> {
    let b = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        if c == b'<' || c == b'>' {
            let prev = if i > 0 { b[i - 1] } else { b' ' };
            let next = b.get(i + 1).copied().unwrap_or(b' ');
            let arrow = c == b'>' && matches!(prev, b'-' | b'=');
            let paired = next == c || prev == c || next == b'=';
            if !arrow && !paired {
                out.push((i, c as char));
            }
            if c == b'<' && text[i..].starts_with("<==>") {
                i += 4;
                continue;
            }
        }
        i += 1;
    }
    out
}

/// Spec-level edits in application order: drop each non-requires clause,
/// then weaken each strict comparison in such clauses by one step.
pub fn spec_mutation_candidates(program: &SpecifiedProgram) -> Vec<(String, String)> {
    let src = &program.source;
    let mut drops = Vec::new();
    let mut weakens = Vec::new();
    for entry in &program.annotations.entries {
        let single = entry.clauses.len() == 1;
        for clause in entry.clauses.iter().filter(|c| mutable_clause(&c.keyword)) {
            let (from, to) = if single {
                match entry.placement {
                    Placement::OwnLine { .. } => {
                        let start = line_start(src, entry.span.start);
                        let end = src[entry.span.end..].find('\n').map_or(src.len(), |i| entry.span.end + i + 1);
                        (start, end)
                    }
                    _ => (entry.span.start, entry.span.end),
                }
            } else {
                let after = &src[clause.span.end..];
                let semi = after.len() - after.trim_start().len();
                let end = if after[semi..].starts_with(';') { clause.span.end + semi + 1 } else { clause.span.end };
                (clause.span.start, end)
            };
            drops.push((format!("drop `{}`", clause.text), format!("{}{}", &src[..from], &src[to..])));
            for (off, op) in relational_sites(&clause.text) {
                let at = clause.span.start + off;
                let label = format!("weaken `{op}` to `{op}=` in `{}`", clause.text);
                weakens.push((label, format!("{}{op}={}", &src[..at], &src[at + 1..])));
            }
        }
    }
    drops.extend(weakens);
    drops
}

/// Tries candidate edits in order until one verifies or `budget` verifier
/// calls are spent.
pub fn spec_mutation_repair(
    program: &SpecifiedProgram,
    verifier: &dyn VerifierBackend,
    config: &VerifierConfig,
    budget: usize,
) -> Result<MutationRepair, GenError> {
    if budget == 0 {
        return Err(GenError::InvalidBudget("mutation budget"));
    }
    let candidates = spec_mutation_candidates(program);
    let mut calls = 0;
    for (edit, source) in &candidates {
        let Ok(candidate) = SpecifiedProgram::new(source.clone(), program.base_id.clone()) else { continue };
        if calls == budget {
            return Ok(MutationRepair {
                program: None,
                edit: None,
                calls,
                reason: Some(format!("budget exhausted after {calls} verifier call(s)")),
            });
        }
        calls += 1;
        if verify(&candidate, config, verifier)?.kind == OutcomeKind::Success {
            return Ok(MutationRepair { program: Some(candidate), edit: Some(edit.clone()), calls, reason: None });
        }
    }
    Ok(MutationRepair {
        program: None,
        edit: None,
        calls,
        reason: Some(format!("none of {} candidate edit(s) verifies", candidates.len())),
    })
}

/// One JSON line per iteration, then a summary line.
pub fn write_transcript(trace: &RepairTrace, mut w: impl Write) -> Result<(), GenError> {
    for it in &trace.iterations {
        let mut v = serde_json::to_value(it).map_err(|e| GenError::Template(e.to_string()))?;
        v["record_id"] = trace.record_id.clone().into();
        writeln!(w, "{v}")?;
    }
    let summary = serde_json::json!({
        "record_id": trace.record_id,
        "terminal": trace.terminal,
        "iterations": trace.iterations.len(),
        "tokens": trace.tokens(),
        "mutation": trace.mutation,
    });
    writeln!(w, "{summary}")?;
    Ok(())
}
