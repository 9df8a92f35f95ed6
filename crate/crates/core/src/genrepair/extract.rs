//! Pulling a specified program out of a model response.

use crate::corpus::ProgramRecord;
use crate::syntax::{lexer, normalize_line_endings, strip_annotations, SpecifiedProgram};
use regex::Regex;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::LazyLock;

pub const SPEC_MARKER: &str = "### SPECIFICATION";
pub const FIXED_MARKER: &str = "### FIXED SPECIFICATION";

static FENCE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?s)```[^\n]*\n(.*?)```").unwrap());

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum InvalidReason {
    NoCodeBlock,
    Unparseable(String),
    BodyChanged,
    NoAnnotations,
}

impl fmt::Display for InvalidReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InvalidReason::NoCodeBlock => f.write_str("response has no fenced code block"),
            InvalidReason::Unparseable(e) => write!(f, "code block does not parse: {e}"),
            InvalidReason::BodyChanged => f.write_str("code block changes the program body"),
            InvalidReason::NoAnnotations => f.write_str("code block has no JML annotations"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtractMode {
    /// First fenced block, or the first after `### SPECIFICATION` when present.
    Generation,
    /// First block after `### FIXED SPECIFICATION`, else the last block.
    Repair,
}

/// Contents of each fenced block, in order.
pub fn code_blocks(response: &str) -> Vec<(usize, &str)> {
    FENCE.captures_iter(response).map(|c| (c.get(0).unwrap().start(), c.get(1).unwrap().as_str())).collect()
}

fn pick_block(response: &str, mode: ExtractMode) -> Option<&str> {
    let blocks = code_blocks(response);
    let after = |marker: &str| {
        response.find(marker).and_then(|m| blocks.iter().find(|(at, _)| *at >= m).map(|(_, b)| *b))
    };
    match mode {
        ExtractMode::Generation => after(SPEC_MARKER).or_else(|| blocks.first().map(|(_, b)| *b)),
        ExtractMode::Repair => after(FIXED_MARKER).or_else(|| {
            let last = blocks.last().map(|(_, b)| *b);
            if last.is_some() {
                log::warn!("repair response lacks `{FIXED_MARKER}`; using its last code block");
            }
            last
        }),
    }
}

fn code_tokens(src: &str) -> Result<Vec<String>, String> {
    let lexed = lexer::tokenize(src).map_err(|e| e.to_string())?;
    Ok(lexed.tokens.iter().map(|t| t.span.slice(src).to_string()).collect())
}

/// The specified program in a generation response.
pub fn extract_specification(response: &str, record: &ProgramRecord) -> Result<SpecifiedProgram, InvalidReason> {
    extract_with(response, record, ExtractMode::Generation)
}

/// The specified program in a repair response.
pub fn extract_repair(response: &str, record: &ProgramRecord) -> Result<SpecifiedProgram, InvalidReason> {
    extract_with(response, record, ExtractMode::Repair)
}

/// The block must parse, carry at least one annotation, and have exactly
/// the record's code tokens once annotations are removed (layout and
/// ordinary comments may differ).
pub fn extract_with(response: &str, record: &ProgramRecord, mode: ExtractMode) -> Result<SpecifiedProgram, InvalidReason> {
    let response = normalize_line_endings(response);
    let block = pick_block(&response, mode).ok_or(InvalidReason::NoCodeBlock)?;
    let (bare, index) = strip_annotations(block).map_err(|e| InvalidReason::Unparseable(e.to_string()))?;
    let want = code_tokens(&record.bare_source).map_err(InvalidReason::Unparseable)?;
    if code_tokens(&bare).map_err(InvalidReason::Unparseable)? != want {
        return Err(InvalidReason::BodyChanged);
    }
    if index.is_empty() {
        return Err(InvalidReason::NoAnnotations);
    }
    Ok(SpecifiedProgram { source: block.to_string(), annotations: index, base_id: record.id.clone() })
}
