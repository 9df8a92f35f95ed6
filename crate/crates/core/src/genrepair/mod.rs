//! Specification generation, extraction and the self-repair loop.

pub mod client;
pub mod extract;
pub mod prompts;
pub mod repair;

pub use client::{estimate_tokens, prompt_hash, ModelClient, ModelConfig, ModelResponse, ReplayClient, ScriptedClient};
#[cfg(feature = "http")]
pub use client::HttpClient;
pub use extract::{extract_repair, extract_specification, extract_with, ExtractMode, InvalidReason};
pub use prompts::{fill, Demo, PromptBundle, PromptStyle, PromptTemplates};
pub use repair::{
    spec_mutation_candidates, spec_mutation_repair, write_transcript, Attempt, Harness, MutationRepair, RepairIteration,
    RepairOptions, RepairTrace, Terminal,
};

use crate::verify::VerifyError;

#[derive(Debug, thiserror::Error)]
pub enum GenError {
    #[error("prompt style {0} needs at least one demonstration")]
    MissingDemos(String),
    #[error("prompt template: {0}")]
    Template(String),
    #[error("model config: {0}")]
    Config(String),
    #[error("model call failed: {0}")]
    Model(String),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error("{0} must be at least 1")]
    InvalidBudget(&'static str),
    #[error("repair of `{}` aborted after {} iteration(s): {source}", .trace.record_id, .trace.iterations.len())]
    Aborted { trace: Box<RepairTrace>, source: Box<GenError> },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
