//! Generation and repair prompt construction.

use crate::corpus::ProgramRecord;
use crate::syntax::SpecifiedProgram;
use crate::triage::{AtomicError, FailureCategory};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;

use super::GenError;

pub const DEFAULT_TEMPLATES: &str = include_str!("../../data/prompts.toml");

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PromptStyle {
    ZeroShot,
    FewShot,
    CoT,
    #[serde(rename = "LTM")]
    Ltm,
    Repair(FailureCategory),
}

impl PromptStyle {
    pub fn needs_demos(&self) -> bool {
        matches!(self, PromptStyle::FewShot | PromptStyle::CoT | PromptStyle::Ltm)
    }
}

impl fmt::Display for PromptStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PromptStyle::ZeroShot => f.write_str("ZeroShot"),
            PromptStyle::FewShot => f.write_str("FewShot"),
            PromptStyle::CoT => f.write_str("CoT"),
            PromptStyle::Ltm => f.write_str("LTM"),
            PromptStyle::Repair(c) => write!(f, "Repair({c})"),
        }
    }
}

impl std::str::FromStr for PromptStyle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s.chars().filter(|c| c.is_alphanumeric()).collect::<String>().to_lowercase();
        match key.as_str() {
            "zeroshot" | "zero" => Ok(PromptStyle::ZeroShot),
            "fewshot" | "few" => Ok(PromptStyle::FewShot),
            "cot" | "chainofthought" => Ok(PromptStyle::CoT),
            "ltm" | "leasttomost" => Ok(PromptStyle::Ltm),
            _ => Err(format!("unknown prompt style `{s}`")),
        }
    }
}

/// A worked example shown to the model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Demo {
    pub id: String,
    pub bare_source: String,
    pub specified_source: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub style: PromptStyle,
    pub record_id: String,
    pub system: String,
    pub user: String,
    pub examples_used: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
struct GenerationTemplates {
    system_zero: String,
    system_guided: String,
    user: String,
    cot_suffix: String,
    ltm_suffix: String,
    demo: String,
}

#[derive(Debug, Clone, Deserialize)]
pub struct CategoryTemplate {
    pub category: FailureCategory,
    pub title: String,
    pub guidance: String,
}

#[derive(Debug, Clone, Deserialize)]
struct RepairTemplates {
    system: String,
    user: String,
    generic_guidance: String,
    #[serde(default)]
    category: Vec<CategoryTemplate>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct PromptTemplates {
    generation: GenerationTemplates,
    repair: RepairTemplates,
}

impl Default for PromptTemplates {
    fn default() -> Self {
        PromptTemplates::from_toml(DEFAULT_TEMPLATES).expect("bundled templates are valid")
    }
}

impl PromptTemplates {
    pub fn from_toml(text: &str) -> Result<Self, GenError> {
        toml::from_str(text).map_err(|e| GenError::Template(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, GenError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// The dedicated template for a category, if any.
    pub fn category(&self, c: &FailureCategory) -> Option<&CategoryTemplate> {
        self.repair.category.iter().find(|t| &t.category == c)
    }

    pub fn build_prompt(&self, style: &PromptStyle, record: &ProgramRecord, demos: &[Demo]) -> Result<PromptBundle, GenError> {
        if let PromptStyle::Repair(_) = style {
            return Err(GenError::Template("repair prompts are built with build_repair_prompt".into()));
        }
        if style.needs_demos() && demos.is_empty() {
            return Err(GenError::MissingDemos(style.to_string()));
        }
        let g = &self.generation;
        let (system, used) = if style.needs_demos() {
            let examples: Vec<String> = demos
                .iter()
                .enumerate()
                .map(|(i, d)| {
                    fill(
                        &g.demo,
                        &[("n", &(i + 1).to_string()), ("code", d.bare_source.trim_end()), ("spec", d.specified_source.trim_end())],
                    )
                })
                .collect();
            (fill(&g.system_guided, &[("examples", &examples.join("\n\n"))]), demos.iter().map(|d| d.id.clone()).collect())
        } else {
            (g.system_zero.clone(), Vec::new())
        };
        let mut user = fill(&g.user, &[("code", record.bare_source.trim_end())]);
        match style {
            PromptStyle::CoT => user = format!("{user}\n\n{}", g.cot_suffix),
            PromptStyle::Ltm => user = format!("{user}\n\n{}", g.ltm_suffix),
            _ => {}
        }
        Ok(PromptBundle { style: style.clone(), record_id: record.id.clone(), system, user, examples_used: used })
    }

    /// Repair prompt carrying the current specification, its atomic errors
    /// and the category's guidance (generic guidance when the category has
    /// no template).
    pub fn build_repair_prompt(
        &self,
        category: &FailureCategory,
        program: &SpecifiedProgram,
        errors: &[AtomicError],
    ) -> PromptBundle {
        let r = &self.repair;
        let (title, guidance) = match self.category(category) {
            Some(t) => (t.title.as_str(), t.guidance.as_str()),
            None => (category.name(), r.generic_guidance.as_str()),
        };
        let messages: Vec<&str> = errors.iter().map(|e| e.diagnostic.raw_message.as_str()).collect();
        let user = fill(
            &r.user,
            &[
                ("spec", program.source.trim_end()),
                ("errors", &messages.join("\n")),
                ("error_type", title),
                ("guidance", guidance.trim()),
            ],
        );
        PromptBundle {
            style: PromptStyle::Repair(category.clone()),
            record_id: program.base_id.clone(),
            system: r.system.clone(),
            user,
            examples_used: Vec::new(),
        }
    }
}

/// Substitutes `{key}` placeholders in one pass, so substituted text is
/// never scanned again.
pub fn fill(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let hit = after.find('}').and_then(|close| {
            let key = &after[..close];
            vars.iter().find(|(k, _)| *k == key).map(|(_, v)| (close, *v))
        });
        match hit {
            Some((close, v)) => {
                out.push_str(v);
                rest = &after[close + 1..];
            }
            None => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}
