//! Failure triage: split verifier diagnostics into atomic errors and label
//! each with a failure category from an ordered pattern table.

use crate::verify::Diagnostic;
use regex::Regex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

pub const DEFAULT_PATTERNS: &str = include_str!("../data/failure_patterns.toml");

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FailureCategory {
    SyntaxError,
    InvalidSpecification,
    UnsupportedQuantifier,
    UnsupportedMinMaxQuantifier,
    PostconditionFailure,
    LoopInvariantFailure,
    ArithmeticOperationRange,
    AssertionFailure,
    NullDereference,
    DivideByZero,
    ArrayIndexFailure,
    Other(String),
}

impl FailureCategory {
    pub const NAMED: [FailureCategory; 11] = [
        FailureCategory::SyntaxError,
        FailureCategory::InvalidSpecification,
        FailureCategory::UnsupportedQuantifier,
        FailureCategory::UnsupportedMinMaxQuantifier,
        FailureCategory::PostconditionFailure,
        FailureCategory::LoopInvariantFailure,
        FailureCategory::ArithmeticOperationRange,
        FailureCategory::AssertionFailure,
        FailureCategory::NullDereference,
        FailureCategory::DivideByZero,
        FailureCategory::ArrayIndexFailure,
    ];

    pub fn unmatched() -> Self {
        FailureCategory::Other("unmatched".to_string())
    }

    /// Name used in tables and for alphabetical tie-breaking. `Other`
    /// categories render as their label.
    pub fn name(&self) -> &str {
        match self {
            FailureCategory::SyntaxError => "SyntaxError",
            FailureCategory::InvalidSpecification => "InvalidSpecification",
            FailureCategory::UnsupportedQuantifier => "UnsupportedQuantifier",
            FailureCategory::UnsupportedMinMaxQuantifier => "UnsupportedMinMaxQuantifier",
            FailureCategory::PostconditionFailure => "PostconditionFailure",
            FailureCategory::LoopInvariantFailure => "LoopInvariantFailure",
            FailureCategory::ArithmeticOperationRange => "ArithmeticOperationRange",
            FailureCategory::AssertionFailure => "AssertionFailure",
            FailureCategory::NullDereference => "NullDereference",
            FailureCategory::DivideByZero => "DivideByZero",
            FailureCategory::ArrayIndexFailure => "ArrayIndexFailure",
            FailureCategory::Other(label) => label,
        }
    }

    pub fn is_other(&self) -> bool {
        matches!(self, FailureCategory::Other(_))
    }
}

impl fmt::Display for FailureCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FailureCategory::Other(label) => write!(f, "Other:{label}"),
            c => f.write_str(c.name()),
        }
    }
}

impl FromStr for FailureCategory {
    type Err = String;

    /// A built-in name, or `Other:<label>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(label) = s.strip_prefix("Other:") {
            let label = label.trim();
            if label.is_empty() {
                return Err("Other category needs a label".into());
            }
            return Ok(FailureCategory::Other(label.to_string()));
        }
        FailureCategory::NAMED
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown failure category `{s}` (use Other:<label> for new ones)"))
    }
}

impl Serialize for FailureCategory {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FailureCategory {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TriageError {
    #[error("pattern table: {0}")]
    Table(#[from] toml::de::Error),
    #[error("rule {index}: bad regex: {source}")]
    Regex { index: usize, source: regex::Error },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternRule {
    pub pattern: String,
    #[serde(default)]
    pub regex: bool,
    pub category: FailureCategory,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

#[derive(Debug, Deserialize)]
struct TableFile {
    #[serde(default)]
    rule: Vec<PatternRule>,
}

#[derive(Debug, Clone)]
enum Matcher {
    Substring(String),
    Regex(Regex),
}

/// Ordered rules; the first match wins.
#[derive(Debug, Clone)]
pub struct PatternTable {
    rules: Vec<(PatternRule, Matcher)>,
}

impl Default for PatternTable {
    fn default() -> Self {
        PatternTable::from_toml(DEFAULT_PATTERNS).expect("bundled pattern table is valid")
    }
}

impl PatternTable {
    pub fn new(rules: Vec<PatternRule>) -> Result<Self, TriageError> {
        let rules = rules
            .into_iter()
            .enumerate()
            .map(|(index, r)| {
                let m = if r.regex {
                    Matcher::Regex(Regex::new(&r.pattern).map_err(|source| TriageError::Regex { index, source })?)
                } else {
                    Matcher::Substring(r.pattern.clone())
                };
                Ok((r, m))
            })
            .collect::<Result<_, TriageError>>()?;
        Ok(PatternTable { rules })
    }

    pub fn from_toml(text: &str) -> Result<Self, TriageError> {
        let file: TableFile = toml::from_str(text)?;
        Self::new(file.rule)
    }

    pub fn load(path: &Path) -> Result<Self, TriageError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Rules from `other` are tried before the existing ones.
    pub fn with_overrides(mut self, other: PatternTable) -> Self {
        let mut rules = other.rules;
        rules.append(&mut self.rules);
        PatternTable { rules }
    }

    pub fn rules(&self) -> impl Iterator<Item = &PatternRule> {
        self.rules.iter().map(|(r, _)| r)
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Category and the text the winning rule matched.
    pub fn lookup(&self, message: &str) -> Option<(&FailureCategory, String)> {
        self.rules.iter().find_map(|(rule, m)| {
            let hit = match m {
                Matcher::Substring(s) => message.contains(s.as_str()).then(|| s.clone()),
                Matcher::Regex(re) => re.find(message).map(|x| x.as_str().to_string()),
            };
            hit.map(|h| (&rule.category, h))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomicError {
    pub diagnostic: Diagnostic,
    pub category: FailureCategory,
    pub matched_pattern: String,
}

/// One candidate per proof-obligation message, duplicates of the same
/// (line, message) collapsed. Auxiliary "Associated declaration" records
/// are dropped.
pub fn split_atomic(diagnostics: &[Diagnostic]) -> Vec<Diagnostic> {
    let mut seen: HashSet<(Option<usize>, String)> = HashSet::new();
    diagnostics
        .iter()
        .filter(|d| !d.message().starts_with("Associated declaration"))
        .filter(|d| seen.insert((d.line, d.message().to_string())))
        .cloned()
        .collect()
}

pub fn categorize(error: &Diagnostic, patterns: &PatternTable) -> FailureCategory {
    classify(error, patterns).category
}

pub fn classify(error: &Diagnostic, patterns: &PatternTable) -> AtomicError {
    let (category, matched_pattern) = match patterns.lookup(&error.raw_message) {
        Some((c, m)) => (c.clone(), m),
        None => (FailureCategory::unmatched(), String::new()),
    };
    AtomicError { diagnostic: error.clone(), category, matched_pattern }
}

/// Split then classify.
pub fn triage(diagnostics: &[Diagnostic], patterns: &PatternTable) -> Vec<AtomicError> {
    split_atomic(diagnostics).iter().map(|d| classify(d, patterns)).collect()
}

/// Top-`k` categories by count; ties by name.
pub fn distribution(errors: &[AtomicError], k: usize) -> Vec<(FailureCategory, usize)> {
    let mut counts: BTreeMap<&FailureCategory, usize> = BTreeMap::new();
    for e in errors {
        *counts.entry(&e.category).or_default() += 1;
    }
    let mut v: Vec<(FailureCategory, usize)> = counts.into_iter().map(|(c, n)| (c.clone(), n)).collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.name().cmp(b.0.name())));
    v.truncate(k.max(1));
    v
}

/// The category a repair round targets.
pub fn dominant_category(errors: &[AtomicError]) -> Option<FailureCategory> {
    distribution(errors, 1).into_iter().next().map(|(c, _)| c)
}

pub fn write_distribution_csv(dist: &[(FailureCategory, usize)], w: impl Write) -> Result<(), TriageError> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(["rank", "category", "count"])?;
    for (i, (c, n)) in dist.iter().enumerate() {
        w.write_record([(i + 1).to_string(), c.to_string(), n.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_table_loads() {
        let t = PatternTable::default();
        assert!(t.len() >= 13);
        let covered: HashSet<&FailureCategory> = t.rules().map(|r| &r.category).collect();
        for c in &FailureCategory::NAMED {
            assert!(covered.contains(c), "{c} has no rule");
        }
    }

    #[test]
    fn category_names_round_trip() {
        for c in FailureCategory::NAMED.into_iter().chain([FailureCategory::unmatched()]) {
            assert_eq!(c.to_string().parse::<FailureCategory>().unwrap(), c);
        }
        assert!("Other:".parse::<FailureCategory>().is_err());
        assert!("Nope".parse::<FailureCategory>().is_err());
    }

    #[test]
    fn bad_regex_is_reported() {
        let err = PatternTable::from_toml("[[rule]]\npattern = \"(\"\nregex = true\ncategory = \"SyntaxError\"\n");
        assert!(matches!(err, Err(TriageError::Regex { index: 0, .. })));
    }
}
