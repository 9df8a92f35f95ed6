//! Semantic-preserving program transformations, naturalness scoring and
//! construction of the variant corpora.

mod diverse;
mod naturalness;
mod rename;
mod rules;
mod util;

pub use diverse::{build_diverse, variant_id, DiverseCorpora, DiverseError};
pub use naturalness::{naturalness, LanguageModelScorer, NgramScorer, ScorerError};
pub use rename::{FirstCharacter, NameProvider, SynonymTable};

use crate::syntax::{
    self, embed_annotations_lenient, strip_annotations, ParseError, RewriteError, Rewriter, SyntaxTree,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TransformId {
    VariableRenaming1,
    VariableRenaming2,
    SwitchRelation,
    Unary2Add,
    Add2Equal,
    MergeVarDecl,
    InfixDividing,
    SwitchEqualExp,
    SwitchStringEqual,
    For2While,
    While2For,
    ElseIf2If,
    Switch2If,
    SwapStatement,
    ReverseIf,
    If2CondExp,
    CondExp2If,
    DividingComposedIf,
}

impl TransformId {
    pub const ALL: [TransformId; 18] = [
        TransformId::VariableRenaming1,
        TransformId::VariableRenaming2,
        TransformId::SwitchRelation,
        TransformId::Unary2Add,
        TransformId::Add2Equal,
        TransformId::MergeVarDecl,
        TransformId::InfixDividing,
        TransformId::SwitchEqualExp,
        TransformId::SwitchStringEqual,
        TransformId::For2While,
        TransformId::While2For,
        TransformId::ElseIf2If,
        TransformId::Switch2If,
        TransformId::SwapStatement,
        TransformId::ReverseIf,
        TransformId::If2CondExp,
        TransformId::CondExp2If,
        TransformId::DividingComposedIf,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TransformId::VariableRenaming1 => "VariableRenaming1",
            TransformId::VariableRenaming2 => "VariableRenaming2",
            TransformId::SwitchRelation => "SwitchRelation",
            TransformId::Unary2Add => "Unary2Add",
            TransformId::Add2Equal => "Add2Equal",
            TransformId::MergeVarDecl => "MergeVarDecl",
            TransformId::InfixDividing => "InfixDividing",
            TransformId::SwitchEqualExp => "SwitchEqualExp",
            TransformId::SwitchStringEqual => "SwitchStringEqual",
            TransformId::For2While => "For2While",
            TransformId::While2For => "While2For",
            TransformId::ElseIf2If => "ElseIf2If",
            TransformId::Switch2If => "Switch2If",
            TransformId::SwapStatement => "SwapStatement",
            TransformId::ReverseIf => "ReverseIf",
            TransformId::If2CondExp => "If2CondExp",
            TransformId::CondExp2If => "CondExp2If",
            TransformId::DividingComposedIf => "DividingComposedIf",
        }
    }

    /// Transforms whose output can expose new sites of the same kind are
    /// re-applied until nothing changes.
    fn to_fixpoint(self) -> bool {
        matches!(self, TransformId::DividingComposedIf)
    }
}

impl fmt::Display for TransformId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TransformId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s.chars().filter(|c| c.is_alphanumeric()).collect::<String>().to_lowercase();
        TransformId::ALL
            .into_iter()
            .find(|t| t.as_str().to_lowercase() == key)
            .ok_or_else(|| format!("unknown transform `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformResult {
    pub variant_source: String,
    pub transform: TransformId,
    pub sites_rewritten: usize,
    pub applicable: bool,
    /// Annotation entries whose anchor was rewritten away and had to be moved.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub moved_annotations: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransformError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("conflicting rewrite sites: {0}")]
    RewriteConflict(#[from] RewriteError),
    #[error("{transform} produced unparseable output: {error}")]
    InvalidOutput { transform: TransformId, error: ParseError },
}

/// Applies one transform with the default name providers.
pub fn apply(transform: TransformId, source: &str) -> Result<TransformResult, TransformError> {
    Transformer::default().apply(transform, source)
}

pub fn applicable_transforms(source: &str) -> Result<BTreeSet<TransformId>, TransformError> {
    Transformer::default().applicable(source)
}

/// Transform engine; holds the substitution provider for `VariableRenaming2`.
pub struct Transformer {
    pub synonyms: Box<dyn NameProvider>,
}

impl Default for Transformer {
    fn default() -> Self {
        Transformer { synonyms: Box::new(SynonymTable::default()) }
    }
}

impl Transformer {
    pub fn with_provider(provider: impl NameProvider + 'static) -> Self {
        Transformer { synonyms: Box::new(provider) }
    }

    /// Rewrites every applicable site. Annotated input is stripped, the bare
    /// program transformed, and the annotations embedded again at their
    /// remapped anchors.
    pub fn apply(&self, transform: TransformId, source: &str) -> Result<TransformResult, TransformError> {
        let (bare, mut index) = strip_annotations(source)?;
        let mut current = bare.clone();
        let mut sites = 0;
        loop {
            let tree = syntax::parse(&current)?;
            let plan = self.plan(transform, &tree);
            if plan.sites == 0 {
                break;
            }
            let mut rw = Rewriter::new(&current);
            for e in plan.edits {
                rw.push(e);
            }
            let (out, map) = rw.apply_with_map()?;
            syntax::parse(&out).map_err(|error| TransformError::InvalidOutput { transform, error })?;
            index = index.remap(&map).0;
            if out == current {
                break;
            }
            sites += plan.sites;
            current = out;
            if !transform.to_fixpoint() {
                break;
            }
        }
        if current == bare {
            return Ok(TransformResult {
                variant_source: source.to_string(),
                transform,
                sites_rewritten: 0,
                applicable: false,
                moved_annotations: Vec::new(),
            });
        }
        let (variant_source, moved) = if index.is_empty() {
            (current, Vec::new())
        } else {
            embed_annotations_lenient(&current, &index)
                .map_err(|error| TransformError::InvalidOutput { transform, error })?
        };
        Ok(TransformResult { variant_source, transform, sites_rewritten: sites, applicable: true, moved_annotations: moved })
    }

    pub fn applicable(&self, source: &str) -> Result<BTreeSet<TransformId>, TransformError> {
        let mut out = BTreeSet::new();
        for t in TransformId::ALL {
            if self.apply(t, source)?.applicable {
                out.insert(t);
            }
        }
        Ok(out)
    }

    fn plan(&self, transform: TransformId, tree: &SyntaxTree) -> rules::Plan {
        let cx = util::Ctx::new(tree);
        match transform {
            TransformId::VariableRenaming1 => rename::plan(&cx, &FirstCharacter),
            TransformId::VariableRenaming2 => rename::plan(&cx, self.synonyms.as_ref()),
            TransformId::SwitchRelation => rules::switch_relation(&cx),
            TransformId::Unary2Add => rules::unary_to_add(&cx),
            TransformId::Add2Equal => rules::add_to_equal(&cx),
            TransformId::MergeVarDecl => rules::merge_var_decl(&cx),
            TransformId::InfixDividing => rules::infix_dividing(&cx),
            TransformId::SwitchEqualExp => rules::switch_equal_exp(&cx),
            TransformId::SwitchStringEqual => rules::switch_string_equal(&cx),
            TransformId::For2While => rules::for_to_while(&cx),
            TransformId::While2For => rules::while_to_for(&cx),
            TransformId::ElseIf2If => rules::else_if_to_if(&cx),
            TransformId::Switch2If => rules::switch_to_if(&cx),
            TransformId::SwapStatement => rules::swap_statement(&cx),
            TransformId::ReverseIf => rules::reverse_if(&cx),
            TransformId::If2CondExp => rules::if_to_cond_exp(&cx),
            TransformId::CondExp2If => rules::cond_exp_to_if(&cx),
            TransformId::DividingComposedIf => rules::dividing_composed_if(&cx),
        }
    }
}

/// Record × transform applicability matrix as CSV (`true`/`false` cells).
pub fn applicability_csv(rows: &[(String, BTreeSet<TransformId>)]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["id".to_string()];
    header.extend(TransformId::ALL.iter().map(|t| t.as_str().to_string()));
    w.write_record(&header).expect("in-memory write");
    for (id, set) in rows {
        let mut rec = vec![id.clone()];
        rec.extend(TransformId::ALL.iter().map(|t| set.contains(t).to_string()));
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}
