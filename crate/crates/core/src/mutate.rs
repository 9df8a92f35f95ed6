//! Mutant generation for the completeness proxy: first-order mutants of a
//! reference program, syntactic equivalent-mutant suppression, and pairing
//! of a specification with every surviving mutant.

use crate::corpus::Corpus;
use crate::syntax::{
    self, embed_annotations, lexer, line_start, normalize_whitespace, strip_annotations, visit, AnnotationError,
    BinaryOp, Edit, Expr, ExprKind, ForInit, LitKind, ParseError, Rewriter, Span, SpecifiedProgram, Stmt,
    StmtKind, SyntaxTree, TypeEnv, UnaryOp,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MutationOperator {
    RelationalOpReplace,
    ArithmeticOpReplace,
    LogicalConnectorReplace,
    UnaryInsert,
    LiteralReplace,
    StatementDelete,
}

impl MutationOperator {
    pub const ALL: [MutationOperator; 6] = [
        MutationOperator::RelationalOpReplace,
        MutationOperator::ArithmeticOpReplace,
        MutationOperator::LogicalConnectorReplace,
        MutationOperator::UnaryInsert,
        MutationOperator::LiteralReplace,
        MutationOperator::StatementDelete,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MutationOperator::RelationalOpReplace => "RelationalOpReplace",
            MutationOperator::ArithmeticOpReplace => "ArithmeticOpReplace",
            MutationOperator::LogicalConnectorReplace => "LogicalConnectorReplace",
            MutationOperator::UnaryInsert => "UnaryInsert",
            MutationOperator::LiteralReplace => "LiteralReplace",
            MutationOperator::StatementDelete => "StatementDelete",
        }
    }

    /// Conventional short code (ROR, AOR, ...).
    pub fn code(self) -> &'static str {
        match self {
            MutationOperator::RelationalOpReplace => "ROR",
            MutationOperator::ArithmeticOpReplace => "AOR",
            MutationOperator::LogicalConnectorReplace => "LCR",
            MutationOperator::UnaryInsert => "UOI",
            MutationOperator::LiteralReplace => "LIT",
            MutationOperator::StatementDelete => "SDL",
        }
    }

    pub fn all() -> BTreeSet<MutationOperator> {
        Self::ALL.into_iter().collect()
    }
}

impl fmt::Display for MutationOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MutationOperator {
    type Err = String;

    /// Accepts the full name or the short code, case-insensitively.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_lowercase();
        Self::ALL
            .into_iter()
            .find(|o| o.as_str().to_lowercase() == key || o.code().to_lowercase() == key)
            .ok_or_else(|| format!("unknown mutation operator `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mutant {
    pub id: String,
    pub parent_id: String,
    pub operator: MutationOperator,
    /// Replaced span of the parent source.
    pub site: Span,
    pub replacement: String,
    pub source: String,
    #[serde(default)]
    pub suppressed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutantSet {
    pub parent_id: String,
    pub parent_source: String,
    /// Mutants that count towards completeness.
    pub mutants: Vec<Mutant>,
    /// Mutants flagged as equivalent to the parent.
    #[serde(default)]
    pub suppressed: Vec<Mutant>,
}

impl MutantSet {
    pub fn len(&self) -> usize {
        self.mutants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mutants.is_empty()
    }
}

const RELATIONAL: [BinaryOp; 6] = [BinaryOp::Lt, BinaryOp::Le, BinaryOp::Gt, BinaryOp::Ge, BinaryOp::Eq, BinaryOp::Ne];
const ARITHMETIC: [BinaryOp; 5] = [BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div, BinaryOp::Rem];
const NEGATABLE: &[&str] = &["int", "long", "float", "double", "Integer", "Long", "Float", "Double"];

/// Every first-order mutant of `bare_source` for the selected operators,
/// in operator order and then source order. Duplicate sources are dropped;
/// nothing is suppressed yet.
pub fn generate_mutants(
    parent_id: &str,
    bare_source: &str,
    operators: &BTreeSet<MutationOperator>,
) -> Result<MutantSet, ParseError> {
    let tree = syntax::parse(bare_source)?;
    let mut sites: Vec<(MutationOperator, Span, String)> = Vec::new();
    for op in operators {
        match op {
            MutationOperator::RelationalOpReplace => relational_sites(&tree, &mut sites),
            MutationOperator::ArithmeticOpReplace => arithmetic_sites(&tree, &mut sites),
            MutationOperator::LogicalConnectorReplace => logical_sites(&tree, &mut sites),
            MutationOperator::UnaryInsert => unary_sites(&tree, &mut sites),
            MutationOperator::LiteralReplace => literal_sites(&tree, &mut sites),
            MutationOperator::StatementDelete => delete_sites(&tree, &mut sites),
        }
    }
    let mut seen: HashSet<String> = HashSet::new();
    seen.insert(bare_source.to_string());
    let mut mutants = Vec::new();
    for (operator, site, replacement) in sites {
        let mut source = String::with_capacity(bare_source.len() + replacement.len());
        source.push_str(&bare_source[..site.start]);
        source.push_str(&replacement);
        source.push_str(&bare_source[site.end..]);
        if !seen.insert(source.clone()) {
            continue;
        }
        if syntax::parse(&source).is_err() {
            log::debug!("dropping unparseable {operator} mutant at {}..{}", site.start, site.end);
            continue;
        }
        mutants.push(Mutant {
            id: format!("{parent_id}__M{}", mutants.len() + 1),
            parent_id: parent_id.to_string(),
            operator,
            site,
            replacement,
            source,
            suppressed: false,
        });
    }
    Ok(MutantSet { parent_id: parent_id.to_string(), parent_source: bare_source.to_string(), mutants, suppressed: Vec::new() })
}

/// Mutants of every record, in corpus order.
pub fn generate_for_corpus(
    corpus: &Corpus,
    operators: &BTreeSet<MutationOperator>,
) -> Result<Vec<MutantSet>, (String, ParseError)> {
    corpus
        .records
        .par_iter()
        .map(|r| generate_mutants(&r.id, &r.bare_source, operators).map_err(|e| (r.id.clone(), e)))
        .collect()
}

fn op_at(tree: &SyntaxTree, span: Span) -> &str {
    tree.text(span)
}

fn is_null(e: &Expr) -> bool {
    matches!(e.unparen().kind, ExprKind::Literal(LitKind::Null))
}

fn relational_sites(tree: &SyntaxTree, out: &mut Vec<(MutationOperator, Span, String)>) {
    for e in visit::all_exprs(tree.unit()) {
        let ExprKind::Binary { op, op_span, lhs, rhs } = &e.kind else { continue };
        if !RELATIONAL.contains(op) {
            continue;
        }
        // ordering comparisons only make sense between numbers
        let env = TypeEnv::at(tree, e.span.start);
        let numeric = |x: &Expr| env.type_of(x, tree.source()).is_some_and(|t| syntax::is_numeric(&t));
        let ordered = op.is_relational() || (numeric(lhs) && numeric(rhs));
        let ordered = ordered && !is_null(lhs) && !is_null(rhs);
        for r in RELATIONAL {
            if r == *op || (!ordered && !r.is_equality()) {
                continue;
            }
            debug_assert_eq!(op_at(tree, *op_span), op.as_str());
            out.push((MutationOperator::RelationalOpReplace, *op_span, r.as_str().to_string()));
        }
    }
}

fn arithmetic_sites(tree: &SyntaxTree, out: &mut Vec<(MutationOperator, Span, String)>) {
    for e in visit::all_exprs(tree.unit()) {
        let ExprKind::Binary { op, op_span, lhs, rhs } = &e.kind else { continue };
        if !ARITHMETIC.contains(op) {
            continue;
        }
        if *op == BinaryOp::Add {
            let env = TypeEnv::at(tree, e.span.start);
            let stringy = |x: &Expr| {
                matches!(x.unparen().kind, ExprKind::Literal(LitKind::String | LitKind::Char))
                    || env.type_of(x, tree.source()).is_none_or(|t| t == "String")
            };
            // string concatenation, or operands we cannot type
            if stringy(lhs) || stringy(rhs) {
                continue;
            }
        }
        for r in ARITHMETIC {
            if r != *op {
                out.push((MutationOperator::ArithmeticOpReplace, *op_span, r.as_str().to_string()));
            }
        }
    }
}

fn logical_sites(tree: &SyntaxTree, out: &mut Vec<(MutationOperator, Span, String)>) {
    for e in visit::all_exprs(tree.unit()) {
        if let ExprKind::Binary { op: op @ (BinaryOp::And | BinaryOp::Or), op_span, .. } = &e.kind {
            let flipped = if *op == BinaryOp::And { "||" } else { "&&" };
            out.push((MutationOperator::LogicalConnectorReplace, *op_span, flipped.to_string()));
        }
    }
}

/// Wraps `text` in parentheses when gluing it after a `+`/`-` would lex as
/// `++`/`--`.
fn guard_sign(source: &str, at: usize, text: String) -> String {
    if text.starts_with('-') && source[..at].ends_with(['-', '+']) {
        format!("({text})")
    } else {
        text
    }
}

/// Names that are written rather than read at their position.
fn written_spans(tree: &SyntaxTree) -> HashSet<Span> {
    let mut out = HashSet::new();
    for e in visit::all_exprs(tree.unit()) {
        match &e.kind {
            ExprKind::Assign { target, .. } => {
                out.insert(target.unparen().span);
            }
            ExprKind::Unary { op: UnaryOp::PreInc | UnaryOp::PreDec | UnaryOp::PostInc | UnaryOp::PostDec, operand, .. } => {
                out.insert(operand.unparen().span);
            }
            ExprKind::Unary { op: UnaryOp::Neg, operand, .. } => {
                // `-x` already negated; `--x` is not a mutant of it
                out.insert(operand.unparen().span);
            }
            _ => {}
        }
    }
    out
}

fn conditions(tree: &SyntaxTree) -> Vec<&Expr> {
    let mut out: Vec<&Expr> = Vec::new();
    for s in visit::all_stmts(tree.unit()) {
        match &s.kind {
            StmtKind::If { cond, .. } | StmtKind::While { cond, .. } | StmtKind::DoWhile { cond, .. } => out.push(cond),
            StmtKind::For { cond: Some(cond), .. } => out.push(cond),
            _ => {}
        }
    }
    for e in visit::all_exprs(tree.unit()) {
        if let ExprKind::Conditional { cond, .. } = &e.kind {
            out.push(cond);
        }
    }
    out.sort_by_key(|e| e.span.start);
    out
}

fn unary_sites(tree: &SyntaxTree, out: &mut Vec<(MutationOperator, Span, String)>) {
    let written = written_spans(tree);
    let src = tree.source();
    let mut sites: Vec<(Span, String)> = Vec::new();
    for e in visit::all_exprs(tree.unit()) {
        let ExprKind::Name(id) = &e.kind else { continue };
        if written.contains(&e.span) {
            continue;
        }
        let env = TypeEnv::at(tree, e.span.start);
        if env.var(&id.name).is_some_and(|t| NEGATABLE.contains(&t)) {
            sites.push((e.span, guard_sign(src, e.span.start, format!("-{}", id.name))));
        }
    }
    for c in conditions(tree) {
        sites.push((c.span, format!("!({})", tree.text(c.span))));
    }
    sites.sort_by_key(|(s, _)| (s.start, std::cmp::Reverse(s.end)));
    out.extend(sites.into_iter().map(|(s, r)| (MutationOperator::UnaryInsert, s, r)));
}

fn parse_int(text: &str) -> Option<(i128, &str)> {
    let (digits, suffix) = match text.strip_suffix(['l', 'L']) {
        Some(d) => (d, &text[d.len()..]),
        None => (text, ""),
    };
    let plain = digits.len() == 1 || !digits.starts_with('0');
    if !plain || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok().map(|v| (v, suffix))
}

fn literal_sites(tree: &SyntaxTree, out: &mut Vec<(MutationOperator, Span, String)>) {
    let src = tree.source();
    for e in visit::all_exprs(tree.unit()) {
        let ExprKind::Literal(kind) = &e.kind else { continue };
        let text = tree.text(e.span);
        match kind {
            LitKind::Int => {
                let Some((k, suffix)) = parse_int(text) else { continue };
                let limit = if suffix.is_empty() { i32::MAX as i128 } else { i64::MAX as i128 };
                let mut seen = HashSet::new();
                for v in [k + 1, k - 1, 0] {
                    if v == k || v > limit || !seen.insert(v) {
                        continue;
                    }
                    let rep = guard_sign(src, e.span.start, format!("{v}{suffix}"));
                    out.push((MutationOperator::LiteralReplace, e.span, rep));
                }
            }
            LitKind::Bool => {
                let flipped = if text == "true" { "false" } else { "true" };
                out.push((MutationOperator::LiteralReplace, e.span, flipped.to_string()));
            }
            _ => {}
        }
    }
}

/// Whether control can leave `stmt` other than by falling through or by a
/// break/continue aimed at a loop inside it.
fn escapes(stmt: &Stmt) -> bool {
    fn go(s: &Stmt, breakable: bool, continuable: bool) -> bool {
        match &s.kind {
            StmtKind::Return(_) | StmtKind::Throw(_) => true,
            StmtKind::Break(label) => label.is_some() || !breakable,
            StmtKind::Continue(label) => label.is_some() || !continuable,
            StmtKind::While { .. } | StmtKind::DoWhile { .. } | StmtKind::For { .. } | StmtKind::ForEach { .. } => {
                visit::stmt_children(s).into_iter().any(|c| go(c, true, true))
            }
            StmtKind::Switch { .. } => visit::stmt_children(s).into_iter().any(|c| go(c, true, continuable)),
            _ => visit::stmt_children(s).into_iter().any(|c| go(c, breakable, continuable)),
        }
    }
    go(stmt, false, false)
}

/// Locals declared without an initializer: deleting their only assignment
/// would leave them unassigned.
fn uninitialized(tree: &SyntaxTree) -> HashSet<String> {
    let mut out = HashSet::new();
    for s in visit::all_stmts(tree.unit()) {
        let decl = match &s.kind {
            StmtKind::LocalVar(d) => d,
            StmtKind::For { init: Some(ForInit::Decl(d)), .. } => d,
            _ => continue,
        };
        out.extend(decl.declarators.iter().filter(|d| d.init.is_none()).map(|d| d.name.name.clone()));
    }
    out
}

fn assigns_any(stmt: &Stmt, names: &HashSet<String>) -> bool {
    visit::exprs_in_stmt(stmt).into_iter().any(|e| match &e.kind {
        ExprKind::Assign { target, .. } => target.as_name().is_some_and(|n| names.contains(n)),
        _ => false,
    })
}

fn deletable(s: &Stmt) -> bool {
    match &s.kind {
        StmtKind::Expr(e) => !matches!(
            &e.kind,
            ExprKind::MethodCall { target: None, name, .. } if name.name == "this" || name.name == "super"
        ),
        StmtKind::If { .. }
        | StmtKind::While { .. }
        | StmtKind::DoWhile { .. }
        | StmtKind::For { .. }
        | StmtKind::ForEach { .. }
        | StmtKind::Switch { .. }
        | StmtKind::Assert { .. } => true,
        _ => false,
    }
}

/// The span removed when deleting a statement: its whole line(s) when it
/// stands alone on them, otherwise just the statement.
pub fn deletion_span(source: &str, stmt: Span) -> Span {
    let ls = line_start(source, stmt.start);
    let before_blank = source[ls..stmt.start].chars().all(|c| c == ' ' || c == '\t');
    let rest = &source[stmt.end..];
    let eol = rest.find('\n');
    let after_blank = rest[..eol.unwrap_or(rest.len())].chars().all(|c| c == ' ' || c == '\t');
    match (before_blank && after_blank, eol) {
        (true, Some(k)) => Span::new(ls, stmt.end + k + 1),
        _ => stmt,
    }
}

fn delete_sites(tree: &SyntaxTree, out: &mut Vec<(MutationOperator, Span, String)>) {
    let uninit = uninitialized(tree);
    let in_list: HashSet<Span> =
        visit::stmt_lists(tree.unit()).into_iter().flat_map(|l| l.iter().map(|s| s.span)).collect();
    for s in visit::all_stmts(tree.unit()) {
        if !deletable(s) || escapes(s) || assigns_any(s, &uninit) {
            continue;
        }
        if in_list.contains(&s.span) {
            out.push((MutationOperator::StatementDelete, deletion_span(tree.source(), s.span), String::new()));
        } else {
            out.push((MutationOperator::StatementDelete, s.span, ";".to_string()));
        }
    }
}

/// Flags mutants that are syntactically guaranteed to behave like the
/// parent: identical token streams, or an enclosing expression whose
/// canonical form (operand order of commutative operators, mirrored
/// comparisons, `x * 1`, `x / 1`, `x + 0`, `x - 0`) does not change.
pub fn suppress_equivalents(set: MutantSet) -> MutantSet {
    let MutantSet { parent_id, parent_source, mutants, mut suppressed } = set;
    let parent = syntax::parse(&parent_source).ok();
    let mut kept = Vec::new();
    for mut m in mutants {
        let equivalent = match &parent {
            Some(tree) => is_equivalent(tree, &m.source),
            None => false,
        };
        if equivalent {
            m.suppressed = true;
            suppressed.push(m);
        } else {
            kept.push(m);
        }
    }
    MutantSet { parent_id, parent_source, mutants: kept, suppressed }
}

fn is_equivalent(parent: &SyntaxTree, mutant_src: &str) -> bool {
    let parent_src = parent.source();
    if normalize_whitespace(parent_src) == normalize_whitespace(mutant_src) {
        return true;
    }
    let Ok(mutant) = syntax::parse(mutant_src) else { return false };
    let (a, b) = (parent_src.as_bytes(), mutant_src.as_bytes());
    let prefix = a.iter().zip(b).take_while(|(x, y)| x == y).count();
    let max_suffix = a.len().min(b.len()) - prefix;
    let suffix = a.iter().rev().zip(b.iter().rev()).take(max_suffix).take_while(|(x, y)| x == y).count();
    let (start, end) = (prefix, a.len() - suffix);
    let delta = b.len() as isize - a.len() as isize;
    // outermost parent expression covering the changed bytes
    let Some(pe) = visit::all_exprs(parent.unit())
        .into_iter()
        .filter(|e| e.span.start <= start && end <= e.span.end)
        .max_by_key(|e| e.span.len())
    else {
        return false;
    };
    let mend = (pe.span.end as isize + delta) as usize;
    let Some(me) = visit::all_exprs(mutant.unit()).into_iter().find(|e| e.span.start == pe.span.start && e.span.end == mend)
    else {
        return false;
    };
    let penv = TypeEnv::at(parent, pe.span.start);
    let menv = TypeEnv::at(&mutant, me.span.start);
    canonical(pe, parent_src, &penv) == canonical(me, mutant_src, &menv)
}

fn pure(e: &Expr) -> bool {
    visit::exprs_in_expr(e).into_iter().all(|x| {
        !matches!(
            x.kind,
            ExprKind::MethodCall { .. }
                | ExprKind::Assign { .. }
                | ExprKind::New { .. }
                | ExprKind::NewArray { .. }
                | ExprKind::Lambda { .. }
                | ExprKind::Unary { op: UnaryOp::PreInc | UnaryOp::PreDec | UnaryOp::PostInc | UnaryOp::PostDec, .. }
        )
    })
}

/// Canonical prefix form of an expression, used only for equality.
fn canonical(e: &Expr, src: &str, env: &TypeEnv) -> String {
    let c = |x: &Expr| canonical(x, src, env);
    match &e.kind {
        ExprKind::Paren(inner) => c(inner),
        ExprKind::Literal(LitKind::Int) => {
            let text = e.span.slice(src).replace('_', "");
            match parse_int(&text) {
                Some((v, suffix)) => format!("{v}{}", suffix.to_lowercase()),
                None => text,
            }
        }
        ExprKind::Literal(_) | ExprKind::Name(_) | ExprKind::This | ExprKind::Super => e.span.slice(src).to_string(),
        ExprKind::Unary { op: UnaryOp::Plus, operand, .. } => c(operand),
        ExprKind::Unary { op: UnaryOp::Neg, operand, .. } if operand.unparen().is_literal() => {
            let inner = c(operand);
            if inner.chars().all(|ch| ch == '0' || ch == 'l') { inner } else { format!("-{inner}") }
        }
        ExprKind::Unary { op, operand, .. } => {
            let tag = match op {
                UnaryOp::PostInc => "post++",
                UnaryOp::PostDec => "post--",
                _ => op.as_str(),
            };
            format!("({tag} {})", c(operand))
        }
        ExprKind::Binary { op, lhs, rhs, .. } => {
            let (mut op, mut l, mut r) = (*op, c(lhs), c(rhs));
            let numeric = |x: &Expr| env.type_of(x, src).is_some_and(|t| syntax::is_numeric(&t));
            let both_numeric = numeric(lhs) && numeric(rhs);
            match op {
                BinaryOp::Mul if r == "1" && numeric(lhs) => return l,
                BinaryOp::Mul if l == "1" && numeric(rhs) => return r,
                BinaryOp::Div if r == "1" && numeric(lhs) => return l,
                BinaryOp::Add | BinaryOp::Sub if r == "0" && numeric(lhs) => return l,
                BinaryOp::Add if l == "0" && numeric(rhs) => return r,
                BinaryOp::Gt | BinaryOp::Ge => {
                    op = if op == BinaryOp::Gt { BinaryOp::Lt } else { BinaryOp::Le };
                    std::mem::swap(&mut l, &mut r);
                }
                _ => {}
            }
            let commutes = match op {
                BinaryOp::Eq | BinaryOp::Ne | BinaryOp::BitAnd | BinaryOp::BitOr | BinaryOp::BitXor => true,
                BinaryOp::Add | BinaryOp::Mul => both_numeric,
                _ => false,
            };
            if commutes && pure(lhs) && pure(rhs) && r < l {
                std::mem::swap(&mut l, &mut r);
            }
            format!("({} {l} {r})", op.as_str())
        }
        ExprKind::Conditional { cond, then_expr, else_expr } => {
            format!("(? {} {} {})", c(cond), c(then_expr), c(else_expr))
        }
        ExprKind::Assign { op, target, value, .. } => format!("({} {} {})", op.as_str(), c(target), c(value)),
        ExprKind::Index { array, index } => format!("([] {} {})", c(array), c(index)),
        ExprKind::FieldAccess { target, name } => format!("(. {} {})", c(target), name.name),
        ExprKind::MethodCall { target, name, args } => {
            let t = target.as_ref().map(|t| c(t)).unwrap_or_default();
            let a: Vec<String> = args.iter().map(c).collect();
            format!("(call {t} {} [{}])", name.name, a.join(" "))
        }
        ExprKind::Cast { ty, expr } => format!("(cast {} {})", ty.text, c(expr)),
        _ => normalize_whitespace(e.span.slice(src)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CompletenessError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("specification for `{base}` does not strip to the mutants' parent source")]
    ParentMismatch { base: String },
}

/// A mutant whose pairing was skipped because an annotation anchor was removed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedPair {
    pub mutant_id: String,
    pub error: AnnotationError,
}

/// Pairs the specification with every mutant: the unchanged annotation
/// index is embedded into each mutant. Mutants that remove an annotation
/// anchor are skipped and reported.
pub fn completeness_inputs(
    spec: &SpecifiedProgram,
    mutants: &MutantSet,
) -> Result<(Vec<(Mutant, SpecifiedProgram)>, Vec<SkippedPair>), CompletenessError> {
    let (bare, index) = strip_annotations(&spec.source)?;
    let spec_toks = lexer::tokenize(&bare)?.tokens;
    let parent_toks = lexer::tokenize(&mutants.parent_source)?.tokens;
    let same = spec_toks.len() == parent_toks.len()
        && spec_toks
            .iter()
            .zip(&parent_toks)
            .all(|(a, b)| a.span.slice(&bare) == b.span.slice(&mutants.parent_source));
    if !same {
        return Err(CompletenessError::ParentMismatch { base: spec.base_id.clone() });
    }
    let mut pairs = Vec::new();
    let mut skipped = Vec::new();
    for m in &mutants.mutants {
        // move the site onto the specification's own layout by token index
        let first = parent_toks.iter().position(|t| t.span.start >= m.site.start);
        let last = parent_toks.iter().rposition(|t| t.span.end <= m.site.end);
        let (Some(first), Some(last)) = (first, last) else { continue };
        let stmt = Span::new(spec_toks[first].span.start, spec_toks[last].span.end);
        let span = if m.replacement.is_empty() { deletion_span(&bare, stmt) } else { stmt };
        let mut rw = Rewriter::new(&bare);
        rw.push(Edit::replace(span, m.replacement.clone()));
        let (out, map) = rw.apply_with_map().expect("single edit");
        let (moved, orphaned) = index.remap(&map);
        if let Some(&entry) = orphaned.first() {
            let offset = index.entries[entry].anchor.offset;
            skipped.push(SkippedPair { mutant_id: m.id.clone(), error: AnnotationError::AnchorMissing { entry, offset } });
            continue;
        }
        match embed_annotations(&out, &moved).and_then(|s| SpecifiedProgram::new(s, m.id.clone()).map_err(Into::into)) {
            Ok(p) => pairs.push((m.clone(), p)),
            Err(error) => skipped.push(SkippedPair { mutant_id: m.id.clone(), error }),
        }
    }
    Ok((pairs, skipped))
}

#[derive(Debug, Serialize)]
struct LedgerRow<'a> {
    parent_id: &'a str,
    mutant_id: &'a str,
    operator: &'static str,
    site_start: usize,
    site_end: usize,
    replacement: &'a str,
    suppressed: bool,
}

/// Writes `{id}.java` for every mutant (suppressed included) and a CSV
/// ledger to `dir`.
pub fn export_mutants(sets: &[MutantSet], dir: &Path) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("ledger.csv"))?;
    for set in sets {
        let mut all: Vec<&Mutant> = set.mutants.iter().chain(&set.suppressed).collect();
        all.sort_by_key(|m| mutant_index(&m.id));
        for m in all {
            fs::write(dir.join(format!("{}.java", m.id)), &m.source)?;
            w.serialize(LedgerRow {
                parent_id: &m.parent_id,
                mutant_id: &m.id,
                operator: m.operator.as_str(),
                site_start: m.site.start,
                site_end: m.site.end,
                replacement: &m.replacement,
                suppressed: m.suppressed,
            })?;
        }
    }
    w.flush()
}

fn mutant_index(id: &str) -> usize {
    id.rsplit_once("__M").and_then(|(_, n)| n.parse().ok()).unwrap_or(usize::MAX)
}
