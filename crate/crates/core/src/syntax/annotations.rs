//! JML annotation layer: separating `//@` and `/*@ ... @*/` comments from
//! the code they annotate, and putting them back.

use super::lexer::{Comment, CommentKind};
use super::rewrite::{Mapped, RenderMap, Rewriter};
use super::visit;
use super::{line_start, parse, Member, ParseError, Span, SyntaxTree};
use serde::{Deserialize, Serialize};

const CLAUSE_KEYWORDS: &[&str] = &[
    "requires", "pre", "ensures", "post", "maintaining", "loop_invariant", "decreasing", "decreases",
    "loop_variant", "assert", "assume", "assignable", "modifies", "invariant", "signals",
    "signals_only", "diverges", "measured_by", "pure", "spec_public", "ghost", "set", "model",
    "normal_behavior", "exceptional_behavior", "behavior",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clause {
    /// Leading JML keyword (`requires`, `maintaining`, ...) or the first word.
    pub keyword: String,
    pub text: String,
    /// Span of the clause text in the annotated source.
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Placement {
    /// The comment sits alone on its line(s).
    OwnLine { indent: String },
    /// The comment follows code on the same line, separated by `sep`.
    Trailing { sep: String },
    /// The comment precedes code on the same line, separated by `sep`.
    Leading { sep: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnchorKind {
    /// Start of a statement of the named kind.
    Stmt(String),
    /// Start of a class member.
    Member,
    /// A closing brace.
    CloseBrace,
    /// End of a token (trailing comments).
    TokenEnd,
    /// Start of some other token or comment.
    Token,
    Eof,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Anchor {
    /// Byte offset in the bare source.
    pub offset: usize,
    pub kind: AnchorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationEntry {
    /// Span of the comment in the annotated source.
    pub span: Span,
    pub kind: CommentKind,
    pub text: String,
    pub clauses: Vec<Clause>,
    pub placement: Placement,
    pub anchor: Anchor,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationIndex {
    pub entries: Vec<AnnotationEntry>,
}

impl AnnotationIndex {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn clause_count(&self) -> usize {
        self.entries.iter().map(|e| e.clauses.len()).sum()
    }

    /// Distinct clause keywords in first-seen order.
    pub fn clause_kinds(&self) -> Vec<&str> {
        let mut kinds: Vec<&str> = Vec::new();
        for c in self.entries.iter().flat_map(|e| &e.clauses) {
            if !kinds.contains(&c.keyword.as_str()) {
                kinds.push(&c.keyword);
            }
        }
        kinds
    }

    /// Moves every anchor through a rewrite of the bare source. Returns the
    /// new index and the positions of entries whose anchor was rewritten away.
    pub fn remap(&self, map: &RenderMap) -> (AnnotationIndex, Vec<usize>) {
        let mut orphaned = Vec::new();
        let entries = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let mapped = match e.anchor.kind {
                    AnchorKind::TokenEnd => map.map_end(e.anchor.offset),
                    _ => map.map_start(e.anchor.offset),
                };
                if let Mapped::Orphaned(_) = mapped {
                    orphaned.push(i);
                }
                let mut e = e.clone();
                e.anchor.offset = mapped.offset();
                e
            })
            .collect();
        (AnnotationIndex { entries }, orphaned)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnnotationError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("anchor for annotation {entry} at offset {offset} not found")]
    AnchorMissing { entry: usize, offset: usize },
}

/// A source with embedded JML plus the index describing those annotations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecifiedProgram {
    pub source: String,
    pub annotations: AnnotationIndex,
    pub base_id: String,
}

impl SpecifiedProgram {
    pub fn new(source: impl Into<String>, base_id: impl Into<String>) -> Result<Self, ParseError> {
        let source = source.into();
        let (_, annotations) = strip_annotations(&source)?;
        Ok(SpecifiedProgram { source, annotations, base_id: base_id.into() })
    }

    /// The source with annotations removed.
    pub fn bare(&self) -> Result<String, ParseError> {
        strip_annotations(&self.source).map(|(b, _)| b)
    }
}

/// Removes every JML comment. The index records what was removed, the
/// clauses inside, and where each comment attaches in the bare text.
pub fn strip_annotations(source: &str) -> Result<(String, AnnotationIndex), ParseError> {
    let tree = parse(source)?;
    let annots: Vec<Comment> = tree.annotation_comments().copied().collect();
    if annots.is_empty() {
        return Ok((source.to_string(), AnnotationIndex::default()));
    }
    let mut rw = Rewriter::new(source);
    let mut pending = Vec::new();
    for c in &annots {
        let ls = line_start(source, c.span.start);
        let before = &source[ls..c.span.start];
        let line_end = source[c.span.end..].find('\n').map(|i| c.span.end + i).unwrap_or(source.len());
        let after = &source[c.span.end..line_end];
        let ws = |s: &str| s.chars().all(|ch| ch == ' ' || ch == '\t');
        let (removal, placement, anchor_orig, trailing) = if ws(before) && ws(after) {
            let end = if line_end < source.len() { line_end + 1 } else { line_end };
            let next = next_item_start(&tree, end).unwrap_or(source.len());
            (Span::new(ls, end), Placement::OwnLine { indent: before.to_string() }, next, false)
        } else if ws(before) {
            let sep_len = after.len() - after.trim_start_matches([' ', '\t']).len();
            let end = c.span.end + sep_len;
            let sep = source[c.span.end..end].to_string();
            let next = next_item_start(&tree, end).unwrap_or(source.len());
            (Span::new(c.span.start, end), Placement::Leading { sep }, next, false)
        } else {
            let trimmed = before.trim_end_matches([' ', '\t']);
            let start = ls + trimmed.len();
            let sep = source[start..c.span.start].to_string();
            (Span::new(start, c.span.end), Placement::Trailing { sep }, start, true)
        };
        rw.delete(removal);
        pending.push((c, placement, anchor_orig, trailing));
    }
    let (bare, map) = rw.apply_with_map().expect("annotation removals are disjoint");
    let bare_tree = parse(&bare)?;
    let entries = pending
        .into_iter()
        .map(|(c, placement, anchor_orig, trailing)| {
            let offset = if trailing { map.map_end(anchor_orig) } else { map.map_start(anchor_orig) }.offset();
            let kind = if trailing { AnchorKind::TokenEnd } else { anchor_kind(&bare_tree, offset) };
            AnnotationEntry {
                span: c.span,
                kind: c.kind,
                text: c.span.slice(source).to_string(),
                clauses: split_clauses(source, c),
                placement,
                anchor: Anchor { offset, kind },
            }
        })
        .collect();
    Ok((bare, AnnotationIndex { entries }))
}

/// Start of the first token or non-JML comment at or after `offset`.
fn next_item_start(tree: &SyntaxTree, offset: usize) -> Option<usize> {
    let src = tree.source();
    let tok = tree.tokens().get(tree.token_at_or_after(offset)).map(|t| t.span.start);
    let com = tree
        .comments()
        .iter()
        .filter(|c| c.span.start >= offset && !c.is_annotation(src))
        .map(|c| c.span.start)
        .next();
    match (tok, com) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    }
}

/// Classifies what starts at `offset` in a parsed bare source.
pub fn anchor_kind(tree: &SyntaxTree, offset: usize) -> AnchorKind {
    if offset >= tree.source().len() {
        return AnchorKind::Eof;
    }
    if let Some(s) = visit::all_stmts(tree.unit()).into_iter().find(|s| s.span.start == offset) {
        return AnchorKind::Stmt(s.kind_name().to_string());
    }
    if member_starts(tree).contains(&offset) {
        return AnchorKind::Member;
    }
    let idx = tree.token_at_or_after(offset);
    match tree.tokens().get(idx) {
        Some(t) if t.span.start == offset && tree.text(t.span) == "}" => AnchorKind::CloseBrace,
        _ => AnchorKind::Token,
    }
}

fn member_starts(tree: &SyntaxTree) -> Vec<usize> {
    fn go(members: &[Member], out: &mut Vec<usize>) {
        for m in members {
            out.push(m.span().start);
            if let Member::Class(c) = m {
                go(&c.members, out);
            }
        }
    }
    let mut out = Vec::new();
    go(&tree.unit().members, &mut out);
    out
}

fn is_token_boundary(tree: &SyntaxTree, offset: usize, end: bool) -> bool {
    let toks = tree.tokens().iter().map(|t| t.span);
    let coms = tree.comments().iter().map(|c| c.span);
    let mut all = toks.chain(coms);
    if end {
        all.any(|s| s.end == offset)
    } else {
        all.any(|s| s.start == offset)
    }
}

/// Splits the body of a JML comment into `;`-terminated clauses.
pub fn split_clauses(source: &str, comment: &Comment) -> Vec<Clause> {
    let raw = comment.span.slice(source);
    // blank out markers, keeping byte positions
    let mut body: Vec<u8> = raw.as_bytes().to_vec();
    let blank = |b: &mut [u8], from: usize, to: usize| b[from..to].iter_mut().for_each(|c| *c = b' ');
    match comment.kind {
        CommentKind::LineComment => blank(&mut body, 0, 3),
        CommentKind::BlockComment => {
            let n = body.len();
            blank(&mut body, 0, 3);
            blank(&mut body, n - 2, n);
            let mut i = n - 2;
            while i > 3 && body[i - 1] == b'@' {
                body[i - 1] = b' ';
                i -= 1;
            }
        }
    }
    // leading `@` runs on each line
    let mut at_line_start = true;
    for c in body.iter_mut() {
        match *c {
            b'\n' => at_line_start = true,
            b' ' | b'\t' | b'\r' => {}
            b'@' if at_line_start => *c = b' ',
            _ => at_line_start = false,
        }
    }
    let text = String::from_utf8(body).expect("blanking keeps utf-8 valid");
    let mut clauses = Vec::new();
    let mut depth = 0i32;
    let mut seg_start = 0;
    let mut in_str = false;
    let bytes = text.as_bytes();
    let push = |from: usize, to: usize, clauses: &mut Vec<Clause>| {
        let seg = &text[from..to];
        let trimmed = seg.trim();
        if trimmed.is_empty() {
            return;
        }
        let lead = seg.len() - seg.trim_start().len();
        let start = comment.span.start + from + lead;
        let words: Vec<&str> = trimmed.split(|c: char| !(c.is_alphanumeric() || c == '_')).filter(|w| !w.is_empty()).collect();
        let keyword = words
            .iter()
            .find(|w| CLAUSE_KEYWORDS.contains(w) && !matches!(**w, "normal_behavior" | "exceptional_behavior" | "behavior"))
            .or(words.first())
            .map(|w| w.to_string())
            .unwrap_or_default();
        clauses.push(Clause {
            keyword,
            text: source[start..start + trimmed.len()].to_string(),
            span: Span::new(start, start + trimmed.len()),
        });
    };
    for (i, &b) in bytes.iter().enumerate() {
        match b {
            b'"' => in_str = !in_str,
            _ if in_str => {}
            b'(' | b'[' | b'{' => depth += 1,
            b')' | b']' | b'}' => depth -= 1,
            b';' if depth <= 0 => {
                push(seg_start, i, &mut clauses);
                seg_start = i + 1;
            }
            _ => {}
        }
    }
    push(seg_start, bytes.len(), &mut clauses);
    clauses
}

/// Re-inserts annotations into a bare source. Every anchor must still point
/// at the same kind of node it was recorded against.
pub fn embed_annotations(bare: &str, index: &AnnotationIndex) -> Result<String, AnnotationError> {
    let tree = parse(bare)?;
    for (i, e) in index.entries.iter().enumerate() {
        let ok = e.anchor.offset <= bare.len()
            && match &e.anchor.kind {
                AnchorKind::TokenEnd => is_token_boundary(&tree, e.anchor.offset, true),
                AnchorKind::Token => is_token_boundary(&tree, e.anchor.offset, false),
                kind => anchor_kind(&tree, e.anchor.offset) == *kind,
            };
        if !ok {
            return Err(AnnotationError::AnchorMissing { entry: i, offset: e.anchor.offset });
        }
    }
    Ok(insert_all(bare, index, false))
}

/// Re-inserts annotations after the bare source was transformed. Anchors
/// that no longer start a statement or member are moved to the nearest
/// following one; the positions of moved entries are returned.
pub fn embed_annotations_lenient(
    bare: &str,
    index: &AnnotationIndex,
) -> Result<(String, Vec<usize>), ParseError> {
    let tree = parse(bare)?;
    let mut starts: Vec<usize> = visit::all_stmts(tree.unit()).into_iter().map(|s| s.span.start).collect();
    starts.extend(member_starts(&tree));
    starts.extend(tree.tokens().iter().filter(|t| tree.text(t.span) == "}").map(|t| t.span.start));
    starts.sort_unstable();
    starts.dedup();
    let mut moved = Vec::new();
    let mut fixed = index.clone();
    for (i, e) in fixed.entries.iter_mut().enumerate() {
        let off = e.anchor.offset.min(bare.len());
        match e.placement {
            Placement::Trailing { .. } => {
                if !is_token_boundary(&tree, off, true) {
                    let prev = tree.tokens().iter().map(|t| t.span.end).filter(|&x| x <= off).max().unwrap_or(0);
                    e.anchor.offset = prev;
                    moved.push(i);
                } else {
                    e.anchor.offset = off;
                }
                e.anchor.kind = AnchorKind::TokenEnd;
            }
            _ => {
                let target = if starts.binary_search(&off).is_ok() || off == bare.len() {
                    off
                } else {
                    moved.push(i);
                    starts.iter().copied().find(|&s| s >= off).unwrap_or(bare.len())
                };
                e.anchor.offset = target;
                e.anchor.kind = anchor_kind(&tree, target);
            }
        }
    }
    Ok((insert_all(bare, &fixed, true), moved))
}

fn insert_all(bare: &str, index: &AnnotationIndex, reindent: bool) -> String {
    let mut rw = Rewriter::new(bare);
    for e in &index.entries {
        let off = e.anchor.offset.min(bare.len());
        let ls = line_start(bare, off);
        let first_on_line = bare[ls..off].chars().all(|c| c == ' ' || c == '\t');
        match &e.placement {
            Placement::OwnLine { indent } => {
                let indent = if reindent && first_on_line { &bare[ls..off] } else { indent.as_str() };
                if first_on_line {
                    rw.insert(ls, format!("{indent}{}\n", e.text));
                } else if off == bare.len() {
                    rw.insert(off, format!("\n{indent}{}\n", e.text));
                } else {
                    let line_indent: String = bare[ls..].chars().take_while(|c| *c == ' ' || *c == '\t').collect();
                    rw.insert(off, format!("\n{indent}{}\n{line_indent}", e.text));
                }
            }
            Placement::Leading { sep } => rw.insert(off, format!("{}{sep}", e.text)),
            Placement::Trailing { sep } => {
                let sep = if sep.is_empty() { " " } else { sep.as_str() };
                rw.insert(off, format!("{sep}{}", e.text))
            }
        }
    }
    rw.apply().expect("insertions never conflict")
}

#[cfg(test)]
mod tests {
    use super::*;

    const MAXIMUM: &str = "class Maximum {\n    \n    /*@\n    @ requires a >= 0 && b >= 0;\n    @ ensures \\result == a || \\result == b;\n    @ ensures \\result >= a && \\result >= b;\n    @*/\n    public static int maximum(int a, int b) {\n        return a > b? a : b;\n    }\n}\n";

    #[test]
    fn block_comment_splits_into_three_clauses() {
        let (bare, index) = strip_annotations(MAXIMUM).unwrap();
        assert_eq!(index.len(), 1);
        let kinds: Vec<_> = index.entries[0].clauses.iter().map(|c| c.keyword.as_str()).collect();
        assert_eq!(kinds, ["requires", "ensures", "ensures"]);
        assert_eq!(index.entries[0].clauses[0].text, "requires a >= 0 && b >= 0");
        assert!(!bare.contains("@"));
        assert_eq!(index.entries[0].anchor.kind, AnchorKind::Member);
        assert_eq!(embed_annotations(&bare, &index).unwrap(), MAXIMUM);
    }

    #[test]
    fn trailing_and_leading_comments_round_trip() {
        let src = "class A {\n  int f(int x) {\n    x = x + 1; //@ assert x > 0;\n    return /*@ nullable @*/ x;\n  }\n}\n";
        let (bare, index) = strip_annotations(src).unwrap();
        assert_eq!(bare, "class A {\n  int f(int x) {\n    x = x + 1;\n    return x;\n  }\n}\n");
        assert_eq!(index.entries[0].anchor.kind, AnchorKind::TokenEnd);
        assert_eq!(embed_annotations(&bare, &index).unwrap(), src);
    }

    #[test]
    fn missing_anchor_is_reported() {
        let src = "class A {\n  void f() {\n    //@ assert true;\n    g();\n  }\n}\n";
        let (_, index) = strip_annotations(src).unwrap();
        let other = "class A {\n  void f() {\n    int y = 0;\n  }\n}\n";
        assert!(matches!(
            embed_annotations(other, &index),
            Err(AnnotationError::AnchorMissing { entry: 0, .. })
        ));
    }

    #[test]
    fn no_annotations_is_identity() {
        let src = "class A { // plain comment\n}\n";
        let (bare, index) = strip_annotations(src).unwrap();
        assert_eq!(bare, src);
        assert!(index.is_empty());
        assert_eq!(embed_annotations(&bare, &index).unwrap(), src);
    }
}
