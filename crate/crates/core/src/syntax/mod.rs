//! Parsing and rendering facade for the Java subset, plus the JML annotation layer.
//!
//! Trees never own edited text: edits go through [`rewrite::Rewriter`], which
//! splices replacement text into the original source and re-parses.

pub mod annotations;
pub mod ast;
pub mod lexer;
pub mod normalize;
mod parser;
pub mod rewrite;
pub mod types;
pub mod visit;

use serde::{Deserialize, Serialize};
use std::fmt;

pub use annotations::{
    embed_annotations, embed_annotations_lenient, strip_annotations, AnnotationEntry, AnnotationError, AnnotationIndex,
    Anchor, AnchorKind, Clause, Placement, SpecifiedProgram,
};
pub use ast::*;
pub use lexer::{Comment, CommentKind, Lexed, Token, TokenKind};
pub use normalize::normalize_whitespace;
pub use rewrite::{Edit, Mapped, Piece, RenderMap, RewriteError, Rewriter};
pub use types::{is_integral, is_narrow, is_numeric, TypeEnv};

/// Half-open byte range `[start, end)` into a source string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end, "inverted span {start}..{end}");
        Span { start, end }
    }

    pub fn slice(self, source: &str) -> &str {
        &source[self.start..self.end]
    }

    pub fn len(self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(self) -> bool {
        self.start == self.end
    }

    pub fn contains(self, other: Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn overlaps(self, other: Span) -> bool {
        self.start < other.end && other.start < self.end
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub fn at(source: &str, offset: usize, message: impl Into<String>) -> Self {
        let (line, column) = line_col(source, offset);
        ParseError { offset, line, column, message: message.into() }
    }
}

/// 1-based line and column (in chars) of a byte offset.
pub fn line_col(source: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(source.len());
    let before = &source[..offset];
    let line = before.matches('\n').count() + 1;
    let line_start = before.rfind('\n').map(|i| i + 1).unwrap_or(0);
    (line, source[line_start..offset].chars().count() + 1)
}

/// Start offset of the line containing `offset`.
pub fn line_start(source: &str, offset: usize) -> usize {
    source[..offset].rfind('\n').map(|i| i + 1).unwrap_or(0)
}

/// A parsed compilation unit together with the text it was parsed from.
#[derive(Debug, Clone)]
pub struct SyntaxTree {
    source: String,
    unit: CompilationUnit,
    lexed: Lexed,
}

impl SyntaxTree {
    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn unit(&self) -> &CompilationUnit {
        &self.unit
    }

    pub fn tokens(&self) -> &[Token] {
        &self.lexed.tokens
    }

    pub fn comments(&self) -> &[Comment] {
        &self.lexed.comments
    }

    pub fn annotation_comments(&self) -> impl Iterator<Item = &Comment> {
        self.lexed.comments.iter().filter(|c| c.is_annotation(&self.source))
    }

    pub fn text(&self, span: Span) -> &str {
        span.slice(&self.source)
    }

    /// Every method and constructor, in source order, including those of nested classes.
    pub fn methods(&self) -> Vec<&MethodDecl> {
        let mut out = Vec::new();
        collect_methods(&self.unit.members, &mut out);
        out
    }

    /// Top-level and nested class declarations in source order.
    pub fn classes(&self) -> Vec<&ClassDecl> {
        fn walk<'a>(members: &'a [Member], out: &mut Vec<&'a ClassDecl>) {
            for m in members {
                if let Member::Class(c) = m {
                    out.push(c);
                    walk(&c.members, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.unit.members, &mut out);
        out
    }

    /// Index of the first token starting at or after `offset`.
    pub fn token_at_or_after(&self, offset: usize) -> usize {
        self.lexed.tokens.partition_point(|t| t.span.start < offset)
    }
}

fn collect_methods<'a>(members: &'a [Member], out: &mut Vec<&'a MethodDecl>) {
    for m in members {
        match m {
            Member::Method(md) => out.push(md),
            Member::Class(c) => collect_methods(&c.members, out),
            _ => {}
        }
    }
}

pub fn parse(source: &str) -> Result<SyntaxTree, ParseError> {
    let lexed = lexer::tokenize(source)?;
    let unit = parser::parse_unit(source, &lexed.tokens)?;
    Ok(SyntaxTree { source: source.to_string(), unit, lexed })
}

/// Concrete source of a tree. Trees are immutable, so this is always the parsed text.
pub fn render(tree: &SyntaxTree) -> String {
    tree.source.clone()
}

/// Converts CRLF and lone CR line endings to LF.
pub fn normalize_line_endings(text: &str) -> String {
    if !text.contains('\r') {
        return text.to_string();
    }
    text.replace("\r\n", "\n").replace('\r', "\n")
}
