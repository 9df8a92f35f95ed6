//! Lossless tokenizer for the Java subset used by the benchmark corpus.
//!
//! Whitespace is never materialized; comments are collected on the side so the
//! parser sees only significant tokens while spans still cover the full input.

use super::{ParseError, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    Keyword,
    IntLit,
    FloatLit,
    CharLit,
    StringLit,
    BoolLit,
    NullLit,
    Punct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum CommentKind {
    LineComment,
    BlockComment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Comment {
    pub kind: CommentKind,
    pub span: Span,
}

impl Comment {
    /// JML comments open with `//@` or `/*@`.
    pub fn is_annotation(&self, source: &str) -> bool {
        let text = self.span.slice(source);
        text.starts_with("//@") || text.starts_with("/*@")
    }
}

#[derive(Debug, Clone, Default)]
pub struct Lexed {
    pub tokens: Vec<Token>,
    pub comments: Vec<Comment>,
}

const KEYWORDS: &[&str] = &[
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char", "class", "const",
    "continue", "default", "do", "double", "else", "enum", "extends", "final", "finally", "float",
    "for", "goto", "if", "implements", "import", "instanceof", "int", "interface", "long",
    "native", "new", "package", "private", "protected", "public", "return", "short", "static",
    "strictfp", "super", "switch", "synchronized", "this", "throw", "throws", "transient", "try",
    "void", "volatile", "while",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

// Longest match first. `>>` and `>>>` are deliberately absent: they are
// assembled by the expression parser so that nested generics close cleanly.
const PUNCTS: &[&str] = &[
    ">>>=", "<<=", ">>=", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=", ">=", "+=",
    "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<", "(", ")", "{", "}", "[", "]", ";", ",", ".",
    "@", "=", ">", "<", "!", "~", "?", ":", "+", "-", "*", "/", "&", "|", "^", "%",
];

pub fn tokenize(source: &str) -> Result<Lexed, ParseError> {
    Lexer { src: source, bytes: source.as_bytes(), pos: 0, out: Lexed::default() }.run()
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    out: Lexed,
}

impl<'a> Lexer<'a> {
    fn run(mut self) -> Result<Lexed, ParseError> {
        while self.pos < self.bytes.len() {
            let c = self.bytes[self.pos];
            match c {
                b' ' | b'\t' | b'\n' | b'\r' | 0x0c => self.pos += 1,
                b'/' if self.peek(1) == Some(b'/') => self.line_comment(),
                b'/' if self.peek(1) == Some(b'*') => self.block_comment()?,
                b'"' => self.string()?,
                b'\'' => self.char_lit()?,
                b'0'..=b'9' => self.number(),
                b'.' if matches!(self.peek(1), Some(b'0'..=b'9')) => self.number(),
                _ if is_ident_start(self.current_char()) => self.word(),
                _ => self.punct()?,
            }
        }
        Ok(self.out)
    }

    fn peek(&self, ahead: usize) -> Option<u8> {
        self.bytes.get(self.pos + ahead).copied()
    }

    fn current_char(&self) -> char {
        self.src[self.pos..].chars().next().unwrap_or('\0')
    }

    fn push(&mut self, kind: TokenKind, start: usize) {
        self.out.tokens.push(Token { kind, span: Span::new(start, self.pos) });
    }

    fn line_comment(&mut self) {
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
            self.pos += 1;
        }
        // a trailing '\r' belongs to the line ending, not the comment
        let mut end = self.pos;
        if end > start && self.bytes[end - 1] == b'\r' {
            end -= 1;
        }
        self.out
            .comments
            .push(Comment { kind: CommentKind::LineComment, span: Span::new(start, end) });
    }

    fn block_comment(&mut self) -> Result<(), ParseError> {
        let start = self.pos;
        match self.src[start + 2..].find("*/") {
            Some(rel) => {
                self.pos = start + 2 + rel + 2;
                self.out
                    .comments
                    .push(Comment { kind: CommentKind::BlockComment, span: Span::new(start, self.pos) });
                Ok(())
            }
            None => Err(ParseError::at(self.src, start, "unterminated block comment")),
        }
    }

    fn string(&mut self) -> Result<(), ParseError> {
        let start = self.pos;
        if self.src[start..].starts_with("\"\"\"") {
            return match self.src[start + 3..].find("\"\"\"") {
                Some(rel) => {
                    self.pos = start + 3 + rel + 3;
                    self.push(TokenKind::StringLit, start);
                    Ok(())
                }
                None => Err(ParseError::at(self.src, start, "unterminated text block")),
            };
        }
        self.pos += 1;
        loop {
            match self.bytes.get(self.pos) {
                None | Some(b'\n') => {
                    return Err(ParseError::at(self.src, start, "unterminated string literal"))
                }
                Some(b'\\') => self.pos += 2,
                Some(b'"') => {
                    self.pos += 1;
                    break;
                }
                Some(_) => self.pos += 1,
            }
        }
        self.push(TokenKind::StringLit, start);
        Ok(())
    }

    fn char_lit(&mut self) -> Result<(), ParseError> {
        let start = self.pos;
        self.pos += 1;
        loop {
            match self.bytes.get(self.pos) {
                None | Some(b'\n') => {
                    return Err(ParseError::at(self.src, start, "unterminated character literal"))
                }
                Some(b'\\') => self.pos += 2,
                Some(b'\'') => {
                    self.pos += 1;
                    break;
                }
                Some(_) => self.pos += 1,
            }
        }
        self.push(TokenKind::CharLit, start);
        Ok(())
    }

    fn number(&mut self) {
        let start = self.pos;
        let mut is_float = false;
        let lower = |b: u8| b.to_ascii_lowercase();
        if self.bytes[self.pos] == b'0' && matches!(self.peek(1).map(lower), Some(b'x') | Some(b'b')) {
            self.pos += 2;
            while self.pos < self.bytes.len()
                && (self.bytes[self.pos].is_ascii_hexdigit() || self.bytes[self.pos] == b'_')
            {
                self.pos += 1;
            }
        } else {
            self.digits();
            if self.peek(0) == Some(b'.') && matches!(self.peek(1), Some(b'0'..=b'9')) {
                is_float = true;
                self.pos += 1;
                self.digits();
            } else if self.peek(0) == Some(b'.')
                && !matches!(self.peek(1), Some(b'.'))
                && !self.peek(1).map(|b| is_ident_start(b as char)).unwrap_or(false)
            {
                // `1.` is a valid double literal
                is_float = true;
                self.pos += 1;
            }
            if matches!(self.peek(0).map(lower), Some(b'e')) {
                let save = self.pos;
                self.pos += 1;
                if matches!(self.peek(0), Some(b'+') | Some(b'-')) {
                    self.pos += 1;
                }
                if matches!(self.peek(0), Some(b'0'..=b'9')) {
                    is_float = true;
                    self.digits();
                } else {
                    self.pos = save;
                }
            }
        }
        match self.peek(0).map(lower) {
            Some(b'l') => self.pos += 1,
            Some(b'f') | Some(b'd') => {
                is_float = true;
                self.pos += 1;
            }
            _ => {}
        }
        self.push(if is_float { TokenKind::FloatLit } else { TokenKind::IntLit }, start);
    }

    fn digits(&mut self) {
        while self.pos < self.bytes.len()
            && (self.bytes[self.pos].is_ascii_digit() || self.bytes[self.pos] == b'_')
        {
            self.pos += 1;
        }
    }

    fn word(&mut self) {
        let start = self.pos;
        for (i, ch) in self.src[start..].char_indices() {
            if !is_ident_part(ch) {
                self.pos = start + i;
                break;
            }
            self.pos = start + i + ch.len_utf8();
        }
        let kind = match &self.src[start..self.pos] {
            "true" | "false" => TokenKind::BoolLit,
            "null" => TokenKind::NullLit,
            w if is_keyword(w) => TokenKind::Keyword,
            _ => TokenKind::Ident,
        };
        self.push(kind, start);
    }

    fn punct(&mut self) -> Result<(), ParseError> {
        let rest = &self.src[self.pos..];
        match PUNCTS.iter().find(|p| rest.starts_with(**p)) {
            Some(p) => {
                let start = self.pos;
                self.pos += p.len();
                self.push(TokenKind::Punct, start);
                Ok(())
            }
            None => Err(ParseError::at(
                self.src,
                self.pos,
                format!("unexpected character {:?}", self.current_char()),
            )),
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == '$'
}

fn is_ident_part(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '$'
}
