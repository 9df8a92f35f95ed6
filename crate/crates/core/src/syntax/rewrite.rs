//! Span-based text rewriting with offset remapping.
//!
//! Edits may nest (an inner edit lying inside a `Piece::Source` of an outer
//! one) but may not partially overlap.

use super::Span;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Piece {
    Text(String),
    /// A range of the original source, with any edits nested inside it applied.
    Source(Span),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edit {
    pub span: Span,
    pub pieces: Vec<Piece>,
    /// Output offset, relative to the start of this edit's output, that
    /// anchors sitting exactly at `span.start` are moved to.
    pub anchor_at: usize,
}

impl Edit {
    pub fn new(span: Span, pieces: Vec<Piece>) -> Self {
        Edit { span, pieces, anchor_at: 0 }
    }

    pub fn replace(span: Span, text: impl Into<String>) -> Self {
        Edit::new(span, vec![Piece::Text(text.into())])
    }

    pub fn insert(offset: usize, text: impl Into<String>) -> Self {
        Edit::replace(Span::new(offset, offset), text)
    }

    pub fn delete(span: Span) -> Self {
        Edit::new(span, Vec::new())
    }

    pub fn with_anchor(mut self, anchor_at: usize) -> Self {
        self.anchor_at = anchor_at;
        self
    }

    fn is_insertion(&self) -> bool {
        self.span.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RewriteError {
    #[error("overlapping edits at {0} and {1}")]
    Conflict(Span, Span),
    #[error("edit at {0} is nested in an edit that discards its range")]
    Uncovered(Span),
    #[error("edit at {0} lies outside the source")]
    OutOfBounds(Span),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Segment {
    orig: Span,
    out_start: usize,
    depth: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct EditRecord {
    orig: Span,
    out: Span,
    anchor_at: usize,
    depth: usize,
}

/// Where an original offset ended up after rewriting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mapped {
    Exact(usize),
    /// The offset was inside replaced text; the value is the start of the replacement.
    Orphaned(usize),
}

impl Mapped {
    pub fn offset(self) -> usize {
        match self {
            Mapped::Exact(o) | Mapped::Orphaned(o) => o,
        }
    }
}

/// Correspondence between original and rewritten offsets.
#[derive(Debug, Clone, Default)]
pub struct RenderMap {
    segments: Vec<Segment>,
    edits: Vec<EditRecord>,
    orig_len: usize,
    out_len: usize,
}

impl RenderMap {
    pub fn identity(len: usize) -> Self {
        RenderMap {
            segments: vec![Segment { orig: Span::new(0, len), out_start: 0, depth: 0 }],
            edits: Vec::new(),
            orig_len: len,
            out_len: len,
        }
    }

    /// Maps an offset that refers to the token starting there.
    pub fn map_start(&self, off: usize) -> Mapped {
        // an edit beginning here claims the anchor (outermost first)
        let claiming = self
            .edits
            .iter()
            .filter(|e| e.orig.start == off && !e.orig.is_empty())
            .min_by_key(|e| e.depth);
        if let Some(e) = claiming {
            if e.out.is_empty() {
                return Mapped::Orphaned(e.out.start);
            }
            let inner_copy = self.segments.iter().find(|s| s.orig.start <= off && off < s.orig.end);
            return match inner_copy {
                Some(seg) if e.anchor_at == 0 && seg.out_start == e.out.start => Mapped::Exact(seg.out_start),
                _ => Mapped::Exact(e.out.start + e.anchor_at.min(e.out.len())),
            };
        }
        let inner = self.innermost_containing(off);
        // a copy made no deeper than an edit that discards the offset is a
        // duplicate elsewhere (e.g. a loop update hoisted into a header)
        if let Some(seg) = self
            .segments
            .iter()
            .find(|s| s.orig.start <= off && off < s.orig.end && inner.is_none_or(|e| s.depth > e.depth))
        {
            return Mapped::Exact(seg.out_start + (off - seg.orig.start));
        }
        if off >= self.orig_len {
            return Mapped::Exact(self.out_len);
        }
        match inner {
            Some(e) => Mapped::Orphaned(e.out.start),
            None => Mapped::Exact(self.fallback(off)),
        }
    }

    /// Maps an offset that refers to the end of the token before it.
    pub fn map_end(&self, off: usize) -> Mapped {
        if let Some(seg) = self.segments.iter().find(|s| s.orig.start < off && off <= s.orig.end) {
            return Mapped::Exact(seg.out_start + (off - seg.orig.start));
        }
        if let Some(e) = self.edits.iter().filter(|e| e.orig.end == off && !e.orig.is_empty()).min_by_key(|e| e.depth) {
            return Mapped::Exact(e.out.end);
        }
        self.map_start(off)
    }

    fn innermost_containing(&self, off: usize) -> Option<&EditRecord> {
        self.edits
            .iter()
            .filter(|e| e.orig.start < off && off < e.orig.end)
            .max_by_key(|e| e.depth)
    }

    fn fallback(&self, off: usize) -> usize {
        self.segments
            .iter()
            .filter(|s| s.orig.end <= off)
            .map(|s| s.out_start + s.orig.len())
            .max()
            .unwrap_or(0)
    }

    pub fn output_len(&self) -> usize {
        self.out_len
    }
}

/// Collects edits against one source text and applies them together.
#[derive(Debug, Clone)]
pub struct Rewriter<'a> {
    source: &'a str,
    edits: Vec<Edit>,
}

struct Node {
    edit: usize,
    children: Vec<Node>,
}

impl<'a> Rewriter<'a> {
    pub fn new(source: &'a str) -> Self {
        Rewriter { source, edits: Vec::new() }
    }

    pub fn source(&self) -> &'a str {
        self.source
    }

    pub fn push(&mut self, edit: Edit) {
        self.edits.push(edit);
    }

    pub fn replace(&mut self, span: Span, text: impl Into<String>) {
        self.push(Edit::replace(span, text));
    }

    pub fn insert(&mut self, offset: usize, text: impl Into<String>) {
        self.push(Edit::insert(offset, text));
    }

    pub fn delete(&mut self, span: Span) {
        self.push(Edit::delete(span));
    }

    pub fn is_empty(&self) -> bool {
        self.edits.is_empty()
    }

    pub fn len(&self) -> usize {
        self.edits.len()
    }

    pub fn apply(&self) -> Result<String, RewriteError> {
        self.apply_with_map().map(|(s, _)| s)
    }

    pub fn apply_with_map(&self) -> Result<(String, RenderMap), RewriteError> {
        for e in &self.edits {
            if e.span.end > self.source.len() {
                return Err(RewriteError::OutOfBounds(e.span));
            }
        }
        let forest = self.build_forest()?;
        let mut out = String::with_capacity(self.source.len());
        let mut map = RenderMap { orig_len: self.source.len(), ..Default::default() };
        self.render_range(Span::new(0, self.source.len()), &forest, 0, &mut out, &mut map)?;
        map.out_len = out.len();
        Ok((out, map))
    }

    fn build_forest(&self) -> Result<Vec<Node>, RewriteError> {
        let mut order: Vec<usize> = (0..self.edits.len()).collect();
        // insertions before replacements at the same offset; outer before inner
        order.sort_by_key(|&i| {
            let e = &self.edits[i];
            (e.span.start, !e.is_insertion(), std::cmp::Reverse(e.span.end))
        });
        let mut roots: Vec<Node> = Vec::new();
        let mut stack: Vec<Node> = Vec::new();
        for i in order {
            let span = self.edits[i].span;
            while let Some(top) = stack.last() {
                let t = self.edits[top.edit].span;
                let inside = if span.is_empty() {
                    t.start < span.start && span.start < t.end
                } else {
                    t.start <= span.start && span.end <= t.end
                };
                if inside {
                    if !span.is_empty() && t == span {
                        return Err(RewriteError::Conflict(t, span));
                    }
                    break;
                }
                if span.start < t.end && !span.is_empty() && !t.is_empty() {
                    return Err(RewriteError::Conflict(t, span));
                }
                let done = stack.pop().expect("non-empty stack");
                match stack.last_mut() {
                    Some(parent) => parent.children.push(done),
                    None => roots.push(done),
                }
            }
            stack.push(Node { edit: i, children: Vec::new() });
        }
        while let Some(done) = stack.pop() {
            match stack.last_mut() {
                Some(parent) => parent.children.push(done),
                None => roots.push(done),
            }
        }
        Ok(roots)
    }

    fn render_range(
        &self,
        range: Span,
        nodes: &[Node],
        depth: usize,
        out: &mut String,
        map: &mut RenderMap,
    ) -> Result<(), RewriteError> {
        let mut cursor = range.start;
        for node in nodes {
            let edit = &self.edits[node.edit];
            if edit.span.start < range.start || edit.span.end > range.end {
                continue;
            }
            if edit.span.start > cursor {
                copy(self.source, Span::new(cursor, edit.span.start), depth, out, map);
            }
            let out_start = out.len();
            let mut covered = vec![false; node.children.len()];
            for piece in &edit.pieces {
                match piece {
                    Piece::Text(t) => out.push_str(t),
                    Piece::Source(s) => {
                        for (k, c) in node.children.iter().enumerate() {
                            let cs = self.edits[c.edit].span;
                            if s.start <= cs.start && cs.end <= s.end {
                                covered[k] = true;
                            }
                        }
                        self.render_range(*s, &node.children, depth + 1, out, map)?;
                    }
                }
            }
            if let Some(k) = covered.iter().position(|c| !c) {
                return Err(RewriteError::Uncovered(self.edits[node.children[k].edit].span));
            }
            map.edits.push(EditRecord {
                orig: edit.span,
                out: Span::new(out_start, out.len()),
                anchor_at: edit.anchor_at,
                depth,
            });
            cursor = cursor.max(edit.span.end);
        }
        if cursor < range.end {
            copy(self.source, Span::new(cursor, range.end), depth, out, map);
        }
        Ok(())
    }
}

fn copy(source: &str, span: Span, depth: usize, out: &mut String, map: &mut RenderMap) {
    map.segments.push(Segment { orig: span, out_start: out.len(), depth });
    out.push_str(span.slice(source));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_edit_inside_source_piece() {
        let src = "x = a < b;";
        let mut rw = Rewriter::new(src);
        // outer: wrap the rhs in parens, inner: swap the relation
        rw.push(Edit::new(Span::new(4, 9), vec![Piece::Text("(".into()), Piece::Source(Span::new(4, 9)), Piece::Text(")".into())]));
        rw.replace(Span::new(6, 7), ">");
        assert_eq!(rw.apply().unwrap(), "x = (a > b);");
    }

    #[test]
    fn partial_overlap_is_conflict() {
        let mut rw = Rewriter::new("abcdef");
        rw.replace(Span::new(0, 3), "X");
        rw.replace(Span::new(2, 5), "Y");
        assert!(matches!(rw.apply(), Err(RewriteError::Conflict(..))));
    }

    #[test]
    fn insertions_keep_registration_order() {
        let mut rw = Rewriter::new("ab");
        rw.insert(1, "1");
        rw.insert(1, "2");
        assert_eq!(rw.apply().unwrap(), "a12b");
    }

    #[test]
    fn offsets_are_remapped() {
        let src = "aa bb cc";
        let mut rw = Rewriter::new(src);
        rw.insert(3, "zz ");
        rw.replace(Span::new(6, 8), "dddd");
        let (out, map) = rw.apply_with_map().unwrap();
        assert_eq!(out, "aa zz bb dddd");
        assert_eq!(map.map_start(3), Mapped::Exact(6));
        assert_eq!(map.map_start(6), Mapped::Exact(9));
        assert_eq!(map.map_start(7), Mapped::Orphaned(9));
        assert_eq!(map.map_end(8), Mapped::Exact(13));
        assert_eq!(map.map_end(2), Mapped::Exact(2));
    }

    #[test]
    fn deletion_orphans_its_start() {
        let mut rw = Rewriter::new("a;\nb;\nc;");
        rw.delete(Span::new(3, 6));
        let (out, map) = rw.apply_with_map().unwrap();
        assert_eq!(out, "a;\nc;");
        assert!(matches!(map.map_start(3), Mapped::Orphaned(_)));
        assert_eq!(map.map_start(6), Mapped::Exact(3));
    }

    #[test]
    fn discarded_nested_edit_is_rejected() {
        let mut rw = Rewriter::new("abc");
        rw.replace(Span::new(0, 3), "X");
        rw.replace(Span::new(1, 2), "Y");
        assert!(matches!(rw.apply(), Err(RewriteError::Uncovered(_))));
    }
}
