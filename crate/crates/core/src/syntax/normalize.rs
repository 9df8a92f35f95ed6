//! Layout-insensitive comparison of sources.

use super::lexer;

/// Canonical layout: on every line, tokens (and comments) are joined by a
/// single space; blank lines are dropped. Line structure is otherwise kept,
/// so `for(int i` and `for (int i` compare equal but statements on different
/// lines do not merge.
///
/// Falls back to collapsing space/tab runs when the text does not lex.
pub fn normalize_whitespace(source: &str) -> String {
    let lexed = match lexer::tokenize(source) {
        Ok(l) => l,
        Err(_) => return collapse_runs(source),
    };
    let mut items: Vec<(usize, usize)> = lexed
        .tokens
        .iter()
        .map(|t| (t.span.start, t.span.end))
        .chain(lexed.comments.iter().map(|c| (c.span.start, c.span.end)))
        .collect();
    items.sort_unstable();
    let mut lines: Vec<String> = Vec::new();
    let mut current = String::new();
    let mut last_end = 0;
    for (start, end) in items {
        if source[last_end..start].contains('\n') && !current.is_empty() {
            lines.push(std::mem::take(&mut current));
        }
        if !current.is_empty() {
            current.push(' ');
        }
        // multi-line comments keep their words, not their layout
        let text = &source[start..end];
        if text.contains('\n') {
            current.push_str(&text.split_whitespace().collect::<Vec<_>>().join(" "));
        } else {
            current.push_str(text);
        }
        last_end = end;
    }
    if !current.is_empty() {
        lines.push(current);
    }
    lines.join("\n")
}

fn collapse_runs(source: &str) -> String {
    source
        .lines()
        .map(|l| l.split([' ', '\t']).filter(|w| !w.is_empty()).collect::<Vec<_>>().join(" "))
        .filter(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .join("\n")
}

/// True when two sources differ only in layout.
pub fn equivalent_modulo_whitespace(a: &str, b: &str) -> bool {
    normalize_whitespace(a) == normalize_whitespace(b)
}
