use crate::syntax::{visit, Expr, ExprKind, Piece, Span, Stmt, SyntaxTree, TokenKind, TypeEnv, UnaryOp};
use std::collections::{HashMap, HashSet};

/// Methods assumed free of side effects when deciding whether an
/// expression may be duplicated, reordered or hoisted.
const PURE_METHODS: &[&str] = &[
    "abs", "ceil", "charAt", "compareTo", "contains", "containsKey", "endsWith", "equals", "floor",
    "get", "getOrDefault", "hashCode", "indexOf", "isDigit", "isEmpty", "isLetter", "isLowerCase",
    "isUpperCase", "isWhitespace", "lastIndexOf", "length", "max", "min", "pow", "round", "signum",
    "size", "sqrt", "startsWith", "substring", "toLowerCase", "toString", "toUpperCase", "trim",
    "valueOf", "intValue",
];

pub(crate) struct Ctx<'a> {
    pub tree: &'a SyntaxTree,
    pub src: &'a str,
    /// Statement span → (statement list, position in it).
    lists: HashMap<Span, (&'a [Stmt], usize)>,
    unit_indent: String,
}

impl<'a> Ctx<'a> {
    pub fn new(tree: &'a SyntaxTree) -> Self {
        let mut lists = HashMap::new();
        for list in visit::stmt_lists(tree.unit()) {
            for (i, s) in list.iter().enumerate() {
                lists.insert(s.span, (list, i));
            }
        }
        Ctx { tree, src: tree.source(), lists, unit_indent: indent_unit(tree.source()) }
    }

    pub fn text(&self, span: Span) -> &'a str {
        span.slice(self.src)
    }

    pub fn position(&self, stmt: &Stmt) -> Option<(&'a [Stmt], usize)> {
        self.lists.get(&stmt.span).copied()
    }

    pub fn in_list(&self, stmt: &Stmt) -> bool {
        self.lists.contains_key(&stmt.span)
    }

    pub fn indent_at(&self, offset: usize) -> &'a str {
        let ls = crate::syntax::line_start(self.src, offset);
        let line = &self.src[ls..];
        let n = line.len() - line.trim_start_matches([' ', '\t']).len();
        &line[..n]
    }

    pub fn text_of(&self, piece: &Piece) -> String {
        match piece {
            Piece::Text(t) => t.clone(),
            Piece::Source(span) => self.text(*span).to_string(),
        }
    }

    pub fn unit(&self) -> &str {
        &self.unit_indent
    }

    pub fn env_at(&self, offset: usize) -> TypeEnv {
        TypeEnv::at(self.tree, offset)
    }

    /// Every identifier spelled anywhere in the unit.
    pub fn identifiers(&self) -> HashSet<&'a str> {
        self.tree
            .tokens()
            .iter()
            .filter(|t| t.kind == TokenKind::Ident)
            .map(|t| t.span.slice(self.src))
            .collect()
    }

    /// Picks `base`, `base2`, `base3`, ... avoiding `taken`; records the choice.
    pub fn fresh(&self, base: &str, taken: &mut HashSet<String>) -> String {
        let mut n = 1;
        loop {
            let cand = if n == 1 { base.to_string() } else { format!("{base}{n}") };
            if !taken.contains(&cand) {
                taken.insert(cand.clone());
                return cand;
            }
            n += 1;
        }
    }
}

/// Smallest indentation step used by the source; four spaces when unknown.
pub(crate) fn indent_unit(src: &str) -> String {
    if src.lines().any(|l| l.starts_with('\t')) {
        return "\t".into();
    }
    let step = src
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.len() - l.trim_start_matches(' ').len())
        .filter(|&n| n > 0)
        .min()
        .unwrap_or(4)
        .clamp(2, 8);
    " ".repeat(step)
}

/// No assignments, increments, allocations or calls outside the pure list.
pub(crate) fn is_pure(e: &Expr) -> bool {
    visit::exprs_in_expr(e).into_iter().all(|x| match &x.kind {
        ExprKind::Assign { .. } | ExprKind::New { .. } | ExprKind::Lambda { .. } => false,
        ExprKind::Unary { op, .. } => !op.is_inc_dec(),
        ExprKind::MethodCall { name, .. } => PURE_METHODS.contains(&name.name.as_str()),
        _ => true,
    })
}

/// The expression as pieces, parenthesized when `wrap` is set.
pub(crate) fn operand(e: &Expr, wrap: bool) -> Vec<Piece> {
    if wrap {
        vec![Piece::Text("(".into()), Piece::Source(e.span), Piece::Text(")".into())]
    } else {
        vec![Piece::Source(e.span)]
    }
}

pub(crate) fn text(s: impl Into<String>) -> Piece {
    Piece::Text(s.into())
}

pub(crate) fn src(start: usize, end: usize) -> Piece {
    Piece::Source(Span::new(start, end))
}

/// Variables written by an expression: base names of assignment and
/// increment targets.
pub(crate) fn written_names(e: &Expr) -> Vec<&str> {
    let mut out = Vec::new();
    for x in visit::exprs_in_expr(e) {
        let target = match &x.kind {
            ExprKind::Assign { target, .. } => Some(&**target),
            ExprKind::Unary { op, operand, .. } if op.is_inc_dec() => Some(&**operand),
            _ => None,
        };
        if let Some(t) = target {
            if let Some(n) = base_name(t) {
                out.push(n);
            }
        }
    }
    out
}

/// `a` for `a`, `a[i]`, `a.f`, `(a)`.
pub(crate) fn base_name(e: &Expr) -> Option<&str> {
    match &e.unparen().kind {
        ExprKind::Name(id) => Some(&id.name),
        ExprKind::Index { array, .. } => base_name(array),
        ExprKind::FieldAccess { target, name } => match target.kind {
            ExprKind::This => Some(&name.name),
            _ => base_name(target),
        },
        _ => None,
    }
}

pub(crate) fn is_negation(e: &Expr) -> Option<&Expr> {
    match &e.unparen().kind {
        ExprKind::Unary { op: UnaryOp::Not, operand, .. } => Some(operand),
        _ => None,
    }
}

/// Whitespace-insensitive text of a span, for comparing expressions.
pub(crate) fn squash(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}
