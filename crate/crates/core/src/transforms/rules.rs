//! Site collection for the structural and expression-level transforms.
//! Each function returns one edit per rewritten site; nested sites nest
//! through `Piece::Source` so a single rewrite pass applies all of them.

use super::util::{is_negation, is_pure, operand, squash, src, text, written_names, Ctx};
use crate::syntax::*;
use std::collections::HashSet;

#[derive(Debug, Default)]
pub(crate) struct Plan {
    pub edits: Vec<Edit>,
    pub sites: usize,
}

impl Plan {
    pub fn site(&mut self, edit: Edit) {
        self.edits.push(edit);
        self.sites += 1;
    }
}

fn all_exprs<'a>(cx: &Ctx<'a>) -> Vec<&'a Expr> {
    visit::all_exprs(cx.tree.unit())
}

fn all_stmts<'a>(cx: &Ctx<'a>) -> Vec<&'a Stmt> {
    visit::all_stmts(cx.tree.unit())
}

/// `lhs op rhs` → `rhs op' lhs`, keeping the original spacing around the operator.
fn swap_operands(cx: &Ctx, e: &Expr, lhs: &Expr, rhs: &Expr, op_span: Span, new_op: &str, prec: u8) -> Edit {
    let mut pieces = operand(rhs, rhs.precedence() < prec);
    pieces.push(text(cx.text(Span::new(lhs.span.end, op_span.start))));
    pieces.push(text(new_op));
    pieces.push(text(cx.text(Span::new(op_span.end, rhs.span.start))));
    pieces.extend(operand(lhs, lhs.precedence() <= prec));
    Edit::new(e.span, pieces)
}

fn swappable_operands(cx: &Ctx, lhs: &Expr, rhs: &Expr) -> bool {
    is_pure(lhs) && is_pure(rhs) && squash(cx.text(lhs.span)) != squash(cx.text(rhs.span))
}

pub(crate) fn switch_relation(cx: &Ctx) -> Plan {
    let mut plan = Plan::default();
    for e in all_exprs(cx) {
        if let ExprKind::Binary { op, op_span, lhs, rhs } = &e.kind {
            if op.is_relational() && swappable_operands(cx, lhs, rhs) {
                plan.site(swap_operands(cx, e, lhs, rhs, *op_span, op.mirrored().as_str(), op.precedence()));
            }
        }
    }
    plan
}

pub(crate) fn switch_equal_exp(cx: &Ctx) -> Plan {
    let mut plan = Plan::default();
    for e in all_exprs(cx) {
        if let ExprKind::Binary { op, op_span, lhs, rhs } = &e.kind {
            if op.is_equality() && swappable_operands(cx, lhs, rhs) {
                plan.site(swap_operands(cx, e, lhs, rhs, *op_span, op.as_str(), op.precedence()));
            }
        }
    }
    plan
}

pub(crate) fn switch_string_equal(cx: &Ctx) -> Plan {
    let mut plan = Plan::default();
    for e in all_exprs(cx) {
        let ExprKind::MethodCall { target: Some(target), name, args } = &e.kind else { continue };
        if name.name != "equals" || args.len() != 1 {
            continue;
        }
        let arg = &args[0];
        if matches!(arg.kind, ExprKind::Literal(LitKind::Null)) || !swappable_operands(cx, target, arg) {
            continue;
        }
        let env = cx.env_at(e.span.start);
        let is_string = |x: &Expr| env.type_of(x, cx.src).as_deref() == Some("String");
        if !is_string(target) || !is_string(arg) {
            continue;
        }
        let mut pieces = operand(arg, arg.precedence() < PREC_PRIMARY);
        pieces.push(text(cx.text(Span::new(target.span.end, arg.span.start))));
        pieces.push(Piece::Source(target.span));
        pieces.push(text(cx.text(Span::new(arg.span.end, e.span.end))));
        plan.site(Edit::new(e.span, pieces));
    }
    plan
}

fn primitive(ty: &str) -> &str {
    match ty {
        "Byte" => "byte",
        "Short" => "short",
        "Character" => "char",
        other => other,
    }
}

pub(crate) fn unary_to_add(cx: &Ctx) -> Plan {
    let mut plan = Plan::default();
    let mut candidates = Vec::new();
    for s in all_stmts(cx) {
        match &s.kind {
            StmtKind::Expr(e) => candidates.push(e),
            StmtKind::For { update, .. } => candidates.extend(update.iter()),
            _ => {}
        }
    }
    for e in candidates {
        let ExprKind::Unary { op, operand: target, .. } = &e.kind else { continue };
        if !op.is_inc_dec() || !is_pure(target) {
            continue;
        }
        let Some(ty) = cx.env_at(e.span.start).type_of(target, cx.src) else { continue };
        if !is_numeric(&ty) {
            continue;
        }
        let sign = if op.is_increment() { "+" } else { "-" };
        let t = cx.text(target.span);
        let value = if is_narrow(&ty) {
            format!("({}) ({t} {sign} 1)", primitive(&ty))
        } else {
            format!("{t} {sign} 1")
        };
        plan.site(Edit::new(e.span, vec![Piece::Source(target.span), text(format!(" = {value}"))]));
    }
    plan
}

pub(crate) fn add_to_equal(cx: &Ctx) -> Plan {
    let mut plan = Plan::default();
    for e in all_exprs(cx) {
        let ExprKind::Assign { op, op_span, target, value } = &e.kind else { continue };
        let Some(bin) = op.binary().filter(|b| matches!(b, BinaryOp::Add | BinaryOp::Sub)) else { continue };
        if !is_pure(target) {
            continue;
        }
        let Some(ty) = cx.env_at(e.span.start).type_of(target, cx.src) else { continue };
        if !(is_numeric(&ty) || (ty == "String" && bin == BinaryOp::Add)) {
            continue;
        }
        let t = cx.text(target.span);
        let narrow = is_narrow(&ty);
        let mut pieces = vec![
            Piece::Source(target.span),
            text(cx.text(Span::new(target.span.end, op_span.start))),
            text("="),
            text(cx.text(Span::new(op_span.end, value.span.start))),
        ];
        let prefix = if narrow { format!("({}) ({t} ", primitive(&ty)) } else { format!("{t} ") };
        pieces.push(text(format!("{prefix}{} ", bin.as_str())));
        pieces.extend(operand(value, value.precedence() <= bin.precedence()));
        if narrow {
            pieces.push(text(")"));
        }
        plan.site(Edit::new(e.span, pieces));
    }
    plan
}

fn decl_start(d: &LocalVarDecl) -> usize {
    d.modifiers.first().map(|m| m.start).unwrap_or(d.ty.span.start).min(d.ty.span.start)
}

fn decl_end(d: &LocalVarDecl) -> usize {
    d.declarators.last().map(|x| x.span.end).unwrap_or(d.ty.span.end)
}

fn modifiers_text<'a>(cx: &Ctx<'a>, d: &LocalVarDecl) -> Vec<&'a str> {
    d.modifiers.iter().map(|m| cx.text(*m)).collect()
}

pub(crate) fn merge_var_decl(cx: &Ctx) -> Plan {
    let mut plan = Plan::default();
    let mergeable = |a: &Stmt, b: &Stmt| match (&a.kind, &b.kind) {
        (StmtKind::LocalVar(x), StmtKind::LocalVar(y)) => {
            x.ty.text == y.ty.text
                && !x.ty.is_var()
                && modifiers_text(cx, x) == modifiers_text(cx, y)
                && cx.text(Span::new(a.span.end, b.span.start)).trim().is_empty()
        }
        _ => false,
    };
    for list in visit::stmt_lists(cx.tree.unit()) {
        let mut i = 0;
        while i < list.len() {
            let mut j = i + 1;
            while j < list.len() && mergeable(&list[j - 1], &list[j]) {
                j += 1;
            }
            if j - i >= 2 {
                let StmtKind::LocalVar(first) = &list[i].kind else { unreachable!() };
                let mut pieces = vec![src(list[i].span.start, decl_end(first))];
                for s in &list[i + 1..j] {
                    let StmtKind::LocalVar(d) = &s.kind else { unreachable!() };
                    for dec in &d.declarators {
                        pieces.push(text(", "));
                        pieces.push(Piece::Source(dec.span));
                    }
                }
                pieces.push(text(";"));
                plan.site(Edit::new(Span::new(list[i].span.start, list[j - 1].span.end), pieces));
            }
            i = j;
        }
    }
    plan
}

pub(crate) fn infix_dividing(cx: &Ctx) -> Plan {
    let mut plan = Plan::default();
    let mut taken: HashSet<String> = cx.identifiers().into_iter().map(str::to_string).collect();
    for s in all_stmts(cx) {
        if !cx.in_list(s) {
            continue;
        }
        let (value, target) = match &s.kind {
            StmtKind::Expr(Expr { kind: ExprKind::Assign { target, value, .. }, .. }) => (&**value, Some(&**target)),
            StmtKind::LocalVar(d) if d.declarators.len() == 1 && !d.ty.is_var() => match &d.declarators[0].init {
                Some(v) => (v, None),
                None => continue,
            },
            StmtKind::Return(Some(e)) => (e, None),
            _ => continue,
        };
        if !is_pure(value) || target.is_some_and(|t| !is_pure(t)) {
            continue;
        }
        let ExprKind::Binary { op, lhs, rhs, .. } = &value.unparen().kind else { continue };
        if op.is_logical() {
            continue;
        }
        let env = cx.env_at(s.span.start);
        let typed = [&**rhs, &**lhs].into_iter().find_map(|o| {
            let splittable = matches!(&o.unparen().kind, ExprKind::Binary { op, .. } if !op.is_logical());
            let ty = env.type_of(o, cx.src)?;
            (splittable && (is_numeric(&ty) || ty == "boolean" || ty == "String")).then_some((o, ty))
        });
        let Some((sub, ty)) = typed else { continue };
        let name = cx.fresh("temp", &mut taken);
        let indent = cx.indent_at(s.span.start);
        plan.site(Edit::new(
            s.span,
            vec![
                text(format!("{ty} {name} = ")),
                Piece::Source(sub.span),
                text(format!(";\n{indent}")),
                src(s.span.start, sub.span.start),
                text(name),
                src(sub.span.end, s.span.end),
            ],
        ));
    }
    plan
}

/// True when `s` contains a `continue` that would target the loop whose body it is.
fn has_continue(s: &Stmt, nested: bool) -> bool {
    match &s.kind {
        StmtKind::Continue(label) => label.is_some() || !nested,
        _ => visit::stmt_children(s).into_iter().any(|c| has_continue(c, nested || s.is_loop())),
    }
}

/// True when `s` contains a `break` that would leave the enclosing switch.
fn has_break(s: &Stmt, nested: bool) -> bool {
    match &s.kind {
        StmtKind::Break(label) => label.is_some() || !nested,
        _ => visit::stmt_children(s)
            .into_iter()
            .any(|c| has_break(c, nested || s.is_loop() || matches!(s.kind, StmtKind::Switch { .. }))),
    }
}

fn ends_abruptly(body: &Stmt) -> bool {
    let last = match &body.kind {
        StmtKind::Block(b) => match b.stmts.last() {
            Some(l) => l,
            None => return false,
        },
        _ => body,
    };
    matches!(last.kind, StmtKind::Return(_) | StmtKind::Throw(_) | StmtKind::Break(_) | StmtKind::Continue(_))
}

fn piece_len(p: &Piece) -> usize {
    match p {
        Piece::Text(t) => t.len(),
        Piece::Source(s) => s.len(),
    }
}

/// Appends `extra` statement text as the last line(s) of a loop body.
/// Body pieces with `tail` appended, plus a nested edit when the tail is
/// spliced in front of a closing brace that sits on its own line, so that
/// annotations anchored at that brace stay ahead of the tail.
fn body_with_tail(cx: &Ctx, body: &Stmt, tail: &[Piece], indent: &str) -> (Vec<Piece>, Option<Edit>) {
    let mut out = Vec::new();
    match &body.kind {
        StmtKind::Block(b) => match b.stmts.last() {
            Some(last) => {
                let close = b.span.end - 1;
                let inner = cx.indent_at(last.span.start).to_string();
                let brace_indent = cx.indent_at(close);
                let own_line = cx.src[line_start(cx.src, close)..close].chars().all(|c| c == ' ' || c == '\t');
                if own_line && inner.starts_with(brace_indent) {
                    let extra = inner[brace_indent.len()..].to_string();
                    let mut rep = extra.clone();
                    for p in tail {
                        rep.push_str(&cx.text_of(p));
                    }
                    rep.push_str(&format!("\n{brace_indent}}}"));
                    out.push(Piece::Source(b.span));
                    let edit = Edit::new(Span::new(close, close + 1), vec![text(rep)]).with_anchor(extra.len());
                    return (out, Some(edit));
                }
                out.push(src(b.span.start, last.span.end));
                out.push(text(format!("\n{inner}")));
                out.extend(tail.iter().cloned());
                out.push(src(last.span.end, b.span.end));
            }
            None => {
                out.push(src(b.span.start, b.span.start + 1));
                out.push(text(" "));
                out.extend(tail.iter().cloned());
                out.push(text(" "));
                out.push(src(b.span.start + 1, b.span.end));
            }
        },
        _ => {
            let inner = format!("{indent}{}", cx.unit());
            out.push(text(format!("{{\n{inner}")));
            out.push(Piece::Source(body.span));
            out.push(text(format!("\n{inner}")));
            out.extend(tail.iter().cloned());
            out.push(text(format!("\n{indent}}}")));
        }
    }
    (out, None)
}

fn mentions_later(cx: &Ctx, stmt: &Stmt, names: &[&str]) -> bool {
    let Some((list, i)) = cx.position(stmt) else { return false };
    let Some(last) = list.last() else { return false };
    if i + 1 >= list.len() {
        return false;
    }
    let range = Span::new(list[i + 1].span.start, last.span.end);
    cx.tree
        .tokens()
        .iter()
        .filter(|t| t.kind == TokenKind::Ident && range.contains(t.span))
        .any(|t| names.contains(&cx.text(t.span)))
}

pub(crate) fn for_to_while(cx: &Ctx) -> Plan {
    let mut plan = Plan::default();
    for s in all_stmts(cx) {
        let StmtKind::For { init, cond, update, body, .. } = &s.kind else { continue };
        if has_continue(body, false) || (!update.is_empty() && ends_abruptly(body)) {
            continue;
        }
        let indent = cx.indent_at(s.span.start).to_string();
        let unit = cx.unit().to_string();
        let mut init_pieces: Vec<Piece> = Vec::new();
        let mut declared: Vec<&str> = Vec::new();
        match init {
            Some(ForInit::Decl(d)) => {
                init_pieces.push(src(decl_start(d), decl_end(d)));
                init_pieces.push(text(";"));
                declared.extend(d.declarators.iter().map(|x| x.name.name.as_str()));
            }
            Some(ForInit::Exprs(es)) => {
                for (k, e) in es.iter().enumerate() {
                    if k > 0 {
                        init_pieces.push(text(" "));
                    }
                    init_pieces.push(Piece::Source(e.span));
                    init_pieces.push(text(";"));
                }
            }
            None => {}
        }
        let wrap = !init_pieces.is_empty() && (!cx.in_list(s) || mentions_later(cx, s, &declared));
        let line_indent = if wrap { format!("{indent}{unit}") } else { indent.clone() };
        let mut pieces = Vec::new();
        if wrap {
            pieces.push(text(format!("{{\n{line_indent}")));
        }
        if !init_pieces.is_empty() {
            pieces.extend(init_pieces);
            pieces.push(text(format!("\n{line_indent}")));
        }
        let anchor: usize = pieces.iter().map(piece_len).sum();
        pieces.push(text("while ("));
        match cond {
            Some(c) => pieces.push(Piece::Source(c.span)),
            None => pieces.push(text("true")),
        }
        pieces.push(text(") "));
        if update.is_empty() {
            pieces.push(Piece::Source(body.span));
        } else {
            let mut tail = Vec::new();
            for (k, u) in update.iter().enumerate() {
                if k > 0 {
                    tail.push(text(" "));
                }
                tail.push(Piece::Source(u.span));
                tail.push(text(";"));
            }
            let (body_pieces, nested) = body_with_tail(cx, body, &tail, &indent);
            pieces.extend(body_pieces);
            plan.edits.extend(nested);
        }
        if wrap {
            pieces.push(text(format!("\n{indent}}}")));
        }
        plan.site(Edit::new(s.span, pieces).with_anchor(anchor));
    }
    plan
}

/// A while loop in counting shape: `init; while (cond) { ...; update; }`.
struct Counting<'a> {
    init: Option<&'a Stmt>,
    update: &'a Stmt,
}

fn counting_shape<'a>(cx: &Ctx<'a>, w: &'a Stmt, prev: Option<&'a Stmt>, scoped: bool) -> Option<Counting<'a>> {
    let StmtKind::While { cond, body } = &w.kind else { return None };
    if has_continue(body, false) {
        return None;
    }
    let b = body.as_block()?;
    let update = b.stmts.last()?;
    let StmtKind::Expr(u) = &update.kind else { return None };
    let var = match &u.kind {
        ExprKind::Unary { op, operand, .. } if op.is_inc_dec() => operand.as_name()?,
        ExprKind::Assign { target, .. } => target.as_name()?,
        _ => return None,
    };
    if !visit::names_in_expr(cond).contains(&var) {
        return None;
    }
    let init = prev.filter(|p| match &p.kind {
        StmtKind::LocalVar(d) => {
            d.declarators.len() == 1
                && d.declarators[0].name.name == var
                && d.declarators[0].init.is_some()
                && (scoped || !mentions_later(cx, w, &[var]))
        }
        StmtKind::Expr(Expr { kind: ExprKind::Assign { op: AssignOp::Assign, target, .. }, .. }) => {
            target.as_name() == Some(var)
        }
        _ => false,
    });
    Some(Counting { init, update })
}

/// Pieces of the for loop replacing `w`, plus the nested edit that drops the
/// trailing update statement from a counting loop body.
fn for_pieces(w: &Stmt, shape: Option<&Counting>) -> (Vec<Piece>, Option<Edit>) {
    let StmtKind::While { cond, body } = &w.kind else { unreachable!() };
    let Some(shape) = shape else {
        return (vec![text("for (; "), Piece::Source(cond.span), text("; "), src(cond.span.end, w.span.end)], None);
    };
    let mut pieces = vec![text("for (")];
    match shape.init.map(|i| &i.kind) {
        Some(StmtKind::LocalVar(d)) => pieces.push(src(decl_start(d), decl_end(d))),
        Some(StmtKind::Expr(e)) => pieces.push(Piece::Source(e.span)),
        _ => {}
    }
    let StmtKind::Expr(u) = &shape.update.kind else { unreachable!() };
    pieces.extend([text("; "), Piece::Source(cond.span), text("; "), Piece::Source(u.span)]);
    pieces.push(src(cond.span.end, w.span.end));
    let b = body.as_block().expect("counting loops have block bodies");
    let n = b.stmts.len();
    let keep_to = if n >= 2 { b.stmts[n - 2].span.end } else { b.span.start + 1 };
    (pieces, Some(Edit::replace(Span::new(keep_to, shape.update.span.end), String::new())))
}

pub(crate) fn while_to_for(cx: &Ctx) -> Plan {
    let mut plan = Plan::default();
    let mut handled: HashSet<Span> = HashSet::new();
    // `{ T v = e; while (...) { ...; v++; } }` collapses back into a single for.
    for s in all_stmts(cx) {
        let StmtKind::Block(b) = &s.kind else { continue };
        // only bare blocks in a statement list; a block serving as a branch or
        // loop body keeps its braces
        if !cx.in_list(s) || b.stmts.len() != 2 || !matches!(b.stmts[0].kind, StmtKind::LocalVar(_)) {
            continue;
        }
        let w = &b.stmts[1];
        if let Some(shape) = counting_shape(cx, w, Some(&b.stmts[0]), true) {
            if shape.init.is_some() {
                handled.insert(w.span);
                let (pieces, drop_update) = for_pieces(w, Some(&shape));
                plan.site(Edit::new(s.span, pieces));
                plan.edits.extend(drop_update);
            }
        }
    }
    for s in all_stmts(cx) {
        if !matches!(s.kind, StmtKind::While { .. }) || handled.contains(&s.span) {
            continue;
        }
        let prev = cx.position(s).and_then(|(list, i)| i.checked_sub(1).map(|p| &list[p]));
        let shape = counting_shape(cx, s, prev, false);
        let start = match shape.as_ref().and_then(|c| c.init) {
            Some(init) => init.span.start,
            None => s.span.start,
        };
        let (pieces, drop_update) = for_pieces(s, shape.as_ref());
        plan.site(Edit::new(Span::new(start, s.span.end), pieces));
        plan.edits.extend(drop_update);
    }
    plan
}

pub(crate) fn else_if_to_if(cx: &Ctx) -> Plan {
    let mut plan = Plan::default();
    for s in all_stmts(cx) {
        if let StmtKind::If { else_branch: Some(e), .. } = &s.kind {
            if matches!(e.kind, StmtKind::If { .. }) {
                plan.site(Edit::new(e.span, vec![text("{ "), Piece::Source(e.span), text(" }")]));
            }
        }
    }
    plan
}

fn declared_in(stmts: &[Stmt]) -> Vec<&str> {
    stmts
        .iter()
        .filter_map(|s| match &s.kind {
            StmtKind::LocalVar(d) => Some(d.declarators.iter().map(|x| x.name.name.as_str())),
            _ => None,
        })
        .flatten()
        .collect()
}

pub(crate) fn switch_to_if(cx: &Ctx) -> Plan {
    let mut plan = Plan::default();
    'sites: for s in all_stmts(cx) {
        let StmtKind::Switch { selector, groups, .. } = &s.kind else { continue };
        if groups.is_empty() || !is_pure(selector) {
            continue;
        }
        let ty = cx.env_at(s.span.start).type_of(selector, cx.src);
        let is_string = ty.as_deref() == Some("String");
        let known = ty.as_deref().is_some_and(|t| is_numeric(t) || t == "String");
        let last = groups.len() - 1;
        // (conditions, kept statements) per group
        let mut arms: Vec<(Vec<String>, &[Stmt])> = Vec::new();
        for (gi, g) in groups.iter().enumerate() {
            let has_default = g.labels.iter().any(|l| l.value.is_none());
            if has_default && (gi != last || g.labels.len() > 1) {
                continue 'sites;
            }
            let mut conds = Vec::new();
            for l in &g.labels {
                let Some(v) = &l.value else { continue };
                let ok = match &v.kind {
                    ExprKind::Literal(_) | ExprKind::FieldAccess { .. } => true,
                    ExprKind::Name(_) => known,
                    _ => known && is_pure(v),
                };
                if !ok {
                    continue 'sites;
                }
                let vt = cx.text(v.span);
                let sel = cx.text(selector.span);
                conds.push(if is_string {
                    let sel = if selector.precedence() < PREC_PRIMARY { format!("({sel})") } else { sel.to_string() };
                    format!("{sel}.equals({vt})")
                } else {
                    let sel = if selector.precedence() <= BinaryOp::Eq.precedence() {
                        format!("({sel})")
                    } else {
                        sel.to_string()
                    };
                    let vt = if v.precedence() <= BinaryOp::Eq.precedence() { format!("({vt})") } else { vt.to_string() };
                    format!("{sel} == {vt}")
                });
            }
            let kept: &[Stmt] = if g.arrow {
                if g.stmts.iter().any(|x| has_break(x, false)) {
                    continue 'sites;
                }
                &g.stmts
            } else {
                let terminal = g.stmts.last().map(|x| &x.kind);
                let body = match terminal {
                    Some(StmtKind::Break(None)) => &g.stmts[..g.stmts.len() - 1],
                    Some(StmtKind::Return(_) | StmtKind::Throw(_) | StmtKind::Continue(_)) => &g.stmts[..],
                    _ if gi == last => &g.stmts[..],
                    _ => continue 'sites,
                };
                if body.iter().any(|x| has_break(x, false)) {
                    continue 'sites;
                }
                body
            };
            arms.push((conds, kept));
        }
        // locals declared in one case and used in another share the switch scope
        if !groups.iter().all(|g| g.arrow) {
            for (i, g) in groups.iter().enumerate() {
                let names = declared_in(&g.stmts);
                for (j, h) in groups.iter().enumerate() {
                    if i != j
                        && h.stmts.iter().any(|x| {
                            cx.tree.tokens().iter().any(|t| {
                                x.span.contains(t.span) && t.kind == TokenKind::Ident && names.contains(&cx.text(t.span))
                            })
                        })
                    {
                        continue 'sites;
                    }
                }
            }
        }
        let indent = cx.indent_at(s.span.start).to_string();
        let unit = cx.unit();
        let mut pieces = Vec::new();
        for (k, (conds, kept)) in arms.iter().enumerate() {
            if k > 0 {
                pieces.push(text(" else "));
            }
            if !conds.is_empty() {
                pieces.push(text(format!("if ({}) ", conds.join(" || "))));
            }
            match (kept.first(), kept.last()) {
                (Some(only), _) if kept.len() == 1 && matches!(only.kind, StmtKind::Block(_)) => {
                    pieces.push(Piece::Source(only.span))
                }
                (None, _) | (_, None) => pieces.push(text(format!("{{\n{indent}}}"))),
                (Some(first), Some(last_stmt)) => {
                    let inner = cx.indent_at(first.span.start);
                    let inner = if inner.len() > indent.len() { inner.to_string() } else { format!("{indent}{unit}") };
                    pieces.push(text(format!("{{\n{inner}")));
                    pieces.push(src(first.span.start, last_stmt.span.end));
                    pieces.push(text(format!("\n{indent}}}")));
                }
            }
        }
        plan.site(Edit::new(s.span, pieces));
    }
    plan
}

#[derive(Default)]
struct Effects<'a> {
    reads: HashSet<&'a str>,
    writes: HashSet<&'a str>,
}

const HEAP: &str = "<heap>";

/// Read/write sets of a simple statement; `None` when it has effects we
/// cannot track (impure calls, object allocation, control flow).
fn effects(s: &Stmt) -> Option<Effects<'_>> {
    let mut fx = Effects::default();
    let exprs: Vec<&Expr> = match &s.kind {
        StmtKind::LocalVar(d) => {
            fx.writes.extend(d.declarators.iter().map(|x| x.name.name.as_str()));
            d.declarators.iter().filter_map(|x| x.init.as_ref()).collect()
        }
        StmtKind::Expr(e) => vec![e],
        _ => return None,
    };
    for e in exprs {
        for x in visit::exprs_in_expr(e) {
            match &x.kind {
                ExprKind::Name(id) => {
                    fx.reads.insert(&id.name);
                }
                ExprKind::FieldAccess { .. } | ExprKind::Index { .. } => {
                    fx.reads.insert(HEAP);
                }
                ExprKind::MethodCall { .. } => {
                    if !is_pure(x) {
                        return None;
                    }
                    fx.reads.insert(HEAP);
                }
                ExprKind::New { .. } | ExprKind::Lambda { .. } => return None,
                ExprKind::Assign { target, .. } => heap_write(&mut fx, target),
                ExprKind::Unary { op, operand, .. } if op.is_inc_dec() => heap_write(&mut fx, operand),
                _ => {}
            }
        }
        fx.writes.extend(written_names(e));
    }
    Some(fx)
}

fn heap_write(fx: &mut Effects, target: &Expr) {
    if !matches!(target.unparen().kind, ExprKind::Name(_)) {
        fx.writes.insert(HEAP);
    }
}

pub(crate) fn swap_statement(cx: &Ctx) -> Plan {
    let mut plan = Plan::default();
    let independent = |a: &Stmt, b: &Stmt| -> bool {
        let (Some(x), Some(y)) = (effects(a), effects(b)) else { return false };
        squash(cx.text(a.span)) != squash(cx.text(b.span))
            && x.writes.iter().all(|w| !y.reads.contains(w) && !y.writes.contains(w))
            && y.writes.iter().all(|w| !x.reads.contains(w))
            && cx.text(Span::new(a.span.end, b.span.start)).trim().is_empty()
    };
    for list in visit::stmt_lists(cx.tree.unit()) {
        let mut i = 0;
        while i + 1 < list.len() {
            let (a, b) = (&list[i], &list[i + 1]);
            if independent(a, b) {
                plan.site(Edit::new(
                    Span::new(a.span.start, b.span.end),
                    vec![Piece::Source(b.span), src(a.span.end, b.span.start), Piece::Source(a.span)],
                ));
                i += 2;
            } else {
                i += 1;
            }
        }
    }
    plan
}

fn braced(s: &Stmt) -> Vec<Piece> {
    if matches!(s.kind, StmtKind::Block(_)) {
        vec![Piece::Source(s.span)]
    } else {
        vec![text("{ "), Piece::Source(s.span), text(" }")]
    }
}

pub(crate) fn reverse_if(cx: &Ctx) -> Plan {
    let mut plan = Plan::default();
    for s in all_stmts(cx) {
        let StmtKind::If { cond, then_branch, else_branch: Some(else_branch) } = &s.kind else { continue };
        let mut pieces = vec![src(s.span.start, cond.span.start)];
        if let Some(inner) = is_negation(cond) {
            pieces.push(Piece::Source(inner.span));
        } else if cond.precedence() >= PREC_PRIMARY {
            pieces.extend([text("!"), Piece::Source(cond.span)]);
        } else {
            pieces.extend([text("!("), Piece::Source(cond.span), text(")")]);
        }
        pieces.push(src(cond.span.end, then_branch.span.start));
        pieces.extend(braced(else_branch));
        pieces.push(src(then_branch.span.end, else_branch.span.start));
        pieces.push(Piece::Source(then_branch.span));
        plan.site(Edit::new(s.span, pieces));
    }
    plan
}

fn single(s: &Stmt) -> Option<&Stmt> {
    match &s.kind {
        StmtKind::Block(b) if b.stmts.len() == 1 => Some(&b.stmts[0]),
        StmtKind::Block(_) => None,
        _ => Some(s),
    }
}

fn conditional_pieces(cond: &Expr, a: &Expr, b: &Expr) -> Vec<Piece> {
    let mut p = operand(cond, cond.precedence() <= PREC_CONDITIONAL);
    p.push(text(" ? "));
    p.extend(operand(a, a.precedence() <= PREC_ASSIGN));
    p.push(text(" : "));
    p.extend(operand(b, b.precedence() <= PREC_ASSIGN));
    p
}

pub(crate) fn if_to_cond_exp(cx: &Ctx) -> Plan {
    let mut plan = Plan::default();
    for s in all_stmts(cx) {
        let StmtKind::If { cond, then_branch, else_branch: Some(else_branch) } = &s.kind else { continue };
        let (Some(x), Some(y)) = (single(then_branch), single(else_branch)) else { continue };
        let pieces = match (&x.kind, &y.kind) {
            (StmtKind::Expr(e1), StmtKind::Expr(e2)) => {
                let (
                    ExprKind::Assign { op: o1, target: t1, value: v1, .. },
                    ExprKind::Assign { op: o2, target: t2, value: v2, .. },
                ) = (&e1.kind, &e2.kind)
                else {
                    continue;
                };
                if o1 != o2 || squash(cx.text(t1.span)) != squash(cx.text(t2.span)) || !is_pure(t1) {
                    continue;
                }
                let mut p = vec![Piece::Source(t1.span), text(format!(" {} ", o1.as_str()))];
                p.extend(conditional_pieces(cond, v1, v2));
                p.push(text(";"));
                p
            }
            (StmtKind::Return(Some(a)), StmtKind::Return(Some(b))) => {
                let mut p = vec![text("return ")];
                p.extend(conditional_pieces(cond, a, b));
                p.push(text(";"));
                p
            }
            _ => continue,
        };
        plan.site(Edit::new(s.span, pieces));
    }
    plan
}

pub(crate) fn cond_exp_to_if(cx: &Ctx) -> Plan {
    let mut plan = Plan::default();
    for s in all_stmts(cx) {
        let indent = cx.indent_at(s.span.start).to_string();
        let inner = format!("{indent}{}", cx.unit());
        let branches = |c: &Expr, head: Vec<Piece>, a: &Expr, b: &Expr, tail_a: Vec<Piece>, tail_b: Vec<Piece>| {
            let mut p = head;
            p.push(text("if ("));
            p.push(Piece::Source(c.span));
            p.push(text(format!(") {{\n{inner}")));
            p.extend(tail_a);
            p.push(Piece::Source(a.span));
            p.push(text(format!(";\n{indent}}} else {{\n{inner}")));
            p.extend(tail_b);
            p.push(Piece::Source(b.span));
            p.push(text(format!(";\n{indent}}}")));
            p
        };
        let pieces = match &s.kind {
            StmtKind::Expr(Expr { kind: ExprKind::Assign { op, target, value, .. }, .. }) => {
                let ExprKind::Conditional { cond, then_expr, else_expr } = &value.unparen().kind else { continue };
                if !is_pure(target) {
                    continue;
                }
                let t = cx.text(target.span);
                let lhs = format!("{t} {} ", op.as_str());
                branches(cond, vec![], then_expr, else_expr, vec![text(lhs.clone())], vec![text(lhs)])
            }
            StmtKind::Return(Some(e)) => {
                let ExprKind::Conditional { cond, then_expr, else_expr } = &e.unparen().kind else { continue };
                branches(cond, vec![], then_expr, else_expr, vec![text("return ")], vec![text("return ")])
            }
            StmtKind::LocalVar(d) if d.declarators.len() == 1 && cx.in_list(s) && !d.ty.is_var() => {
                let dec = &d.declarators[0];
                let Some(init) = &dec.init else { continue };
                let ExprKind::Conditional { cond, then_expr, else_expr } = &init.unparen().kind else { continue };
                let head = vec![
                    src(s.span.start, dec.name.span.end),
                    text(format!("{};\n{indent}", "[]".repeat(dec.extra_dims))),
                ];
                let lhs = format!("{} = ", dec.name.name);
                branches(cond, head, then_expr, else_expr, vec![text(lhs.clone())], vec![text(lhs)])
            }
            _ => continue,
        };
        plan.site(Edit::new(s.span, pieces));
    }
    plan
}

pub(crate) fn dividing_composed_if(cx: &Ctx) -> Plan {
    let mut plan = Plan::default();
    let conds: Vec<Span> = all_stmts(cx)
        .into_iter()
        .filter_map(|s| match &s.kind {
            StmtKind::If { cond, .. } => Some(cond.span),
            _ => None,
        })
        .collect();
    // splitting re-indents the branch, so sites inside it wait for the next pass
    let and_bodies: Vec<Span> = all_stmts(cx)
        .into_iter()
        .filter_map(|s| match &s.kind {
            StmtKind::If { cond, then_branch, else_branch: None }
                if matches!(cond.unparen().kind, ExprKind::Binary { op: BinaryOp::And, .. }) =>
            {
                Some(then_branch.span)
            }
            _ => None,
        })
        .collect();
    for s in all_stmts(cx) {
        let StmtKind::If { cond, then_branch, else_branch } = &s.kind else { continue };
        let ExprKind::Binary { op, lhs, rhs, .. } = &cond.unparen().kind else { continue };
        if and_bodies.iter().any(|b| b.contains(s.span)) {
            continue;
        }
        let indent = cx.indent_at(s.span.start).to_string();
        match op {
            BinaryOp::And if else_branch.is_none() => {
                // the nested branch moves one level in
                let body = then_branch.span;
                for (k, _) in cx.src[body.start..body.end].match_indices('\n') {
                    let ls = body.start + k + 1;
                    let blank = cx.src[ls..].chars().take_while(|c| *c != '\n').all(char::is_whitespace);
                    if !blank && !conds.iter().any(|c| c.start < ls && ls < c.end) {
                        plan.edits.push(Edit::insert(ls, cx.unit().to_string()));
                    }
                }
                plan.site(Edit::new(
                    s.span,
                    vec![
                        src(s.span.start, cond.span.start),
                        Piece::Source(lhs.span),
                        text(format!(") {{\n{indent}{}if (", cx.unit())),
                        Piece::Source(rhs.span),
                        src(cond.span.end, s.span.end),
                        text(format!("\n{indent}}}")),
                    ],
                ));
            }
            BinaryOp::Or if matches!(then_branch.kind, StmtKind::Block(_)) => {
                plan.site(Edit::new(
                    s.span,
                    vec![
                        src(s.span.start, cond.span.start),
                        Piece::Source(lhs.span),
                        src(cond.span.end, then_branch.span.end),
                        text(" else if ("),
                        Piece::Source(rhs.span),
                        text(") "),
                        text(cx.text(then_branch.span)),
                        src(then_branch.span.end, s.span.end),
                    ],
                ));
            }
            _ => {}
        }
    }
    plan
}
