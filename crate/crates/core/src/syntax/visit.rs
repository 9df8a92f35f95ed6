//! Read-only traversal over the syntax tree.
//!
//! Override the `visit_*` hooks you care about and call the matching `walk_*`
//! function to keep descending.

use super::ast::*;

pub trait Visit<'a> {
    fn visit_class(&mut self, class: &'a ClassDecl) {
        walk_class(self, class);
    }

    fn visit_method(&mut self, method: &'a MethodDecl) {
        walk_method(self, method);
    }

    fn visit_block(&mut self, block: &'a Block) {
        walk_block(self, block);
    }

    /// Called for every statement sequence: block bodies and switch groups.
    fn visit_stmt_list(&mut self, stmts: &'a [Stmt]) {
        for s in stmts {
            self.visit_stmt(s);
        }
    }

    fn visit_stmt(&mut self, stmt: &'a Stmt) {
        walk_stmt(self, stmt);
    }

    fn visit_expr(&mut self, expr: &'a Expr) {
        walk_expr(self, expr);
    }
}

pub fn walk_unit<'a, V: Visit<'a> + ?Sized>(v: &mut V, unit: &'a CompilationUnit) {
    walk_members(v, &unit.members);
}

pub fn walk_members<'a, V: Visit<'a> + ?Sized>(v: &mut V, members: &'a [Member]) {
    for m in members {
        match m {
            Member::Field(f) => {
                for d in &f.declarators {
                    if let Some(init) = &d.init {
                        v.visit_expr(init);
                    }
                }
            }
            Member::Method(md) => v.visit_method(md),
            Member::Class(c) => v.visit_class(c),
            Member::Initializer(b) => v.visit_block(b),
        }
    }
}

pub fn walk_class<'a, V: Visit<'a> + ?Sized>(v: &mut V, class: &'a ClassDecl) {
    walk_members(v, &class.members);
}

pub fn walk_method<'a, V: Visit<'a> + ?Sized>(v: &mut V, method: &'a MethodDecl) {
    if let Some(body) = &method.body {
        v.visit_block(body);
    }
}

pub fn walk_block<'a, V: Visit<'a> + ?Sized>(v: &mut V, block: &'a Block) {
    v.visit_stmt_list(&block.stmts);
}

pub fn walk_local<'a, V: Visit<'a> + ?Sized>(v: &mut V, decl: &'a LocalVarDecl) {
    for d in &decl.declarators {
        if let Some(init) = &d.init {
            v.visit_expr(init);
        }
    }
}

pub fn walk_stmt<'a, V: Visit<'a> + ?Sized>(v: &mut V, stmt: &'a Stmt) {
    match &stmt.kind {
        StmtKind::Block(b) => v.visit_block(b),
        StmtKind::LocalVar(d) => walk_local(v, d),
        StmtKind::LocalClass(c) => v.visit_class(c),
        StmtKind::Expr(e) | StmtKind::Throw(e) => v.visit_expr(e),
        StmtKind::If { cond, then_branch, else_branch } => {
            v.visit_expr(cond);
            v.visit_stmt(then_branch);
            if let Some(e) = else_branch {
                v.visit_stmt(e);
            }
        }
        StmtKind::While { cond, body } => {
            v.visit_expr(cond);
            v.visit_stmt(body);
        }
        StmtKind::DoWhile { body, cond } => {
            v.visit_stmt(body);
            v.visit_expr(cond);
        }
        StmtKind::For { init, cond, update, body, .. } => {
            match init {
                Some(ForInit::Decl(d)) => walk_local(v, d),
                Some(ForInit::Exprs(es)) => es.iter().for_each(|e| v.visit_expr(e)),
                None => {}
            }
            if let Some(c) = cond {
                v.visit_expr(c);
            }
            update.iter().for_each(|e| v.visit_expr(e));
            v.visit_stmt(body);
        }
        StmtKind::ForEach { iterable, body, .. } => {
            v.visit_expr(iterable);
            v.visit_stmt(body);
        }
        StmtKind::Switch { selector, groups, .. } => {
            v.visit_expr(selector);
            for g in groups {
                for l in &g.labels {
                    if let Some(val) = &l.value {
                        v.visit_expr(val);
                    }
                }
                v.visit_stmt_list(&g.stmts);
            }
        }
        StmtKind::Return(e) => {
            if let Some(e) = e {
                v.visit_expr(e);
            }
        }
        StmtKind::Try { block, catches, finally, .. } => {
            v.visit_block(block);
            for c in catches {
                v.visit_block(&c.block);
            }
            if let Some(f) = finally {
                v.visit_block(f);
            }
        }
        StmtKind::Labeled { body, .. } => v.visit_stmt(body),
        StmtKind::Synchronized { lock, block } => {
            v.visit_expr(lock);
            v.visit_block(block);
        }
        StmtKind::Assert { cond, message } => {
            v.visit_expr(cond);
            if let Some(m) = message {
                v.visit_expr(m);
            }
        }
        StmtKind::Break(_) | StmtKind::Continue(_) | StmtKind::Empty => {}
    }
}

pub fn walk_expr<'a, V: Visit<'a> + ?Sized>(v: &mut V, expr: &'a Expr) {
    for child in expr_children(expr) {
        v.visit_expr(child);
    }
    match &expr.kind {
        ExprKind::New { body: Some(members), .. } => walk_members(v, members),
        ExprKind::Lambda { body: LambdaBody::Block(b), .. } => v.visit_block(b),
        _ => {}
    }
}

/// Direct sub-expressions in source order.
pub fn expr_children(expr: &Expr) -> Vec<&Expr> {
    match &expr.kind {
        ExprKind::Literal(_)
        | ExprKind::Name(_)
        | ExprKind::This
        | ExprKind::Super
        | ExprKind::ClassLit(_) => vec![],
        ExprKind::FieldAccess { target, .. } => vec![target],
        ExprKind::MethodCall { target, args, .. } => {
            target.iter().map(|t| &**t).chain(args.iter()).collect()
        }
        ExprKind::New { args, .. } => args.iter().collect(),
        ExprKind::NewArray { dims, init, .. } => dims.iter().chain(init.iter().map(|b| &**b)).collect(),
        ExprKind::ArrayInit(items) => items.iter().collect(),
        ExprKind::Index { array, index } => vec![array, index],
        ExprKind::Unary { operand, .. } => vec![operand],
        ExprKind::Binary { lhs, rhs, .. } => vec![lhs, rhs],
        ExprKind::Assign { target, value, .. } => vec![target, value],
        ExprKind::Conditional { cond, then_expr, else_expr } => vec![cond, then_expr, else_expr],
        ExprKind::Cast { expr, .. } | ExprKind::InstanceOf { expr, .. } | ExprKind::Paren(expr) => vec![expr],
        ExprKind::Lambda { body, .. } => match body {
            LambdaBody::Expr(e) => vec![e],
            LambdaBody::Block(_) => vec![],
        },
        ExprKind::MethodRef { target, .. } => vec![target],
    }
}

/// Direct child statements (bodies and branches, not nested blocks' contents).
pub fn stmt_children(stmt: &Stmt) -> Vec<&Stmt> {
    match &stmt.kind {
        StmtKind::Block(b) => b.stmts.iter().collect(),
        StmtKind::If { then_branch, else_branch, .. } => {
            std::iter::once(&**then_branch).chain(else_branch.iter().map(|b| &**b)).collect()
        }
        StmtKind::While { body, .. }
        | StmtKind::DoWhile { body, .. }
        | StmtKind::For { body, .. }
        | StmtKind::ForEach { body, .. }
        | StmtKind::Labeled { body, .. } => vec![body],
        StmtKind::Switch { groups, .. } => groups.iter().flat_map(|g| g.stmts.iter()).collect(),
        StmtKind::Try { block, catches, finally, .. } => block
            .stmts
            .iter()
            .chain(catches.iter().flat_map(|c| c.block.stmts.iter()))
            .chain(finally.iter().flat_map(|f| f.stmts.iter()))
            .collect(),
        StmtKind::Synchronized { block, .. } => block.stmts.iter().collect(),
        _ => vec![],
    }
}

/// Collects every expression node (pre-order) under a statement, without
/// entering local or anonymous class bodies.
pub fn exprs_in_stmt(stmt: &Stmt) -> Vec<&Expr> {
    struct Collect<'a>(Vec<&'a Expr>);
    impl<'a> Visit<'a> for Collect<'a> {
        fn visit_class(&mut self, _: &'a ClassDecl) {}
        fn visit_expr(&mut self, e: &'a Expr) {
            self.0.push(e);
            for c in expr_children(e) {
                self.visit_expr(c);
            }
        }
    }
    let mut c = Collect(Vec::new());
    c.visit_stmt(stmt);
    c.0
}

/// Every expression node (pre-order) under an expression, including itself.
pub fn exprs_in_expr(expr: &Expr) -> Vec<&Expr> {
    let mut out = vec![expr];
    let mut i = 0;
    while i < out.len() {
        let kids = expr_children(out[i]);
        out.extend(kids);
        i += 1;
    }
    out.sort_by_key(|e| (e.span.start, std::cmp::Reverse(e.span.end)));
    out
}

/// Every statement (pre-order) under `stmt`, including itself.
pub fn stmts_in(stmt: &Stmt) -> Vec<&Stmt> {
    let mut out = Vec::new();
    fn go<'a>(s: &'a Stmt, out: &mut Vec<&'a Stmt>) {
        out.push(s);
        for c in stmt_children(s) {
            go(c, out);
        }
    }
    go(stmt, &mut out);
    out
}

/// Every statement list in the unit (block bodies and switch groups), in source order.
pub fn stmt_lists(unit: &CompilationUnit) -> Vec<&[Stmt]> {
    struct Lists<'a>(Vec<&'a [Stmt]>);
    impl<'a> Visit<'a> for Lists<'a> {
        fn visit_stmt_list(&mut self, stmts: &'a [Stmt]) {
            self.0.push(stmts);
            for s in stmts {
                self.visit_stmt(s);
            }
        }
    }
    let mut l = Lists(Vec::new());
    walk_unit(&mut l, unit);
    l.0
}

/// Every statement in the unit, pre-order.
pub fn all_stmts(unit: &CompilationUnit) -> Vec<&Stmt> {
    struct All<'a>(Vec<&'a Stmt>);
    impl<'a> Visit<'a> for All<'a> {
        fn visit_stmt(&mut self, s: &'a Stmt) {
            self.0.push(s);
            walk_stmt(self, s);
        }
    }
    let mut a = All(Vec::new());
    walk_unit(&mut a, unit);
    a.0
}

/// Every expression in the unit, pre-order.
pub fn all_exprs(unit: &CompilationUnit) -> Vec<&Expr> {
    struct All<'a>(Vec<&'a Expr>);
    impl<'a> Visit<'a> for All<'a> {
        fn visit_expr(&mut self, e: &'a Expr) {
            self.0.push(e);
            walk_expr(self, e);
        }
    }
    let mut a = All(Vec::new());
    walk_unit(&mut a, unit);
    a.0
}

/// Names read or written by an expression tree. Method names and field
/// selectors are not variables and are skipped.
pub fn names_in_expr(expr: &Expr) -> Vec<&str> {
    exprs_in_expr(expr)
        .into_iter()
        .filter_map(|e| match &e.kind {
            ExprKind::Name(id) => Some(id.name.as_str()),
            _ => None,
        })
        .collect()
}

/// True if `stmt` or any statement below it satisfies `pred`, not entering
/// nested class bodies.
pub fn any_stmt(stmt: &Stmt, pred: &mut dyn FnMut(&Stmt) -> bool) -> bool {
    stmts_in(stmt).into_iter().any(|s| pred(s))
}
