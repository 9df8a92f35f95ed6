//! Declared-type lookup for variables, good enough to guard rewrites that
//! depend on numeric vs. string vs. narrow integral operands.

use super::ast::*;
use super::visit::{self, Visit};
use super::SyntaxTree;
use std::collections::HashMap;

const NUMERIC: &[&str] = &[
    "byte", "short", "char", "int", "long", "float", "double", "Byte", "Short", "Character", "Integer",
    "Long", "Float", "Double",
];

pub fn is_numeric(ty: &str) -> bool {
    NUMERIC.contains(&ty)
}

/// Types whose compound assignments carry an implicit narrowing cast.
pub fn is_narrow(ty: &str) -> bool {
    matches!(ty, "byte" | "short" | "char" | "Byte" | "Short" | "Character")
}

pub fn is_integral(ty: &str) -> bool {
    matches!(ty, "byte" | "short" | "char" | "int" | "long" | "Byte" | "Short" | "Character" | "Integer" | "Long")
}

/// Variable name → declared type text within one method plus the fields of
/// every class in the unit. Locals shadow fields; the first local
/// declaration of a name wins.
#[derive(Debug, Clone, Default)]
pub struct TypeEnv {
    vars: HashMap<String, String>,
}

impl TypeEnv {
    pub fn for_method(tree: &SyntaxTree, method: Option<&MethodDecl>) -> Self {
        let mut env = TypeEnv::default();
        for class in tree.classes() {
            for m in &class.members {
                if let Member::Field(f) = m {
                    for d in &f.declarators {
                        env.vars.insert(d.name.name.clone(), with_dims(&f.ty.text, d.extra_dims));
                    }
                }
            }
        }
        for m in &tree.unit().members {
            if let Member::Field(f) = m {
                for d in &f.declarators {
                    env.vars.insert(d.name.name.clone(), with_dims(&f.ty.text, d.extra_dims));
                }
            }
        }
        if let Some(method) = method {
            let mut locals = HashMap::new();
            for p in &method.params {
                let ty = if p.varargs { format!("{}[]", p.ty.text) } else { p.ty.text.clone() };
                locals.entry(p.name.name.clone()).or_insert(ty);
            }
            struct Locals<'m>(&'m mut HashMap<String, String>);
            impl<'a, 'm> Visit<'a> for Locals<'m> {
                fn visit_class(&mut self, _: &'a ClassDecl) {}
                fn visit_stmt(&mut self, s: &'a Stmt) {
                    match &s.kind {
                        StmtKind::LocalVar(d) => self.decl(d),
                        StmtKind::For { init: Some(ForInit::Decl(d)), .. } => self.decl(d),
                        StmtKind::ForEach { var_ty, var_name, .. } => {
                            self.0.entry(var_name.name.clone()).or_insert_with(|| var_ty.text.clone());
                        }
                        _ => {}
                    }
                    visit::walk_stmt(self, s);
                }
            }
            impl Locals<'_> {
                fn decl(&mut self, d: &LocalVarDecl) {
                    for dec in &d.declarators {
                        self.0
                            .entry(dec.name.name.clone())
                            .or_insert_with(|| with_dims(&d.ty.text, dec.extra_dims));
                    }
                }
            }
            Locals(&mut locals).visit_method(method);
            env.vars.extend(locals);
        }
        env
    }

    /// Environment for the innermost method enclosing `offset`.
    pub fn at(tree: &SyntaxTree, offset: usize) -> Self {
        let method = tree
            .methods()
            .into_iter()
            .filter(|m| m.span.start <= offset && offset < m.span.end)
            .min_by_key(|m| m.span.len());
        Self::for_method(tree, method)
    }

    pub fn var(&self, name: &str) -> Option<&str> {
        self.vars.get(name).map(String::as_str)
    }

    /// Best-effort static type of an expression; `None` when unknown.
    pub fn type_of(&self, expr: &Expr, source: &str) -> Option<String> {
        match &expr.kind {
            ExprKind::Literal(kind) => {
                let text = expr.span.slice(source);
                Some(
                    match kind {
                        LitKind::Int if text.ends_with(['l', 'L']) => "long",
                        LitKind::Int => "int",
                        LitKind::Float if text.ends_with(['f', 'F']) => "float",
                        LitKind::Float => "double",
                        LitKind::Char => "char",
                        LitKind::String => "String",
                        LitKind::Bool => "boolean",
                        LitKind::Null => return None,
                    }
                    .to_string(),
                )
            }
            ExprKind::Name(id) => self.var(&id.name).map(str::to_string),
            ExprKind::Paren(e) => self.type_of(e, source),
            ExprKind::Cast { ty, .. } => Some(ty.text.clone()),
            ExprKind::Index { array, .. } => {
                let t = self.type_of(array, source)?;
                t.strip_suffix("[]").map(str::to_string)
            }
            ExprKind::FieldAccess { target, name } => {
                if name.name == "length" {
                    if let Some(t) = self.type_of(target, source) {
                        if t.ends_with("[]") {
                            return Some("int".into());
                        }
                    }
                }
                if matches!(target.kind, ExprKind::This) {
                    return self.var(&name.name).map(str::to_string);
                }
                match (target.as_name(), name.name.as_str()) {
                    (Some("Integer"), "MAX_VALUE" | "MIN_VALUE") => Some("int".into()),
                    (Some("Long"), "MAX_VALUE" | "MIN_VALUE") => Some("long".into()),
                    _ => None,
                }
            }
            ExprKind::MethodCall { target, name, .. } => {
                let recv = target.as_ref().and_then(|t| self.type_of(t, source));
                match (recv.as_deref(), name.name.as_str()) {
                    (Some("String"), "length" | "indexOf" | "compareTo" | "lastIndexOf") => Some("int".into()),
                    (Some("String"), "charAt") => Some("char".into()),
                    (Some("String"), "substring" | "trim" | "toUpperCase" | "toLowerCase" | "concat") => {
                        Some("String".into())
                    }
                    (Some("String"), "equals" | "isEmpty" | "contains" | "startsWith" | "endsWith") => {
                        Some("boolean".into())
                    }
                    (_, "size") => Some("int".into()),
                    _ => None,
                }
            }
            ExprKind::Unary { op, operand, .. } => match op {
                UnaryOp::Not => Some("boolean".into()),
                _ => self.type_of(operand, source).map(|t| promote_unary(&t)),
            },
            ExprKind::Binary { op, lhs, rhs, .. } => {
                if op.is_relational() || op.is_equality() || op.is_logical() {
                    return Some("boolean".into());
                }
                let l = self.type_of(lhs, source);
                let r = self.type_of(rhs, source);
                if *op == BinaryOp::Add && (l.as_deref() == Some("String") || r.as_deref() == Some("String")) {
                    return Some("String".into());
                }
                match (l, r) {
                    (Some(l), Some(r)) if is_numeric(&l) && is_numeric(&r) => Some(binary_promote(&l, &r)),
                    (Some(l), Some(r)) if l == "boolean" && r == "boolean" => Some("boolean".into()),
                    _ => None,
                }
            }
            ExprKind::Assign { target, .. } => self.type_of(target, source),
            ExprKind::Conditional { then_expr, else_expr, .. } => {
                self.type_of(then_expr, source).or_else(|| self.type_of(else_expr, source))
            }
            ExprKind::InstanceOf { .. } => Some("boolean".into()),
            ExprKind::New { ty, .. } => Some(ty.text.clone()),
            ExprKind::NewArray { elem, dims, extra_dims, .. } => {
                Some(format!("{}{}", elem.text, "[]".repeat(dims.len() + extra_dims)))
            }
            _ => None,
        }
    }
}

fn with_dims(base: &str, extra: usize) -> String {
    format!("{base}{}", "[]".repeat(extra))
}

fn unbox(t: &str) -> &str {
    match t {
        "Byte" => "byte",
        "Short" => "short",
        "Character" => "char",
        "Integer" => "int",
        "Long" => "long",
        "Float" => "float",
        "Double" => "double",
        other => other,
    }
}

fn promote_unary(t: &str) -> String {
    match unbox(t) {
        "byte" | "short" | "char" => "int".into(),
        other => other.to_string(),
    }
}

fn binary_promote(l: &str, r: &str) -> String {
    let rank = |t: &str| match unbox(t) {
        "double" => 4,
        "float" => 3,
        "long" => 2,
        _ => 1,
    };
    match rank(l).max(rank(r)) {
        4 => "double",
        3 => "float",
        2 => "long",
        _ => "int",
    }
    .to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    #[test]
    fn types_of_locals_and_arithmetic() {
        let src = "class A { int f(int a, long b, String s) { short c = 1; int[] xs = new int[3]; return a; } }";
        let tree = parse(src).unwrap();
        let env = TypeEnv::at(&tree, src.find("return").unwrap());
        assert_eq!(env.var("a"), Some("int"));
        assert_eq!(env.var("c"), Some("short"));
        assert_eq!(env.var("xs"), Some("int[]"));
        assert_eq!(env.var("s"), Some("String"));
        let t2 = parse("class B { Object o = a + b; Object p = s + a; Object q = xs[0]; }").unwrap();
        let vals: Vec<_> = visit::all_exprs(t2.unit())
            .into_iter()
            .filter(|e| matches!(e.kind, ExprKind::Binary { .. } | ExprKind::Index { .. }))
            .map(|e| env.type_of(e, t2.source()))
            .collect();
        assert_eq!(vals, [Some("long".into()), Some("String".into()), Some("int".into())]);
    }
}
