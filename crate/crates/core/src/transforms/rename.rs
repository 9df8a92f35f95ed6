//! Local-variable renaming with pluggable name providers.

use super::rules::Plan;
use super::util::Ctx;
use crate::syntax::{visit, ClassDecl, Edit, Member, MethodDecl, Stmt, StmtKind, TokenKind};
use std::collections::{BTreeMap, HashMap, HashSet};

/// Proposes a replacement for a local variable name. `None` keeps the name.
pub trait NameProvider: Send + Sync {
    fn propose(&self, name: &str) -> Option<String>;
}

/// Shortens a name to its first letter.
#[derive(Debug, Clone, Copy, Default)]
pub struct FirstCharacter;

impl NameProvider for FirstCharacter {
    fn propose(&self, name: &str) -> Option<String> {
        let first = name.chars().find(|c| c.is_ascii_alphabetic())?;
        (name.len() > 1).then(|| first.to_string())
    }
}

/// Fixed substitution table standing in for a learned name model.
#[derive(Debug, Clone)]
pub struct SynonymTable {
    map: BTreeMap<String, String>,
}

const SYNONYMS: &[(&str, &str)] = &[
    ("a", "first"),
    ("ans", "answer"),
    ("answer", "ans"),
    ("arr", "array"),
    ("array", "arr"),
    ("b", "second"),
    ("c", "ch"),
    ("ch", "c"),
    ("cnt", "count"),
    ("count", "cnt"),
    ("flag", "found"),
    ("found", "flag"),
    ("i", "idx"),
    ("idx", "index"),
    ("index", "idx"),
    ("j", "jdx"),
    ("k", "kdx"),
    ("len", "length"),
    ("length", "len"),
    ("list", "lst"),
    ("lst", "list"),
    ("max", "maximum"),
    ("min", "minimum"),
    ("n", "size"),
    ("num", "number"),
    ("number", "num"),
    ("res", "result"),
    ("result", "res"),
    ("s", "str"),
    ("str", "text"),
    ("sum", "total"),
    ("temp", "tmp"),
    ("tmp", "temp"),
    ("total", "sum"),
    ("x", "value"),
    ("y", "other"),
];

impl Default for SynonymTable {
    fn default() -> Self {
        SynonymTable::from_pairs(SYNONYMS.iter().map(|(a, b)| (a.to_string(), b.to_string())))
    }
}

impl SynonymTable {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (String, String)>) -> Self {
        SynonymTable { map: pairs.into_iter().collect() }
    }
}

impl NameProvider for SynonymTable {
    fn propose(&self, name: &str) -> Option<String> {
        self.map.get(name).cloned()
    }
}

/// Locals and parameters of a method in declaration order.
fn locals(method: &MethodDecl) -> Vec<String> {
    let mut out: Vec<String> = method.params.iter().map(|p| p.name.name.clone()).collect();
    struct Collect<'o>(&'o mut Vec<String>);
    impl<'a> visit::Visit<'a> for Collect<'_> {
        fn visit_class(&mut self, _: &'a ClassDecl) {}
        fn visit_stmt(&mut self, s: &'a Stmt) {
            match &s.kind {
                StmtKind::LocalVar(d) | StmtKind::For { init: Some(crate::syntax::ForInit::Decl(d)), .. } => {
                    self.0.extend(d.declarators.iter().map(|x| x.name.name.clone()))
                }
                StmtKind::ForEach { var_name, .. } => self.0.push(var_name.name.clone()),
                StmtKind::Try { catches, .. } => self.0.extend(catches.iter().map(|c| c.param.name.clone())),
                _ => {}
            }
            visit::walk_stmt(self, s);
        }
    }
    visit::Visit::visit_method(&mut Collect(&mut out), method);
    let mut seen = HashSet::new();
    out.retain(|n| seen.insert(n.clone()));
    out
}

/// Names of fields, methods and types declared anywhere in the unit.
fn declared_names(cx: &Ctx) -> HashSet<String> {
    let mut out = HashSet::new();
    fn members(ms: &[Member], out: &mut HashSet<String>) {
        for m in ms {
            match m {
                Member::Field(f) => out.extend(f.declarators.iter().map(|d| d.name.name.clone())),
                Member::Method(md) => {
                    out.insert(md.name.name.clone());
                }
                Member::Class(c) => {
                    out.insert(c.name.name.clone());
                    members(&c.members, out);
                }
                Member::Initializer(_) => {}
            }
        }
    }
    members(&cx.tree.unit().members, &mut out);
    out
}

pub(crate) fn plan(cx: &Ctx, provider: &dyn NameProvider) -> Plan {
    let mut plan = Plan::default();
    let methods = cx.tree.methods();
    let outer: Vec<&MethodDecl> = methods
        .iter()
        .copied()
        .filter(|m| !methods.iter().any(|o| o.span != m.span && o.span.contains(m.span)))
        .collect();
    let declared = declared_names(cx);
    let tokens = cx.tree.tokens();
    for m in outer {
        let names = locals(m);
        let local_set: HashSet<&str> = names.iter().map(String::as_str).collect();
        let mut taken: HashSet<String> = declared.clone();
        taken.extend(
            tokens
                .iter()
                .filter(|t| t.kind == TokenKind::Ident && m.span.contains(t.span))
                .map(|t| cx.text(t.span))
                .filter(|n| !local_set.contains(n))
                .map(str::to_string),
        );
        let mut pending = Vec::new();
        for n in &names {
            match provider.propose(n) {
                Some(p) if p != *n && is_identifier(&p) => pending.push((n.as_str(), p)),
                _ => {
                    taken.insert(n.clone());
                }
            }
        }
        let mut renames: HashMap<&str, String> = HashMap::new();
        for (old, proposed) in pending {
            renames.insert(old, cx.fresh(&proposed, &mut taken));
        }
        if renames.is_empty() {
            continue;
        }
        plan.sites += renames.len();
        for (k, t) in tokens.iter().enumerate() {
            if t.kind != TokenKind::Ident || !m.span.contains(t.span) {
                continue;
            }
            let Some(new) = renames.get(cx.text(t.span)) else { continue };
            let prev = k.checked_sub(1).map(|p| cx.text(tokens[p].span));
            let next = tokens.get(k + 1).map(|n| cx.text(n.span));
            if matches!(prev, Some("." | "::")) || next == Some("(") {
                continue;
            }
            plan.edits.push(Edit::replace(t.span, new.clone()));
        }
    }
    plan
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '$')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '$')
        && !crate::syntax::lexer::is_keyword(s)
        && !matches!(s, "true" | "false" | "null" | "var" | "_")
}
