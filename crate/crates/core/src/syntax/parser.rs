//! Recursive-descent parser producing the span-annotated tree in [`super::ast`].

use super::ast::*;
use super::lexer::{Token, TokenKind};
use super::{ParseError, Span};

const MODIFIERS: &[&str] = &[
    "public", "protected", "private", "static", "final", "abstract", "native", "synchronized",
    "transient", "volatile", "strictfp", "default", "sealed", "non-sealed",
];

const PRIMITIVES: &[&str] = &["boolean", "byte", "char", "short", "int", "long", "float", "double", "void"];

const ASSIGN_OPS: &[&str] = &["=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>="];

pub fn parse_unit(src: &str, tokens: &[Token]) -> Result<CompilationUnit, ParseError> {
    let mut p = Parser { src, toks: tokens, pos: 0 };
    p.compilation_unit()
}

struct Parser<'a> {
    src: &'a str,
    toks: &'a [Token],
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl<'a> Parser<'a> {
    // ---- token helpers -------------------------------------------------

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn tok(&self, ahead: usize) -> Option<&'a Token> {
        self.toks.get(self.pos + ahead)
    }

    fn text_at(&self, ahead: usize) -> &'a str {
        self.tok(ahead).map(|t| t.span.slice(self.src)).unwrap_or("")
    }

    fn is(&self, s: &str) -> bool {
        self.is_at(0, s)
    }

    fn is_at(&self, ahead: usize, s: &str) -> bool {
        match self.tok(ahead) {
            Some(t) if t.kind != TokenKind::StringLit && t.kind != TokenKind::CharLit => {
                t.span.slice(self.src) == s
            }
            _ => false,
        }
    }

    fn kind_at(&self, ahead: usize) -> Option<TokenKind> {
        self.tok(ahead).map(|t| t.kind)
    }

    fn is_ident(&self) -> bool {
        self.kind_at(0) == Some(TokenKind::Ident)
    }

    fn is_ident_at(&self, ahead: usize) -> bool {
        self.kind_at(ahead) == Some(TokenKind::Ident)
    }

    fn start(&self) -> usize {
        self.tok(0).map(|t| t.span.start).unwrap_or(self.src.len())
    }

    fn last_end(&self) -> usize {
        if self.pos == 0 {
            0
        } else {
            self.toks[self.pos - 1].span.end
        }
    }

    fn span_from(&self, start: usize) -> Span {
        Span::new(start, self.last_end().max(start))
    }

    fn bump(&mut self) -> &'a Token {
        let t = &self.toks[self.pos];
        self.pos += 1;
        t
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.is(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        let found = if self.at_end() {
            "end of input".to_string()
        } else {
            format!("`{}`", self.text_at(0))
        };
        ParseError::at(self.src, self.start(), format!("{}, found {}", msg.into(), found))
    }

    fn expect(&mut self, s: &str) -> PResult<&'a Token> {
        if self.is(s) {
            Ok(self.bump())
        } else {
            Err(self.error(format!("expected `{s}`")))
        }
    }

    fn ident(&mut self) -> PResult<Ident> {
        if self.is_ident() {
            let t = self.bump();
            Ok(Ident { span: t.span, name: t.span.slice(self.src).to_string() })
        } else {
            Err(self.error("expected identifier"))
        }
    }

    fn is_primitive(&self, ahead: usize) -> bool {
        self.kind_at(ahead) == Some(TokenKind::Keyword) && PRIMITIVES.contains(&self.text_at(ahead))
    }

    fn is_modifier(&self) -> bool {
        let t = self.text_at(0);
        (self.kind_at(0) == Some(TokenKind::Keyword) && MODIFIERS.contains(&t))
            || (self.is("@") && !self.is_at(1, "interface"))
    }

    /// Skips a balanced `open ... close` group starting at the current token.
    fn skip_balanced(&mut self, open: &str, close: &str) -> PResult<()> {
        let mut depth = 0usize;
        loop {
            if self.at_end() {
                return Err(self.error(format!("expected `{close}`")));
            }
            if self.is(open) {
                depth += 1;
            } else if self.is(close) {
                depth -= 1;
                if depth == 0 {
                    self.pos += 1;
                    return Ok(());
                }
            }
            self.pos += 1;
        }
    }

    // ---- declarations --------------------------------------------------

    fn compilation_unit(&mut self) -> PResult<CompilationUnit> {
        let mut directives = Vec::new();
        let mut members = Vec::new();
        while !self.at_end() {
            if self.is("package") || self.is("import") {
                let start = self.start();
                while !self.is(";") {
                    if self.at_end() {
                        return Err(self.error("expected `;`"));
                    }
                    self.pos += 1;
                }
                self.pos += 1;
                directives.push(self.span_from(start));
            } else if self.eat(";") {
            } else {
                members.push(self.member()?);
            }
        }
        Ok(CompilationUnit { span: Span::new(0, self.src.len()), directives, members })
    }

    fn modifiers(&mut self) -> PResult<Vec<Span>> {
        let mut mods = Vec::new();
        while self.is_modifier() {
            let start = self.start();
            if self.eat("@") {
                self.ident()?;
                while self.is(".") && self.is_ident_at(1) {
                    self.pos += 2;
                }
                if self.is("(") {
                    self.skip_balanced("(", ")")?;
                }
            } else {
                self.pos += 1;
            }
            mods.push(self.span_from(start));
        }
        Ok(mods)
    }

    fn member(&mut self) -> PResult<Member> {
        let start = self.start();
        let modifiers = self.modifiers()?;
        if self.is("class") || self.is("interface") || self.is("enum") || self.is("@") {
            return Ok(Member::Class(self.class_decl(start, modifiers)?));
        }
        if self.is("{") {
            return Ok(Member::Initializer(self.block()?));
        }
        if self.is("<") {
            self.skip_balanced("<", ">")?;
        }
        if self.is_ident() && self.is_at(1, "(") {
            let name = self.ident()?;
            return self.method_rest(start, modifiers, None, name);
        }
        let ty = self.parse_type()?;
        let name = self.ident()?;
        if self.is("(") {
            return self.method_rest(start, modifiers, Some(ty), name);
        }
        let declarators = self.declarators_from(name)?;
        self.expect(";")?;
        Ok(Member::Field(FieldDecl { span: self.span_from(start), modifiers, ty, declarators }))
    }

    fn class_decl(&mut self, start: usize, modifiers: Vec<Span>) -> PResult<ClassDecl> {
        let kind = if self.eat("class") {
            ClassKind::Class
        } else if self.eat("enum") {
            ClassKind::Enum
        } else {
            self.eat("@");
            self.expect("interface")?;
            ClassKind::Interface
        };
        let name = self.ident()?;
        // type parameters, extends, implements
        while !self.is("{") {
            if self.at_end() {
                return Err(self.error("expected `{`"));
            }
            if self.is("<") {
                self.skip_balanced("<", ">")?;
            } else {
                self.pos += 1;
            }
        }
        let body_start = self.start();
        self.expect("{")?;
        let mut enum_constants = Vec::new();
        if kind == ClassKind::Enum {
            while self.is_ident() || self.is("@") {
                self.modifiers()?;
                enum_constants.push(self.ident()?);
                if self.is("(") {
                    self.skip_balanced("(", ")")?;
                }
                if self.is("{") {
                    self.skip_balanced("{", "}")?;
                }
                if !self.eat(",") {
                    break;
                }
            }
            self.eat(";");
        }
        let members = self.class_body_members()?;
        let body_span = self.span_from(body_start);
        Ok(ClassDecl { span: self.span_from(start), modifiers, kind, name, body_span, enum_constants, members })
    }

    /// Members up to and including the closing `}`.
    fn class_body_members(&mut self) -> PResult<Vec<Member>> {
        let mut members = Vec::new();
        loop {
            if self.eat("}") {
                return Ok(members);
            }
            if self.at_end() {
                return Err(self.error("expected `}`"));
            }
            if self.eat(";") {
                continue;
            }
            members.push(self.member()?);
        }
    }

    fn method_rest(
        &mut self,
        start: usize,
        modifiers: Vec<Span>,
        return_type: Option<TypeRef>,
        name: Ident,
    ) -> PResult<Member> {
        self.expect("(")?;
        let mut params = Vec::new();
        if !self.is(")") {
            loop {
                params.push(self.param()?);
                if !self.eat(",") {
                    break;
                }
            }
        }
        self.expect(")")?;
        while self.is("[") && self.is_at(1, "]") {
            self.pos += 2;
        }
        if self.eat("throws") {
            loop {
                self.parse_type()?;
                if !self.eat(",") {
                    break;
                }
            }
        }
        let body = if self.eat(";") {
            None
        } else if self.eat("default") {
            // annotation element default value
            while !self.is(";") && !self.at_end() {
                self.pos += 1;
            }
            self.expect(";")?;
            None
        } else {
            Some(self.block()?)
        };
        Ok(Member::Method(MethodDecl { span: self.span_from(start), modifiers, return_type, name, params, body }))
    }

    fn param(&mut self) -> PResult<Param> {
        let start = self.start();
        self.modifiers()?;
        let mut ty = self.parse_type()?;
        let varargs = self.eat("...");
        let name = self.ident()?;
        while self.is("[") && self.is_at(1, "]") {
            self.pos += 2;
            ty.dims += 1;
            ty.text.push_str("[]");
        }
        Ok(Param { span: self.span_from(start), ty, name, varargs })
    }

    // ---- types ---------------------------------------------------------

    fn parse_type(&mut self) -> PResult<TypeRef> {
        let start = self.start();
        if self.is_primitive(0) {
            self.pos += 1;
        } else {
            self.ident()?;
            self.type_args()?;
            while self.is(".") && self.is_ident_at(1) {
                self.pos += 2;
                self.type_args()?;
            }
        }
        let mut dims = 0;
        while self.is("[") && self.is_at(1, "]") {
            self.pos += 2;
            dims += 1;
        }
        let span = self.span_from(start);
        let text: String = span.slice(self.src).chars().filter(|c| !c.is_whitespace()).collect();
        Ok(TypeRef { span, text, dims })
    }

    fn type_args(&mut self) -> PResult<()> {
        if !self.eat("<") {
            return Ok(());
        }
        if self.eat(">") {
            return Ok(());
        }
        loop {
            self.modifiers()?;
            if self.eat("?") {
                if self.eat("extends") || self.eat("super") {
                    self.parse_type()?;
                }
            } else {
                self.parse_type()?;
                while self.eat("&") {
                    self.parse_type()?;
                }
            }
            if !self.eat(",") {
                break;
            }
        }
        self.expect(">")?;
        Ok(())
    }

    fn try_type(&mut self) -> Option<TypeRef> {
        let save = self.pos;
        match self.parse_type() {
            Ok(t) => Some(t),
            Err(_) => {
                self.pos = save;
                None
            }
        }
    }

    /// True if the tokens at the cursor begin a local variable declaration.
    fn decl_ahead(&mut self) -> bool {
        if self.is("final") || (self.is("@") && !self.is_at(1, "interface")) {
            return true;
        }
        if self.is_primitive(0) {
            return !self.is_at(1, ".") && !self.is_at(1, "::");
        }
        if !self.is_ident() {
            return false;
        }
        let save = self.pos;
        let ok = self.try_type().is_some()
            && self.is_ident()
            && (self.is_at(1, "=")
                || self.is_at(1, ";")
                || self.is_at(1, ",")
                || self.is_at(1, "[")
                || self.is_at(1, ":"));
        self.pos = save;
        ok
    }

    // ---- statements ----------------------------------------------------

    fn block(&mut self) -> PResult<Block> {
        let start = self.start();
        self.expect("{")?;
        let mut stmts = Vec::new();
        loop {
            if self.eat("}") {
                break;
            }
            if self.at_end() {
                return Err(self.error("expected `}`"));
            }
            stmts.push(self.stmt()?);
        }
        Ok(Block { span: self.span_from(start), stmts })
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let start = self.start();
        let kind = self.stmt_kind()?;
        Ok(Stmt { span: self.span_from(start), kind })
    }

    fn boxed_stmt(&mut self) -> PResult<Box<Stmt>> {
        Ok(Box::new(self.stmt()?))
    }

    fn paren_expr(&mut self) -> PResult<Expr> {
        self.expect("(")?;
        let e = self.expr()?;
        self.expect(")")?;
        Ok(e)
    }

    fn stmt_kind(&mut self) -> PResult<StmtKind> {
        if self.at_end() {
            return Err(self.error("expected statement"));
        }
        let text = self.text_at(0);
        let keyword = self.kind_at(0) == Some(TokenKind::Keyword);
        match text {
            "{" => return Ok(StmtKind::Block(self.block()?)),
            ";" => {
                self.pos += 1;
                return Ok(StmtKind::Empty);
            }
            _ => {}
        }
        if keyword {
            match text {
                "if" => {
                    self.pos += 1;
                    let cond = self.paren_expr()?;
                    let then_branch = self.boxed_stmt()?;
                    let else_branch = if self.eat("else") { Some(self.boxed_stmt()?) } else { None };
                    return Ok(StmtKind::If { cond, then_branch, else_branch });
                }
                "while" => {
                    self.pos += 1;
                    let cond = self.paren_expr()?;
                    let body = self.boxed_stmt()?;
                    return Ok(StmtKind::While { cond, body });
                }
                "do" => {
                    self.pos += 1;
                    let body = self.boxed_stmt()?;
                    self.expect("while")?;
                    let cond = self.paren_expr()?;
                    self.expect(";")?;
                    return Ok(StmtKind::DoWhile { body, cond });
                }
                "for" => return self.for_stmt(),
                "switch" => return self.switch_stmt(),
                "return" => {
                    self.pos += 1;
                    let value = if self.is(";") { None } else { Some(self.expr()?) };
                    self.expect(";")?;
                    return Ok(StmtKind::Return(value));
                }
                "break" | "continue" => {
                    self.pos += 1;
                    let label = if self.is_ident() { Some(self.ident()?) } else { None };
                    self.expect(";")?;
                    return Ok(if text == "break" { StmtKind::Break(label) } else { StmtKind::Continue(label) });
                }
                "throw" => {
                    self.pos += 1;
                    let e = self.expr()?;
                    self.expect(";")?;
                    return Ok(StmtKind::Throw(e));
                }
                "try" => return self.try_stmt(),
                "synchronized" if self.is_at(1, "(") => {
                    self.pos += 1;
                    let lock = self.paren_expr()?;
                    let block = self.block()?;
                    return Ok(StmtKind::Synchronized { lock, block });
                }
                "assert" => {
                    self.pos += 1;
                    let cond = self.expr()?;
                    let message = if self.eat(":") { Some(self.expr()?) } else { None };
                    self.expect(";")?;
                    return Ok(StmtKind::Assert { cond, message });
                }
                "class" | "interface" | "enum" | "abstract" | "static" => {
                    let start = self.start();
                    let mods = self.modifiers()?;
                    return Ok(StmtKind::LocalClass(Box::new(self.class_decl(start, mods)?)));
                }
                "final" if self.is_at(1, "class") => {
                    let start = self.start();
                    let mods = self.modifiers()?;
                    return Ok(StmtKind::LocalClass(Box::new(self.class_decl(start, mods)?)));
                }
                _ => {}
            }
        }
        if self.is_ident() && self.is_at(1, ":") {
            let label = self.ident()?;
            self.pos += 1;
            let body = self.boxed_stmt()?;
            return Ok(StmtKind::Labeled { label, body });
        }
        if self.decl_ahead() {
            let decl = self.local_var_decl()?;
            self.expect(";")?;
            return Ok(StmtKind::LocalVar(decl));
        }
        let e = self.expr()?;
        self.expect(";")?;
        Ok(StmtKind::Expr(e))
    }

    fn local_var_decl(&mut self) -> PResult<LocalVarDecl> {
        let modifiers = self.modifiers()?;
        let ty = self.parse_type()?;
        let name = self.ident()?;
        let declarators = self.declarators_from(name)?;
        Ok(LocalVarDecl { modifiers, ty, declarators })
    }

    fn declarators_from(&mut self, first: Ident) -> PResult<Vec<Declarator>> {
        let mut out = vec![self.declarator_rest(first)?];
        while self.eat(",") {
            let name = self.ident()?;
            out.push(self.declarator_rest(name)?);
        }
        Ok(out)
    }

    fn declarator_rest(&mut self, name: Ident) -> PResult<Declarator> {
        let start = name.span.start;
        let mut extra_dims = 0;
        while self.is("[") && self.is_at(1, "]") {
            self.pos += 2;
            extra_dims += 1;
        }
        let init = if self.eat("=") {
            Some(if self.is("{") { self.array_init()? } else { self.expr()? })
        } else {
            None
        };
        Ok(Declarator { span: self.span_from(start), name, extra_dims, init })
    }

    fn for_stmt(&mut self) -> PResult<StmtKind> {
        let header_start = self.start();
        self.expect("for")?;
        self.expect("(")?;
        let mut init = None;
        if self.decl_ahead() {
            let modifiers = self.modifiers()?;
            let ty = self.parse_type()?;
            let name = self.ident()?;
            if self.eat(":") {
                let iterable = self.expr()?;
                self.expect(")")?;
                let body = self.boxed_stmt()?;
                return Ok(StmtKind::ForEach { var_ty: ty, var_name: name, iterable, body });
            }
            let declarators = self.declarators_from(name)?;
            init = Some(ForInit::Decl(LocalVarDecl { modifiers, ty, declarators }));
        } else if !self.is(";") {
            init = Some(ForInit::Exprs(self.expr_list()?));
        }
        self.expect(";")?;
        let cond = if self.is(";") { None } else { Some(self.expr()?) };
        self.expect(";")?;
        let update = if self.is(")") { Vec::new() } else { self.expr_list()? };
        self.expect(")")?;
        let header = self.span_from(header_start);
        let body = self.boxed_stmt()?;
        Ok(StmtKind::For { header, init, cond, update, body })
    }

    fn expr_list(&mut self) -> PResult<Vec<Expr>> {
        let mut out = vec![self.expr()?];
        while self.eat(",") {
            out.push(self.expr()?);
        }
        Ok(out)
    }

    fn switch_stmt(&mut self) -> PResult<StmtKind> {
        self.expect("switch")?;
        let selector = self.paren_expr()?;
        let body_start = self.start();
        self.expect("{")?;
        let mut groups = Vec::new();
        while !self.is("}") {
            if self.at_end() {
                return Err(self.error("expected `}`"));
            }
            groups.push(self.switch_group()?);
        }
        self.pos += 1;
        Ok(StmtKind::Switch { selector, body_span: self.span_from(body_start), groups })
    }

    fn switch_group(&mut self) -> PResult<SwitchGroup> {
        let start = self.start();
        let mut labels = Vec::new();
        let mut arrow = false;
        while self.is("case") || self.is("default") {
            let label_start = self.start();
            if self.eat("default") {
                labels.push(SwitchLabel { span: self.span_from(label_start), value: None });
            } else {
                self.pos += 1;
                loop {
                    let vs = self.start();
                    let value = self.conditional()?;
                    let _ = vs;
                    labels.push(SwitchLabel { span: self.span_from(label_start), value: Some(value) });
                    if !self.eat(",") {
                        break;
                    }
                }
            }
            if self.eat("->") {
                arrow = true;
                break;
            }
            self.expect(":")?;
        }
        if labels.is_empty() {
            return Err(self.error("expected `case` or `default`"));
        }
        let mut stmts = Vec::new();
        if arrow {
            stmts.push(self.stmt()?);
        } else {
            while !self.is("case") && !self.is("default") && !self.is("}") {
                if self.at_end() {
                    return Err(self.error("expected `}`"));
                }
                stmts.push(self.stmt()?);
            }
        }
        Ok(SwitchGroup { span: self.span_from(start), labels, arrow, stmts })
    }

    fn try_stmt(&mut self) -> PResult<StmtKind> {
        self.expect("try")?;
        let resources = if self.is("(") {
            let s = self.start();
            self.skip_balanced("(", ")")?;
            Some(self.span_from(s))
        } else {
            None
        };
        let block = self.block()?;
        let mut catches = Vec::new();
        while self.is("catch") {
            let start = self.start();
            self.pos += 1;
            self.expect("(")?;
            self.modifiers()?;
            let ts = self.start();
            self.parse_type()?;
            while self.eat("|") {
                self.parse_type()?;
            }
            let types = self.span_from(ts);
            let param = self.ident()?;
            self.expect(")")?;
            let cblock = self.block()?;
            catches.push(CatchClause { span: self.span_from(start), param, types, block: cblock });
        }
        let finally = if self.eat("finally") { Some(self.block()?) } else { None };
        if catches.is_empty() && finally.is_none() && resources.is_none() {
            return Err(self.error("expected `catch` or `finally`"));
        }
        Ok(StmtKind::Try { resources, block, catches, finally })
    }

    // ---- expressions ---------------------------------------------------

    fn expr(&mut self) -> PResult<Expr> {
        if self.lambda_ahead() {
            return self.lambda();
        }
        let start = self.start();
        let lhs = self.conditional()?;
        if self.kind_at(0) == Some(TokenKind::Punct) && ASSIGN_OPS.contains(&self.text_at(0)) {
            let op_tok = self.bump();
            let op = AssignOp::from_str(op_tok.span.slice(self.src)).expect("assignment operator");
            let value = self.expr()?;
            return Ok(Expr {
                span: self.span_from(start),
                kind: ExprKind::Assign { op, op_span: op_tok.span, target: Box::new(lhs), value: Box::new(value) },
            });
        }
        Ok(lhs)
    }

    fn lambda_ahead(&self) -> bool {
        if self.is_ident() && self.is_at(1, "->") {
            return true;
        }
        if !self.is("(") {
            return false;
        }
        let mut depth = 0usize;
        let mut i = 0;
        while let Some(t) = self.tok(i) {
            match t.span.slice(self.src) {
                "(" => depth += 1,
                ")" => {
                    depth -= 1;
                    if depth == 0 {
                        return self.is_at(i + 1, "->");
                    }
                }
                ";" | "{" | "}" => return false,
                _ => {}
            }
            i += 1;
        }
        false
    }

    fn lambda(&mut self) -> PResult<Expr> {
        let start = self.start();
        let mut params = Vec::new();
        if self.is_ident() {
            params.push(self.ident()?);
        } else {
            self.expect("(")?;
            let mut last_ident: Option<Ident> = None;
            let mut depth = 0usize;
            loop {
                if self.at_end() {
                    return Err(self.error("expected `)`"));
                }
                if depth == 0 && (self.is(",") || self.is(")")) {
                    if let Some(id) = last_ident.take() {
                        params.push(id);
                    }
                    if self.eat(")") {
                        break;
                    }
                    self.pos += 1;
                    continue;
                }
                if self.is("<") {
                    depth += 1;
                } else if self.is(">") {
                    depth = depth.saturating_sub(1);
                }
                if self.is_ident() {
                    last_ident = Some(self.ident()?);
                } else {
                    self.pos += 1;
                }
            }
        }
        self.expect("->")?;
        let body = if self.is("{") {
            LambdaBody::Block(self.block()?)
        } else {
            LambdaBody::Expr(Box::new(self.expr()?))
        };
        Ok(Expr { span: self.span_from(start), kind: ExprKind::Lambda { params, body } })
    }

    fn conditional(&mut self) -> PResult<Expr> {
        let start = self.start();
        let cond = self.binary(3)?;
        if self.eat("?") {
            let then_expr = self.expr()?;
            self.expect(":")?;
            let else_expr = if self.lambda_ahead() { self.lambda()? } else { self.conditional()? };
            return Ok(Expr {
                span: self.span_from(start),
                kind: ExprKind::Conditional {
                    cond: Box::new(cond),
                    then_expr: Box::new(then_expr),
                    else_expr: Box::new(else_expr),
                },
            });
        }
        Ok(cond)
    }

    /// Returns the binary operator at the cursor and how many tokens it spans.
    fn peek_binary(&self) -> Option<(BinaryOp, usize)> {
        let t = self.tok(0)?;
        if t.kind != TokenKind::Punct {
            return None;
        }
        let text = t.span.slice(self.src);
        if text == ">" {
            let adjacent = |i: usize| {
                matches!((self.tok(i - 1), self.tok(i)), (Some(a), Some(b)) if a.span.end == b.span.start && b.span.slice(self.src) == ">")
            };
            if adjacent(1) {
                if adjacent(2) {
                    return Some((BinaryOp::UShr, 3));
                }
                return Some((BinaryOp::Shr, 2));
            }
            return Some((BinaryOp::Gt, 1));
        }
        BinaryOp::from_str(text).map(|op| (op, 1))
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let start = self.start();
        let mut lhs = self.unary()?;
        loop {
            if self.is("instanceof") {
                if PREC_RELATIONAL < min_prec {
                    break;
                }
                self.pos += 1;
                self.eat("final");
                let ty = self.parse_type()?;
                // pattern binding `instanceof Type name`
                if self.is_ident() {
                    self.pos += 1;
                }
                lhs = Expr { span: self.span_from(start), kind: ExprKind::InstanceOf { expr: Box::new(lhs), ty } };
                continue;
            }
            let Some((op, ntoks)) = self.peek_binary() else { break };
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            let op_start = self.start();
            self.pos += ntoks;
            let op_span = self.span_from(op_start);
            let rhs = self.binary(prec + 1)?;
            lhs = Expr {
                span: self.span_from(start),
                kind: ExprKind::Binary { op, op_span, lhs: Box::new(lhs), rhs: Box::new(rhs) },
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let start = self.start();
        let prefix = match self.text_at(0) {
            "+" => Some(UnaryOp::Plus),
            "-" => Some(UnaryOp::Neg),
            "!" => Some(UnaryOp::Not),
            "~" => Some(UnaryOp::BitNot),
            "++" => Some(UnaryOp::PreInc),
            "--" => Some(UnaryOp::PreDec),
            _ => None,
        };
        if let (Some(op), Some(TokenKind::Punct)) = (prefix, self.kind_at(0)) {
            let op_span = self.bump().span;
            let operand = self.unary()?;
            return Ok(Expr {
                span: self.span_from(start),
                kind: ExprKind::Unary { op, op_span, operand: Box::new(operand) },
            });
        }
        if self.is("(") && self.cast_ahead() {
            self.pos += 1;
            let ty = self.parse_type()?;
            while self.eat("&") {
                self.parse_type()?;
            }
            self.expect(")")?;
            let operand = if self.lambda_ahead() { self.lambda()? } else { self.unary()? };
            return Ok(Expr { span: self.span_from(start), kind: ExprKind::Cast { ty, expr: Box::new(operand) } });
        }
        let primary = self.primary()?;
        self.postfix(start, primary)
    }

    fn cast_ahead(&mut self) -> bool {
        let save = self.pos;
        self.pos += 1;
        let result = if self.is_primitive(0) {
            self.try_type().is_some() && self.is(")")
        } else if self.is_ident() {
            let ok = self.try_type().is_some() && {
                while self.eat("&") {
                    let _ = self.try_type();
                }
                self.is(")")
            };
            ok && match self.tok(1) {
                Some(next) => match next.kind {
                    TokenKind::Ident
                    | TokenKind::IntLit
                    | TokenKind::FloatLit
                    | TokenKind::CharLit
                    | TokenKind::StringLit
                    | TokenKind::BoolLit
                    | TokenKind::NullLit => true,
                    TokenKind::Keyword => matches!(self.text_at(1), "this" | "new" | "super"),
                    TokenKind::Punct => matches!(self.text_at(1), "(" | "!" | "~"),
                },
                None => false,
            }
        } else {
            false
        };
        self.pos = save;
        result
    }

    fn args(&mut self) -> PResult<Vec<Expr>> {
        self.expect("(")?;
        let mut args = Vec::new();
        if !self.eat(")") {
            args = self.expr_list()?;
            self.expect(")")?;
        }
        Ok(args)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let start = self.start();
        let Some(tok) = self.tok(0) else {
            return Err(self.error("expected expression"));
        };
        let lit = match tok.kind {
            TokenKind::IntLit => Some(LitKind::Int),
            TokenKind::FloatLit => Some(LitKind::Float),
            TokenKind::CharLit => Some(LitKind::Char),
            TokenKind::StringLit => Some(LitKind::String),
            TokenKind::BoolLit => Some(LitKind::Bool),
            TokenKind::NullLit => Some(LitKind::Null),
            _ => None,
        };
        if let Some(kind) = lit {
            self.pos += 1;
            return Ok(Expr { span: tok.span, kind: ExprKind::Literal(kind) });
        }
        let text = tok.span.slice(self.src);
        match (tok.kind, text) {
            (TokenKind::Punct, "(") => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(")")?;
                Ok(Expr { span: self.span_from(start), kind: ExprKind::Paren(Box::new(inner)) })
            }
            (TokenKind::Keyword, "this") | (TokenKind::Keyword, "super") => {
                self.pos += 1;
                if self.is("(") {
                    let name = Ident { span: tok.span, name: text.to_string() };
                    let args = self.args()?;
                    return Ok(Expr {
                        span: self.span_from(start),
                        kind: ExprKind::MethodCall { target: None, name, args },
                    });
                }
                let kind = if text == "this" { ExprKind::This } else { ExprKind::Super };
                Ok(Expr { span: tok.span, kind })
            }
            (TokenKind::Keyword, "new") => self.new_expr(),
            (TokenKind::Keyword, _) if self.is_primitive(0) => {
                let ty = self.parse_type()?;
                if self.eat("::") {
                    let name = if self.is("new") {
                        let t = self.bump();
                        Ident { span: t.span, name: "new".into() }
                    } else {
                        self.ident()?
                    };
                    let target = Expr { span: ty.span, kind: ExprKind::ClassLit(ty) };
                    return Ok(Expr {
                        span: self.span_from(start),
                        kind: ExprKind::MethodRef { target: Box::new(target), name },
                    });
                }
                self.expect(".")?;
                self.expect("class")?;
                Ok(Expr { span: self.span_from(start), kind: ExprKind::ClassLit(ty) })
            }
            (TokenKind::Ident, _) => {
                let name = self.ident()?;
                if self.is("(") {
                    let args = self.args()?;
                    return Ok(Expr {
                        span: self.span_from(start),
                        kind: ExprKind::MethodCall { target: None, name, args },
                    });
                }
                // `Type[]::new` / `Type[].class`
                if self.is("[") && self.is_at(1, "]") {
                    let save = self.pos;
                    self.pos = save - 1;
                    let ty = self.parse_type()?;
                    if self.eat("::") {
                        let name = if self.is("new") {
                            let t = self.bump();
                            Ident { span: t.span, name: "new".into() }
                        } else {
                            self.ident()?
                        };
                        let target = Expr { span: ty.span, kind: ExprKind::ClassLit(ty) };
                        return Ok(Expr {
                            span: self.span_from(start),
                            kind: ExprKind::MethodRef { target: Box::new(target), name },
                        });
                    }
                    if self.eat(".") {
                        self.expect("class")?;
                        return Ok(Expr { span: self.span_from(start), kind: ExprKind::ClassLit(ty) });
                    }
                    return Err(self.error("expected `::` or `.class`"));
                }
                Ok(Expr { span: name.span, kind: ExprKind::Name(name) })
            }
            _ => Err(self.error("expected expression")),
        }
    }

    fn new_expr(&mut self) -> PResult<Expr> {
        let start = self.start();
        self.expect("new")?;
        let ty_start = self.start();
        if self.is_primitive(0) {
            self.pos += 1;
        } else {
            self.ident()?;
            self.type_args()?;
            while self.is(".") && self.is_ident_at(1) {
                self.pos += 2;
                self.type_args()?;
            }
        }
        let ty_span = self.span_from(ty_start);
        let ty_text: String = ty_span.slice(self.src).chars().filter(|c| !c.is_whitespace()).collect();
        let ty = TypeRef { span: ty_span, text: ty_text, dims: 0 };
        if self.is("[") {
            let mut dims = Vec::new();
            let mut extra_dims = 0;
            while self.is("[") {
                if self.is_at(1, "]") {
                    self.pos += 2;
                    extra_dims += 1;
                } else {
                    if extra_dims > 0 {
                        return Err(self.error("array dimension after empty dimension"));
                    }
                    self.pos += 1;
                    dims.push(self.expr()?);
                    self.expect("]")?;
                }
            }
            let init = if self.is("{") { Some(Box::new(self.array_init()?)) } else { None };
            if dims.is_empty() && init.is_none() {
                return Err(self.error("expected array initializer"));
            }
            return Ok(Expr {
                span: self.span_from(start),
                kind: ExprKind::NewArray { elem: ty, dims, extra_dims, init },
            });
        }
        let args = self.args()?;
        let body = if self.is("{") {
            self.pos += 1;
            Some(self.class_body_members()?)
        } else {
            None
        };
        Ok(Expr { span: self.span_from(start), kind: ExprKind::New { ty, args, body } })
    }

    fn array_init(&mut self) -> PResult<Expr> {
        let start = self.start();
        self.expect("{")?;
        let mut items = Vec::new();
        while !self.is("}") {
            if self.at_end() {
                return Err(self.error("expected `}`"));
            }
            items.push(if self.is("{") { self.array_init()? } else { self.expr()? });
            if !self.eat(",") {
                break;
            }
        }
        self.expect("}")?;
        Ok(Expr { span: self.span_from(start), kind: ExprKind::ArrayInit(items) })
    }

    fn postfix(&mut self, start: usize, mut e: Expr) -> PResult<Expr> {
        loop {
            if self.is(".") {
                self.pos += 1;
                if self.is("<") {
                    self.skip_balanced("<", ">")?;
                }
                if self.is("class") {
                    self.pos += 1;
                    let span = self.span_from(start);
                    let text: String = Span::new(start, e.span.end)
                        .slice(self.src)
                        .chars()
                        .filter(|c| !c.is_whitespace())
                        .collect();
                    let ty = TypeRef { span: Span::new(start, e.span.end), text, dims: 0 };
                    e = Expr { span, kind: ExprKind::ClassLit(ty) };
                    continue;
                }
                let name = if self.is("this") || self.is("super") || self.is("new") {
                    let t = self.bump();
                    Ident { span: t.span, name: t.span.slice(self.src).to_string() }
                } else {
                    self.ident()?
                };
                if self.is("(") {
                    let args = self.args()?;
                    e = Expr {
                        span: self.span_from(start),
                        kind: ExprKind::MethodCall { target: Some(Box::new(e)), name, args },
                    };
                } else {
                    e = Expr { span: self.span_from(start), kind: ExprKind::FieldAccess { target: Box::new(e), name } };
                }
            } else if self.is("[") {
                self.pos += 1;
                let index = self.expr()?;
                self.expect("]")?;
                e = Expr {
                    span: self.span_from(start),
                    kind: ExprKind::Index { array: Box::new(e), index: Box::new(index) },
                };
            } else if self.is("++") || self.is("--") {
                let t = self.bump();
                let op = if t.span.slice(self.src) == "++" { UnaryOp::PostInc } else { UnaryOp::PostDec };
                e = Expr {
                    span: self.span_from(start),
                    kind: ExprKind::Unary { op, op_span: t.span, operand: Box::new(e) },
                };
            } else if self.is("::") {
                self.pos += 1;
                let name = if self.is("new") {
                    let t = self.bump();
                    Ident { span: t.span, name: "new".into() }
                } else {
                    self.ident()?
                };
                e = Expr { span: self.span_from(start), kind: ExprKind::MethodRef { target: Box::new(e), name } };
            } else {
                return Ok(e);
            }
        }
    }
}
