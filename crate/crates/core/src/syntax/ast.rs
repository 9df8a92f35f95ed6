//! Syntax tree for the Java subset. Every node carries a byte span into the
//! source it was parsed from; the source text itself stays authoritative.

use super::Span;

#[derive(Debug, Clone, PartialEq)]
pub struct Ident {
    pub span: Span,
    pub name: String,
}

/// A type as written. `text` is the source slice with whitespace removed,
/// `dims` counts trailing `[]` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeRef {
    pub span: Span,
    pub text: String,
    pub dims: usize,
}

impl TypeRef {
    pub fn base(&self) -> &str {
        self.text.trim_end_matches("[]")
    }

    pub fn is_var(&self) -> bool {
        self.text == "var"
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompilationUnit {
    pub span: Span,
    /// `package` and `import` declarations.
    pub directives: Vec<Span>,
    pub members: Vec<Member>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassKind {
    Class,
    Interface,
    Enum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassDecl {
    pub span: Span,
    pub modifiers: Vec<Span>,
    pub kind: ClassKind,
    pub name: Ident,
    pub body_span: Span,
    pub enum_constants: Vec<Ident>,
    pub members: Vec<Member>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Member {
    Field(FieldDecl),
    Method(MethodDecl),
    Class(ClassDecl),
    Initializer(Block),
}

impl Member {
    pub fn span(&self) -> Span {
        match self {
            Member::Field(f) => f.span,
            Member::Method(m) => m.span,
            Member::Class(c) => c.span,
            Member::Initializer(b) => b.span,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldDecl {
    pub span: Span,
    pub modifiers: Vec<Span>,
    pub ty: TypeRef,
    pub declarators: Vec<Declarator>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodDecl {
    pub span: Span,
    pub modifiers: Vec<Span>,
    /// `None` for constructors.
    pub return_type: Option<TypeRef>,
    pub name: Ident,
    pub params: Vec<Param>,
    pub body: Option<Block>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub span: Span,
    pub ty: TypeRef,
    pub name: Ident,
    pub varargs: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Declarator {
    pub span: Span,
    pub name: Ident,
    pub extra_dims: usize,
    pub init: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalVarDecl {
    pub modifiers: Vec<Span>,
    pub ty: TypeRef,
    pub declarators: Vec<Declarator>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub span: Span,
    pub stmts: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub span: Span,
    pub kind: StmtKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ForInit {
    Decl(LocalVarDecl),
    Exprs(Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwitchLabel {
    pub span: Span,
    /// `None` for `default`.
    pub value: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwitchGroup {
    pub span: Span,
    pub labels: Vec<SwitchLabel>,
    /// `case X -> ...` form.
    pub arrow: bool,
    pub stmts: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatchClause {
    pub span: Span,
    pub param: Ident,
    pub types: Span,
    pub block: Block,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Block(Block),
    LocalVar(LocalVarDecl),
    LocalClass(Box<ClassDecl>),
    Expr(Expr),
    If {
        cond: Expr,
        then_branch: Box<Stmt>,
        else_branch: Option<Box<Stmt>>,
    },
    While {
        cond: Expr,
        body: Box<Stmt>,
    },
    DoWhile {
        body: Box<Stmt>,
        cond: Expr,
    },
    For {
        /// From `for` through the closing `)` of the header.
        header: Span,
        init: Option<ForInit>,
        cond: Option<Expr>,
        update: Vec<Expr>,
        body: Box<Stmt>,
    },
    ForEach {
        var_ty: TypeRef,
        var_name: Ident,
        iterable: Expr,
        body: Box<Stmt>,
    },
    Switch {
        selector: Expr,
        body_span: Span,
        groups: Vec<SwitchGroup>,
    },
    Return(Option<Expr>),
    Break(Option<Ident>),
    Continue(Option<Ident>),
    Throw(Expr),
    Try {
        resources: Option<Span>,
        block: Block,
        catches: Vec<CatchClause>,
        finally: Option<Block>,
    },
    Labeled {
        label: Ident,
        body: Box<Stmt>,
    },
    Synchronized {
        lock: Expr,
        block: Block,
    },
    Assert {
        cond: Expr,
        message: Option<Expr>,
    },
    Empty,
}

impl Stmt {
    pub fn is_loop(&self) -> bool {
        matches!(
            self.kind,
            StmtKind::While { .. } | StmtKind::DoWhile { .. } | StmtKind::For { .. } | StmtKind::ForEach { .. }
        )
    }

    /// Statements that transfer or branch control.
    pub fn is_control(&self) -> bool {
        !matches!(self.kind, StmtKind::LocalVar(_) | StmtKind::Expr(_) | StmtKind::Empty)
    }

    pub fn as_block(&self) -> Option<&Block> {
        match &self.kind {
            StmtKind::Block(b) => Some(b),
            _ => None,
        }
    }

    /// Short, stable name of the statement kind.
    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            StmtKind::Block(_) => "block",
            StmtKind::LocalVar(_) => "local",
            StmtKind::LocalClass(_) => "class",
            StmtKind::Expr(_) => "expr",
            StmtKind::If { .. } => "if",
            StmtKind::While { .. } => "while",
            StmtKind::DoWhile { .. } => "do",
            StmtKind::For { .. } => "for",
            StmtKind::ForEach { .. } => "foreach",
            StmtKind::Switch { .. } => "switch",
            StmtKind::Return(_) => "return",
            StmtKind::Break(_) => "break",
            StmtKind::Continue(_) => "continue",
            StmtKind::Throw(_) => "throw",
            StmtKind::Try { .. } => "try",
            StmtKind::Labeled { .. } => "labeled",
            StmtKind::Synchronized { .. } => "synchronized",
            StmtKind::Assert { .. } => "assert",
            StmtKind::Empty => "empty",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LitKind {
    Int,
    Float,
    Char,
    String,
    Bool,
    Null,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinaryOp {
    Or,
    And,
    BitOr,
    BitXor,
    BitAnd,
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
    Shl,
    Shr,
    UShr,
    Add,
    Sub,
    Mul,
    Div,
    Rem,
}

impl BinaryOp {
    pub fn as_str(self) -> &'static str {
        use BinaryOp::*;
        match self {
            Or => "||",
            And => "&&",
            BitOr => "|",
            BitXor => "^",
            BitAnd => "&",
            Eq => "==",
            Ne => "!=",
            Lt => "<",
            Gt => ">",
            Le => "<=",
            Ge => ">=",
            Shl => "<<",
            Shr => ">>",
            UShr => ">>>",
            Add => "+",
            Sub => "-",
            Mul => "*",
            Div => "/",
            Rem => "%",
        }
    }

    pub fn from_str(s: &str) -> Option<Self> {
        use BinaryOp::*;
        Some(match s {
            "||" => Or,
            "&&" => And,
            "|" => BitOr,
            "^" => BitXor,
            "&" => BitAnd,
            "==" => Eq,
            "!=" => Ne,
            "<" => Lt,
            ">" => Gt,
            "<=" => Le,
            ">=" => Ge,
            "<<" => Shl,
            ">>" => Shr,
            ">>>" => UShr,
            "+" => Add,
            "-" => Sub,
            "*" => Mul,
            "/" => Div,
            "%" => Rem,
            _ => return None,
        })
    }

    pub fn precedence(self) -> u8 {
        use BinaryOp::*;
        match self {
            Or => 3,
            And => 4,
            BitOr => 5,
            BitXor => 6,
            BitAnd => 7,
            Eq | Ne => 8,
            Lt | Gt | Le | Ge => 9,
            Shl | Shr | UShr => 10,
            Add | Sub => 11,
            Mul | Div | Rem => 12,
        }
    }

    pub fn is_relational(self) -> bool {
        matches!(self, BinaryOp::Lt | BinaryOp::Gt | BinaryOp::Le | BinaryOp::Ge)
    }

    pub fn is_equality(self) -> bool {
        matches!(self, BinaryOp::Eq | BinaryOp::Ne)
    }

    pub fn is_arithmetic(self) -> bool {
        matches!(self, BinaryOp::Add | BinaryOp::Sub | BinaryOp::Mul | BinaryOp::Div | BinaryOp::Rem)
    }

    pub fn is_logical(self) -> bool {
        matches!(self, BinaryOp::And | BinaryOp::Or)
    }

    /// `a op b` == `b mirror(op) a`
    pub fn mirrored(self) -> Self {
        use BinaryOp::*;
        match self {
            Lt => Gt,
            Gt => Lt,
            Le => Ge,
            Ge => Le,
            other => other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Plus,
    Not,
    BitNot,
    PreInc,
    PreDec,
    PostInc,
    PostDec,
}

impl UnaryOp {
    pub fn as_str(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Plus => "+",
            UnaryOp::Not => "!",
            UnaryOp::BitNot => "~",
            UnaryOp::PreInc | UnaryOp::PostInc => "++",
            UnaryOp::PreDec | UnaryOp::PostDec => "--",
        }
    }

    pub fn is_inc_dec(self) -> bool {
        matches!(self, UnaryOp::PreInc | UnaryOp::PreDec | UnaryOp::PostInc | UnaryOp::PostDec)
    }

    pub fn is_increment(self) -> bool {
        matches!(self, UnaryOp::PreInc | UnaryOp::PostInc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssignOp {
    Assign,
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    BitAnd,
    BitOr,
    BitXor,
    Shl,
    Shr,
    UShr,
}

impl AssignOp {
    pub fn as_str(self) -> &'static str {
        match self {
            AssignOp::Assign => "=",
            AssignOp::Add => "+=",
            AssignOp::Sub => "-=",
            AssignOp::Mul => "*=",
            AssignOp::Div => "/=",
            AssignOp::Rem => "%=",
            AssignOp::BitAnd => "&=",
            AssignOp::BitOr => "|=",
            AssignOp::BitXor => "^=",
            AssignOp::Shl => "<<=",
            AssignOp::Shr => ">>=",
            AssignOp::UShr => ">>>=",
        }
    }

    pub fn from_str(s: &str) -> Option<Self> {
        Some(match s {
            "=" => AssignOp::Assign,
            "+=" => AssignOp::Add,
            "-=" => AssignOp::Sub,
            "*=" => AssignOp::Mul,
            "/=" => AssignOp::Div,
            "%=" => AssignOp::Rem,
            "&=" => AssignOp::BitAnd,
            "|=" => AssignOp::BitOr,
            "^=" => AssignOp::BitXor,
            "<<=" => AssignOp::Shl,
            ">>=" => AssignOp::Shr,
            ">>>=" => AssignOp::UShr,
            _ => return None,
        })
    }

    /// The binary operator a compound assignment applies.
    pub fn binary(self) -> Option<BinaryOp> {
        Some(match self {
            AssignOp::Assign => return None,
            AssignOp::Add => BinaryOp::Add,
            AssignOp::Sub => BinaryOp::Sub,
            AssignOp::Mul => BinaryOp::Mul,
            AssignOp::Div => BinaryOp::Div,
            AssignOp::Rem => BinaryOp::Rem,
            AssignOp::BitAnd => BinaryOp::BitAnd,
            AssignOp::BitOr => BinaryOp::BitOr,
            AssignOp::BitXor => BinaryOp::BitXor,
            AssignOp::Shl => BinaryOp::Shl,
            AssignOp::Shr => BinaryOp::Shr,
            AssignOp::UShr => BinaryOp::UShr,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LambdaBody {
    Expr(Box<Expr>),
    Block(Block),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub span: Span,
    pub kind: ExprKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Literal(LitKind),
    Name(Ident),
    This,
    Super,
    FieldAccess {
        target: Box<Expr>,
        name: Ident,
    },
    MethodCall {
        target: Option<Box<Expr>>,
        name: Ident,
        args: Vec<Expr>,
    },
    New {
        ty: TypeRef,
        args: Vec<Expr>,
        body: Option<Vec<Member>>,
    },
    NewArray {
        elem: TypeRef,
        dims: Vec<Expr>,
        extra_dims: usize,
        init: Option<Box<Expr>>,
    },
    ArrayInit(Vec<Expr>),
    Index {
        array: Box<Expr>,
        index: Box<Expr>,
    },
    Unary {
        op: UnaryOp,
        op_span: Span,
        operand: Box<Expr>,
    },
    Binary {
        op: BinaryOp,
        op_span: Span,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Assign {
        op: AssignOp,
        op_span: Span,
        target: Box<Expr>,
        value: Box<Expr>,
    },
    Conditional {
        cond: Box<Expr>,
        then_expr: Box<Expr>,
        else_expr: Box<Expr>,
    },
    Cast {
        ty: TypeRef,
        expr: Box<Expr>,
    },
    InstanceOf {
        expr: Box<Expr>,
        ty: TypeRef,
    },
    Paren(Box<Expr>),
    Lambda {
        params: Vec<Ident>,
        body: LambdaBody,
    },
    MethodRef {
        target: Box<Expr>,
        name: Ident,
    },
    ClassLit(TypeRef),
}

pub const PREC_LAMBDA: u8 = 0;
pub const PREC_ASSIGN: u8 = 1;
pub const PREC_CONDITIONAL: u8 = 2;
pub const PREC_RELATIONAL: u8 = 9;
pub const PREC_UNARY: u8 = 13;
pub const PREC_POSTFIX: u8 = 14;
pub const PREC_PRIMARY: u8 = 15;

impl Expr {
    /// Binding strength of the outermost operator; higher binds tighter.
    pub fn precedence(&self) -> u8 {
        match &self.kind {
            ExprKind::Lambda { .. } => PREC_LAMBDA,
            ExprKind::Assign { .. } => PREC_ASSIGN,
            ExprKind::Conditional { .. } => PREC_CONDITIONAL,
            ExprKind::Binary { op, .. } => op.precedence(),
            ExprKind::InstanceOf { .. } => PREC_RELATIONAL,
            ExprKind::Unary { op: UnaryOp::PostInc | UnaryOp::PostDec, .. } => PREC_POSTFIX,
            ExprKind::Unary { .. } | ExprKind::Cast { .. } => PREC_UNARY,
            _ => PREC_PRIMARY,
        }
    }

    /// Strips any number of enclosing parentheses.
    pub fn unparen(&self) -> &Expr {
        let mut e = self;
        while let ExprKind::Paren(inner) = &e.kind {
            e = inner;
        }
        e
    }

    pub fn as_name(&self) -> Option<&str> {
        match &self.unparen().kind {
            ExprKind::Name(id) => Some(&id.name),
            _ => None,
        }
    }

    pub fn is_literal(&self) -> bool {
        matches!(self.kind, ExprKind::Literal(_))
    }
}
