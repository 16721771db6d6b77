//! Untyped abstract syntax tree for MJ.
//!
//! Every statement and expression carries a [`NodeId`] assigned by the parser
//! in pre-order, so side tables (types, resolved callees, operation plans)
//! can be dense vectors. Node equality is structural: positions are metadata
//! and always compare equal, so a program compares equal to its re-parsed
//! canonical formatting.

use std::fmt;

/// Source position (1-based line and column).
///
/// Positions are metadata, not structure: `PartialEq` always returns `true`
/// so derived equality on AST nodes ignores them. Ordering helpers are
/// provided separately for diagnostics.
#[derive(Debug, Clone, Copy, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl PartialEq for Pos {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}
impl Eq for Pos {}

impl Pos {
    pub fn new(line: u32, col: u32) -> Self {
        Pos { line, col }
    }

    /// Total order over source positions (line, then column).
    pub fn sort_key(&self) -> (u32, u32) {
        (self.line, self.col)
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Dense node identifier, unique per program across statements and
/// expressions. Assigned in parse order, so structurally equal programs get
/// identical ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Surface type syntax. `List<T>` is the only parameterized builtin; arrays
/// are single-dimensional.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeExpr {
    Int,
    Float,
    Bool,
    Char,
    Void,
    Class(String),
    List(Box<TypeExpr>),
    Buffer,
    Array(Box<TypeExpr>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub classes: Vec<ClassDecl>,
    /// Total number of NodeIds handed out; side tables size to this.
    pub node_count: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassDecl {
    pub name: String,
    pub fields: Vec<FieldDecl>,
    pub methods: Vec<MethodDecl>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldDecl {
    pub name: String,
    pub ty: TypeExpr,
    pub public: bool,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodDecl {
    pub name: String,
    pub params: Vec<Param>,
    pub ret: TypeExpr,
    pub body: Vec<Stmt>,
    /// Constructors are declared without a return type, named as the class.
    pub is_ctor: bool,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub ty: TypeExpr,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub id: NodeId,
    pub pos: Pos,
    pub kind: StmtKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    /// `T name;` or `T name = init;`
    Decl {
        ty: TypeExpr,
        name: String,
        init: Option<Expr>,
    },
    /// `target = value;` — target is a Name, Field or Index expression.
    Assign { target: Expr, value: Expr },
    /// `x++;` / `x--;` (also usable as a `for` update).
    Incr { target: Expr, negative: bool },
    /// Expression statement: a call whose result is discarded.
    Expr(Expr),
    If {
        cond: Expr,
        then_branch: Vec<Stmt>,
        else_branch: Option<Vec<Stmt>>,
    },
    While {
        cond: Expr,
        body: Vec<Stmt>,
    },
    For {
        init: Option<Box<Stmt>>,
        cond: Expr,
        update: Option<Box<Stmt>>,
        body: Vec<Stmt>,
    },
    Break,
    Return(Option<Expr>),
    /// Bare block: scopes declarations but is transparent to basic blocks.
    Block(Vec<Stmt>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnOp {
    Neg,
    Not,
}

/// Receiver of a call expression.
#[derive(Debug, Clone, PartialEq)]
pub enum CallRecv {
    /// Bare call: own method or a bare library function (`print`, `readInput`).
    None,
    /// `expr.name(args)`
    Expr(Box<Expr>),
    /// `Math.name(args)` — static library namespace.
    Math,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub id: NodeId,
    pub pos: Pos,
    pub kind: ExprKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    IntLit(i32),
    FloatLit(f64),
    BoolLit(bool),
    CharLit(char),
    NullLit,
    /// Bare name: local, parameter, or field of the enclosing class.
    Name(String),
    /// `recv.name` field access.
    Field { recv: Box<Expr>, name: String },
    /// `recv[index]`
    Index { arr: Box<Expr>, idx: Box<Expr> },
    Unary { op: UnOp, operand: Box<Expr> },
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Call { recv: CallRecv, name: String, args: Vec<Expr> },
    /// `new C(args)`, `new List<T>()`, `new Buffer(n)`
    New { ty: TypeExpr, args: Vec<Expr> },
    /// `new T[len]`
    NewArray { elem: TypeExpr, len: Box<Expr> },
}

impl Program {
    pub fn class(&self, name: &str) -> Option<&ClassDecl> {
        self.classes.iter().find(|c| c.name == name)
    }

    pub fn method(&self, class: &str, method: &str) -> Option<&MethodDecl> {
        self.class(class)?.methods.iter().find(|m| m.name == method)
    }
}
