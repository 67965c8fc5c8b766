//! Surface syntax tree produced by the parser.
//!
//! Source positions are carried in [`Pos`], which never participates in
//! structural equality: two trees parsed from differently formatted but
//! equivalent sources compare equal.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A 1-based line/column position in a source file.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl Pos {
    pub fn new(line: u32, col: u32) -> Self {
        Pos { line, col }
    }
}

impl PartialEq for Pos {
    fn eq(&self, _other: &Pos) -> bool {
        true
    }
}

impl Eq for Pos {}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Visibility {
    Public,
    Private,
}

/// A type as written in source. Class names are resolved by the checker.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TypeName {
    Int,
    Bool,
    Str,
    Class(String),
}

impl fmt::Display for TypeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeName::Int => f.write_str("int"),
            TypeName::Bool => f.write_str("bool"),
            TypeName::Str => f.write_str("str"),
            TypeName::Class(name) => f.write_str(name),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub classes: Vec<ClassDef>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassDef {
    pub name: String,
    pub fields: Vec<FieldDef>,
    pub constructors: Vec<MethodDef>,
    pub methods: Vec<MethodDef>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldDef {
    pub name: String,
    pub ty: TypeName,
    pub visibility: Visibility,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub ty: TypeName,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MethodDef {
    pub name: String,
    pub params: Vec<Param>,
    /// `None` for `void` methods and constructors.
    pub return_type: Option<TypeName>,
    pub is_static: bool,
    pub visibility: Visibility,
    pub body: Vec<Stmt>,
    /// Set for constructors the parser synthesized because none was declared.
    pub synthesized: bool,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stmt {
    /// `name = value;` or, with a declared type, `T name = value;`.
    Assign {
        declared: Option<TypeName>,
        name: String,
        value: Expr,
        pos: Pos,
    },
    /// `receiver.field = value;`
    FieldAssign {
        receiver: Expr,
        field: String,
        value: Expr,
        pos: Pos,
    },
    If {
        cond: Expr,
        then_body: Vec<Stmt>,
        else_body: Vec<Stmt>,
        pos: Pos,
    },
    While {
        cond: Expr,
        body: Vec<Stmt>,
        pos: Pos,
    },
    Return {
        value: Option<Expr>,
        pos: Pos,
    },
    Expr {
        expr: Expr,
        pos: Pos,
    },
}

impl Stmt {
    pub fn pos(&self) -> Pos {
        match self {
            Stmt::Assign { pos, .. }
            | Stmt::FieldAssign { pos, .. }
            | Stmt::If { pos, .. }
            | Stmt::While { pos, .. }
            | Stmt::Return { pos, .. }
            | Stmt::Expr { pos, .. } => *pos,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul => 6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnOp {
    Not,
    Neg,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Int(i64, Pos),
    Bool(bool, Pos),
    Str(String, Pos),
    Null(Pos),
    This(Pos),
    /// A bare identifier: a local, a parameter, or an implicit `this` field.
    Var(String, Pos),
    Field {
        receiver: Box<Expr>,
        field: String,
        pos: Pos,
    },
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
        pos: Pos,
    },
    Unary {
        op: UnOp,
        operand: Box<Expr>,
        pos: Pos,
    },
    /// `receiver.method(args)` or, with no receiver, `method(args)` on the
    /// enclosing class. A receiver that names a class (and no local) is a
    /// static call; string operations are calls on `str` receivers.
    Call {
        receiver: Option<Box<Expr>>,
        method: String,
        args: Vec<Expr>,
        pos: Pos,
    },
    New {
        class: String,
        args: Vec<Expr>,
        pos: Pos,
    },
}

impl Expr {
    pub fn pos(&self) -> Pos {
        match self {
            Expr::Int(_, pos)
            | Expr::Bool(_, pos)
            | Expr::Str(_, pos)
            | Expr::Null(pos)
            | Expr::This(pos)
            | Expr::Var(_, pos) => *pos,
            Expr::Field { pos, .. }
            | Expr::Binary { pos, .. }
            | Expr::Unary { pos, .. }
            | Expr::Call { pos, .. }
            | Expr::New { pos, .. } => *pos,
        }
    }
}

impl Program {
    pub fn class(&self, name: &str) -> Option<&ClassDef> {
        self.classes.iter().find(|c| c.name == name)
    }

    /// Every string literal in the program, in source order, deduplicated.
    pub fn string_literals(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let mut push = |s: &str| {
            if !out.iter().any(|o| o == s) {
                out.push(s.to_string());
            }
        };
        for class in &self.classes {
            for method in class.constructors.iter().chain(&class.methods) {
                visit_stmts(&method.body, &mut |e| {
                    if let Expr::Str(s, _) = e {
                        push(s);
                    }
                });
            }
        }
        out
    }
}

fn visit_stmts(stmts: &[Stmt], f: &mut dyn FnMut(&Expr)) {
    for stmt in stmts {
        match stmt {
            Stmt::Assign { value, .. } => visit_expr(value, f),
            Stmt::FieldAssign {
                receiver, value, ..
            } => {
                visit_expr(receiver, f);
                visit_expr(value, f);
            }
            Stmt::If {
                cond,
                then_body,
                else_body,
                ..
            } => {
                visit_expr(cond, f);
                visit_stmts(then_body, f);
                visit_stmts(else_body, f);
            }
            Stmt::While { cond, body, .. } => {
                visit_expr(cond, f);
                visit_stmts(body, f);
            }
            Stmt::Return { value, .. } => {
                if let Some(v) = value {
                    visit_expr(v, f);
                }
            }
            Stmt::Expr { expr, .. } => visit_expr(expr, f),
        }
    }
}

fn visit_expr(expr: &Expr, f: &mut dyn FnMut(&Expr)) {
    f(expr);
    match expr {
        Expr::Field { receiver, .. } => visit_expr(receiver, f),
        Expr::Binary { lhs, rhs, .. } => {
            visit_expr(lhs, f);
            visit_expr(rhs, f);
        }
        Expr::Unary { operand, .. } => visit_expr(operand, f),
        Expr::Call { receiver, args, .. } => {
            if let Some(r) = receiver {
                visit_expr(r, f);
            }
            for a in args {
                visit_expr(a, f);
            }
        }
        Expr::New { args, .. } => {
            for a in args {
                visit_expr(a, f);
            }
        }
        _ => {}
    }
}
