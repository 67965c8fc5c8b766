//! Typed, name-resolved program representation.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::ast::{BinOp, Pos, Program, Visibility};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ClassId(pub u32);

/// A constructor or method: index into [`ClassInfo::methods`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MethodId {
    pub class: ClassId,
    pub index: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FieldId {
    pub class: ClassId,
    pub index: u32,
}

/// Value types. `Null` is only the type of the `null` literal; it is
/// assignable to every `Ref`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Type {
    Int,
    Bool,
    Str,
    Ref(ClassId),
    Null,
}

impl Type {
    pub fn is_ref(self) -> bool {
        matches!(self, Type::Ref(_))
    }

    pub fn is_primitive(self) -> bool {
        matches!(self, Type::Int | Type::Bool | Type::Str)
    }

    /// Whether a value of type `self` may be stored where `target` is expected.
    pub fn assignable_to(self, target: Type) -> bool {
        self == target || (self == Type::Null && target.is_ref())
    }
}

#[derive(Clone, Debug)]
pub struct FieldInfo {
    pub name: String,
    pub ty: Type,
    pub visibility: Visibility,
}

#[derive(Clone, Debug)]
pub struct MethodInfo {
    pub name: String,
    pub param_names: Vec<String>,
    pub params: Vec<Type>,
    /// `None` for void methods and constructors.
    pub ret: Option<Type>,
    pub is_static: bool,
    pub is_ctor: bool,
    pub visibility: Visibility,
    pub body: Vec<TStmt>,
    /// Local slots, parameters first.
    pub locals: u32,
    pub predicates: u32,
    /// Assigns a field of `this` directly.
    pub writes_this: bool,
    /// Methods invoked on `this` (explicitly or implicitly) in the body.
    pub self_calls: Vec<MethodId>,
    pub pos: Pos,
}

impl MethodInfo {
    pub fn arity(&self) -> usize {
        self.params.len()
    }
}

#[derive(Clone, Debug)]
pub struct ClassInfo {
    pub name: String,
    pub fields: Vec<FieldInfo>,
    /// Constructors first, then methods, each in declaration order.
    pub methods: Vec<MethodInfo>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StrOp {
    Length,
    Contains,
    IndexOf,
    Concat,
    CharAt,
    Substring,
}

impl StrOp {
    pub fn from_name(name: &str) -> Option<StrOp> {
        Some(match name {
            "length" => StrOp::Length,
            "contains" => StrOp::Contains,
            "indexOf" => StrOp::IndexOf,
            "concat" => StrOp::Concat,
            "charAt" => StrOp::CharAt,
            "substring" => StrOp::Substring,
            _ => return None,
        })
    }

    pub fn signature(self) -> (&'static [Type], Type) {
        match self {
            StrOp::Length => (&[], Type::Int),
            StrOp::Contains => (&[Type::Str], Type::Bool),
            StrOp::IndexOf => (&[Type::Str], Type::Int),
            StrOp::Concat => (&[Type::Str], Type::Str),
            StrOp::CharAt => (&[Type::Int], Type::Str),
            StrOp::Substring => (&[Type::Int, Type::Int], Type::Str),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TExpr {
    pub kind: TExprKind,
    /// `None` only for calls to void methods.
    pub ty: Option<Type>,
    pub pos: Pos,
}

#[derive(Clone, Debug)]
pub enum TExprKind {
    Int(i64),
    Bool(bool),
    Str(Arc<str>),
    Null,
    This,
    Local(u32),
    Field {
        receiver: Box<TExpr>,
        field: FieldId,
    },
    Binary {
        op: BinOp,
        lhs: Box<TExpr>,
        rhs: Box<TExpr>,
    },
    Not(Box<TExpr>),
    Neg(Box<TExpr>),
    StrOp {
        op: StrOp,
        receiver: Box<TExpr>,
        args: Vec<TExpr>,
    },
    /// `receiver` is `None` for static calls.
    Call {
        receiver: Option<Box<TExpr>>,
        method: MethodId,
        args: Vec<TExpr>,
    },
    New {
        ctor: MethodId,
        args: Vec<TExpr>,
    },
}

#[derive(Clone, Debug)]
pub enum TStmt {
    SetLocal {
        slot: u32,
        value: TExpr,
    },
    SetField {
        receiver: TExpr,
        field: FieldId,
        value: TExpr,
        pos: Pos,
    },
    If {
        predicate: u32,
        cond: TExpr,
        then_body: Vec<TStmt>,
        else_body: Vec<TStmt>,
    },
    While {
        predicate: u32,
        cond: TExpr,
        body: Vec<TStmt>,
    },
    Return(Option<TExpr>),
    Expr(TExpr),
}

/// A program that parsed and typechecked. Immutable; share it behind an
/// `Arc` across threads.
#[derive(Clone, Debug)]
pub struct CheckedProgram {
    pub ast: Program,
    pub classes: Vec<ClassInfo>,
    pub string_literals: Vec<String>,
}

impl CheckedProgram {
    pub fn class(&self, id: ClassId) -> &ClassInfo {
        &self.classes[id.0 as usize]
    }

    pub fn method(&self, id: MethodId) -> &MethodInfo {
        &self.class(id.class).methods[id.index as usize]
    }

    pub fn field(&self, id: FieldId) -> &FieldInfo {
        &self.class(id.class).fields[id.index as usize]
    }

    pub fn class_id(&self, name: &str) -> Option<ClassId> {
        self.classes
            .iter()
            .position(|c| c.name == name)
            .map(|i| ClassId(i as u32))
    }

    pub fn class_ids(&self) -> impl Iterator<Item = ClassId> {
        (0..self.classes.len() as u32).map(ClassId)
    }

    pub fn method_ids(&self, class: ClassId) -> impl Iterator<Item = MethodId> {
        (0..self.class(class).methods.len() as u32).map(move |index| MethodId { class, index })
    }

    pub fn field_ids(&self, class: ClassId) -> impl Iterator<Item = FieldId> {
        (0..self.class(class).fields.len() as u32).map(move |index| FieldId { class, index })
    }

    pub fn constructors(&self, class: ClassId) -> impl Iterator<Item = MethodId> + '_ {
        self.method_ids(class).filter(|m| self.method(*m).is_ctor)
    }

    /// Non-constructor methods with the given name, any arity.
    pub fn methods_named<'a>(
        &'a self,
        class: ClassId,
        name: &'a str,
    ) -> impl Iterator<Item = MethodId> + 'a {
        self.method_ids(class).filter(move |m| {
            let info = self.method(*m);
            !info.is_ctor && info.name == name
        })
    }

    /// Resolves `Class.method`, failing if it is ambiguous across arities.
    pub fn find_method(&self, class: &str, method: &str) -> Option<MethodId> {
        let cid = self.class_id(class)?;
        let mut found = self.methods_named(cid, method);
        let first = found.next()?;
        match found.next() {
            Some(_) => None,
            None => Some(first),
        }
    }

    pub fn qualified_name(&self, id: MethodId) -> String {
        let class = self.class(id.class);
        let m = self.method(id);
        if m.is_ctor {
            format!("{}.<init>/{}", class.name, m.arity())
        } else {
            format!("{}.{}/{}", class.name, m.name, m.arity())
        }
    }

    pub fn type_name(&self, ty: Type) -> String {
        match ty {
            Type::Int => "int".into(),
            Type::Bool => "bool".into(),
            Type::Str => "str".into(),
            Type::Null => "null".into(),
            Type::Ref(c) => self.class(c).name.clone(),
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Int => f.write_str("int"),
            Type::Bool => f.write_str("bool"),
            Type::Str => f.write_str("str"),
            Type::Null => f.write_str("null"),
            Type::Ref(c) => write!(f, "class#{}", c.0),
        }
    }
}
