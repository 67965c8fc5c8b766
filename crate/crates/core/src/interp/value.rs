use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::lang::{CheckedProgram, ClassId, Type};
use crate::testmodel::Literal;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ObjId(pub u32);

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Str(Arc<str>),
    Null,
    Obj(ObjId),
}

impl Value {
    pub fn default_for(ty: Type) -> Value {
        match ty {
            Type::Int => Value::Int(0),
            Type::Bool => Value::Bool(false),
            Type::Str => Value::Str(Arc::from("")),
            Type::Ref(_) | Type::Null => Value::Null,
        }
    }

    pub fn from_literal(lit: &Literal) -> Value {
        match lit {
            Literal::Int(n) => Value::Int(*n),
            Literal::Bool(b) => Value::Bool(*b),
            Literal::Str(s) => Value::Str(Arc::from(s.as_str())),
            Literal::Null => Value::Null,
        }
    }

    pub fn as_int(&self) -> i64 {
        match self {
            Value::Int(n) => *n,
            other => panic!("typechecked program produced {other:?} where int expected"),
        }
    }

    pub fn as_bool(&self) -> bool {
        match self {
            Value::Bool(b) => *b,
            other => panic!("typechecked program produced {other:?} where bool expected"),
        }
    }

    pub fn as_str(&self) -> &Arc<str> {
        match self {
            Value::Str(s) => s,
            other => panic!("typechecked program produced {other:?} where str expected"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Object {
    pub class: ClassId,
    pub fields: Vec<Value>,
}

/// Objects allocated during one test execution.
#[derive(Clone, Debug, Default)]
pub struct Heap {
    objects: Vec<Object>,
}

impl Heap {
    /// Allocates an instance of `class` with every field at its default.
    pub fn alloc(&mut self, program: &CheckedProgram, class: ClassId) -> ObjId {
        let fields = program
            .class(class)
            .fields
            .iter()
            .map(|f| Value::default_for(f.ty))
            .collect();
        self.objects.push(Object { class, fields });
        ObjId(self.objects.len() as u32 - 1)
    }

    pub fn get(&self, id: ObjId) -> &Object {
        &self.objects[id.0 as usize]
    }

    pub fn get_mut(&mut self, id: ObjId) -> &mut Object {
        &mut self.objects[id.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }
}
