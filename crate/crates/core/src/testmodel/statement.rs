use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::lang::{escape_str, CheckedProgram, FieldId, MethodId, Type};

/// A literal argument or binding.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Literal {
    Int(i64),
    Bool(bool),
    Str(String),
    Null,
}

impl Literal {
    pub fn ty(&self) -> Type {
        match self {
            Literal::Int(_) => Type::Int,
            Literal::Bool(_) => Type::Bool,
            Literal::Str(_) => Type::Str,
            Literal::Null => Type::Null,
        }
    }

    pub fn render(&self) -> String {
        match self {
            Literal::Int(n) => n.to_string(),
            Literal::Bool(b) => b.to_string(),
            Literal::Str(s) => escape_str(s),
            Literal::Null => "null".to_string(),
        }
    }
}

/// Reference to the variable defined by the statement at this position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VarRef(pub usize);

impl VarRef {
    /// A reference whose defining statement was removed or never existed.
    pub const DANGLING: VarRef = VarRef(usize::MAX);

    pub fn is_dangling(self) -> bool {
        self == VarRef::DANGLING
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Arg {
    Var(VarRef),
    Lit(Literal),
}

/// One statement of a test. The statement at position `i` defines variable
/// `v{i}` when it produces a value.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TestStatement {
    Construct {
        ctor: MethodId,
        args: Vec<Arg>,
    },
    Invoke {
        receiver: VarRef,
        method: MethodId,
        args: Vec<Arg>,
    },
    StaticInvoke {
        method: MethodId,
        args: Vec<Arg>,
    },
    SetField {
        receiver: VarRef,
        field: FieldId,
        value: Arg,
    },
    Literal {
        value: Literal,
    },
}

impl TestStatement {
    /// The method or constructor this statement calls, if any.
    pub fn callee(&self) -> Option<MethodId> {
        match self {
            TestStatement::Construct { ctor, .. } => Some(*ctor),
            TestStatement::Invoke { method, .. } | TestStatement::StaticInvoke { method, .. } => {
                Some(*method)
            }
            _ => None,
        }
    }

    /// Type of the variable this statement defines.
    pub fn defined_type(&self, program: &CheckedProgram) -> Option<Type> {
        match self {
            TestStatement::Construct { ctor, .. } => Some(Type::Ref(ctor.class)),
            TestStatement::Invoke { method, .. } | TestStatement::StaticInvoke { method, .. } => {
                program.method(*method).ret
            }
            TestStatement::SetField { .. } => None,
            TestStatement::Literal { value } => match value {
                Literal::Null => None,
                v => Some(v.ty()),
            },
        }
    }

    /// Every variable slot this statement reads, paired with the type the
    /// slot requires.
    pub fn slots(&self, program: &CheckedProgram) -> Vec<(Slot, Type)> {
        let mut out = Vec::new();
        match self {
            TestStatement::Construct { ctor: m, args }
            | TestStatement::StaticInvoke { method: m, args } => {
                let params = &program.method(*m).params;
                out.extend((0..args.len()).map(|i| (Slot::Arg(i), params[i])));
            }
            TestStatement::Invoke {
                method, args, ..
            } => {
                out.push((Slot::Receiver, Type::Ref(method.class)));
                let params = &program.method(*method).params;
                out.extend((0..args.len()).map(|i| (Slot::Arg(i), params[i])));
            }
            TestStatement::SetField { field, .. } => {
                out.push((Slot::Receiver, Type::Ref(field.class)));
                out.push((Slot::Value, program.field(*field).ty));
            }
            TestStatement::Literal { .. } => {}
        }
        out
    }

    pub fn slot(&self, slot: Slot) -> SlotRef<'_> {
        match (self, slot) {
            (
                TestStatement::Invoke { receiver, .. } | TestStatement::SetField { receiver, .. },
                Slot::Receiver,
            ) => SlotRef::Receiver(*receiver),
            (
                TestStatement::Construct { args, .. }
                | TestStatement::Invoke { args, .. }
                | TestStatement::StaticInvoke { args, .. },
                Slot::Arg(i),
            ) => SlotRef::Arg(&args[i]),
            (TestStatement::SetField { value, .. }, Slot::Value) => SlotRef::Arg(value),
            _ => panic!("statement has no slot {slot:?}"),
        }
    }

    pub fn set_slot(&mut self, slot: Slot, arg: Arg) {
        match (self, slot, arg) {
            (
                TestStatement::Invoke { receiver, .. } | TestStatement::SetField { receiver, .. },
                Slot::Receiver,
                Arg::Var(v),
            ) => *receiver = v,
            (
                TestStatement::Construct { args, .. }
                | TestStatement::Invoke { args, .. }
                | TestStatement::StaticInvoke { args, .. },
                Slot::Arg(i),
                arg,
            ) => args[i] = arg,
            (TestStatement::SetField { value, .. }, Slot::Value, arg) => *value = arg,
            (_, slot, arg) => panic!("cannot store {arg:?} in slot {slot:?}"),
        }
    }

    pub fn var_refs_mut(&mut self) -> Vec<&mut VarRef> {
        let mut out = Vec::new();
        match self {
            TestStatement::Construct { args, .. } | TestStatement::StaticInvoke { args, .. } => {
                for a in args.iter_mut() {
                    if let Arg::Var(v) = a {
                        out.push(v);
                    }
                }
            }
            TestStatement::Invoke { receiver, args, .. } => {
                out.push(receiver);
                for a in args.iter_mut() {
                    if let Arg::Var(v) = a {
                        out.push(v);
                    }
                }
            }
            TestStatement::SetField {
                receiver, value, ..
            } => {
                out.push(receiver);
                if let Arg::Var(v) = value {
                    out.push(v);
                }
            }
            TestStatement::Literal { .. } => {}
        }
        out
    }
}

/// Positions within a statement that may reference a variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Receiver,
    Arg(usize),
    Value,
}

#[derive(Clone, Copy, Debug)]
pub enum SlotRef<'a> {
    Receiver(VarRef),
    Arg(&'a Arg),
}

/// An ordered sequence of test statements.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TestCase {
    pub statements: Vec<TestStatement>,
}

/// Why a test case is not type-valid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Invalid {
    pub statement: usize,
    pub reason: String,
}

impl TestCase {
    pub fn new(statements: Vec<TestStatement>) -> Self {
        TestCase { statements }
    }

    pub fn len(&self) -> usize {
        self.statements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }

    /// Declared type of every variable, by defining position.
    pub fn var_types(&self, program: &CheckedProgram) -> Vec<Option<Type>> {
        self.statements
            .iter()
            .map(|s| s.defined_type(program))
            .collect()
    }

    /// Whether `v` refers to an earlier statement (before `at`) defining a
    /// value assignable to `want`.
    pub fn ref_ok(&self, program: &CheckedProgram, at: usize, v: VarRef, want: Type) -> bool {
        !v.is_dangling()
            && v.0 < at
            && self.statements[v.0]
                .defined_type(program)
                .is_some_and(|t| t.assignable_to(want))
    }

    /// Checks every typing rule for test statements.
    pub fn validate(&self, program: &CheckedProgram) -> Result<(), Invalid> {
        use crate::lang::ast::Visibility;
        for (i, stmt) in self.statements.iter().enumerate() {
            let bad = |reason: String| Invalid {
                statement: i,
                reason,
            };
            match stmt {
                TestStatement::Construct { ctor, args } => {
                    let m = program.method(*ctor);
                    if !m.is_ctor {
                        return Err(bad("construct of a non-constructor".into()));
                    }
                    if args.len() != m.arity() {
                        return Err(bad("wrong argument count".into()));
                    }
                }
                TestStatement::Invoke { method, args, .. } => {
                    let m = program.method(*method);
                    if m.is_ctor || m.is_static {
                        return Err(bad("invoke of a constructor or static method".into()));
                    }
                    if args.len() != m.arity() {
                        return Err(bad("wrong argument count".into()));
                    }
                }
                TestStatement::StaticInvoke { method, args } => {
                    let m = program.method(*method);
                    if !m.is_static {
                        return Err(bad("static invoke of an instance method".into()));
                    }
                    if args.len() != m.arity() {
                        return Err(bad("wrong argument count".into()));
                    }
                }
                TestStatement::SetField { field, .. } => {
                    if program.field(*field).visibility != Visibility::Public {
                        return Err(bad("set of a private field".into()));
                    }
                }
                TestStatement::Literal { value } => {
                    if *value == Literal::Null {
                        return Err(bad("null literal binding".into()));
                    }
                }
            }
            for (slot, want) in stmt.slots(program) {
                match stmt.slot(slot) {
                    SlotRef::Receiver(v) | SlotRef::Arg(&Arg::Var(v)) => {
                        if !self.ref_ok(program, i, v, want) {
                            return Err(bad(format!("{slot:?} references invalid variable {v:?}")));
                        }
                    }
                    SlotRef::Arg(Arg::Lit(lit)) => {
                        if !lit.ty().assignable_to(want) {
                            return Err(bad(format!("{slot:?} literal has wrong type")));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn is_valid(&self, program: &CheckedProgram) -> bool {
        self.validate(program).is_ok()
    }

    /// Inserts `stmt` at `pos`, shifting later references.
    pub fn insert(&mut self, pos: usize, stmt: TestStatement) {
        for later in &mut self.statements[pos..] {
            for v in later.var_refs_mut() {
                if !v.is_dangling() && v.0 >= pos {
                    v.0 += 1;
                }
            }
        }
        self.statements.insert(pos, stmt);
    }

    /// Removes the statement at `pos`. References to it become dangling.
    pub fn remove(&mut self, pos: usize) -> TestStatement {
        let removed = self.statements.remove(pos);
        for later in &mut self.statements[pos..] {
            for v in later.var_refs_mut() {
                if v.is_dangling() {
                    continue;
                }
                if v.0 == pos {
                    *v = VarRef::DANGLING;
                } else if v.0 > pos {
                    v.0 -= 1;
                }
            }
        }
        removed
    }

    /// Position of the last statement calling `method`.
    pub fn last_call_to(&self, method: MethodId) -> Option<usize> {
        self.statements
            .iter()
            .rposition(|s| s.callee() == Some(method) && !matches!(s, TestStatement::Construct { .. }))
    }

    /// Renders the test as MiniOO-like pseudocode, one statement per line.
    pub fn render(&self, program: &CheckedProgram) -> String {
        let mut out = String::new();
        let var = |v: &VarRef| {
            if v.is_dangling() {
                "<dangling>".to_string()
            } else {
                format!("v{}", v.0)
            }
        };
        let args = |args: &[Arg]| {
            args.iter()
                .map(|a| match a {
                    Arg::Var(v) => var(v),
                    Arg::Lit(l) => l.render(),
                })
                .collect::<Vec<_>>()
                .join(", ")
        };
        for (i, stmt) in self.statements.iter().enumerate() {
            let decl = match stmt.defined_type(program) {
                Some(t) => format!("{} v{i} = ", program.type_name(t)),
                None => String::new(),
            };
            let _ = match stmt {
                TestStatement::Construct { ctor, args: a } => writeln!(
                    out,
                    "{decl}new {}({});",
                    program.class(ctor.class).name,
                    args(a)
                ),
                TestStatement::Invoke {
                    receiver,
                    method,
                    args: a,
                } => writeln!(
                    out,
                    "{decl}{}.{}({});",
                    var(receiver),
                    program.method(*method).name,
                    args(a)
                ),
                TestStatement::StaticInvoke { method, args: a } => writeln!(
                    out,
                    "{decl}{}.{}({});",
                    program.class(method.class).name,
                    program.method(*method).name,
                    args(a)
                ),
                TestStatement::SetField {
                    receiver,
                    field,
                    value,
                } => writeln!(
                    out,
                    "{}.{} = {};",
                    var(receiver),
                    program.field(*field).name,
                    args(std::slice::from_ref(value))
                ),
                TestStatement::Literal { value } => writeln!(out, "{decl}{};", value.render()),
            };
        }
        out
    }
}
