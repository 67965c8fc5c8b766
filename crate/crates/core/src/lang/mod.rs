//! MiniOO: a small Java-like object-oriented language.
//!
//! [`parse_program`] turns source text into a surface [`ast::Program`];
//! [`typecheck`] resolves names and types and lowers method bodies to the
//! typed IR in [`ir`] that the interpreter executes. Each `if` and `while`
//! condition is a predicate with two branch goals, numbered in source order
//! within its method.

pub mod ast;
mod check;
pub mod ir;
mod lexer;
mod parser;
mod pretty;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use check::typecheck;
pub use ir::{CheckedProgram, ClassId, ClassInfo, FieldId, FieldInfo, MethodId, MethodInfo, Type};
pub use parser::parse_program;
pub use pretty::{escape_str, expr_to_string, pretty_print};

/// A positioned error message from the lexer, parser or checker.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub pos: ast::Pos,
    pub message: String,
}

impl Diagnostic {
    pub fn new(pos: ast::Pos, message: impl Into<String>) -> Self {
        Diagnostic {
            pos,
            message: message.into(),
        }
    }

    /// `file:line:col: message`
    pub fn render(&self, file: &str) -> String {
        format!("{file}:{}:{}: {}", self.pos.line, self.pos.col, self.message)
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.pos.line, self.pos.col, self.message)
    }
}

impl std::error::Error for Diagnostic {}

/// Parses and typechecks in one step.
pub fn compile(source: &str) -> Result<CheckedProgram, Vec<Diagnostic>> {
    let ast = parse_program(source).map_err(|d| vec![d])?;
    typecheck(ast)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Arm {
    True,
    False,
}

impl Arm {
    pub fn from_bool(b: bool) -> Arm {
        if b {
            Arm::True
        } else {
            Arm::False
        }
    }

    pub fn opposite(self) -> Arm {
        match self {
            Arm::True => Arm::False,
            Arm::False => Arm::True,
        }
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Arm::True => "TRUE",
            Arm::False => "FALSE",
        })
    }
}

/// One arm of one predicate of one method.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BranchGoalId {
    pub method: MethodId,
    pub predicate: u32,
    pub arm: Arm,
}

impl BranchGoalId {
    /// Dense index of this goal within its method's goal list.
    pub fn ordinal(&self) -> usize {
        self.predicate as usize * 2 + usize::from(self.arm == Arm::False)
    }

    pub fn display(&self, program: &CheckedProgram) -> String {
        format!(
            "{}#{}:{}",
            program.qualified_name(self.method),
            self.predicate,
            self.arm
        )
    }
}

/// Source-ordered branch goals of a method: `(p, TRUE), (p, FALSE)` for each
/// predicate `p`.
pub fn enumerate_branch_goals(program: &CheckedProgram, method: MethodId) -> Vec<BranchGoalId> {
    let count = program.method(method).predicates;
    (0..count)
        .flat_map(|p| {
            [Arm::True, Arm::False].map(|arm| BranchGoalId {
                method,
                predicate: p,
                arm,
            })
        })
        .collect()
}
