//! Tree-walking interpreter for checked MiniOO programs.
//!
//! Executing a test records one [`BranchEvent`] per predicate evaluation,
//! tagged with the method of the top-level test statement whose call chain
//! produced it.

pub mod distance;
mod exec;
mod value;

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::lang::{BranchGoalId, CheckedProgram, MethodId};

pub use exec::{execute_test, Executor};
pub use value::{Heap, ObjId, Object, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecLimits {
    /// Interpreter steps allowed for a whole test.
    pub max_steps: u64,
    /// Maximum call nesting before a stack overflow fault.
    pub max_depth: u32,
}

impl Default for ExecLimits {
    fn default() -> Self {
        ExecLimits {
            max_steps: 100_000,
            max_depth: 200,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchEvent {
    /// The arm that was taken.
    pub goal: BranchGoalId,
    /// Raw distance to the arm not taken; always positive.
    pub opposite_distance: f64,
    /// Callee of the top-level test statement that was executing.
    pub root: MethodId,
    pub step: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FaultKind {
    NullDereference,
    IndexOutOfBounds,
    StackOverflow,
    /// A test statement referenced a variable with no value.
    InvalidReference,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Completed,
    RuntimeFault {
        kind: FaultKind,
        statement: usize,
        line: u32,
        col: u32,
    },
    StepLimit {
        statement: usize,
    },
}

impl Outcome {
    /// Index of the statement that stopped execution, if any.
    pub fn stopped_at(&self) -> Option<usize> {
        match self {
            Outcome::Completed => None,
            Outcome::RuntimeFault { statement, .. } | Outcome::StepLimit { statement } => {
                Some(*statement)
            }
        }
    }

    fn label(&self) -> String {
        match self {
            Outcome::Completed => "completed".to_string(),
            Outcome::RuntimeFault {
                kind,
                statement,
                line,
                col,
            } => format!("fault:{kind:?}@{statement}({line}:{col})"),
            Outcome::StepLimit { statement } => format!("step-limit@{statement}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExecutionTrace {
    pub events: Vec<BranchEvent>,
    pub outcome: Outcome,
    pub steps: u64,
}

impl ExecutionTrace {
    /// One `goal<TAB>root<TAB>distance` line per event after an outcome
    /// header.
    pub fn dump(&self, program: &CheckedProgram) -> String {
        let mut out = format!("# outcome={} steps={}\n", self.outcome.label(), self.steps);
        for e in &self.events {
            let _ = writeln!(
                out,
                "{}\t{}\t{}",
                e.goal.display(program),
                program.qualified_name(e.root),
                e.opposite_distance
            );
        }
        out
    }
}

/// Events whose call chain was rooted at `target`.
pub fn attributed_events(trace: &ExecutionTrace, target: MethodId) -> impl Iterator<Item = &BranchEvent> {
    trace.events.iter().filter(move |e| e.root == target)
}
