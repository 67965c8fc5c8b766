use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::lang::ast::Visibility;
use crate::lang::{CheckedProgram, ClassId, FieldId, MethodId, Type};

use super::LiteralPool;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterMode {
    /// Every public member of the class, no suffix constraint.
    Whole,
    /// Target-class constructors and the target method only.
    Strict,
    /// Setup calls allowed; tests end with the target call and only
    /// target-rooted coverage counts.
    Emote,
}

impl ClusterMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ClusterMode::Whole => "whole",
            ClusterMode::Strict => "strict",
            ClusterMode::Emote => "emote",
        }
    }

    /// Whether tests must end with a call to the target.
    pub fn requires_suffix(self) -> bool {
        self == ClusterMode::Emote
    }
}

impl fmt::Display for ClusterMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClusterMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "whole" => Ok(ClusterMode::Whole),
            "strict" => Ok(ClusterMode::Strict),
            "emote" => Ok(ClusterMode::Emote),
            other => Err(format!("unknown mode {other:?} (expected strict, emote or whole)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ClusterError {
    #[error("unknown class {0}")]
    UnknownClass(String),
    #[error("unknown method {class}.{method}")]
    UnknownMethod { class: String, method: String },
    #[error("{0} is not a callable public method")]
    NotCallable(String),
}

/// Anything a random statement can be built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    Call(MethodId),
    SetField(FieldId),
}

/// The pool of program elements a search may draw statements from.
#[derive(Clone, Debug)]
pub struct TestCluster {
    pub mode: ClusterMode,
    pub target: MethodId,
    pub test_methods: BTreeSet<MethodId>,
    /// Constructors and static factories.
    pub generators: BTreeSet<MethodId>,
    /// Impure public methods usable for setup.
    pub modifiers: BTreeSet<MethodId>,
    /// Public fields that tests may assign directly.
    pub settable_fields: BTreeSet<FieldId>,
    pub literals: LiteralPool,
    /// Union of the sets above, in a fixed order.
    pub elements: Vec<Element>,
}

impl TestCluster {
    /// Generators producing a value assignable to `ty`.
    pub fn generators_for(&self, program: &CheckedProgram, ty: Type) -> Vec<MethodId> {
        self.generators
            .iter()
            .copied()
            .filter(|g| produces(program, *g).is_some_and(|t| t.assignable_to(ty)))
            .collect()
    }

    pub fn contains(&self, element: Element) -> bool {
        self.elements.binary_search(&element).is_ok()
    }
}

/// Type of the value a generator yields.
pub fn produces(program: &CheckedProgram, m: MethodId) -> Option<Type> {
    let info = program.method(m);
    if info.is_ctor {
        Some(Type::Ref(m.class))
    } else {
        info.ret
    }
}

fn is_public(program: &CheckedProgram, m: MethodId) -> bool {
    program.method(m).visibility == Visibility::Public
}

/// Syntactic impurity: the method assigns a field of `this`, directly or
/// through a method it calls on `this`, one level deep.
pub fn is_impure(program: &CheckedProgram, m: MethodId) -> bool {
    let info = program.method(m);
    !info.is_static
        && !info.is_ctor
        && (info.writes_this
            || info
                .self_calls
                .iter()
                .any(|c| program.method(*c).writes_this))
}

/// Resolves a target by class and method name.
pub fn resolve_target(
    program: &CheckedProgram,
    class: &str,
    method: &str,
) -> Result<MethodId, ClusterError> {
    let cid = program
        .class_id(class)
        .ok_or_else(|| ClusterError::UnknownClass(class.to_string()))?;
    let target = program
        .methods_named(cid, method)
        .next()
        .ok_or_else(|| ClusterError::UnknownMethod {
            class: class.to_string(),
            method: method.to_string(),
        })?;
    if !is_public(program, target) {
        return Err(ClusterError::NotCallable(program.qualified_name(target)));
    }
    Ok(target)
}

pub fn build_cluster(
    program: &CheckedProgram,
    class: &str,
    method: &str,
    mode: ClusterMode,
) -> Result<TestCluster, ClusterError> {
    let target = resolve_target(program, class, method)?;
    Ok(build_cluster_for(program, target, mode))
}

pub fn build_cluster_for(program: &CheckedProgram, target: MethodId, mode: ClusterMode) -> TestCluster {
    let class = target.class;
    let mut test_methods = BTreeSet::from([target]);
    let mut generators = BTreeSet::new();
    let mut modifiers = BTreeSet::new();
    let mut settable_fields = BTreeSet::new();

    match mode {
        ClusterMode::Strict => {
            generators.extend(program.constructors(class).filter(|c| is_public(program, *c)));
        }
        ClusterMode::Emote | ClusterMode::Whole => {
            test_methods.extend(
                program
                    .method_ids(class)
                    .filter(|m| !program.method(*m).is_ctor && is_public(program, *m)),
            );
            settable_fields.extend(
                program
                    .field_ids(class)
                    .filter(|f| program.field(*f).visibility == Visibility::Public),
            );
            // Classes reachable through parameter types of selectable calls.
            let mut relevant: BTreeSet<ClassId> = BTreeSet::from([class]);
            let mut frontier = vec![class];
            let param_types = |m: MethodId, out: &mut Vec<ClassId>| {
                for t in &program.method(m).params {
                    if let Type::Ref(c) = t {
                        out.push(*c);
                    }
                }
            };
            let mut pending: Vec<ClassId> = Vec::new();
            for m in &test_methods {
                param_types(*m, &mut pending);
            }
            for f in &settable_fields {
                if let Type::Ref(c) = program.field(*f).ty {
                    pending.push(c);
                }
            }
            frontier.append(&mut pending);
            while let Some(c) = frontier.pop() {
                relevant.insert(c);
                let ctors: Vec<MethodId> = program
                    .constructors(c)
                    .filter(|m| is_public(program, *m))
                    .collect();
                for m in ctors {
                    if generators.insert(m) {
                        param_types(m, &mut pending);
                    }
                }
                for m in program.method_ids(c) {
                    let info = program.method(m);
                    if !is_public(program, m) || info.is_ctor {
                        continue;
                    }
                    if info.is_static && info.ret.is_some_and(Type::is_ref) {
                        if generators.insert(m) {
                            param_types(m, &mut pending);
                        }
                    } else if is_impure(program, m) && modifiers.insert(m) {
                        param_types(m, &mut pending);
                    }
                }
                for p in pending.drain(..) {
                    if !relevant.contains(&p) {
                        relevant.insert(p);
                        frontier.push(p);
                    }
                }
            }
        }
    }

    let mut elements: Vec<Element> = test_methods
        .iter()
        .chain(&generators)
        .chain(&modifiers)
        .map(|m| Element::Call(*m))
        .chain(settable_fields.iter().map(|f| Element::SetField(*f)))
        .collect();
    elements.sort();
    elements.dedup();

    TestCluster {
        mode,
        target,
        test_methods,
        generators,
        modifiers,
        settable_fields,
        literals: LiteralPool::from_program(program),
        elements,
    }
}
