//! Exhaustive search over short tests.
//!
//! Enumerates every statement sequence up to a length bound whose primitive
//! arguments come from the deterministic literal pool and whose reference
//! arguments are `null` or earlier variables. Sequences reaching the same
//! heap state are merged. The element set is derived from the program here
//! rather than taken from the search's cluster builder.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use modgen_core::interp::{ExecLimits, Executor, Heap, Value};
use modgen_core::lang::ast::Visibility;
use modgen_core::lang::{enumerate_branch_goals, BranchGoalId, CheckedProgram, ClassId, MethodId, Type};
use modgen_core::testmodel::{Arg, ClusterMode, Literal, LiteralPool, TestCase, TestStatement, VarRef};

pub struct OracleResult {
    pub goals: Vec<BranchGoalId>,
    pub covered: BTreeSet<BranchGoalId>,
    /// The shortest test found for each covered goal.
    pub witnesses: BTreeMap<BranchGoalId, TestCase>,
    /// False when the node cap stopped the enumeration early.
    pub exhaustive: bool,
    pub nodes: usize,
}

impl OracleResult {
    pub fn covers_all(&self) -> bool {
        self.covered.len() == self.goals.len()
    }
}

#[derive(Clone, Copy)]
enum Elem {
    Ctor(MethodId),
    Static(MethodId),
    Method(MethodId),
    Field(ClassId, modgen_core::lang::FieldId),
}

fn public(program: &CheckedProgram, m: MethodId) -> bool {
    program.method(m).visibility == Visibility::Public
}

fn writes_state(program: &CheckedProgram, m: MethodId) -> bool {
    let info = program.method(m);
    info.writes_this || info.self_calls.iter().any(|c| program.method(*c).writes_this)
}

fn elements(program: &CheckedProgram, target: MethodId, mode: ClusterMode) -> Vec<Elem> {
    let class = target.class;
    let mut out = Vec::new();
    for c in program.constructors(class).filter(|c| public(program, *c)) {
        out.push(Elem::Ctor(c));
    }
    if mode == ClusterMode::Strict {
        let info = program.method(target);
        out.push(if info.is_static {
            Elem::Static(target)
        } else {
            Elem::Method(target)
        });
        return out;
    }
    for m in program.method_ids(class) {
        let info = program.method(m);
        if info.is_ctor || !public(program, m) {
            continue;
        }
        out.push(if info.is_static {
            Elem::Static(m)
        } else {
            Elem::Method(m)
        });
    }
    for f in program.field_ids(class) {
        if program.field(f).visibility == Visibility::Public {
            out.push(Elem::Field(class, f));
        }
    }
    // Other classes named by parameter or field types, to a fixed point.
    let mut seen = BTreeSet::from([class]);
    let mut todo: Vec<ClassId> = Vec::new();
    let scan = |elems: &[Elem], todo: &mut Vec<ClassId>| {
        for e in elems {
            let tys: Vec<Type> = match *e {
                Elem::Ctor(m) | Elem::Static(m) | Elem::Method(m) => program.method(m).params.clone(),
                Elem::Field(_, f) => vec![program.field(f).ty],
            };
            for t in tys {
                if let Type::Ref(c) = t {
                    todo.push(c);
                }
            }
        }
    };
    scan(&out, &mut todo);
    while let Some(c) = todo.pop() {
        if !seen.insert(c) {
            continue;
        }
        let mut added = Vec::new();
        for m in program.method_ids(c).filter(|m| public(program, *m)) {
            let info = program.method(m);
            if info.is_ctor {
                added.push(Elem::Ctor(m));
            } else if info.is_static {
                if matches!(info.ret, Some(Type::Ref(_))) {
                    added.push(Elem::Static(m));
                }
            } else if writes_state(program, m) {
                added.push(Elem::Method(m));
            }
        }
        scan(&added, &mut todo);
        out.extend(added);
    }
    out
}

fn ser_value(program: &CheckedProgram, heap: &Heap, v: &Value, ids: &mut HashMap<u32, usize>, out: &mut String) {
    match v {
        Value::Int(n) => out.push_str(&format!("i{n}")),
        Value::Bool(b) => out.push_str(if *b { "T" } else { "F" }),
        Value::Str(s) => out.push_str(&format!("{:?}", &**s)),
        Value::Null => out.push('n'),
        Value::Obj(id) => {
            if let Some(k) = ids.get(&id.0) {
                out.push_str(&format!("@{k}"));
                return;
            }
            ids.insert(id.0, ids.len());
            let obj = heap.get(*id);
            out.push_str(&program.class(obj.class).name);
            out.push('{');
            for f in &obj.fields {
                ser_value(program, heap, f, ids, out);
                out.push(',');
            }
            out.push('}');
        }
    }
}

/// Canonical form of the objects bound to reference variables: variables are
/// ordered by their own serialization, then serialized together so aliasing
/// is preserved.
fn state_key(program: &CheckedProgram, exec: &Executor<'_>) -> String {
    let heap = exec.heap();
    let mut refs: Vec<(String, usize)> = exec
        .vars()
        .iter()
        .enumerate()
        .filter_map(|(i, v)| match v {
            Some(v @ Value::Obj(_)) => {
                let mut s = String::new();
                ser_value(program, heap, v, &mut HashMap::new(), &mut s);
                Some((s, i))
            }
            _ => None,
        })
        .collect();
    refs.sort();
    let mut ids = HashMap::new();
    let mut key = String::new();
    for (_, i) in refs {
        ser_value(program, heap, exec.var(i).unwrap(), &mut ids, &mut key);
        key.push(';');
    }
    key
}

struct Node<'p> {
    test: TestCase,
    exec: Executor<'p>,
}

fn choices(pool: &LiteralPool, node: &Node<'_>, ty: Type) -> Vec<Arg> {
    match ty {
        Type::Ref(c) => {
            let mut out = vec![Arg::Lit(Literal::Null)];
            out.extend(objects_of(node, c).into_iter().map(|v| Arg::Var(VarRef(v))));
            out
        }
        prim => pool.seeded(prim).into_iter().map(Arg::Lit).collect(),
    }
}

fn objects_of(node: &Node<'_>, class: ClassId) -> Vec<usize> {
    node.exec
        .vars()
        .iter()
        .enumerate()
        .filter_map(|(i, v)| match v {
            Some(Value::Obj(id)) if node.exec.heap().get(*id).class == class => Some(i),
            _ => None,
        })
        .collect()
}

fn arg_lists(pool: &LiteralPool, node: &Node<'_>, params: &[Type]) -> Vec<Vec<Arg>> {
    let mut lists = vec![Vec::new()];
    for &ty in params {
        let opts = choices(pool, node, ty);
        lists = lists
            .into_iter()
            .flat_map(|l| {
                opts.iter().map(move |a| {
                    let mut l = l.clone();
                    l.push(a.clone());
                    l
                })
            })
            .collect();
    }
    lists
}

fn statements(program: &CheckedProgram, pool: &LiteralPool, elems: &[Elem], node: &Node<'_>) -> Vec<TestStatement> {
    let mut out = Vec::new();
    for e in elems {
        match *e {
            Elem::Ctor(m) => {
                for args in arg_lists(pool, node, &program.method(m).params) {
                    out.push(TestStatement::Construct { ctor: m, args });
                }
            }
            Elem::Static(m) => {
                for args in arg_lists(pool, node, &program.method(m).params) {
                    out.push(TestStatement::StaticInvoke { method: m, args });
                }
            }
            Elem::Method(m) => {
                let recvs = objects_of(node, m.class);
                if recvs.is_empty() {
                    continue;
                }
                let lists = arg_lists(pool, node, &program.method(m).params);
                for r in recvs {
                    for args in &lists {
                        out.push(TestStatement::Invoke {
                            receiver: VarRef(r),
                            method: m,
                            args: args.clone(),
                        });
                    }
                }
            }
            Elem::Field(c, f) => {
                let recvs = objects_of(node, c);
                if recvs.is_empty() {
                    continue;
                }
                let values = choices(pool, node, program.field(f).ty);
                for r in recvs {
                    for value in &values {
                        out.push(TestStatement::SetField {
                            receiver: VarRef(r),
                            field: f,
                            value: value.clone(),
                        });
                    }
                }
            }
        }
    }
    out
}

/// Goals reachable by tests of at most `max_len` statements under `mode`.
/// Coverage is attributed to the target in EMOTE mode only.
pub fn reachable_goals(
    program: &CheckedProgram,
    target: MethodId,
    mode: ClusterMode,
    max_len: usize,
    node_cap: usize,
) -> OracleResult {
    let goals = enumerate_branch_goals(program, target);
    let attributed = mode == ClusterMode::Emote;
    let pool = LiteralPool::from_program(program);
    let elems = elements(program, target, mode);
    let limits = ExecLimits::default();

    let mut result = OracleResult {
        goals: goals.clone(),
        covered: BTreeSet::new(),
        witnesses: BTreeMap::new(),
        exhaustive: true,
        nodes: 0,
    };
    if goals.is_empty() {
        return result;
    }
    let mut seen: HashSet<String> = HashSet::new();
    let root = Node {
        test: TestCase::default(),
        exec: Executor::new(program, limits),
    };
    seen.insert(state_key(program, &root.exec));
    let mut level = vec![root];
    for depth in 1..=max_len {
        let mut next = Vec::new();
        for node in &level {
            for stmt in statements(program, &pool, &elems, node) {
                result.nodes += 1;
                if result.nodes > node_cap {
                    result.exhaustive = false;
                    return result;
                }
                let mut exec = node.exec.clone();
                let before = exec.events().len();
                exec.run_statement(&stmt);
                let mut test = node.test.clone();
                test.statements.push(stmt);
                for e in &exec.events()[before..] {
                    if e.goal.method == target
                        && (!attributed || e.root == target)
                        && result.covered.insert(e.goal)
                    {
                        result.witnesses.insert(e.goal, test.clone());
                    }
                }
                if result.covers_all() {
                    return result;
                }
                if exec.halted() || depth == max_len {
                    continue;
                }
                if seen.insert(state_key(program, &exec)) {
                    next.push(Node { test, exec });
                }
            }
        }
        if next.is_empty() {
            break;
        }
        level = next;
    }
    result
}
