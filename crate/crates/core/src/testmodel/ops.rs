//! Operators that grow and repair test cases while keeping them type-valid.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::lang::{CheckedProgram, Type};

use super::{Arg, Element, Slot, SlotRef, TestCase, TestCluster, TestStatement, VarRef};

/// No selectable element could be satisfied from the cluster.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("saturated: {0}")]
pub struct Saturated(pub String);

/// Generator chains deeper than this are abandoned.
const MAX_DEPTH: u32 = 4;
const REUSE_RECEIVER: f64 = 0.9;
const REUSE_REF_ARG: f64 = 0.6;
const NULL_REF_ARG: f64 = 0.2;
const REUSE_PRIMITIVE: f64 = 0.1;

/// Earlier variables (before `pos`) whose type fits `ty`.
pub fn candidates(program: &CheckedProgram, test: &TestCase, pos: usize, ty: Type) -> Vec<VarRef> {
    test.statements[..pos]
        .iter()
        .enumerate()
        .filter(|(_, s)| s.defined_type(program).is_some_and(|t| t.assignable_to(ty)))
        .map(|(i, _)| VarRef(i))
        .collect()
}

/// Inserts a generator for `ty` at `*pos`, advancing `*pos` past everything
/// inserted. Returns the new variable.
fn generate<R: Rng + ?Sized>(
    program: &CheckedProgram,
    cluster: &TestCluster,
    test: &mut TestCase,
    pos: &mut usize,
    ty: Type,
    rng: &mut R,
    depth: u32,
) -> Result<VarRef, Saturated> {
    let gens = cluster.generators_for(program, ty);
    let Some(&g) = gens.choose(rng) else {
        return Err(Saturated(format!("no generator for {}", program.type_name(ty))));
    };
    let stmt = build(program, cluster, test, pos, Element::Call(g), rng, depth + 1)?;
    test.insert(*pos, stmt);
    *pos += 1;
    Ok(VarRef(*pos - 1))
}

/// A variable holding an object of type `ty`: reused or freshly generated.
fn object<R: Rng + ?Sized>(
    program: &CheckedProgram,
    cluster: &TestCluster,
    test: &mut TestCase,
    pos: &mut usize,
    ty: Type,
    rng: &mut R,
    depth: u32,
) -> Result<VarRef, Saturated> {
    let existing = candidates(program, test, *pos, ty);
    if !existing.is_empty() && (rng.gen_bool(REUSE_RECEIVER) || depth >= MAX_DEPTH) {
        return Ok(*existing.choose(rng).unwrap());
    }
    match generate(program, cluster, test, pos, ty, rng, depth) {
        Ok(v) => Ok(v),
        Err(e) => existing.choose(rng).copied().ok_or(e),
    }
}

/// An argument of type `ty` for a statement about to be placed at `*pos`.
pub fn materialize<R: Rng + ?Sized>(
    program: &CheckedProgram,
    cluster: &TestCluster,
    test: &mut TestCase,
    pos: &mut usize,
    ty: Type,
    rng: &mut R,
    depth: u32,
) -> Result<Arg, Saturated> {
    let existing = candidates(program, test, *pos, ty);
    if ty.is_ref() {
        let roll: f64 = rng.gen();
        if !existing.is_empty() && roll < REUSE_REF_ARG {
            return Ok(Arg::Var(*existing.choose(rng).unwrap()));
        }
        if roll < REUSE_REF_ARG + NULL_REF_ARG || depth >= MAX_DEPTH {
            return Ok(Arg::Lit(super::Literal::Null));
        }
        return Ok(match generate(program, cluster, test, pos, ty, rng, depth) {
            Ok(v) => Arg::Var(v),
            Err(_) => Arg::Lit(super::Literal::Null),
        });
    }
    if !existing.is_empty() && rng.gen_bool(REUSE_PRIMITIVE) {
        return Ok(Arg::Var(*existing.choose(rng).unwrap()));
    }
    Ok(Arg::Lit(cluster.literals.sample(ty, rng)))
}

/// Builds a statement for `element` to be inserted at `*pos`, inserting any
/// statements its receiver and arguments need before it.
fn build<R: Rng + ?Sized>(
    program: &CheckedProgram,
    cluster: &TestCluster,
    test: &mut TestCase,
    pos: &mut usize,
    element: Element,
    rng: &mut R,
    depth: u32,
) -> Result<TestStatement, Saturated> {
    if depth > MAX_DEPTH {
        return Err(Saturated("generator chain too deep".into()));
    }
    match element {
        Element::Call(m) => {
            let info = program.method(m);
            let receiver = if info.is_ctor || info.is_static {
                None
            } else {
                Some(object(program, cluster, test, pos, Type::Ref(m.class), rng, depth)?)
            };
            let mut args = Vec::with_capacity(info.arity());
            for &ty in &info.params {
                args.push(materialize(program, cluster, test, pos, ty, rng, depth)?);
            }
            Ok(match receiver {
                _ if info.is_ctor => TestStatement::Construct { ctor: m, args },
                Some(receiver) => TestStatement::Invoke {
                    receiver,
                    method: m,
                    args,
                },
                None => TestStatement::StaticInvoke { method: m, args },
            })
        }
        Element::SetField(f) => {
            let receiver = object(program, cluster, test, pos, Type::Ref(f.class), rng, depth)?;
            let value = materialize(program, cluster, test, pos, program.field(f).ty, rng, depth)?;
            Ok(TestStatement::SetField {
                receiver,
                field: f,
                value,
            })
        }
    }
}

/// Inserts a statement for `element` at `pos`, with its dependencies.
pub fn insert_element<R: Rng + ?Sized>(
    program: &CheckedProgram,
    cluster: &TestCluster,
    test: &TestCase,
    pos: usize,
    element: Element,
    rng: &mut R,
) -> Result<TestCase, Saturated> {
    let mut out = test.clone();
    let mut at = pos;
    let stmt = build(program, cluster, &mut out, &mut at, element, rng, 0)?;
    out.insert(at, stmt);
    Ok(out)
}

/// Inserts one random cluster element at a random position. Under a suffix
/// constraint the final target call stays last.
pub fn random_statement_insertion<R: Rng + ?Sized>(
    program: &CheckedProgram,
    cluster: &TestCluster,
    test: &TestCase,
    rng: &mut R,
) -> Result<TestCase, Saturated> {
    let keep_last = cluster.mode.requires_suffix()
        && test.last_call_to(cluster.target).is_some_and(|i| i + 1 == test.len());
    let upper = if keep_last { test.len() - 1 } else { test.len() };
    let pos = rng.gen_range(0..=upper);
    let mut order = cluster.elements.clone();
    order.shuffle(rng);
    let mut last_err = Saturated("cluster is empty".into());
    for element in order {
        match insert_element(program, cluster, test, pos, element, rng) {
            Ok(t) => return Ok(t),
            Err(e) => last_err = e,
        }
    }
    Err(last_err)
}

/// Makes the test end with a call to the target: drops statements after the
/// last target call, or appends one if there is none.
pub fn enforce_target_suffix<R: Rng + ?Sized>(
    program: &CheckedProgram,
    cluster: &TestCluster,
    test: &TestCase,
    rng: &mut R,
) -> Result<TestCase, Saturated> {
    match test.last_call_to(cluster.target) {
        Some(i) => {
            let mut out = test.clone();
            out.statements.truncate(i + 1);
            Ok(out)
        }
        None => insert_element(
            program,
            cluster,
            test,
            test.len(),
            Element::Call(cluster.target),
            rng,
        ),
    }
}

/// Rebinds every invalid variable reference to a compatible earlier
/// variable, or satisfies it with a new literal or generator.
pub fn type_repair<R: Rng + ?Sized>(
    program: &CheckedProgram,
    cluster: &TestCluster,
    test: &TestCase,
    rng: &mut R,
) -> Result<TestCase, Saturated> {
    let mut out = test.clone();
    let mut i = 0;
    while i < out.len() {
        for (slot, want) in out.statements[i].slots(program) {
            let v = match out.statements[i].slot(slot) {
                SlotRef::Receiver(v) | SlotRef::Arg(&Arg::Var(v)) => v,
                SlotRef::Arg(Arg::Lit(_)) => continue,
            };
            if out.ref_ok(program, i, v, want) {
                continue;
            }
            let existing = candidates(program, &out, i, want);
            let fixed = if let Some(&v) = existing.choose(rng) {
                Arg::Var(v)
            } else if want.is_ref() {
                Arg::Var(generate(program, cluster, &mut out, &mut i, want, rng, 0)?)
            } else {
                Arg::Lit(cluster.literals.sample(want, rng))
            };
            debug_assert!(slot != Slot::Receiver || matches!(fixed, Arg::Var(_)));
            out.statements[i].set_slot(slot, fixed);
        }
        i += 1;
    }
    Ok(out)
}
