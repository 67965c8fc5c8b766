use rand::seq::SliceRandom;
use rand::Rng;

use crate::lang::CheckedProgram;
use crate::testmodel::{
    candidates, enforce_target_suffix, insert_element, random_statement_insertion, type_repair,
    Arg, Element, Literal, Saturated, TestCase, TestCluster, TestStatement, VarRef,
};

use super::{Individual, SearchConfig};

/// Tournament selection: lowest fitness wins, then the shorter test, then
/// a uniform pick among the remaining ties.
pub fn select<'a, R: Rng + ?Sized>(
    population: &'a [Individual],
    tournament_size: usize,
    rng: &mut R,
) -> &'a Individual {
    assert!(!population.is_empty(), "selection from an empty population");
    let mut best = &population[rng.gen_range(0..population.len())];
    let mut ties = 1;
    for _ in 1..tournament_size.max(1) {
        let c = &population[rng.gen_range(0..population.len())];
        let key = (c.fitness, c.test.len());
        let best_key = (best.fitness, best.test.len());
        if key < best_key {
            best = c;
            ties = 1;
        } else if key == best_key {
            ties += 1;
            if rng.gen_range(0..ties) == 0 {
                best = c;
            }
        }
    }
    best
}

/// Single-point splice at the same relative position `j` in both parents.
/// References into the other parent's discarded prefix are left dangling.
pub fn splice(p1: &TestCase, p2: &TestCase, j: f64) -> (TestCase, TestCase) {
    let cut = |t: &TestCase| ((j * t.len() as f64).ceil() as usize).min(t.len());
    let (c1, c2) = (cut(p1), cut(p2));
    let join = |head: &TestCase, h: usize, tail: &TestCase, t: usize| {
        let mut out: Vec<TestStatement> = head.statements[..h].to_vec();
        for stmt in &tail.statements[t..] {
            let mut stmt = stmt.clone();
            for v in stmt.var_refs_mut() {
                *v = if !v.is_dangling() && v.0 >= t {
                    VarRef(v.0 - t + h)
                } else {
                    VarRef::DANGLING
                };
            }
            out.push(stmt);
        }
        TestCase::new(out)
    };
    (join(p1, c1, p2, c2), join(p2, c2, p1, c1))
}

/// Repairs and, under a suffix constraint, re-anchors a test; fails if
/// either step saturates or the result exceeds the length cap.
pub fn finish<R: Rng + ?Sized>(
    program: &CheckedProgram,
    cluster: &TestCluster,
    config: &SearchConfig,
    test: &TestCase,
    rng: &mut R,
) -> Result<TestCase, Saturated> {
    let mut out = type_repair(program, cluster, test, rng)?;
    if cluster.mode.requires_suffix() {
        out = enforce_target_suffix(program, cluster, &out, rng)?;
    }
    if out.len() > config.max_test_length {
        return Err(Saturated(format!(
            "test length {} exceeds cap {}",
            out.len(),
            config.max_test_length
        )));
    }
    Ok(out)
}

/// Crossover with a uniformly drawn split fraction.
pub fn crossover<R: Rng + ?Sized>(
    program: &CheckedProgram,
    cluster: &TestCluster,
    config: &SearchConfig,
    p1: &TestCase,
    p2: &TestCase,
    rng: &mut R,
) -> (TestCase, TestCase) {
    let j: f64 = rng.gen();
    crossover_at(program, cluster, config, p1, p2, j, rng)
}

/// Crossover at split fraction `j`. An offspring whose repair fails is
/// replaced by a copy of its first parent.
pub fn crossover_at<R: Rng + ?Sized>(
    program: &CheckedProgram,
    cluster: &TestCluster,
    config: &SearchConfig,
    p1: &TestCase,
    p2: &TestCase,
    j: f64,
    rng: &mut R,
) -> (TestCase, TestCase) {
    let (o1, o2) = splice(p1, p2, j);
    let o1 = finish(program, cluster, config, &o1, rng).unwrap_or_else(|_| p1.clone());
    let o2 = finish(program, cluster, config, &o2, rng).unwrap_or_else(|_| p2.clone());
    (o1, o2)
}

fn literals_mut(stmt: &mut TestStatement) -> Vec<&mut Literal> {
    match stmt {
        TestStatement::Construct { args, .. }
        | TestStatement::Invoke { args, .. }
        | TestStatement::StaticInvoke { args, .. } => args
            .iter_mut()
            .filter_map(|a| match a {
                Arg::Lit(l) if *l != Literal::Null => Some(l),
                _ => None,
            })
            .collect(),
        TestStatement::SetField {
            value: Arg::Lit(l), ..
        } if *l != Literal::Null => vec![l],
        TestStatement::Literal { value } => vec![value],
        _ => Vec::new(),
    }
}

/// Changes statement `i`: perturbs one of its literals, or replaces its call
/// with another cluster element yielding the same type.
fn change<R: Rng + ?Sized>(
    program: &CheckedProgram,
    cluster: &TestCluster,
    test: &TestCase,
    i: usize,
    rng: &mut R,
) -> Result<TestCase, Saturated> {
    let mut out = test.clone();
    {
        let stmt = &mut out.statements[i];
        let is_call = stmt.callee().is_some();
        let mut lits = literals_mut(stmt);
        if !lits.is_empty() && (!is_call || rng.gen_bool(0.5)) {
            let lit = lits.swap_remove(rng.gen_range(0..lits.len()));
            *lit = cluster.literals.perturb(lit, rng);
            return Ok(out);
        }
    }
    let stmt = &test.statements[i];
    let current = match stmt {
        TestStatement::SetField { field, .. } => Element::SetField(*field),
        s => match s.callee() {
            Some(m) => Element::Call(m),
            None => return Ok(out),
        },
    };
    let ty = stmt.defined_type(program);
    let same_type: Vec<Element> = cluster
        .elements
        .iter()
        .copied()
        .filter(|e| *e != current)
        .filter(|e| match e {
            Element::Call(m) => crate::testmodel::produces(program, *m) == ty,
            Element::SetField(_) => ty.is_none(),
        })
        .collect();
    if let Some(&replacement) = same_type.choose(rng) {
        let inserted = insert_element(program, cluster, &out, i, replacement, rng)?;
        let added = inserted.len() - out.len();
        let mut replaced = inserted;
        let new_var = VarRef(i + added - 1);
        replaced.remove(i + added);
        // Uses of the old value move to the replacement.
        for later in &mut replaced.statements[i + added..] {
            for v in later.var_refs_mut() {
                if v.is_dangling() {
                    *v = new_var;
                }
            }
        }
        return Ok(replaced);
    }
    // Nothing to swap in; rebind one variable argument instead.
    let slots = stmt.slots(program);
    if let Some(&(slot, want)) = slots.choose(rng) {
        let pool = candidates(program, &out, i, want);
        if let Some(&v) = pool.choose(rng) {
            out.statements[i].set_slot(slot, Arg::Var(v));
        }
    }
    Ok(out)
}

/// Applies deletion, change and insertion, each with probability 1/3.
/// Statements are picked with the configured per-statement rate. Any step
/// that saturates is skipped.
pub fn mutate<R: Rng + ?Sized>(
    program: &CheckedProgram,
    cluster: &TestCluster,
    config: &SearchConfig,
    test: &TestCase,
    rng: &mut R,
) -> TestCase {
    let mut current = test.clone();
    let rate = |len: usize| config.mutation_rate.unwrap_or(1.0 / len.max(1) as f64);

    if rng.gen_bool(1.0 / 3.0) && !current.is_empty() {
        let p = rate(current.len());
        let mut candidate = current.clone();
        for i in (0..candidate.len()).rev() {
            if rng.gen_bool(p) {
                candidate.remove(i);
            }
        }
        if candidate.len() != current.len() {
            if let Ok(t) = finish(program, cluster, config, &candidate, rng) {
                current = t;
            }
        }
    }

    if rng.gen_bool(1.0 / 3.0) && !current.is_empty() {
        let p = rate(current.len());
        let mut i = 0;
        while i < current.len() {
            if rng.gen_bool(p) {
                let before = current.len();
                if let Ok(t) = change(program, cluster, &current, i, rng)
                    .and_then(|t| finish(program, cluster, config, &t, rng))
                {
                    i += t.len().saturating_sub(before);
                    current = t;
                }
            }
            i += 1;
        }
    }

    if rng.gen_bool(1.0 / 3.0) || current.is_empty() {
        let mut p = 1.0;
        while rng.gen_bool(p) && current.len() < config.max_test_length {
            match random_statement_insertion(program, cluster, &current, rng)
                .and_then(|t| finish(program, cluster, config, &t, rng))
            {
                Ok(t) => current = t,
                Err(_) => break,
            }
            p *= 0.5;
        }
    }
    current
}

/// A random test of up to `length` statements built by repeated insertion.
pub fn random_test<R: Rng + ?Sized>(
    program: &CheckedProgram,
    cluster: &TestCluster,
    config: &SearchConfig,
    length: usize,
    rng: &mut R,
) -> Result<TestCase, Saturated> {
    let mut test = TestCase::default();
    while test.len() < length {
        match random_statement_insertion(program, cluster, &test, rng) {
            Ok(t) if t.len() <= config.max_test_length => test = t,
            Ok(_) => break,
            Err(e) if test.is_empty() => return Err(e),
            Err(_) => break,
        }
    }
    if cluster.mode.requires_suffix() {
        test = enforce_target_suffix(program, cluster, &test, rng)?;
    }
    Ok(test)
}
