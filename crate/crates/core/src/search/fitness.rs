use crate::interp::{execute_test, BranchEvent, ExecLimits, ExecutionTrace};
use crate::lang::{BranchGoalId, CheckedProgram, MethodId};
use crate::testmodel::TestCase;

/// Maps a raw branch distance into `[0, 1)`.
pub fn normalize(d: f64) -> f64 {
    d / (d + 1.0)
}

/// Per-goal distances of one execution.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    /// One entry per goal, in goal order: 0 when covered, in `[0.5, 1)`
    /// when the predicate was reached, 1 when it was not.
    pub distances: Vec<f64>,
    pub fitness: f64,
}

impl Evaluation {
    pub fn covered(&self) -> impl Iterator<Item = usize> + '_ {
        self.distances
            .iter()
            .enumerate()
            .filter(|(_, d)| **d == 0.0)
            .map(|(i, _)| i)
    }

    pub fn covered_count(&self) -> usize {
        self.covered().count()
    }
}

/// Scores a trace against `goals`, all of which belong to `target`.
/// With `attributed` set only events rooted at `target` count.
pub fn score_trace(
    trace: &ExecutionTrace,
    target: MethodId,
    goals: &[BranchGoalId],
    attributed: bool,
) -> Evaluation {
    let predicates = goals.iter().map(|g| g.predicate + 1).max().unwrap_or(0) as usize;
    // Best raw distance to each arm, indexed by goal ordinal. Zero means taken.
    let mut best = vec![f64::INFINITY; predicates * 2];
    let mut reached = vec![false; predicates];
    let relevant = |e: &&BranchEvent| e.goal.method == target && (!attributed || e.root == target);
    for e in trace.events.iter().filter(relevant) {
        let p = e.goal.predicate as usize;
        if p >= predicates {
            continue;
        }
        reached[p] = true;
        let taken = e.goal.ordinal();
        let other = taken ^ 1;
        best[taken] = 0.0;
        best[other] = best[other].min(e.opposite_distance);
    }
    let distances: Vec<f64> = goals
        .iter()
        .map(|g| {
            let d = best[g.ordinal()];
            if d == 0.0 {
                0.0
            } else if reached[g.predicate as usize] {
                0.5 + 0.5 * normalize(d)
            } else {
                1.0
            }
        })
        .collect();
    let fitness = distances.iter().sum();
    Evaluation { distances, fitness }
}

/// Executes `test` and scores it.
pub fn evaluate_fitness(
    program: &CheckedProgram,
    target: MethodId,
    goals: &[BranchGoalId],
    test: &TestCase,
    attributed: bool,
    limits: ExecLimits,
) -> Evaluation {
    let trace = execute_test(program, test, limits);
    score_trace(&trace, target, goals, attributed)
}
