use serde::{Deserialize, Serialize};

use crate::lang::{BranchGoalId, CheckedProgram};
use crate::testmodel::TestCase;

use super::Individual;

/// The first test found to cover a goal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchivedTest {
    pub test: TestCase,
    /// Pseudocode rendering of `test`.
    pub rendered: String,
    pub generation: u64,
    pub seconds: f64,
}

/// Best distance per goal plus the covering-test archive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoalLedger {
    pub goals: Vec<BranchGoalId>,
    pub goal_names: Vec<String>,
    pub best_distance: Vec<f64>,
    pub covered_by: Vec<Option<ArchivedTest>>,
}

impl GoalLedger {
    pub fn new(program: &CheckedProgram, goals: Vec<BranchGoalId>) -> Self {
        GoalLedger {
            goal_names: goals.iter().map(|g| g.display(program)).collect(),
            best_distance: vec![1.0; goals.len()],
            covered_by: vec![None; goals.len()],
            goals,
        }
    }

    pub fn covered_count(&self) -> usize {
        self.covered_by.iter().filter(|c| c.is_some()).count()
    }

    pub fn all_covered(&self) -> bool {
        self.covered_by.iter().all(Option::is_some)
    }

    pub fn covered_goals(&self) -> Vec<BranchGoalId> {
        self.goals
            .iter()
            .zip(&self.covered_by)
            .filter(|(_, c)| c.is_some())
            .map(|(g, _)| *g)
            .collect()
    }

    pub(super) fn record(&mut self, ind: &Individual, generation: u64, seconds: f64) {
        for (i, &d) in ind.distances.iter().enumerate() {
            if d < self.best_distance[i] {
                self.best_distance[i] = d;
            }
            if d == 0.0 && self.covered_by[i].is_none() {
                self.covered_by[i] = Some(ArchivedTest {
                    test: ind.test.clone(),
                    rendered: String::new(),
                    generation,
                    seconds,
                });
            }
        }
    }

    /// Fills in pseudocode for archived tests.
    pub fn render_tests(&mut self, program: &CheckedProgram) {
        for a in self.covered_by.iter_mut().flatten() {
            if a.rendered.is_empty() {
                a.rendered = a.test.render(program);
            }
        }
    }

    /// Coverage sampled at `0, interval, 2·interval, ...` up to `budget`.
    /// The sample at 0 reflects the initial population.
    pub fn timeline(&self, budget: f64, interval: f64) -> Vec<TimelineSample> {
        let total = self.goals.len();
        let mut out = Vec::new();
        let mut k = 0u64;
        loop {
            let t = k as f64 * interval;
            if t > budget + 1e-9 {
                break;
            }
            let covered = self
                .covered_by
                .iter()
                .flatten()
                .filter(|a| a.generation == 0 || (k > 0 && a.seconds <= t))
                .count();
            out.push(TimelineSample {
                t_seconds: t,
                covered_count: covered,
                coverage_pct: coverage_pct(covered, total),
            });
            k += 1;
        }
        out
    }
}

/// `100 · covered / total`, with 100 for a method without goals.
pub fn coverage_pct(covered: usize, total: usize) -> f64 {
    if total == 0 {
        100.0
    } else {
        100.0 * covered as f64 / total as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimelineSample {
    pub t_seconds: f64,
    pub covered_count: usize,
    pub coverage_pct: f64,
}
