//! Evolutionary search for tests covering the branches of one target method.
//!
//! A generational GA with elitism and tournament selection evolves single
//! tests. Each test's fitness is the sum of its per-goal distances; an
//! archive keeps the first test that covered each goal, and the archive is
//! what a run reports.

mod fitness;
mod ledger;
mod operators;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::interp::ExecLimits;
use crate::lang::{enumerate_branch_goals, BranchGoalId, CheckedProgram, MethodId};
use crate::testmodel::{build_cluster_for, ClusterMode, TestCase, TestCluster};

pub use fitness::{evaluate_fitness, normalize, score_trace, Evaluation};
pub use ledger::{coverage_pct, ArchivedTest, GoalLedger, TimelineSample};
pub use operators::{
    crossover, crossover_at, finish, mutate, random_test, select, splice,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub population_size: usize,
    pub budget_seconds: f64,
    pub seed: u64,
    /// Per-statement mutation probability; `None` means 1/length.
    pub mutation_rate: Option<f64>,
    pub crossover_rate: f64,
    pub tournament_size: usize,
    pub elite_count: usize,
    /// Upper bound for the random length of initial tests.
    pub initial_max_length: usize,
    /// Hard cap on test length after any operator.
    pub max_test_length: usize,
    pub mode: ClusterMode,
    /// Only consulted in WHOLE mode; EMOTE always attributes and STRICT
    /// never does.
    pub attributed_fitness: bool,
    /// Stop after this many generations regardless of the clock.
    pub max_generations: Option<u64>,
    pub sample_interval_seconds: f64,
    pub limits: ExecLimits,
}

impl SearchConfig {
    pub fn new(mode: ClusterMode, seed: u64) -> Self {
        SearchConfig {
            population_size: 50,
            budget_seconds: 10.0,
            seed,
            mutation_rate: None,
            crossover_rate: 0.75,
            tournament_size: 4,
            elite_count: 2,
            initial_max_length: 40,
            max_test_length: 60,
            mode,
            attributed_fitness: mode == ClusterMode::Emote,
            max_generations: None,
            sample_interval_seconds: 1.0,
            limits: ExecLimits::default(),
        }
    }

    /// Attribution actually applied for this mode.
    pub fn effective_attribution(&self) -> bool {
        match self.mode {
            ClusterMode::Emote => true,
            ClusterMode::Strict => false,
            ClusterMode::Whole => self.attributed_fitness,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.population_size == 0 {
            return Err("population size must be positive".into());
        }
        if self.elite_count > self.population_size {
            return Err("elite count exceeds population size".into());
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return Err("crossover rate must lie in [0, 1]".into());
        }
        if let Some(r) = self.mutation_rate {
            if !(0.0..=1.0).contains(&r) {
                return Err("mutation rate must lie in [0, 1]".into());
            }
        }
        if self.initial_max_length == 0 || self.initial_max_length > self.max_test_length {
            return Err("initial length bound must lie in [1, max test length]".into());
        }
        if self.budget_seconds.is_nan() || self.budget_seconds < 0.0 {
            return Err("budget must be non-negative".into());
        }
        if self.sample_interval_seconds.is_nan() || self.sample_interval_seconds <= 0.0 {
            return Err("sample interval must be positive".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Individual {
    pub test: TestCase,
    pub fitness: f64,
    /// Indices into the goal list.
    pub covered: Vec<usize>,
    pub distances: Vec<f64>,
    /// How many times this test has been evaluated.
    pub eval_count: u32,
}

impl Individual {
    fn new(test: TestCase, eval: Evaluation) -> Self {
        Individual {
            test,
            covered: eval.covered().collect(),
            fitness: eval.fitness,
            distances: eval.distances,
            eval_count: 1,
        }
    }
}

/// Callbacks for tests and tooling.
pub enum SearchEvent<'a> {
    /// A test was executed and scored.
    Evaluated(&'a Individual),
    /// A generation (the initial population is generation 0) finished.
    Generation {
        index: u64,
        population: &'a [Individual],
        ledger: &'a GoalLedger,
    },
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    pub target: MethodId,
    pub ledger: GoalLedger,
    pub timeline: Vec<TimelineSample>,
    pub evaluations: u64,
    pub generations: u64,
    pub elapsed_seconds: f64,
    /// Set when the search could not start.
    pub diagnostic: Option<String>,
}

impl SearchResult {
    pub fn covered_goals(&self) -> Vec<BranchGoalId> {
        self.ledger.covered_goals()
    }

    /// Distinct archived tests, in goal order.
    pub fn suite(&self) -> Vec<TestCase> {
        let mut out: Vec<TestCase> = Vec::new();
        for t in self.ledger.covered_by.iter().flatten() {
            if !out.contains(&t.test) {
                out.push(t.test.clone());
            }
        }
        out
    }
}

/// Runs a search with the default (no-op) observer.
pub fn evolve(program: &CheckedProgram, target: MethodId, config: &SearchConfig) -> SearchResult {
    evolve_with_observer(program, target, config, &mut |_| {})
}

pub fn evolve_with_observer(
    program: &CheckedProgram,
    target: MethodId,
    config: &SearchConfig,
    observer: &mut dyn FnMut(SearchEvent<'_>),
) -> SearchResult {
    let cluster = build_cluster_for(program, target, config.mode);
    evolve_in(program, &cluster, config, observer)
}

struct Engine<'a> {
    program: &'a CheckedProgram,
    cluster: &'a TestCluster,
    config: &'a SearchConfig,
    goals: Vec<BranchGoalId>,
    attributed: bool,
    ledger: GoalLedger,
    evaluations: u64,
    start: Instant,
}

impl Engine<'_> {
    fn evaluate(
        &mut self,
        test: TestCase,
        generation: u64,
        observer: &mut dyn FnMut(SearchEvent<'_>),
    ) -> Individual {
        let eval = evaluate_fitness(
            self.program,
            self.cluster.target,
            &self.goals,
            &test,
            self.attributed,
            self.config.limits,
        );
        self.evaluations += 1;
        let ind = Individual::new(test, eval);
        self.ledger
            .record(&ind, generation, self.start.elapsed().as_secs_f64());
        observer(SearchEvent::Evaluated(&ind));
        ind
    }
}

/// Runs a search over a prebuilt cluster.
pub fn evolve_in(
    program: &CheckedProgram,
    cluster: &TestCluster,
    config: &SearchConfig,
    observer: &mut dyn FnMut(SearchEvent<'_>),
) -> SearchResult {
    let start = Instant::now();
    let target = cluster.target;
    let goals = enumerate_branch_goals(program, target);
    let budget = Duration::from_secs_f64(config.budget_seconds);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut engine = Engine {
        program,
        cluster,
        config,
        attributed: config.effective_attribution(),
        ledger: GoalLedger::new(program, goals.clone()),
        goals,
        evaluations: 0,
        start,
    };
    let finish_result = |engine: Engine<'_>, generations: u64, diagnostic: Option<String>| {
        let timeline = engine
            .ledger
            .timeline(config.budget_seconds, config.sample_interval_seconds);
        SearchResult {
            target,
            ledger: engine.ledger,
            timeline,
            evaluations: engine.evaluations,
            generations,
            elapsed_seconds: start.elapsed().as_secs_f64(),
            diagnostic,
        }
    };

    let mut population = Vec::with_capacity(config.population_size);
    for _ in 0..config.population_size {
        let length = rng.gen_range(1..=config.initial_max_length);
        match random_test(program, cluster, config, length, &mut rng) {
            Ok(test) => population.push(test),
            Err(e) => {
                return finish_result(
                    engine,
                    0,
                    Some(format!(
                        "cannot build tests for {}: {e}",
                        program.qualified_name(target)
                    )),
                )
            }
        }
    }
    let mut population: Vec<Individual> = population
        .into_iter()
        .map(|t| engine.evaluate(t, 0, observer))
        .collect();
    observer(SearchEvent::Generation {
        index: 0,
        population: &population,
        ledger: &engine.ledger,
    });

    let mut generation = 0u64;
    loop {
        if engine.ledger.all_covered()
            || config.max_generations.is_some_and(|cap| generation >= cap)
            || start.elapsed() >= budget
        {
            break;
        }
        generation += 1;
        population.sort_by(|a, b| {
            a.fitness
                .total_cmp(&b.fitness)
                .then(a.test.len().cmp(&b.test.len()))
        });
        let mut next: Vec<Individual> = population[..config.elite_count.min(population.len())]
            .to_vec();
        while next.len() < config.population_size {
            let p1 = select(&population, config.tournament_size, &mut rng).test.clone();
            let p2 = select(&population, config.tournament_size, &mut rng).test.clone();
            let (o1, o2) = if rng.gen_bool(config.crossover_rate) {
                crossover(program, cluster, config, &p1, &p2, &mut rng)
            } else {
                (p1, p2)
            };
            for child in [o1, o2] {
                if next.len() == config.population_size {
                    break;
                }
                let child = mutate(program, cluster, config, &child, &mut rng);
                let ind = engine.evaluate(child, generation, observer);
                next.push(ind);
            }
        }
        population = next;
        observer(SearchEvent::Generation {
            index: generation,
            population: &population,
            ledger: &engine.ledger,
        });
    }
    finish_result(engine, generation, None)
}
