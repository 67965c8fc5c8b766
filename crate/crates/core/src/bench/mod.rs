//! Corpus runner comparing STRICT and EMOTE modes, and its report files.

mod corpus;
mod report;

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::search::{coverage_pct, evolve, SearchConfig, SearchResult, TimelineSample};
use crate::testmodel::ClusterMode;

pub use corpus::{load_corpus, target_methods, CorpusEntry, Pattern, Target};
pub use report::{
    build_report, emit_reports, heatmap_bin, ComparisonReport, ComparisonRow, FileAggregate,
    HeatmapCell, MeanTimelinePoint, HEATMAP_BINS,
};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: invalid manifest: {message}")]
    Manifest { path: PathBuf, message: String },
    #[error("{}", rendered.join("\n"))]
    Diagnostics { rendered: Vec<String> },
    #[error("{0}")]
    UnknownTarget(String),
    #[error("{path}: {message}")]
    Report { path: PathBuf, message: String },
}

impl BenchError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        BenchError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// CLI exit code: 1 for diagnostics, 2 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Io { .. } | BenchError::Report { .. } => 2,
            _ => 1,
        }
    }
}

/// Outcome of one search on one target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub file: String,
    pub class: String,
    pub method: String,
    pub mode: ClusterMode,
    pub seed: u64,
    pub budget_seconds: f64,
    pub branch_total: usize,
    pub branch_covered: usize,
    pub coverage_pct: f64,
    pub covered_goals: Vec<String>,
    pub evaluations: u64,
    pub generations: u64,
    pub elapsed_seconds: f64,
    pub timeline: Vec<TimelineSample>,
    pub diagnostic: Option<String>,
}

impl RunRecord {
    pub fn from_result(entry: &CorpusEntry, target: &Target, config: &SearchConfig, result: &SearchResult) -> Self {
        let covered = result.ledger.covered_count();
        RunRecord {
            file: entry.name.clone(),
            class: target.class.clone(),
            method: target.method.clone(),
            mode: config.mode,
            seed: config.seed,
            budget_seconds: config.budget_seconds,
            branch_total: result.ledger.goals.len(),
            branch_covered: covered,
            coverage_pct: coverage_pct(covered, result.ledger.goals.len()),
            covered_goals: result
                .ledger
                .goal_names
                .iter()
                .zip(&result.ledger.covered_by)
                .filter(|(_, c)| c.is_some())
                .map(|(n, _)| n.clone())
                .collect(),
            evaluations: result.evaluations,
            generations: result.generations,
            elapsed_seconds: result.elapsed_seconds,
            timeline: result.timeline.clone(),
            diagnostic: result.diagnostic.clone(),
        }
    }

    fn sort_key(&self) -> (&str, &str, &str, ClusterMode, u64) {
        (&self.file, &self.class, &self.method, self.mode, self.seed)
    }
}

/// Runs one search on `target` with `config`'s mode and seed.
pub fn run_target_with_result(
    entry: &CorpusEntry,
    target: &Target,
    config: &SearchConfig,
) -> (RunRecord, SearchResult) {
    let result = evolve(&entry.program, target.id, config);
    (RunRecord::from_result(entry, target, config, &result), result)
}

pub fn run_target(entry: &CorpusEntry, target: &Target, config: &SearchConfig) -> RunRecord {
    run_target_with_result(entry, target, config).0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareConfig {
    pub seeds: Vec<u64>,
    pub budget_seconds: f64,
    /// Worker threads; each runs one search at a time.
    pub jobs: usize,
    pub modes: Vec<ClusterMode>,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            seeds: vec![1, 2, 3],
            budget_seconds: 10.0,
            jobs: 1,
            modes: vec![ClusterMode::Strict, ClusterMode::Emote],
        }
    }
}

/// Runs every target of the corpus in every mode for every seed, spread
/// over `jobs` worker threads. Records come back sorted by file, class,
/// method, mode and seed.
pub fn run_all(corpus: &[CorpusEntry], config: &CompareConfig) -> Vec<RunRecord> {
    let mut work = Vec::new();
    for entry in corpus {
        for target in &entry.targets {
            for &mode in &config.modes {
                for &seed in &config.seeds {
                    work.push((entry, target, mode, seed));
                }
            }
        }
    }
    let next = AtomicUsize::new(0);
    let records = Mutex::new(Vec::with_capacity(work.len()));
    std::thread::scope(|scope| {
        for _ in 0..config.jobs.max(1).min(work.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(entry, target, mode, seed)) = work.get(i) else {
                    break;
                };
                let mut search = SearchConfig::new(mode, seed);
                search.budget_seconds = config.budget_seconds;
                let record = run_target(entry, target, &search);
                records.lock().unwrap().push(record);
            });
        }
    });
    let mut records = records.into_inner().unwrap();
    records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    records
}

/// Runs the corpus and aggregates the STRICT/EMOTE comparison.
pub fn compare_modes(corpus: &[CorpusEntry], config: &CompareConfig) -> ComparisonReport {
    let runs = run_all(corpus, config);
    build_report(corpus, config, runs)
}
