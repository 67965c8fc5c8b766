use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::testmodel::ClusterMode;

use super::{BenchError, CompareConfig, CorpusEntry, RunRecord};

/// Heatmap bin labels: exact 0, ten deciles, exact 100.
pub const HEATMAP_BINS: [&str; 12] = [
    "0", "0-10", "10-20", "20-30", "30-40", "40-50", "50-60", "60-70", "70-80", "80-90", "90-100",
    "100",
];

pub fn heatmap_bin(pct: f64) -> usize {
    if pct <= 0.0 {
        0
    } else if pct >= 100.0 {
        11
    } else {
        1 + ((pct / 10.0).floor() as usize).min(9)
    }
}

/// Seed-averaged coverage of one target in both modes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub file: String,
    pub class: String,
    pub method: String,
    pub branches: usize,
    pub strict_covered: f64,
    pub strict_pct: f64,
    pub emote_covered: f64,
    pub emote_pct: f64,
    /// EMOTE minus STRICT, in percentage points.
    pub delta: f64,
    /// Some run for this target reported a diagnostic.
    pub failed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileAggregate {
    pub file: String,
    pub branches: usize,
    pub strict_covered: f64,
    pub strict_pct: f64,
    pub emote_covered: f64,
    pub emote_pct: f64,
    pub delta: f64,
}

impl FileAggregate {
    fn from_rows<'a>(file: &str, rows: impl Iterator<Item = &'a ComparisonRow>) -> Self {
        let (mut branches, mut strict, mut emote) = (0usize, 0.0, 0.0);
        for r in rows {
            branches += r.branches;
            strict += r.strict_covered;
            emote += r.emote_covered;
        }
        let strict_pct = pooled_pct(strict, branches);
        let emote_pct = pooled_pct(emote, branches);
        FileAggregate {
            file: file.to_string(),
            branches,
            strict_covered: strict,
            strict_pct,
            emote_covered: emote,
            emote_pct,
            delta: emote_pct - strict_pct,
        }
    }
}

fn pooled_pct(covered: f64, total: usize) -> f64 {
    if total == 0 {
        100.0
    } else {
        100.0 * covered / total as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatmapCell {
    pub strict_bin: String,
    pub emote_bin: String,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanTimelinePoint {
    pub t_seconds: f64,
    pub mode: ClusterMode,
    pub mean_coverage_pct: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub seeds: Vec<u64>,
    pub budget_seconds: f64,
    pub rows: Vec<ComparisonRow>,
    pub files: Vec<FileAggregate>,
    pub total: FileAggregate,
    pub heatmap: Vec<HeatmapCell>,
    pub timeline: Vec<MeanTimelinePoint>,
    pub runs: Vec<RunRecord>,
}

impl ComparisonReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Runs of one target in one mode.
    pub fn runs_for<'a>(
        &'a self,
        class: &'a str,
        method: &'a str,
        mode: ClusterMode,
    ) -> impl Iterator<Item = &'a RunRecord> + 'a {
        self.runs
            .iter()
            .filter(move |r| r.class == class && r.method == method && r.mode == mode)
    }
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

/// Aggregates sorted run records into the comparison report.
pub fn build_report(corpus: &[CorpusEntry], config: &CompareConfig, runs: Vec<RunRecord>) -> ComparisonReport {
    let mut targets: Vec<(String, String, String, usize)> = corpus
        .iter()
        .flat_map(|e| {
            e.targets
                .iter()
                .map(|t| (e.name.clone(), t.class.clone(), t.method.clone(), t.branches))
        })
        .collect();
    targets.sort();

    let mut rows = Vec::with_capacity(targets.len());
    for (file, class, method, branches) in targets {
        let of_mode = |mode: ClusterMode| -> Vec<&RunRecord> {
            runs.iter()
                .filter(|r| r.file == file && r.class == class && r.method == method && r.mode == mode)
                .collect()
        };
        let strict = of_mode(ClusterMode::Strict);
        let emote = of_mode(ClusterMode::Emote);
        let covered = |rs: &[&RunRecord]| mean(&rs.iter().map(|r| r.branch_covered as f64).collect::<Vec<_>>());
        let strict_covered = covered(&strict);
        let emote_covered = covered(&emote);
        let strict_pct = pooled_pct(strict_covered, branches);
        let emote_pct = pooled_pct(emote_covered, branches);
        rows.push(ComparisonRow {
            failed: strict.iter().chain(&emote).any(|r| r.diagnostic.is_some()),
            file,
            class,
            method,
            branches,
            strict_covered,
            strict_pct,
            emote_covered,
            emote_pct,
            delta: emote_pct - strict_pct,
        });
    }

    let mut by_file: BTreeMap<&str, Vec<&ComparisonRow>> = BTreeMap::new();
    for r in &rows {
        by_file.entry(&r.file).or_default().push(r);
    }
    let files: Vec<FileAggregate> = by_file
        .iter()
        .map(|(f, rs)| FileAggregate::from_rows(f, rs.iter().copied()))
        .collect();
    let total = FileAggregate::from_rows("TOTAL", rows.iter());

    let mut counts = [[0usize; 12]; 12];
    for r in &rows {
        counts[heatmap_bin(r.strict_pct)][heatmap_bin(r.emote_pct)] += 1;
    }
    let mut heatmap = Vec::with_capacity(144);
    for (s, row) in counts.iter().enumerate() {
        for (e, &count) in row.iter().enumerate() {
            heatmap.push(HeatmapCell {
                strict_bin: HEATMAP_BINS[s].to_string(),
                emote_bin: HEATMAP_BINS[e].to_string(),
                count,
            });
        }
    }

    let mut timeline = Vec::new();
    for &mode in &config.modes {
        let of_mode: Vec<&RunRecord> = runs.iter().filter(|r| r.mode == mode).collect();
        let samples = of_mode.iter().map(|r| r.timeline.len()).max().unwrap_or(0);
        for k in 0..samples {
            let values: Vec<f64> = of_mode
                .iter()
                .filter_map(|r| r.timeline.get(k).or(r.timeline.last()))
                .map(|s| s.coverage_pct)
                .collect();
            let t = of_mode
                .iter()
                .find_map(|r| r.timeline.get(k))
                .map(|s| s.t_seconds)
                .unwrap_or(k as f64);
            timeline.push(MeanTimelinePoint {
                t_seconds: t,
                mode,
                mean_coverage_pct: mean(&values),
            });
        }
    }

    ComparisonReport {
        seeds: config.seeds.clone(),
        budget_seconds: config.budget_seconds,
        rows,
        files,
        total,
        heatmap,
        timeline,
        runs,
    }
}

fn fmt2(x: f64) -> String {
    format!("{x:.2}")
}

fn csv_error(path: &Path, e: csv::Error) -> BenchError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => BenchError::io(path, io),
        other => BenchError::Report {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    }
}

fn write_csv(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| BenchError::io(path, e))
}

fn aggregate_record(a: &FileAggregate) -> Vec<String> {
    vec![
        a.file.clone(),
        a.branches.to_string(),
        fmt2(a.strict_covered),
        fmt2(a.strict_pct),
        fmt2(a.emote_covered),
        fmt2(a.emote_pct),
        fmt2(a.delta),
    ]
}

/// Writes comparison.csv, summary.csv, timeline.csv, heatmap.csv and
/// report.json into `out_dir`, creating it if needed.
pub fn emit_reports(report: &ComparisonReport, out_dir: &Path) -> Result<Vec<PathBuf>, BenchError> {
    std::fs::create_dir_all(out_dir).map_err(|e| BenchError::io(out_dir, e))?;
    let path = |name: &str| out_dir.join(name);
    let mut written = Vec::new();

    let comparison = path("comparison.csv");
    write_csv(
        &comparison,
        &[
            "file", "class", "method", "branches", "strict_covered", "strict_pct", "emote_covered",
            "emote_pct", "delta", "status",
        ],
        report
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.file.clone(),
                    r.class.clone(),
                    r.method.clone(),
                    r.branches.to_string(),
                    fmt2(r.strict_covered),
                    fmt2(r.strict_pct),
                    fmt2(r.emote_covered),
                    fmt2(r.emote_pct),
                    fmt2(r.delta),
                    if r.failed { "failed" } else { "ok" }.to_string(),
                ]
            })
            .collect(),
    )?;
    written.push(comparison);

    let summary = path("summary.csv");
    write_csv(
        &summary,
        &[
            "file", "branches", "strict_covered", "strict_pct", "emote_covered", "emote_pct", "delta",
        ],
        report
            .files
            .iter()
            .chain(std::iter::once(&report.total))
            .map(aggregate_record)
            .collect(),
    )?;
    written.push(summary);

    let timeline = path("timeline.csv");
    write_csv(
        &timeline,
        &["t", "mode", "mean_coverage_pct"],
        report
            .timeline
            .iter()
            .map(|p| {
                vec![
                    fmt2(p.t_seconds),
                    p.mode.to_string(),
                    fmt2(p.mean_coverage_pct),
                ]
            })
            .collect(),
    )?;
    written.push(timeline);

    let heatmap = path("heatmap.csv");
    write_csv(
        &heatmap,
        &["strict_bin", "emote_bin", "count"],
        report
            .heatmap
            .iter()
            .map(|c| vec![c.strict_bin.clone(), c.emote_bin.clone(), c.count.to_string()])
            .collect(),
    )?;
    written.push(heatmap);

    let json = path("report.json");
    std::fs::write(&json, report.to_json()).map_err(|e| BenchError::io(&json, e))?;
    written.push(json);
    Ok(written)
}
