use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use modgen_core::bench::{
    compare_modes, emit_reports, load_corpus, run_target_with_result, BenchError, CompareConfig,
    CorpusEntry, Pattern,
};
use modgen_core::interp::execute_test;
use modgen_core::search::SearchConfig;
use modgen_core::testmodel::ClusterMode;

#[derive(Parser)]
#[command(name = "modgen", version, about = "Search-based modular test generation for MiniOO")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Strict,
    Emote,
    Whole,
}

impl From<ModeArg> for ClusterMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Strict => ClusterMode::Strict,
            ModeArg::Emote => ClusterMode::Emote,
            ModeArg::Whole => ClusterMode::Whole,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Subcommand)]
enum Command {
    /// Generate tests for one target method.
    Run {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        class: String,
        #[arg(long)]
        method: String,
        #[arg(long, value_enum, default_value = "emote")]
        mode: ModeArg,
        #[arg(long, default_value_t = 10.0)]
        budget_secs: f64,
        #[arg(long, env = "MODGEN_SEED", default_value_t = 1)]
        seed: u64,
        /// Attributed fitness; only meaningful with --mode whole.
        #[arg(long, value_enum)]
        attributed: Option<Toggle>,
        /// Write the trace of every archived test to trace.txt.
        #[arg(long)]
        dump_trace: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare STRICT and EMOTE over a corpus directory.
    Compare {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        seeds: Vec<u64>,
        #[arg(long, default_value_t = 10.0)]
        budget_secs: f64,
        /// Use a 120 s budget per method.
        #[arg(long)]
        paper_scale: bool,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// List the targets of a file with their branch counts.
    List {
        #[arg(long)]
        file: PathBuf,
    },
}

fn write(path: &Path, contents: &str) -> Result<(), BenchError> {
    std::fs::write(path, contents).map_err(|e| BenchError::io(path, e))
}

#[allow(clippy::too_many_arguments)]
fn run(
    file: &Path,
    class: &str,
    method: &str,
    mode: ClusterMode,
    budget: f64,
    seed: u64,
    attributed: Option<Toggle>,
    dump_trace: bool,
    out: &Path,
) -> Result<(), BenchError> {
    let entry = CorpusEntry::load(file, Pattern::Plain, None)?;
    let target = entry.target(class, method).ok_or_else(|| {
        BenchError::UnknownTarget(format!("{}: no public method {class}.{method}", entry.name))
    })?;
    let mut config = SearchConfig::new(mode, seed);
    config.budget_seconds = budget;
    if let Some(t) = attributed {
        if mode == ClusterMode::Whole {
            config.attributed_fitness = matches!(t, Toggle::On);
        } else {
            eprintln!("note: --attributed is fixed by --mode {mode} and was ignored");
        }
    }
    let (record, mut result) = run_target_with_result(&entry, target, &config);
    result.ledger.render_tests(&entry.program);

    std::fs::create_dir_all(out).map_err(|e| BenchError::io(out, e))?;
    write(
        &out.join("run.json"),
        &serde_json::to_string_pretty(&record).expect("record serializes"),
    )?;
    let mut tests = String::new();
    for (i, t) in result.suite().iter().enumerate() {
        tests.push_str(&format!("// test {i}\n{}\n", t.render(&entry.program)));
    }
    write(&out.join("tests.txt"), &tests)?;
    let mut timeline = String::from("t,covered,coverage_pct\n");
    for s in &result.timeline {
        timeline.push_str(&format!(
            "{:.2},{},{:.2}\n",
            s.t_seconds, s.covered_count, s.coverage_pct
        ));
    }
    write(&out.join("timeline.csv"), &timeline)?;
    if dump_trace {
        let mut dump = String::new();
        for (i, t) in result.suite().iter().enumerate() {
            let trace = execute_test(&entry.program, t, config.limits);
            dump.push_str(&format!("## test {i}\n{}", trace.dump(&entry.program)));
        }
        write(&out.join("trace.txt"), &dump)?;
    }

    if let Some(d) = &record.diagnostic {
        eprintln!("warning: {d}");
    }
    println!(
        "{}.{} [{}] seed {}: covered {}/{} ({:.2}%) in {} evaluations",
        record.class,
        record.method,
        mode,
        seed,
        record.branch_covered,
        record.branch_total,
        record.coverage_pct,
        record.evaluations
    );
    Ok(())
}

fn compare(corpus: &Path, config: &CompareConfig, out: &Path) -> Result<(), BenchError> {
    let entries = load_corpus(corpus)?;
    let report = compare_modes(&entries, config);
    let written = emit_reports(&report, out)?;
    for row in &report.rows {
        println!(
            "{:<20} {:<24} {:>3} branches  strict {:>6.2}  emote {:>6.2}  {:+.2}{}",
            row.file,
            format!("{}.{}", row.class, row.method),
            row.branches,
            row.strict_pct,
            row.emote_pct,
            row.delta,
            if row.failed { "  (failed)" } else { "" }
        );
    }
    let t = &report.total;
    println!(
        "TOTAL {} branches  strict {:.2}%  emote {:.2}%  delta {:+.2} points",
        t.branches, t.strict_pct, t.emote_pct, t.delta
    );
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn list(file: &Path) -> Result<(), BenchError> {
    let entry = CorpusEntry::load(file, Pattern::Plain, None)?;
    for t in &entry.targets {
        println!(
            "{}\t{} branches",
            entry.program.qualified_name(t.id),
            t.branches
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            file,
            class,
            method,
            mode,
            budget_secs,
            seed,
            attributed,
            dump_trace,
            out,
        } => run(
            &file,
            &class,
            &method,
            mode.into(),
            budget_secs,
            seed,
            attributed,
            dump_trace,
            &out,
        ),
        Command::Compare {
            corpus,
            seeds,
            budget_secs,
            paper_scale,
            jobs,
            out,
        } => {
            let config = CompareConfig {
                seeds,
                budget_seconds: if paper_scale { 120.0 } else { budget_secs },
                jobs,
                ..CompareConfig::default()
            };
            compare(&corpus, &config, &out)
        }
        Command::List { file } => list(&file),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
