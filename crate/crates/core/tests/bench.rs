mod support;

use std::path::{Path, PathBuf};

use modgen_core::bench::{
    build_report, compare_modes, emit_reports, heatmap_bin, load_corpus, run_target, BenchError,
    CompareConfig, ComparisonReport, CorpusEntry, Pattern, HEATMAP_BINS,
};
use modgen_core::interp::{attributed_events, execute_test, ExecLimits};
use modgen_core::search::SearchConfig;
use modgen_core::testmodel::{Arg, ClusterMode, Literal, TestCase, TestStatement};
use support::oracle::reachable_goals;

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

fn corpus() -> Vec<CorpusEntry> {
    load_corpus(&corpus_dir()).unwrap()
}

fn quick(seeds: Vec<u64>, budget: f64) -> CompareConfig {
    CompareConfig {
        seeds,
        budget_seconds: budget,
        jobs: 2,
        ..CompareConfig::default()
    }
}

#[test]
fn manifest_lists_ten_classes() {
    let c = corpus();
    assert_eq!(c.len(), 10);
    assert_eq!(c.iter().map(|e| e.targets.len()).sum::<usize>(), 25);
    assert_eq!(
        c.iter()
            .flat_map(|e| &e.targets)
            .map(|t| t.branches)
            .sum::<usize>(),
        66
    );
    let pattern = |name: &str| c.iter().find(|e| e.name == name).unwrap().pattern;
    assert_eq!(pattern("consistency.moo"), Pattern::StateInit);
    assert_eq!(pattern("album.moo"), Pattern::IndirectCallee);
    assert_eq!(pattern("artists.moo"), Pattern::PublicField);
    assert_eq!(pattern("static_util.moo"), Pattern::StaticUtil);
    assert_eq!(pattern("slug.moo"), Pattern::Plain);
    // Helper classes are not targets.
    let consistency = c.iter().find(|e| e.name == "consistency.moo").unwrap();
    assert!(consistency.targets.iter().all(|t| t.class == "Consistency"));
    let t = consistency.target("Consistency", "checkConsistency").unwrap();
    assert_eq!(t.branches, 12);
}

#[test]
fn directory_without_manifest_loads_every_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("b.moo"), "class B { B() { } public int f() { return 1; } }").unwrap();
    std::fs::write(dir.path().join("a.moo"), "class A { A() { } }").unwrap();
    std::fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
    let c = load_corpus(dir.path()).unwrap();
    let names: Vec<&str> = c.iter().map(|e| e.name.as_str()).collect();
    assert_eq!(names, ["a.moo", "b.moo"]);
    assert!(c.iter().all(|e| e.pattern == Pattern::Plain));
    assert_eq!(c[1].targets.len(), 1);
    assert_eq!(c[1].targets[0].branches, 0);
}

#[test]
fn load_errors_carry_their_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = load_corpus(&dir.path().join("nope")).unwrap_err();
    assert!(matches!(missing, BenchError::Io { .. }));
    assert_eq!(missing.exit_code(), 2);
    assert!(missing.to_string().contains("nope"));

    std::fs::write(dir.path().join("bad.moo"), "class A { int f() { return true; } }").unwrap();
    let bad = load_corpus(dir.path()).unwrap_err();
    assert!(matches!(bad, BenchError::Diagnostics { .. }));
    assert_eq!(bad.exit_code(), 1);
    assert!(bad.to_string().starts_with("bad.moo:"), "{bad}");

    std::fs::write(dir.path().join("manifest.toml"), "[[entry]]\nfile = 1\n").unwrap();
    let manifest = load_corpus(dir.path()).unwrap_err();
    assert!(matches!(manifest, BenchError::Manifest { .. }));
    assert_eq!(manifest.exit_code(), 1);
}

#[test]
fn branchless_target_reports_full_coverage() {
    let c = corpus();
    let e = c.iter().find(|e| e.name == "static_util.moo").unwrap();
    let t = e.target("StaticUtil", "twice").unwrap();
    let r = run_target(e, t, &SearchConfig::new(ClusterMode::Strict, 1));
    assert_eq!((r.branch_covered, r.branch_total), (0, 0));
    assert_eq!(r.coverage_pct, 100.0);
    assert!(r.diagnostic.is_none());
}

#[test]
fn heatmap_bins_have_exact_edges() {
    assert_eq!(HEATMAP_BINS.len(), 12);
    assert_eq!(heatmap_bin(0.0), 0);
    assert_eq!(heatmap_bin(0.01), 1);
    assert_eq!(heatmap_bin(8.33), 1);
    assert_eq!(heatmap_bin(10.0), 2);
    assert_eq!(heatmap_bin(66.67), 7);
    assert_eq!(heatmap_bin(99.99), 10);
    assert_eq!(heatmap_bin(100.0), 11);
}

#[test]
fn empty_corpus_gives_an_empty_report() {
    let r = compare_modes(&[], &quick(vec![1], 1.0));
    assert!(r.rows.is_empty());
    assert!(r.runs.is_empty());
    assert!(r.files.is_empty());
    assert_eq!(r.total.branches, 0);
    assert!(r.heatmap.iter().all(|c| c.count == 0));
    let dir = tempfile::tempdir().unwrap();
    emit_reports(&r, dir.path()).unwrap();
    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 2);
}

fn small_report() -> ComparisonReport {
    let c: Vec<CorpusEntry> = corpus()
        .into_iter()
        .filter(|e| ["static_util.moo", "account.moo", "int_stack.moo"].contains(&e.name.as_str()))
        .collect();
    compare_modes(&c, &quick(vec![1, 2], 0.3))
}

#[test]
fn report_totals_are_sums_of_parts() {
    let r = small_report();
    assert_eq!(r.rows.len(), 9);
    assert_eq!(r.runs.len(), 9 * 2 * 2);
    let mut keys: Vec<_> = r
        .runs
        .iter()
        .map(|x| (x.file.clone(), x.class.clone(), x.method.clone(), x.mode, x.seed))
        .collect();
    let sorted = {
        let mut k = keys.clone();
        k.sort();
        k
    };
    assert_eq!(keys, sorted);
    keys.dedup();
    assert_eq!(keys.len(), r.runs.len());

    for row in &r.rows {
        let mean = |mode| {
            let v: Vec<f64> = r
                .runs_for(&row.class, &row.method, mode)
                .map(|x| x.branch_covered as f64)
                .collect();
            assert_eq!(v.len(), 2);
            v.iter().sum::<f64>() / 2.0
        };
        assert_eq!(row.strict_covered, mean(ClusterMode::Strict));
        assert_eq!(row.emote_covered, mean(ClusterMode::Emote));
        assert_eq!(row.delta, row.emote_pct - row.strict_pct);
    }
    let branches: usize = r.files.iter().map(|f| f.branches).sum();
    assert_eq!(branches, r.total.branches);
    assert_eq!(r.total.branches, r.rows.iter().map(|x| x.branches).sum::<usize>());
    let strict: f64 = r.rows.iter().map(|x| x.strict_covered).sum();
    assert!((r.total.strict_covered - strict).abs() < 1e-9);
    assert!((r.total.strict_pct - 100.0 * strict / branches as f64).abs() < 1e-9);
    assert_eq!(r.heatmap.len(), 144);
    assert_eq!(r.heatmap.iter().map(|c| c.count).sum::<usize>(), r.rows.len());
    // StaticUtil.twice has no branches and sits in the 100/100 corner.
    let twice = r.rows.iter().find(|x| x.method == "twice").unwrap();
    assert_eq!((twice.strict_pct, twice.emote_pct), (100.0, 100.0));
    // Timeline: one point per second per mode.
    assert_eq!(r.timeline.len(), 2);
    assert!(r.timeline.iter().all(|p| p.t_seconds == 0.0));
}

#[test]
fn report_json_round_trips() {
    let r = small_report();
    let back = ComparisonReport::from_json(&r.to_json()).unwrap();
    assert_eq!(back, r);
}

#[test]
fn csv_outputs_match_the_json_report() {
    let r = small_report();
    let dir = tempfile::tempdir().unwrap();
    let written = emit_reports(&r, &dir.path().join("out")).unwrap();
    assert_eq!(written.len(), 5);
    let json = std::fs::read_to_string(dir.path().join("out/report.json")).unwrap();
    let r = ComparisonReport::from_json(&json).unwrap();

    let read = |name: &str| -> Vec<csv::StringRecord> {
        csv::Reader::from_path(dir.path().join("out").join(name))
            .unwrap()
            .records()
            .map(Result::unwrap)
            .collect()
    };
    let f = |x: f64| format!("{x:.2}");

    let comparison = read("comparison.csv");
    assert_eq!(comparison.len(), r.rows.len());
    for (rec, row) in comparison.iter().zip(&r.rows) {
        assert_eq!(&rec[0], row.file);
        assert_eq!(&rec[2], row.method);
        assert_eq!(rec[3].parse::<usize>().unwrap(), row.branches);
        assert_eq!(rec[5], f(row.strict_pct));
        assert_eq!(rec[7], f(row.emote_pct));
        assert_eq!(rec[8], f(row.delta));
    }

    let summary = read("summary.csv");
    assert_eq!(summary.len(), r.files.len() + 1);
    let total = summary.last().unwrap();
    let expected = format!(
        "TOTAL,{},{},{},{},{},{}",
        r.total.branches,
        f(r.total.strict_covered),
        f(r.total.strict_pct),
        f(r.total.emote_covered),
        f(r.total.emote_pct),
        f(r.total.delta)
    );
    assert_eq!(total.iter().collect::<Vec<_>>().join(","), expected);
    let text = std::fs::read_to_string(dir.path().join("out/summary.csv")).unwrap();
    assert!(text.starts_with("file,branches,strict_covered,strict_pct,emote_covered,emote_pct,delta\n"));
    assert!(text.ends_with(&format!("{expected}\n")));

    let heatmap = read("heatmap.csv");
    assert_eq!(heatmap.len(), 144);
    for (rec, cell) in heatmap.iter().zip(&r.heatmap) {
        assert_eq!(&rec[0], cell.strict_bin);
        assert_eq!(&rec[1], cell.emote_bin);
        assert_eq!(rec[2].parse::<usize>().unwrap(), cell.count);
    }

    let timeline = read("timeline.csv");
    assert_eq!(timeline.len(), r.timeline.len());
    for (rec, p) in timeline.iter().zip(&r.timeline) {
        assert_eq!(rec[0], f(p.t_seconds));
        assert_eq!(&rec[1], p.mode.as_str());
        assert_eq!(rec[2], f(p.mean_coverage_pct));
    }
}

#[test]
fn seed_averages_keep_two_decimals() {
    let c = corpus();
    let e = c.iter().find(|e| e.name == "account.moo").unwrap().clone();
    let mut runs = Vec::new();
    let cfg = quick(vec![1, 2, 3], 0.0);
    for (seed, covered) in [(1, 4), (2, 4), (3, 5)] {
        for mode in [ClusterMode::Strict, ClusterMode::Emote] {
            let t = e.target("Account", "withdraw").unwrap();
            let mut s = SearchConfig::new(mode, seed);
            s.budget_seconds = 0.0;
            let mut r = run_target(&e, t, &s);
            r.branch_covered = covered;
            runs.push(r);
        }
    }
    let report = build_report(&[e], &cfg, runs);
    let row = report.rows.iter().find(|r| r.method == "withdraw").unwrap();
    assert_eq!(format!("{:.2}", row.strict_covered), "4.33");
    assert_eq!(format!("{:.2}", row.strict_pct), "72.22");
}

#[test]
fn state_init_targets_need_setup_calls() {
    for e in corpus().iter().filter(|e| e.pattern == Pattern::StateInit) {
        let with_branches: Vec<_> = e.targets.iter().filter(|t| t.branches > 0).collect();
        assert!(!with_branches.is_empty());
        for t in with_branches {
            let strict = reachable_goals(&e.program, t.id, ClusterMode::Strict, 6, 400_000);
            assert!(strict.exhaustive);
            assert!(!strict.covers_all(), "{}.{}", t.class, t.method);
            let emote = reachable_goals(&e.program, t.id, ClusterMode::Emote, 6, 400_000);
            assert!(emote.covers_all(), "{}.{}", t.class, t.method);
            assert!(emote.witnesses.values().all(|w| w.len() <= 6));
        }
    }
}

#[test]
fn state_init_strict_covers_only_the_null_check() {
    let c = corpus();
    let e = c.iter().find(|e| e.name == "consistency.moo").unwrap();
    let t = e.target("Consistency", "checkConsistency").unwrap();
    let r = reachable_goals(&e.program, t.id, ClusterMode::Strict, 6, 400_000);
    let names: Vec<String> = r.covered.iter().map(|g| g.display(&e.program)).collect();
    assert_eq!(names, ["Consistency.checkConsistency/0#0:TRUE"]);
}

#[test]
fn indirect_callee_has_a_non_target_single_statement_test() {
    let c = corpus();
    let e = c.iter().find(|e| e.pattern == Pattern::IndirectCallee).unwrap();
    let target = e.target("Album", "stripString").unwrap().id;
    let ctor = e.program.constructors(target.class).next().unwrap();
    let getter = e.program.find_method("Album", "getPrice").unwrap();
    // Receiver setup plus one call that is not the target.
    let t = TestCase::new(vec![
        TestStatement::Construct { ctor, args: vec![] },
        TestStatement::Invoke {
            receiver: modgen_core::testmodel::VarRef(0),
            method: getter,
            args: vec![Arg::Lit(Literal::Str("$5a".into()))],
        },
    ]);
    let trace = execute_test(&e.program, &t, ExecLimits::default());
    assert_eq!(attributed_events(&trace, target).count(), 0);
    assert!(trace.events.iter().any(|ev| ev.goal.method == target));
}

#[test]
fn every_corpus_target_admits_brute_force() {
    for e in corpus() {
        for t in &e.targets {
            for mode in [ClusterMode::Strict, ClusterMode::Emote] {
                let r = reachable_goals(&e.program, t.id, mode, 6, 400_000);
                assert!(r.exhaustive, "{}.{} {mode}", t.class, t.method);
            }
            let emote = reachable_goals(&e.program, t.id, ClusterMode::Emote, 6, 400_000);
            assert!(emote.covers_all(), "{}.{}", t.class, t.method);
        }
    }
}
