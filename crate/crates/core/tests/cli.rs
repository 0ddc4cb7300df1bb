use std::path::Path;
use std::process::{Command, Output};

use minesched::block_model::{load_block_model, load_calendar, save_block_model, Block, BlockIndex, BlockModel, Dims};
use minesched::grade_ensemble::load_ensemble;
use minesched::pit::load_shells;
use minesched::staging::load_staging;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_minesched"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// gen, ensemble and pit on a small deposit, returning the directory.
fn prepared(dir: &Path, dims: &str, members: usize) {
    ok(&["gen", "--seed", "3", "--dims", dims, "--drillholes", "12", "--out", p(dir)]);
    ok(&[
        "ensemble", "--samples", p(&dir.join("samples.csv")), "--model", p(&dir.join("truth.csv")),
        "--members", &members.to_string(), "--seed", "3", "--out", p(&dir.join("ens")),
    ]);
    ok(&[
        "pit", "--model", p(&dir.join("ens/aggregate.csv")), "--economics", p(&dir.join("economics.txt")),
        "--out", p(&dir.join("shells.csv")),
    ]);
}

fn stage(dir: &Path, strategy: &str, k: usize, out: &str) {
    ok(&[
        "stage", "--strategy", strategy, "--model", p(&dir.join("ens/aggregate.csv")),
        "--shells", p(&dir.join("shells.csv")), "--uncertainty", p(&dir.join("ens/uncertainty.csv")),
        "--economics", p(&dir.join("economics.txt")), "--stages", &k.to_string(), "--out", p(&dir.join(out)),
    ]);
}

fn problem_flags(dir: &Path, staging: &str) -> Vec<String> {
    vec![
        "--staging".into(), p(&dir.join(staging)).into(),
        "--calendar".into(), p(&dir.join("calendar.csv")).into(),
        "--economics".into(), p(&dir.join("economics.txt")).into(),
    ]
}

fn schedule(dir: &Path, staging: &str, out: &str, extra: &[&str]) -> String {
    let mut args: Vec<String> = vec!["schedule".into(), "--model".into(), p(&dir.join("ens/aggregate.csv")).into()];
    args.extend(problem_flags(dir, staging));
    args.extend(["--out".into(), p(&dir.join(out)).into()]);
    args.extend(extra.iter().map(|s| s.to_string()));
    ok(&args.iter().map(String::as_str).collect::<Vec<_>>())
}

fn evaluate(dir: &Path, ensemble: &str, staging: &str, sched: &str, out: &str) -> String {
    let mut args: Vec<String> = vec![
        "evaluate".into(),
        "--schedule".into(), p(&dir.join(sched).join("schedule.csv")).into(),
        "--ensemble".into(), p(&dir.join(ensemble)).into(),
    ];
    args.extend(problem_flags(dir, staging));
    args.extend(["--out".into(), p(&dir.join(out)).into()]);
    ok(&args.iter().map(String::as_str).collect::<Vec<_>>())
}

#[test]
fn gen_is_deterministic_and_loadable() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        ok(&["gen", "--seed", "7", "--dims", "20x20x10", "--out", p(d.path())]);
    }
    for f in ["truth.csv", "samples.csv", "calendar.csv", "economics.txt"] {
        assert_eq!(read(&a.path().join(f)), read(&b.path().join(f)), "{f}");
    }
    let model = load_block_model(&a.path().join("truth.csv")).unwrap();
    model.validate().unwrap();
    assert_eq!(model.dims, Dims::new(20, 20, 10));
    assert_eq!(load_calendar(&a.path().join("calendar.csv")).unwrap().t_max(), 20);
}

#[test]
fn usage_and_data_errors_have_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["gen", "--dims", "0x4x4", "--out", p(dir.path())]).status.code(), Some(2));
    assert_eq!(run(&["stage", "--strategy", "sideways"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    let missing = dir.path().join("missing.csv");
    let out = run(&["pit", "--model", p(&missing), "--economics", p(&missing), "--out", p(&dir.path().join("s.csv"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.csv"));
}

#[test]
fn single_member_ensemble_is_its_own_aggregate() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["gen", "--seed", "1", "--dims", "6x6x4", "--drillholes", "8", "--out", p(d)]);
    let ens = |out: &str, n: &str| {
        ok(&[
            "ensemble", "--samples", p(&d.join("samples.csv")), "--model", p(&d.join("truth.csv")),
            "--members", n, "--seed", "5", "--out", p(&d.join(out)),
        ])
    };
    ens("one", "1");
    let (e, agg) = load_ensemble(&d.join("one")).unwrap();
    assert_eq!(e.members[0], agg);

    ens("a", "3");
    ens("b", "3");
    for f in ["member_00.csv", "member_01.csv", "member_02.csv", "aggregate.csv", "ensemble.meta", "uncertainty.csv"] {
        assert_eq!(read(&d.join("a").join(f)), read(&d.join("b").join(f)), "{f}");
        if f.starts_with("member") {
            load_block_model(&d.join("a").join(f)).unwrap().validate().unwrap();
        }
    }
}

fn flat_model(grades: &[f64]) -> BlockModel {
    let dims = Dims::new(grades.len(), 1, 1);
    let blocks = grades
        .iter()
        .enumerate()
        .map(|(i, &grade)| Block { index: BlockIndex::new(i, 0, 0), tonnage: 1000.0, grade, domain: 0 })
        .collect();
    BlockModel { blocks, ..BlockModel::uniform(dims, [10.0; 3], [0.0; 3], 1000.0).unwrap() }
}

#[test]
fn pit_edge_cases() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["gen", "--seed", "1", "--dims", "3x3x2", "--drillholes", "2", "--out", p(d)]);
    let econ = d.join("economics.txt");

    save_block_model(&flat_model(&[0.0, 0.0, 0.0]), &d.join("waste.csv")).unwrap();
    let out = run(&["pit", "--model", p(&d.join("waste.csv")), "--economics", p(&econ), "--out", p(&d.join("s0.csv"))]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "pit_blocks=0");
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty"));

    let one = flat_model(&[0.0, 0.05, 0.0]);
    save_block_model(&one, &d.join("one.csv")).unwrap();
    let out = ok(&["pit", "--model", p(&d.join("one.csv")), "--economics", p(&econ), "--out", p(&d.join("s1.csv"))]);
    assert_eq!(out.trim(), "pit_blocks=1");
    assert_eq!(load_shells(&d.join("s1.csv"), &one).unwrap().pit_blocks(), vec![1]);
}

#[test]
fn staging_strategies_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    prepared(d, "10x10x6", 4);
    let model = load_block_model(&d.join("ens/aggregate.csv")).unwrap();
    let shells = load_shells(&d.join("shells.csv"), &model).unwrap();
    let pit = shells.up_to(shells.n_shells());

    stage(d, "lazy", 1, "one.csv");
    let one = load_staging(&d.join("one.csv"), &model, Some(&pit)).unwrap();
    assert_eq!(one.k, 1);

    stage(d, "lazy", 3, "lazy.csv");
    ok(&[
        "stage", "--strategy", "file", "--model", p(&d.join("ens/aggregate.csv")), "--shells", p(&d.join("shells.csv")),
        "--staging", p(&d.join("lazy.csv")), "--out", p(&d.join("copy.csv")),
    ]);
    assert_eq!(read(&d.join("lazy.csv")), read(&d.join("copy.csv")));

    stage(d, "worst-case", 3, "wc.csv");
    let wc = load_staging(&d.join("wc.csv"), &model, Some(&pit)).unwrap();
    wc.check_covers(&pit, model.dims).unwrap();
}

#[test]
fn schedule_and_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    prepared(d, "8x8x3", 3);
    stage(d, "lazy", 2, "lazy.csv");

    schedule(d, "lazy.csv", "g0", &["--generations", "0"]);
    let out = schedule(d, "lazy.csv", "run", &["--generations", "40", "--population", "20", "--oracle"]);
    assert!(out.contains("oracle_match=true"), "{out}");

    let trace: Vec<f64> = read(&d.join("run/trace.csv"))
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(trace.len(), 41);
    assert!(trace.windows(2).all(|w| w[1] >= w[0]));

    let statement = evaluate(d, "ens", "lazy.csv", "run", "rep");
    assert!(statement.starts_with("average NPV of "));
    let t_max = load_calendar(&d.join("calendar.csv")).unwrap().t_max();
    assert_eq!(read(&d.join("rep/profit_by_member.csv")).lines().count(), 1 + t_max * 4);

    // Aggregate row of the report equals the optimiser's own cash flows.
    let sched_cf = per_period_cashflow(&read(&d.join("run/schedule.csv")));
    let agg_cf: Vec<f64> = read(&d.join("rep/profit_by_member.csv"))
        .lines()
        .filter(|l| l.split(',').nth(1) == Some("aggregate"))
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(sched_cf.len(), agg_cf.len());
    for (a, b) in sched_cf.iter().zip(&agg_cf) {
        assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{a} vs {b}");
    }
}

/// Sums the per-row cashflow column of a schedule CSV by period.
fn per_period_cashflow(schedule_csv: &str) -> Vec<f64> {
    let mut sums: Vec<f64> = Vec::new();
    for line in schedule_csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let t: usize = f[0].parse().unwrap();
        if sums.len() < t {
            sums.resize(t, 0.0);
        }
        sums[t - 1] += f[9].parse::<f64>().unwrap();
    }
    sums
}

#[test]
fn identical_members_report_zero_spread() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    prepared(d, "8x8x3", 1);
    stage(d, "lazy", 2, "lazy.csv");
    schedule(d, "lazy.csv", "run", &["--generations", "5", "--population", "8"]);

    let (_, agg) = load_ensemble(&d.join("ens")).unwrap();
    let same = d.join("same");
    let e = minesched::grade_ensemble::Ensemble::new(vec![agg.clone(); 3], vec![0, 1, 2], Default::default()).unwrap();
    minesched::grade_ensemble::save_ensemble(&e, &agg, &same).unwrap();
    evaluate(d, "same", "lazy.csv", "run", "rep");

    for line in read(&d.join("rep/period_stats.csv")).lines().skip(1) {
        let std: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert_eq!(std, 0.0, "{line}");
    }
    assert!(read(&d.join("rep/summary.txt")).contains("total_profit_range=0\n"));
}

#[test]
fn compare_matches_file_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let text = ok(&[
        "compare", "--seed", "3", "--dims", "8x8x3", "--drillholes", "12", "--members", "3", "--stages", "3",
        "--generations", "10", "--population", "10", "--out", p(&d.join("cmp")),
    ]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("- Lazy staging: average NPV of $"));
    assert!(lines[1].starts_with("- Worst-case staging: "));
    assert!(lines[2].starts_with("- Levelled staging: "));
    assert_eq!(read(&d.join("cmp/comparison.txt")), text);

    prepared(d, "8x8x3", 3);
    stage(d, "lazy", 3, "lazy.csv");
    assert_eq!(read(&d.join("lazy.csv")), read(&d.join("cmp/lazy/staging.csv")));
    schedule(d, "lazy.csv", "run", &["--generations", "10", "--population", "10", "--seed", "3"]);
    assert_eq!(read(&d.join("run/schedule.csv")), read(&d.join("cmp/lazy/schedule.csv")));
    evaluate(d, "ens", "lazy.csv", "run", "rep");
    for f in ["summary.txt", "period_stats.csv", "remaining_npv.csv"] {
        assert_eq!(read(&d.join("rep").join(f)), read(&d.join("cmp/lazy").join(f)), "{f}");
    }

    ok(&[
        "compare", "--seed", "3", "--dims", "8x8x3", "--drillholes", "12", "--members", "3", "--stages", "3",
        "--generations", "2", "--population", "4", "--stockpile", "off",
        "--staging", p(&d.join("lazy.csv")), "--out", p(&d.join("cmp2")),
    ]);
    assert!(read(&d.join("cmp2/comparison.txt")).starts_with("- Expected staging: "));
}
