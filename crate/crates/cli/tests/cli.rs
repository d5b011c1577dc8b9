use std::path::PathBuf;
use std::process::{Command, Output};

use tabplai_cli::report::{render_text, RunReport};

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn tabplai(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tabplai")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn without_timings(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with("% counters") && !l.starts_with("% time") && !l.starts_with("% program"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn write_temp(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn analyze_append() {
    let o = tabplai(&["analyze", corpus("append.pl").to_str().unwrap()]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("app/3 : app(A,B,C) A/g, B/g, C/any → A/g, B/g, C/g"), "{out}");
    assert_eq!(out.matches("% entry ").count(), 3);
}

#[test]
fn engines_print_the_same_results() {
    for file in ["qsort.pl", "mutual.pl", "dist.pl", "queens.pl"] {
        for domain in ["gr", "shfr"] {
            let path = corpus(file);
            let path = path.to_str().unwrap();
            let t = tabplai(&["analyze", path, "--domain", domain]);
            let n = tabplai(&["analyze", path, "--domain", domain, "--engine", "naive"]);
            assert!(t.status.success() && n.status.success());
            assert_eq!(without_timings(&stdout(&t)), without_timings(&stdout(&n)), "{file} {domain}");
        }
    }
}

#[test]
fn schedules_print_the_same_results() {
    let path = corpus("hanoi.pl");
    let path = path.to_str().unwrap();
    let base = without_timings(&stdout(&tabplai(&["analyze", path, "--domain", "shfr"])));
    for extra in [["--resume", "fifo"], ["--seed-nonrec", "off"]] {
        let mut args = vec!["analyze", path, "--domain", "shfr"];
        args.extend(extra);
        assert_eq!(without_timings(&stdout(&tabplai(&args))), base, "{extra:?}");
    }
}

#[test]
fn json_renders_back_to_the_text_format() {
    let path = corpus("reverse.pl");
    let path = path.to_str().unwrap();
    let json = tabplai(&["analyze", path, "--domain", "shfr", "--format", "json"]);
    assert!(json.status.success());
    let report: RunReport = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(report.domain, "shfr");
    let text = tabplai(&["analyze", path, "--domain", "shfr"]);
    assert_eq!(without_timings(&render_text(&report)), without_timings(&stdout(&text)));
}

#[test]
fn input_errors_exit_1() {
    let o = tabplai(&["analyze", "/nonexistent/file.pl"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error: "));

    let dir = tempfile::tempdir().unwrap();
    let bad = write_temp(&dir, "bad.pl", "p(X :- q.\n");
    assert_eq!(tabplai(&["analyze", &bad]).status.code(), Some(1));
    let undefined = write_temp(&dir, "undefined.pl", ":- entry nothere(X).\np(a).\n");
    assert_eq!(tabplai(&["analyze", &undefined]).status.code(), Some(1));
    assert_eq!(tabplai(&["analyze", &bad, "--domain", "nope"]).status.code(), Some(1));
}

#[test]
fn resource_errors_exit_2() {
    let path = corpus("qsort.pl");
    for engine in ["tabled", "naive"] {
        let o = tabplai(&["analyze", path.to_str().unwrap(), "--engine", engine, "--step-budget", "5"]);
        assert_eq!(o.status.code(), Some(2), "{engine}");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = std::fs::read_to_string(corpus("hanoi.pl")).unwrap();
    let wide = src.replace("[ground(N), ground(A), ground(B), ground(C)].", "[ground(N)].");
    let wide = write_temp(&dir, "wide.pl", &wide);
    assert_eq!(tabplai(&["analyze", &wide, "--domain", "shfr"]).status.code(), Some(2));
    assert!(tabplai(&["analyze", &wide, "--domain", "gr"]).status.success());
}

#[test]
fn dist_over_a_cycle() {
    let o = tabplai(&["dist", corpus("dist.pl").to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "b: 5\nc: 6\n");
    let fifo = tabplai(&["dist", corpus("dist.pl").to_str().unwrap(), "--resume", "fifo"]);
    assert_eq!(stdout(&fifo), "b: 5\nc: 6\n");
}

#[test]
fn negative_weights_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let g = write_temp(&dir, "neg.pl", "edge(a, b, 1).\nedge(b, c, -4).\n");
    let o = tabplai(&["dist", &g]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("negative weight"));
}

#[test]
fn bench_writes_one_row_per_program_and_domain() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bench.csv");
    let o = tabplai(&[
        "bench",
        corpus("").to_str().unwrap(),
        "--repetitions",
        "1",
        "--discard",
        "0",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header[..3], ["program", "domain", "recursive"]);
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    let programs = std::fs::read_dir(corpus(""))
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "pl"))
        .count();
    assert_eq!(rows.len(), programs * 2);
    for r in &rows {
        assert_eq!(r.len(), header.len());
        assert!(r[1] == "gr" || r[1] == "shfr");
    }
}

#[test]
fn check_passes_on_the_corpus() {
    for file in ["append.pl", "mutual.pl", "dist.pl"] {
        let o = tabplai(&["check", corpus(file).to_str().unwrap(), "--depth", "4"]);
        assert!(o.status.success(), "{file}: {}", String::from_utf8_lossy(&o.stderr));
    }
}
