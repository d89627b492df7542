use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn chemolab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chemolab")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn value<'a>(report: &'a str, key: &str) -> Option<&'a str> {
    report.lines().find_map(|l| l.strip_prefix(key)?.strip_prefix(" = "))
}

const CONSTANT: &str = "domain.lengths = pi
domain.cells = 32
init.u = const 1
init.v = const 1
init.w = const 0.5
init.z = const 1
solver.t_end = 5
theory.samples = 40
";

#[test]
fn constant_data_passes_every_audit() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.cfg", CONSTANT);
    let out = chemolab(&["simulate", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = stdout(&out);
    for key in ["conservation.pass", "fit.pass", "envelope.pass", "audit.pass"] {
        assert_eq!(value(&r, key), Some("true"), "{key}");
    }
    assert!(dir.path().join("c.csv").exists());
    assert!(dir.path().join("c.report").exists());
    assert!(dir.path().join("c.report.json").exists());
}

#[test]
fn simulate_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = write_config(dir.path(), "a.cfg", CONSTANT);
    let b = write_config(dir.path(), "b.cfg", CONSTANT);
    assert!(chemolab(&["simulate", a.to_str().unwrap()]).status.success());
    assert!(chemolab(&["simulate", b.to_str().unwrap()]).status.success());
    for ext in ["csv", "report", "report.json"] {
        let x = std::fs::read(dir.path().join(format!("a.{ext}"))).unwrap();
        let y = std::fs::read(dir.path().join(format!("b.{ext}"))).unwrap();
        assert_eq!(x, y, "{ext} differs");
    }
}

#[test]
fn parse_errors_report_line_numbers() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "bad.cfg", "domain.lengths = pi\ndomain.cells = 16\ninit.u = const 1\nsolver.t_end = soon\n");
    let out = chemolab(&["simulate", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("line 4"), "{}", stderr(&out));

    let cfg = write_config(dir.path(), "unknown.cfg", "domain.lengths = pi\nsolver.speed = 2\n");
    let out = chemolab(&["simulate", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
}

#[test]
fn rejects_tiny_grid_and_negative_data() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "s.cfg", "domain.lengths = pi\ndomain.cells = 3\ninit.u = const 1\n");
    assert_eq!(chemolab(&["simulate", cfg.to_str().unwrap()]).status.code(), Some(4));
    let cfg = write_config(dir.path(), "n.cfg", "domain.lengths = pi\ndomain.cells = 8\ninit.u = const -1\n");
    assert_eq!(chemolab(&["simulate", cfg.to_str().unwrap()]).status.code(), Some(4));
}

#[test]
fn missing_config_file_is_an_io_error() {
    let out = chemolab(&["simulate", "/nonexistent/run.cfg"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).starts_with("error:"));
}

#[test]
fn degenerate_data_is_flagged() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "d.cfg", "domain.lengths = pi\ndomain.cells = 32\ninit.u = const 0\nsolver.t_end = 1\n");
    let out = chemolab(&["simulate", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = stdout(&out);
    assert_eq!(value(&r, "status.degenerate"), Some("true"));
    assert!(value(&r, "rates.status").unwrap().starts_with("skipped"));
}

#[test]
fn blow_up_exits_with_code_3() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "b.cfg",
        "domain.lengths = pi\ndomain.cells = 32\ninit.u = cos 1 0.9 1\ninit.v = const 1\ninit.z = const 1\nsolver.t_end = 5\nsolver.blowup_threshold = 1.95\n",
    );
    let out = chemolab(&["simulate", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(value(&stdout(&out), "status.blown_up"), Some("true"));
}

#[test]
fn bounds_names_branch_and_json_matches_text() {
    let dir = TempDir::new().unwrap();
    let json = dir.path().join("b.json");
    let out = chemolab(&["bounds", "--lambda1", "1", "--ubar0", "6", "--json", json.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(value(&text, "envelope.branch"), Some("A"));
    let parsed: serde_json::Map<String, serde_json::Value> =
        serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let keys: Vec<&str> = text.lines().filter_map(|l| l.split(" = ").next()).collect();
    assert_eq!(keys, parsed.keys().map(String::as_str).collect::<Vec<_>>());
    for (key, v) in &parsed {
        if let Some(x) = v.as_f64() {
            let t: f64 = value(&text, key).unwrap().parse().unwrap();
            assert_eq!(t, x, "{key}");
        }
    }
    let rate: f64 = value(&text, "rates.w.bound").unwrap().parse().unwrap();
    assert_eq!(rate, 3.0);

    let out = chemolab(&["bounds", "--lambda1", "1", "--ubar0", "1"]);
    assert_eq!(value(&stdout(&out), "envelope.branch"), Some("B"));
}

#[test]
fn semigroup_check_validates_exponents() {
    let out = chemolab(&["semigroup-check", "--lengths", "pi", "--cells", "32", "--kinds", "iii", "--q", "1"]);
    assert_eq!(out.status.code(), Some(4));
    let out = chemolab(&[
        "semigroup-check", "--lengths", "pi", "--cells", "32", "--kinds", "i", "--p", "2", "--q", "2", "--samples", "20",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
}

#[test]
fn sweep_at_zero_scale_is_converged_at_start() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "s.cfg",
        "domain.lengths = pi\ndomain.cells = 32\ninit.u = cos 1 0.5 1\ninit.v = const 1\ninit.z = const 1\nsolver.t_end = 4\ntheory.samples = 20\n",
    );
    let out = chemolab(&["sweep", cfg.to_str().unwrap(), "--scales", "0,1"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = stdout(&out);
    assert_eq!(value(&r, "sweep.max_u_inf_nondecreasing"), Some("true"));
    assert!(dir.path().join("s.sweep.csv").exists());
    let converged: f64 = value(&r, "row.0.time_to_converge").unwrap().parse().unwrap();
    assert_eq!(converged, 0.0);
}

#[test]
fn rates_reaudits_a_written_series() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.cfg", CONSTANT);
    assert!(chemolab(&["simulate", cfg.to_str().unwrap()]).status.success());
    let csv = dir.path().join("c.csv");
    let out = chemolab(&["rates", csv.to_str().unwrap(), "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(value(&stdout(&out), "fit.pass"), Some("true"));
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_chemolab"))
        .env("CHEMOLAB_THREADS", "many")
        .args(["semigroup-check", "--lengths", "pi", "--cells", "16", "--kinds", "i", "--samples", "5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
}
