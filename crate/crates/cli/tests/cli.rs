use std::path::{Path, PathBuf};

use mobtraj::{run_cli, CliOutput};

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .display()
        .to_string()
}

fn run(store: &Path, args: &[&str]) -> CliOutput {
    let mut argv = vec!["mobtraj".to_string(), "--store".into(), store.display().to_string()];
    argv.extend(args.iter().map(|a| a.to_string()));
    run_cli(argv)
}

fn loaded(dir: &Path) -> PathBuf {
    let store = dir.join("s.snapshot");
    for (cmd, file) in [
        ("load-regions", "regions.jsonl"),
        ("load-devices", "devices.csv"),
        ("load-points", "points.csv"),
    ] {
        let out = run(&store, &[cmd, &fixture(file)]);
        assert_eq!(out.code, 0, "{}", out.stderr);
    }
    store
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("s.snapshot");
    for args in [
        &["segment", "--tau", "600"][..],
        &["frobnicate"],
        &[],
        &["segment", "--eps", "x", "--tau", "1"],
    ] {
        let out = run(&store, args);
        assert_eq!(out.code, 1, "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    assert!(!store.exists());
    let help = run_cli(["mobtraj", "--help"]);
    assert_eq!(help.code, 0);
    assert!(help.stdout.contains("load-points"));
}

#[test]
fn input_errors_exit_one_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let store = loaded(dir.path());
    let cases: [(&[&str], &str); 5] = [
        (&["query", "stops where nope > 3"], "a field of stops"),
        (&["query", "stops"], "segment"),
        (&["segment", "--eps", "-1", "--tau", "60"], "eps"),
        (&["load-points", "/does/not/exist.csv"], "exist.csv"),
        (&["export", "--kind", "flat", "--object", "alice"], "flat"),
    ];
    for (args, needle) in cases {
        let out = run(&store, args);
        assert_eq!(out.code, 1, "{args:?}: {out:?}");
        assert!(out.stderr.starts_with("error: "), "{}", out.stderr);
        assert!(out.stderr.contains(needle), "{args:?}: {}", out.stderr);
    }
}

#[test]
fn load_reports_counts_and_reload_changes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let store = loaded(dir.path());
    let before = std::fs::read(&store).unwrap();
    let out = run(&store, &["load-points", &fixture("points.csv")]);
    assert_eq!(out.code, 0);
    assert!(
        out.stdout.ends_with("points.csv: 59 accepted, 0 rejected\n"),
        "{}",
        out.stdout
    );
    assert_eq!(std::fs::read(&store).unwrap(), before);
}

#[test]
fn export_prints_json_presentations() {
    let dir = tempfile::tempdir().unwrap();
    let store = loaded(dir.path());
    assert_eq!(
        run(&store, &["segment", "--eps", "50", "--tau", "600", "--object", "alice"]).code,
        0
    );
    let out = run(&store, &["export", "--kind", "structured", "--object", "alice"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["kind"], "structured");
    let stops = v["value"]["episodes"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|e| e["kind"] == "stop")
        .count();
    assert_eq!(stops, 4);
    let out = run(&store, &["export", "--kind", "structured", "--object", "bob"]);
    assert_eq!(out.code, 1, "bob was not segmented");
}

#[test]
fn save_and_load_move_the_working_store() {
    let dir = tempfile::tempdir().unwrap();
    let store = loaded(dir.path());
    let copy = dir.path().join("copy.snapshot");
    assert_eq!(run(&store, &["save", &copy.display().to_string()]).code, 0);
    let other = dir.path().join("other.snapshot");
    assert_eq!(run(&other, &["load", &copy.display().to_string()]).code, 0);
    let q = |s: &Path| run(s, &["query", "raw group by object select count"]).stdout;
    assert_eq!(q(&other), q(&store));
    assert_eq!(q(&other), "object\tcount\nalice\t43\nbob\t16\n");
}

#[test]
fn unwritable_working_store_is_an_internal_error() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("missing-dir").join("s.snapshot");
    let out = run(&store, &["load-regions", &fixture("regions.jsonl")]);
    assert_eq!(out.code, 2, "{out:?}");
    assert!(out.stderr.starts_with("internal error"));
}
