use std::path::PathBuf;
use std::process::{Command, Output};

fn fairprice(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fairprice")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fairprice-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn solve_prints_the_example_optimum() {
    let out = fairprice(&["solve", "--preset", "example1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("revenue          0.510345"), "{text}");
    assert!(text.contains("[0.6897, 0.0000, 0.3103]"));
    assert!(text.contains("[0.0000, 0.8621, 0.1379]"));
}

#[test]
fn eps_zero_matches_example1() {
    let a = fairprice(&["solve", "--preset", "example1"]);
    let b = fairprice(&["solve", "--preset", "example-eps", "--eps", "0"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn repeated_runs_write_identical_files() {
    let dir = scratch("rep");
    let snapshot = || {
        let out = fairprice(&["run", "-T", "5000", "--seeds", "3,8", "--out", dir.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let mut files: Vec<_> = std::fs::read_dir(&dir)
            .unwrap()
            .map(|e| {
                let path = e.unwrap().path();
                (path.file_name().unwrap().to_owned(), std::fs::read(&path).unwrap())
            })
            .collect();
        files.sort();
        std::fs::remove_dir_all(&dir).unwrap();
        files
    };
    let first = snapshot();
    let second = snapshot();
    assert_eq!(first.len(), 5);
    assert!(first == second);
    let summary = &first.iter().find(|(n, _)| n == "summary_T5000_seed3.json").unwrap().1;
    let summary: serde_json::Value = serde_json::from_slice(summary).unwrap();
    assert_eq!(summary["config"]["seed"], 3);
    assert!(summary["cumulative_u"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn fair_oracle_run_has_zero_substantive_gap() {
    let dir = scratch("oracle");
    let out = fairprice(&["run", "--agent", "fair-oracle", "-T", "10000", "--seeds", "1", "--record-every", "0", "--out", dir.to_str().unwrap()]);
    assert!(out.status.success());
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.join("summary_T10000_seed0.json")).unwrap()).unwrap();
    assert!(summary["cumulative_s"].as_f64().unwrap() <= 1e-9);
    assert!(summary["cumulative_regret"].as_f64().unwrap().abs() <= 1e-9);
    let _ = std::fs::remove_dir_all(dir);
}

#[test]
fn usage_and_config_errors_exit_nonzero() {
    let out = fairprice(&["sweep", "-T", "100,200", "--seeds", "5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("at least 3"));
    let bad = scratch("bad.toml");
    std::fs::write(&bad, "agent.scale_factor = \"x\"\n").unwrap();
    let out = fairprice(&["run", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
    let _ = std::fs::remove_file(bad);
}

#[test]
fn unwritable_output_is_an_io_error() {
    let blocker = scratch("blocker");
    std::fs::write(&blocker, "").unwrap();
    let target = blocker.join("sub");
    let out = fairprice(&["run", "-T", "100", "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let _ = std::fs::remove_file(blocker);
}

#[test]
fn validate_runs_selected_criteria() {
    let out = fairprice(&["validate", "--only", "1,11"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().all(|l| l.starts_with("[PASS]")));
}
