use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn starflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_starflow"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_picard(out: &Path) -> Output {
    starflow(&["run", "--preset", "picard_contraction", "--out", out.to_str().unwrap()])
}

#[test]
fn passing_preset_exits_zero_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let output = run_picard(dir.path());
    assert_eq!(output.status.code(), Some(0));
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.lines().any(|l| l.starts_with("PASS criterion 8")), "{stdout}");
    assert!(!stdout.contains("FAIL"));
    for name in ["violations.csv", "picard_manifest.csv"] {
        assert!(dir.path().join(name).exists(), "missing {name}");
    }
    let snapshots = fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().contains("_snapshot_"))
        .count();
    assert!(snapshots > 0);
}

#[test]
fn outputs_are_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(run_picard(a.path()).status.success());
    assert!(run_picard(b.path()).status.success());
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(!names.is_empty());
    for name in names {
        let left = fs::read(a.path().join(&name)).unwrap();
        let right = fs::read(b.path().join(&name)).unwrap();
        assert_eq!(left, right, "{name:?} differs");
    }
}

#[test]
fn invalid_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cfg");
    fs::write(&path, "preset = decay\nflux = power_law\nq = 0.5\n").unwrap();
    let output = starflow(&["run", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("line 3") && stderr.contains("q must exceed 1"), "{stderr}");
}

#[test]
fn unknown_key_in_override_exits_two() {
    let output = starflow(&["run", "--preset", "decay", "--set", "bogus=1"]);
    assert_eq!(output.status.code(), Some(2));
}
