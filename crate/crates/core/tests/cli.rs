use std::fs;
use std::path::Path;
use std::process::Command;

use mra_opt::cli::{execute, parse_config, Cli, Command as Cmd, CSV_HEADER};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mra-opt"))
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("exp.cfg");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn single_point_sweep_has_four_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "axes = psi_max\npsi_max_list = pi/8\ntrials = 1\n");
    let out = dir.path().join("out");
    let status = bin()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = fs::read_to_string(out.join("sweep_psi_max.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 5);
    let schemes: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(schemes, ["FPA", "MA", "RA", "MRA"]);
    for l in &lines[1..] {
        let fields: Vec<&str> = l.split(',').collect();
        assert_eq!(fields.len(), 7);
        assert_eq!(fields[1], "psi_max");
        assert_eq!(fields[2], "0.392699082");
        assert_eq!(fields[3], "0");
        assert!(fields[4].parse::<f64>().unwrap() >= 0.0);
        assert!(fields[6] == "true" || fields[6] == "false");
    }
    // Only the CSV is left behind, no temp files.
    assert_eq!(fs::read_dir(&out).unwrap().count(), 1);
}

#[test]
fn snr_axis_lists_default_grid_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let cli = Cli {
        command: Cmd::Sweep,
        config: Some(write_config(dir.path(), "axes = snr\ntrials = 1\nmax_iterations = 3\n")),
        out: Some(dir.path().to_path_buf()),
        seed: Some(9),
        trials: None,
    };
    assert_eq!(execute(&cli), 0);
    let csv = fs::read_to_string(dir.path().join("sweep_snr.csv")).unwrap();
    let fpa: Vec<&str> = csv
        .lines()
        .skip(1)
        .filter(|l| l.starts_with("FPA,"))
        .map(|l| l.split(',').nth(2).unwrap())
        .collect();
    assert_eq!(fpa, ["-4", "-2", "0", "2", "4", "6", "8", "10", "12"]);
    assert_eq!(csv.lines().count(), 1 + 4 * 9);
}

#[test]
fn same_seed_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "axes = r\nr_list = 1, 2.5\ntrials = 3\n");
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let status = bin()
            .args(["sweep", "--seed", "77", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
        outputs.push(fs::read(out.join("sweep_r.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn run_writes_single_point_csv() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["run", "--trials", "2", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("run.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 4 * 2);
    assert!(csv.lines().skip(1).all(|l| l.contains(",snr,1,")));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();

    let bad = write_config(dir.path(), "trials = 0\n");
    let out = bin().args(["sweep", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());

    let unknown = dir.path().join("unknown.cfg");
    fs::write(&unknown, "colour = blue\n").unwrap();
    let out = bin().args(["run", "--config"]).arg(&unknown).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));

    let missing = bin().args(["run", "--config", "/nonexistent/cfg"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));

    assert_eq!(bin().arg("frobnicate").output().unwrap().status.code(), Some(2));

    // The output "directory" is a regular file.
    let blocker = dir.path().join("blocker");
    fs::write(&blocker, "x").unwrap();
    let out = bin().args(["run", "--trials", "1", "--out"]).arg(&blocker).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(fs::read_to_string(&blocker).unwrap(), "x");
}

#[test]
fn validate_reports_named_checks() {
    let out = bin().arg("validate").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let checks: Vec<&str> = text.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).collect();
    assert!(checks.len() >= 4);
    assert!(checks.iter().all(|l| l.starts_with("PASS")));
}

#[test]
fn flags_override_file_values() {
    let dir = tempfile::tempdir().unwrap();
    let cli = Cli {
        command: Cmd::Run,
        config: Some(write_config(dir.path(), "seed = 3\ntrials = 9\n")),
        out: None,
        seed: Some(4),
        trials: Some(2),
    };
    let cfg = mra_opt::cli::resolve_config(&cli).unwrap();
    assert_eq!(cfg.experiment.seed, 4);
    assert_eq!(cfg.experiment.trials, 2);
    assert_eq!(parse_config("seed = 3").unwrap().experiment.seed, 3);
}
