use std::fs;
use std::path::Path;
use std::process::Command;

use proptest::prelude::*;
use spectrwm_cli::config::{defaults, parse_config_text};
use spectrwm_cli::{
    emit_csv, read_csv, run_experiment, Cli, CliError, Experiment, ExperimentConfig, Table,
};

fn config(experiment: Experiment, out: &Path, overrides: &[(&str, &str)]) -> ExperimentConfig {
    let mut all = vec![("out", out.to_str().unwrap())];
    all.extend_from_slice(overrides);
    ExperimentConfig::with_overrides(experiment, &all).unwrap()
}

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_spectrwm"));
    c.env_remove("SPECTRWM_SEED");
    c
}

#[test]
fn empty_table_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    emit_csv(&Table::new(&["h", "n", "estimate"]), &path).unwrap();
    assert_eq!(fs::read_to_string(&path).unwrap(), "h,n,estimate\n");
}

#[test]
fn missing_directory_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("no/such/dir/out.csv");
    let err = emit_csv(&Table::new(&["x"]), &path).unwrap_err();
    assert!(matches!(err, CliError::Io { .. }));
    assert!(err.to_string().contains("no/such/dir/out.csv"), "{err}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn floats_round_trip_bit_exactly(values in prop::collection::vec(any::<f64>(), 0..40)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let mut t = Table::new(&["i", "x"]);
        for (i, &x) in values.iter().enumerate() {
            t.push(vec![i.into(), x.into()]);
        }
        emit_csv(&t, &path).unwrap();
        let (header, rows) = read_csv(&path).unwrap();
        prop_assert_eq!(header, vec!["i".to_string(), "x".to_string()]);
        prop_assert_eq!(rows.len(), values.len());
        for (row, &x) in rows.iter().zip(&values) {
            let back: f64 = row[1].parse().unwrap();
            if x.is_nan() {
                prop_assert!(back.is_nan());
            } else {
                prop_assert_eq!(back.to_bits(), x.to_bits());
            }
        }
    }
}

#[test]
fn every_experiment_has_complete_defaults() {
    for e in Experiment::ALL {
        let d = defaults(e);
        assert_eq!(d.len(), spectrwm_cli::config::KEYS.len(), "{e}");
        ExperimentConfig::from_values(d).unwrap();
    }
}

#[test]
fn consistency_defaults_pass() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c");
    let report = run_experiment(&config(Experiment::Consistency, &out, &[])).unwrap();
    assert!(report.passed(), "{:?}", report.verdicts);
    assert_eq!(report.exit_code(), 0);
    let (header, rows) = read_csv(&out.join("results.csv")).unwrap();
    assert_eq!(header, ["function", "state", "h", "residual"]);
    assert_eq!(rows.len(), 5 * 5 * 4);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let overrides = [("h-list", "0.2,0.1,0.05"), ("replicas", "200"), ("seed", "9")];
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    run_experiment(&config(Experiment::HeatAccuracy, &a, &overrides)).unwrap();
    run_experiment(&config(Experiment::HeatAccuracy, &b, &overrides)).unwrap();
    for f in ["results.csv", "path_integral.csv", "pointwise.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let c = dir.path().join("c");
    run_experiment(&config(Experiment::HeatAccuracy, &c, &[("h-list", "0.2,0.1,0.05"), ("replicas", "200"), ("seed", "10")])).unwrap();
    assert_ne!(fs::read(a.join("results.csv")).unwrap(), fs::read(c.join("results.csv")).unwrap());
}

#[test]
fn meta_file_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let cfg = config(
        Experiment::HeatCnCompare,
        &first,
        &[("replicas", "100"), ("seed", "3"), ("h", "0.15")],
    );
    run_experiment(&cfg).unwrap();
    let meta = fs::read_to_string(first.join("meta.txt")).unwrap();
    let values = parse_config_text(&meta, Path::new("meta.txt")).unwrap();
    assert_eq!(values, cfg.values);

    let second = dir.path().join("second");
    let cli = Cli {
        config: Some(first.join("meta.txt")),
        out: Some(second.to_str().unwrap().to_string()),
        ..Cli::default()
    };
    let again = ExperimentConfig::resolve(&cli, None).unwrap();
    run_experiment(&again).unwrap();
    assert_eq!(
        fs::read(first.join("results.csv")).unwrap(),
        fs::read(second.join("results.csv")).unwrap()
    );
}

#[test]
fn writes_stay_inside_the_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("nested/out");
    let report = run_experiment(&config(
        Experiment::HoldingScaling,
        &out,
        &[("samples", "1000")],
    ))
    .unwrap();
    for f in &report.files {
        assert!(f.starts_with(&out), "{}", f.display());
    }
    let top: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(top, vec![std::ffi::OsString::from("nested")]);
    let mut names: Vec<_> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["meta.txt", "ratio.csv", "results.csv"]);
}

#[test]
fn burgers_one_sided_diverges() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b");
    let report = run_experiment(&config(
        Experiment::Burgers,
        &out,
        &[("nonlinearity", "one-sided"), ("runs", "3")],
    ))
    .unwrap();
    assert!(report.passed(), "{:?}", report.verdicts);
    let verdict = fs::read_to_string(out.join("verdict.txt")).unwrap();
    assert!(verdict.starts_with("DIVERGED"), "{verdict}");
}

#[test]
fn kpz_central_stays_bounded() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("k");
    let report = run_experiment(&config(Experiment::Kpz, &out, &[("runs", "3")])).unwrap();
    assert!(report.passed(), "{:?}", report.verdicts);
    let verdict = fs::read_to_string(out.join("verdict.txt")).unwrap();
    assert!(verdict.starts_with("BOUNDED"), "{verdict}");
    let (header, rows) = read_csv(&out.join("trajectory.csv")).unwrap();
    assert_eq!(header.len(), 33);
    assert_eq!(header[32], "x_31");
    assert_eq!(rows.len(), 64);
    assert_eq!(rows[0][0].parse::<f64>().unwrap(), 0.0);
    assert_eq!(rows[63][0].parse::<f64>().unwrap(), 1.0);
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bogus = bin().args(["bogus"]).output().unwrap();
    assert_eq!(bogus.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bogus.stderr).contains("heat-accuracy"));

    let ok = bin()
        .args(["consistency", "--out"])
        .arg(dir.path().join("ok"))
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("PASS residual-slope"));

    // a threshold below the initial bump height trips every run
    let fail = bin()
        .args(["burgers", "--runs", "2", "--threshold", "0.5", "--out"])
        .arg(dir.path().join("fail"))
        .output()
        .unwrap();
    assert_eq!(fail.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&fail.stdout).contains("FAIL stays-bounded"));
}

#[test]
fn seed_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let status = bin()
        .env("SPECTRWM_SEED", "41")
        .args(["consistency", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let meta = fs::read_to_string(out.join("meta.txt")).unwrap();
    assert!(meta.lines().any(|l| l == "seed = 41"), "{meta}");
}
