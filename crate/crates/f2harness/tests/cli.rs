//! End-to-end checks of the binary: subcommands, exit codes, file
//! outputs, and config-file precedence.

use std::path::Path;
use std::process::{Command, Output};

use f2harness::experiments::default_universe;
use f2harness::formats;
use f2sketch::hashing::derive_seed;
use f2sketch::streamgen::uniform_stream;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_f2harness"))
        .args(args)
        .output()
        .expect("spawning f2harness")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn gen_uniform_binary_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.f2s");
    let out = run(&[
        "gen",
        "--workload",
        "uniform",
        "--n",
        "100",
        "--seed",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stdout(&out));
    let stream = formats::read_stream_binary(&path).unwrap();
    let expected = uniform_stream(100, default_universe(100), derive_seed(3, 0));
    assert_eq!(stream, expected);
}

#[test]
fn gen_multilevel_writes_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ml.f2s");
    let out = run(&[
        "gen",
        "--workload",
        "multilevel",
        "--n",
        "4096",
        "--epsilon",
        "0.25",
        "--seed",
        "5",
        "--level",
        "1",
        "--label",
        "yes",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stdout(&out));
    let sidecar = formats::read_sidecar(Path::new(&format!(
        "{}.layout.json",
        path.to_str().unwrap()
    )))
    .unwrap();
    assert_eq!(sidecar.levels.len(), 2);
    let planted = sidecar.planted.expect("planted metadata");
    assert_eq!(planted.level, 1);
    assert_eq!(planted.label, "yes");
    // Stream length is n plus the referee suffix.
    let stream = formats::read_stream_binary(&path).unwrap();
    assert_eq!(stream.len() as u64, 4096 + planted.suffix_len);
}

#[test]
fn exhaustive_grid_passes() {
    let out = run(&["exhaustive"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("freqs=[3, 2, 1] P=3"));
    assert!(text.contains("PASS"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn mse_csv_is_reproducible_without_walltime() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = run(&[
            "mse",
            "--n",
            "500",
            "--trials",
            "3",
            "--seed",
            "9",
            "--no-walltime",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stdout(&out));
    }
    let bytes_a = std::fs::read(&a).unwrap();
    let bytes_b = std::fs::read(&b).unwrap();
    assert_eq!(bytes_a, bytes_b, "identical config+seed must give identical CSV");
    let text = String::from_utf8(bytes_a).unwrap();
    assert_eq!(text.lines().count(), 4); // header + 3 rows
}

#[test]
fn config_file_overrides_cli_flags() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let config = dir.path().join("cfg.toml");
    std::fs::write(&config, "trials = 2\n").unwrap();
    let out = run(&[
        "mse",
        "--n",
        "200",
        "--trials",
        "5",
        "--seed",
        "1",
        "--config",
        config.to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stdout(&out));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 3, "config trials=2 must win over --trials 5");
}

#[test]
fn memory_and_edisj_exit_zero_on_pass() {
    let out = run(&[
        "memory",
        "--n",
        "20000",
        "--epsilon",
        "0.25",
        "--trials",
        "2",
        "--seed",
        "4",
    ]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).contains("PASS"));

    let out = run(&[
        "edisj",
        "--n",
        "1024",
        "--epsilon",
        "0.25",
        "--t",
        "2",
        "--trials",
        "5",
        "--seed",
        "8",
    ]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).contains("accuracy"));
}

#[test]
fn bad_arguments_exit_nonzero() {
    let out = run(&["mse", "--workload", "bogus"]);
    assert!(!out.status.success());
    let out = run(&["gen", "--workload", "uniform", "--n", "10"]);
    assert!(!out.status.success(), "gen without --out must fail");
}
