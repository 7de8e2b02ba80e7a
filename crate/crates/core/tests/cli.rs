use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use vortexlab::experiment::{read_pgm, CSV_HEADER, MANIFEST_FILE};

fn vortexlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vortexlab"))
        .args(args)
        .env_remove("RUST_LOG")
        .env_remove("VORTEXLAB_THREADS")
        .output()
        .unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

const SINGLE: &str = "kind = \"classical\"\nepsilon = 0.2\ndivisor = [[0.375, 0.625, 1]]\n\n[grid]\nnx = 64\nny = 64\n";

#[test]
fn classical_run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", SINGLE);
    let out_dir = dir.path().join("run");
    let out = vortexlab(&["--quiet", "classical", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());

    let csv = fs::read_to_string(out_dir.join("results.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some(CSV_HEADER));
    assert!(out_dir.join(MANIFEST_FILE).exists());

    // the darkest pixel of |φ|² sits on the vortex; row 0 is the top edge
    let (w, h, pixels) = read_pgm(&out_dir.join("phi_sq.pgm")).unwrap();
    assert_eq!((w, h), (64, 64));
    let k = (0..pixels.len()).min_by_key(|&k| pixels[k]).unwrap();
    let (i, j) = (k % w, h - 1 - k / w);
    let (ci, cj) = (24usize, 40usize);
    assert!(i.abs_diff(ci) <= 2 && j.abs_diff(cj) <= 2, "minimum at ({i}, {j})");
    assert!(out_dir.join("phi_sq.pgm.json").exists());

    let report = vortexlab(&["report", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&report), 0);
    assert!(String::from_utf8_lossy(&report.stdout).contains("classical"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "s.toml",
        "kind = \"sweep\"\nfamily = \"mixed\"\nschedule = [0.3, 0.15]\ndivisor_plus = [[0.25, 0.25, 1]]\n\
         divisor_minus = [[0.7, 0.6, 1]]\n\n[grid]\nnx = 64\nny = 64\n",
    );
    let mut csvs = Vec::new();
    for name in ["a", "b"] {
        let out_dir = dir.path().join(name);
        let out = vortexlab(&["--quiet", "sweep", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        csvs.push(fs::read(out_dir.join("results.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out_arg = out_dir.to_str().unwrap();

    let bad_syntax = write_config(dir.path(), "bad.toml", "kind = \"classical\"\nepsilon = \n");
    let out = vortexlab(&["classical", "--config", &bad_syntax, "--out", out_arg]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let cfg = write_config(dir.path(), "c.toml", SINGLE);
    let out = vortexlab(&["classical", "--config", &cfg, "--out", out_arg, "--epsilon", "0.45"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("Bradlow"));

    let out = vortexlab(&["mixed", "--config", &cfg, "--out", out_arg]);
    assert_eq!(code(&out), 2);

    let failing = write_config(
        dir.path(),
        "f.toml",
        "kind = \"sweep\"\nfamily = \"classical\"\nschedule = [0.3, 0.1]\ndivisor = [[0.5, 0.5, 1]]\n\n\
         [solver]\nmax_newton = 5\n",
    );
    let out = vortexlab(&["--quiet", "sweep", "--config", &failing, "--out", out_arg]);
    assert_eq!(code(&out), 3);
    let csv = fs::read_to_string(out_dir.join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);

    let out = vortexlab(&["classical", "--config", "/nonexistent/c.toml"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn thread_count_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", SINGLE);
    let out = Command::new(env!("CARGO_BIN_EXE_vortexlab"))
        .args(["classical", "--config", &cfg])
        .env("VORTEXLAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}
