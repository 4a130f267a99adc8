use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn rkf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rkf")).args(args).output().unwrap()
}

fn preset(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("cfg.toml");
    fs::write(&path, body).unwrap();
    path
}

const SMALL: &str = "[system]\nn = 3\np = 2\nsystem_seed = 4\n\n[drift]\nregime = \"sublinear\"\nbeta = 0.5\nseed = 4\n\n[run]\nt_rounds = 60\n";

#[test]
fn run_twice_on_preset_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = preset("sublinear_t2000.toml");
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = rkf(&["run", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let bytes = fs::read(&a).unwrap();
    assert_eq!(bytes, fs::read(&b).unwrap());
    let text = String::from_utf8(bytes).unwrap();
    assert!(text.starts_with("t,L,V,W,B1,B3,avg_gap\n"));
    assert_eq!(text.lines().count(), 2001);
    assert!(!text.contains('\r'));
}

#[test]
fn run_writes_to_stdout_without_output_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let o = rkf(&["run", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 61);
}

#[test]
fn config_errors_exit_1_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("t_rounds = 60", "t_rounds = 0"));
    let o = rkf(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("run.t_rounds"));

    let o = rkf(&["run", "--config", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn undetectable_system_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    // unstable mode at 2.0 that C cannot see
    let body = "[system]\nn = 2\np = 1\na = [2.0, 0.0, 0.0, 0.5]\nc = [0.0, 1.0]\n\n[drift]\nregime = \"linear\"\nseed = 0\n\n[run]\nt_rounds = 10\n";
    let cfg = write_config(dir.path(), body);
    let o = rkf(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn selftest_passes_and_negative_control_fails() {
    let ok = rkf(&["selftest"]);
    assert!(ok.status.success());
    assert_eq!(ok.stdout, rkf(&["selftest"]).stdout);

    let bad = rkf(&["selftest", "--inject-dare-perturbation", "1e-6"]);
    assert_eq!(bad.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("scalar-dare"));
}

#[test]
fn gen_system_round_trips_through_a_config() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.toml");
    let o = rkf(&["gen-system", "--n", "4", "--p", "2", "--seed", "9", "--output", model.to_str().unwrap()]);
    assert!(o.status.success());
    let mut body = fs::read_to_string(&model).unwrap();
    body.push_str("\n[drift]\nregime = \"linear\"\nseed = 1\n\n[run]\nt_rounds = 20\n");
    let cfg = write_config(dir.path(), &body);
    let o = rkf(&["run", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let stdout = rkf(&["gen-system", "--n", "4", "--p", "2", "--seed", "9"]).stdout;
    assert_eq!(stdout, fs::read(&model).unwrap());
}

#[test]
fn sweep_writes_per_seed_files_and_aggregate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_rkf"))
        .args(["sweep", "--config", cfg.to_str().unwrap(), "--seeds", "0..3,7", "--out-dir", out.to_str().unwrap()])
        .env("RKF_THREADS", "2")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for s in [0, 1, 2, 7] {
        assert!(out.join(format!("seed_{s}.csv")).exists());
    }
    let agg = fs::read_to_string(out.join("aggregate.csv")).unwrap();
    assert_eq!(agg.lines().count(), 5);

    let o = Command::new(env!("CARGO_BIN_EXE_rkf"))
        .args(["sweep", "--config", cfg.to_str().unwrap(), "--seeds", "1", "--out-dir", out.to_str().unwrap()])
        .env("RKF_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}
