use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_sso");

fn write_cfg(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.cfg");
    fs::write(&path, text).unwrap();
    path
}

fn sso(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

fn run_ok(cmd: &str, cfg_text: &str) -> (tempfile::TempDir, PathBuf) {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), cfg_text);
    let out = tmp.path().join("out");
    let o = sso(&[cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    (tmp, out)
}

#[test]
fn gs_sweep_schema() {
    let (_t, out) = run_ok(
        "gs-sweep",
        "potential.alpha = 10\nanalysis.sweep = [10, 100]\nanalysis.moment_max = 4\n",
    );
    assert_eq!(header(&out.join("gs_sweep.csv")), "alpha,e_gs,v_v,v_max,mu,m2,m3,m4");
    let body = fs::read_to_string(out.join("gs_sweep.csv")).unwrap();
    let alphas: Vec<&str> = body.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(alphas, ["1.0000000000000000e1", "1.0000000000000000e2"]);
    assert!(out.join("gs-sweep.provenance.json").exists());
}

#[test]
fn spectrum_schema_and_summary() {
    let (_t, out) = run_ok("spectrum", "potential.alpha = 100\nsolver.k_states = 8\n");
    assert_eq!(header(&out.join("spectrum.csv")), "n,energy,spacing,scaled_spacing,bound");
    assert_eq!(
        header(&out.join("spectrum_summary.csv")),
        "alpha,k,bound_count,branch_index,v_v,v_max"
    );
    // first row has no spacing
    let body = fs::read_to_string(out.join("spectrum.csv")).unwrap();
    let first: Vec<&str> = body.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(first[2], "NaN");
    assert_eq!(body.lines().count(), 9);
}

#[test]
fn states_schema() {
    let (_t, out) = run_ok(
        "states",
        "potential.alpha = 100\nsolver.k_states = 3\nanalysis.states = [0, 2]\n",
    );
    assert_eq!(header(&out.join("states_summary.csv")), "alpha,n,energy,mu,m2,nodes");
    for n in [0, 2] {
        assert_eq!(header(&out.join(format!("state_a100_n{n}.csv"))), "q,psi");
    }
    assert!(!out.join("state_a100_n1.csv").exists());
}

#[test]
fn powerlaw_schema_and_harmonic_column() {
    let (_t, out) = run_ok(
        "powerlaw",
        "potential.family = power_law\npotential.beta = 2\nanalysis.betas = [2]\nsolver.k_states = 5\n",
    );
    let path = out.join("powerlaw.csv");
    assert_eq!(header(&path), "beta,n,energy,spacing,scaled_spacing");
    let body = fs::read_to_string(path).unwrap();
    for (n, line) in body.lines().skip(1).enumerate() {
        let e: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!((e - (n as f64 + 0.5)).abs() < 1e-7, "E_{n} = {e}");
    }
}

#[test]
fn wkb_and_period_schemas() {
    let (_t, out) = run_ok(
        "wkb",
        "potential.family = power_law\npotential.beta = 4\nanalysis.betas = [4]\nanalysis.wkb_levels = 4\n",
    );
    assert_eq!(header(&out.join("wkb.csv")), "param,n,e_wkb,e_exact,rel_error");
    assert_eq!(header(&out.join("wkb_summary.csv")), "param,requested,wkb_count");

    let (_t, out) = run_ok("period", "potential.family = sep_shifted\npotential.alpha = 1\nanalysis.period_samples = 5\n");
    assert_eq!(header(&out.join("period.csv")), "energy,period,q1,q2,action");
    assert_eq!(fs::read_to_string(out.join("period.csv")).unwrap().lines().count(), 6);
}

#[test]
fn json_output_layout() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "potential.alpha = 100\nsolver.k_states = 4\n");
    let out = tmp.path().join("out");
    let o = sso(&[
        "spectrum",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(o.status.success());
    let doc: Value = serde_json::from_str(&fs::read_to_string(out.join("spectrum.json")).unwrap()).unwrap();
    assert_eq!(doc["name"], "spectrum");
    let names: Vec<&str> = doc["schema"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["n", "energy", "spacing", "scaled_spacing", "bound"]);
    assert!(doc["provenance"]["config_hash"].as_str().unwrap().len() == 64);
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows[0][2].is_null());
    assert!(rows.iter().all(|r| r.as_array().unwrap().len() == 5));
}

#[test]
fn flag_overrides_beat_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "potential.alpha = 100\nsolver.k_states = 40\n");
    let out = tmp.path().join("out");
    let o = sso(&[
        "spectrum",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--alpha",
        "50",
        "--k",
        "3",
    ]);
    assert!(o.status.success());
    let summary = fs::read_to_string(out.join("spectrum_summary.csv")).unwrap();
    let row: Vec<&str> = summary.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "5.0000000000000000e1");
    assert_eq!(row[1], "3.0000000000000000e0");
}

#[test]
fn config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "potential.family = power_law\n");
    let o = sso(&["spectrum", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("potential.beta"));

    let cfg = write_cfg(tmp.path(), "potential.alpha = 1\npotential.colour = red\n");
    let o = sso(&["spectrum", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    // gs-sweep needs a sweep
    let cfg = write_cfg(tmp.path(), "potential.alpha = 1\n");
    let o = sso(&["gs-sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solver_failure_exits_3_and_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        tmp.path(),
        "potential.alpha = 1\nsolver.k_states = 2\nsolver.n_points = 40\nsolver.domain = [-3, 3]\nsolver.tol = 1e-300\n",
    );
    let out = tmp.path().join("out");
    let o = sso(&["spectrum", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha = 1"));
    assert!(!out.join("spectrum.csv").exists());
}

#[test]
fn io_errors_exit_4() {
    let tmp = tempfile::tempdir().unwrap();
    let o = sso(&["spectrum", "--config", tmp.path().join("missing.cfg").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));

    let cfg = write_cfg(tmp.path(), "potential.alpha = 100\nsolver.k_states = 3\n");
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let o = sso(&[
        "spectrum",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        blocker.join("sub").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn rerun_is_byte_identical_and_hash_ignores_out_dir() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "potential.alpha = 10\nanalysis.sweep = [2, 10]\n");
    let mut texts = Vec::new();
    for d in ["a", "b"] {
        let out = tmp.path().join(d);
        let o = sso(&["gs-sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(o.status.success());
        texts.push((
            fs::read(out.join("gs_sweep.csv")).unwrap(),
            fs::read(out.join("gs-sweep.provenance.json")).unwrap(),
        ));
    }
    assert_eq!(texts[0], texts[1]);
}
