use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dams(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dams")).args(args).output().expect("spawn dams")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn analyze_two_to_one_lists_eight_pathways() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "F_g = 2\nF_e = 1\nomega_c_rabi = 3.0\n");
    let out = dir.path().join("out");
    let o = dams(&["analyze", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let paths = read_json(&out.join("pathways.json"));
    assert_eq!(paths.as_array().unwrap().len(), 8);
    let report = read_json(&out.join("report.json"));
    assert_eq!(report["pathway_count"], 8);
    for f in ["peaks.csv", "populations.csv", "spectrum.csv", "spectrum.json"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
}

#[test]
fn one_to_one_has_four_branch_two_photon_pathway() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "F_g = 1\nF_e = 1\nomega_c_rabi = 3.0\n");
    let out = dir.path().join("out");
    let o = dams(&["analyze", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let paths = read_json(&out.join("pathways.json"));
    let bb: Vec<_> = paths
        .as_array()
        .unwrap()
        .iter()
        .filter(|p| p["class"] == "TwoPhotonBareBare")
        .collect();
    assert_eq!(bb.len(), 1);
    assert_eq!(bb[0]["branches"].as_array().unwrap().len(), 4);
}

#[test]
fn one_to_two_reports_normal_regime() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "F_g = 1\nF_e = 2\nomega_c_rabi = 1.0\n");
    let out = dir.path().join("out");
    let o = dams(&["analyze", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let report = read_json(&out.join("report.json"));
    assert!(report["regime"].as_str().unwrap().contains("not trapped"));
    assert!(report["trapped"].as_array().unwrap().is_empty());
}

#[test]
fn config_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        "F_g = 1\nF_e = 1\nomega_c_rabi = 1\ncoupling_detuning = 0.2\n",
        "F_g = 1\nF_e = 1\nomega_c_rabi = -1\n",
        "F_g = 0\nF_e = 0\nomega_c_rabi = 1\n",
        "F_g = 1\nF_e = 1\nomega_c_rabi = 1\nbogus = 3\n",
    ];
    for (i, body) in cases.iter().enumerate() {
        let cfg = write_config(dir.path(), &format!("bad{i}.toml"), body);
        let o = dams(&["analyze", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "case {i}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = dams(&["analyze", "--config", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_without_values_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "F_g = 1\nF_e = 1\nomega_c_rabi = 1\n");
    let o = dams(&["sweep", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_grid_flag_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "F_g = 1\nF_e = 1\nomega_c_rabi = 1\n");
    let o = dams(&["spectrum", "--config", &cfg, "--grid", "1:-1:5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solver_failure_exits_with_code_three() {
    // Linear polarization along the coupling leaves two disconnected dark
    // sublevels, so the steady state is not unique.
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "F_g = 2\nF_e = 1\nomega_c_rabi = 1\ntheta_degrees = 0\n");
    let out = dir.path().join("o");
    let o = dams(&["spectrum", "--config", &cfg, "--out", out.to_str().unwrap(), "--grid", "0.2:0.6:3"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn spectrum_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "F_g = 2\nF_e = 1\nomega_c_rabi = 1.0\nprobe_rabi = 0.1\n");
    let mut files = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let o = dams(&["spectrum", "--config", &cfg, "--out", out.to_str().unwrap(), "--grid", "-2:2:41"]);
        assert!(o.status.success());
        files.push(fs::read(out.join("spectrum.csv")).unwrap());
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn grid_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "F_g = 1\nF_e = 1\nomega_c_rabi = 1.0\n");
    let out = dir.path().join("o");
    let o = dams(&["spectrum", "--config", &cfg, "--out", out.to_str().unwrap(), "--grid", "-1:1:5"]);
    assert!(o.status.success());
    let csv = fs::read_to_string(out.join("spectrum.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "delta,absorption");
    assert_eq!(lines.len(), 6);
    assert!(lines[1].starts_with("-1,"));
    assert!(lines[3].starts_with("0,"));
    let meta = read_json(&out.join("spectrum.json"));
    assert_eq!(meta["method"], "floquet");
}

#[test]
fn time_domain_method_flag() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "F_g = 0\nF_e = 1\nomega_c_rabi = 1.0\n");
    let out = dir.path().join("o");
    let o = dams(&["spectrum", "--config", &cfg, "--out", out.to_str().unwrap(), "--grid", "0.5:1.5:3", "--method", "time"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let meta = read_json(&out.join("spectrum.json"));
    assert_eq!(meta["method"], "time-domain");
}
