use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_bosonic-fridge"));
    c.env_remove("BOSONIC_FRIDGE_OUT");
    c
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().unwrap()
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn stderr_error(o: &Output) -> Value {
    let text = String::from_utf8_lossy(&o.stderr);
    let line = text.lines().find(|l| l.starts_with('{')).expect("structured error line");
    serde_json::from_str(line).unwrap()
}

#[test]
fn steady_writes_self_describing_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["steady", "--dims", "6,20,6"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(dir.path());
    assert_eq!(s["command"], "steady");
    assert_eq!(s["config"]["preset"], "table1");
    assert_eq!(s["config"]["certified_dims"], serde_json::json!([6, 20, 6]));
    let theta = s["theta_c_mk"].as_f64().unwrap();
    let ratio = s["ratio"].as_f64().unwrap();
    assert!((30.0..40.0).contains(&theta));
    assert!((ratio - theta / 50.0).abs() < 1e-12);
    for key in ["currents", "cop_current", "cop_freq", "thermality_tvd", "residual", "theta_c_entropy_mk"] {
        assert!(s.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn evolve_csv_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["evolve", "--dims", "4,10,4", "--format", "csv"];
    assert!(run(&args, a.path()).status.success());
    assert!(run(&args, b.path()).status.success());
    let ca = std::fs::read(a.path().join("trajectory.csv")).unwrap();
    let cb = std::fs::read(b.path().join("trajectory.csv")).unwrap();
    assert_eq!(ca, cb);
    let text = String::from_utf8(ca).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config: {"));
    assert!(lines.next().unwrap().starts_with("# units:"));
    assert_eq!(
        lines.next().unwrap(),
        "t_ns,t_kappa_c,phi_rad,n_c,n_h,n_r,theta_c_mk,theta_c_entropy_mk,J_c,J_h,J_r"
    );
    assert_eq!(lines.count(), 481);
}

#[test]
fn sweep_with_explicit_values() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["sweep", "--dims", "5,14,5", "--param", "ej", "--values", "0.05,0.1,0.2"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "param_value,theta_c_mk,ratio,J_c,J_h,J_r,cop_current,cop_freq,residual");
    let theta: Vec<f64> = rows[1..].iter().map(|r| r.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(theta.len(), 3);
    assert!(theta[0] > theta[1] && theta[1] > theta[2]);
}

#[test]
fn toml_and_json_configs_agree() {
    let dir = tempfile::tempdir().unwrap();
    let toml = dir.path().join("run.toml");
    std::fs::write(
        &toml,
        "preset = \"table1\"\n# comment\n[system]\nej_ghz = 0.1\n[system.h]\ntemperature_mk = 600.0\n[solver]\ndims = [5, 16, 5]\n",
    )
    .unwrap();
    let json = dir.path().join("run.json");
    std::fs::write(
        &json,
        r#"{"preset": "table1", "system": {"ej_ghz": 0.1, "h": {"temperature_mk": 600.0}}, "solver": {"dims": [5, 16, 5]}}"#,
    )
    .unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(run(&["steady", "--config", toml.to_str().unwrap()], &a).status.success());
    assert!(run(&["steady", "--config", json.to_str().unwrap()], &b).status.success());
    let (sa, sb) = (summary(&a), summary(&b));
    assert_eq!(sa["theta_c_mk"], sb["theta_c_mk"]);
    assert_eq!(sa["config"]["params"]["h"]["temperature_mk"], 600.0);
    assert_eq!(sa["config"]["params"]["ej_ghz"], 0.1);
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let toml = dir.path().join("run.toml");
    std::fs::write(&toml, "[system]\nej_ghz = 0.1\n[solver]\ndims = [5, 16, 5]\n").unwrap();
    let out = dir.path().join("o");
    let o = run(&["steady", "--config", toml.to_str().unwrap(), "--ej-ghz", "0.15", "--phi", "0"], &out);
    assert!(o.status.success());
    let s = summary(&out);
    assert_eq!(s["config"]["params"]["ej_ghz"], 0.15);
    assert_eq!(s["config"]["params"]["phi_rad"], 0.0);
}

#[test]
fn unknown_and_mis_suffixed_keys_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for (name, body, needle) in [
        ("unknown.toml", "[system]\nej = 0.1\n", "ej"),
        ("suffix.toml", "[system.c]\ntemperature_k = 0.05\n", "temperature_mk"),
    ] {
        let path = dir.path().join(name);
        std::fs::write(&path, body).unwrap();
        let o = run(&["steady", "--config", path.to_str().unwrap()], dir.path());
        assert_eq!(o.status.code(), Some(2), "{name}");
        let e = stderr_error(&o);
        assert_eq!(e["error"]["exit_code"], 2);
        assert!(e["error"]["message"].as_str().unwrap().contains(needle), "{e}");
    }
}

#[test]
fn validation_error_is_structured() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["steady", "--t-hot-mk", "-5", "--dims", "4,8,4"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let e = stderr_error(&o);
    assert_eq!(e["error"]["kind"], "validation");
    assert!(!dir.path().join("summary.json").exists());
}

#[test]
fn unknown_preset_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["steady", "--preset", "fig9"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr_error(&o)["error"]["message"].as_str().unwrap().contains("fig9"));
}

#[test]
fn bad_dims_flag_exit_2() {
    let o = bin().args(["steady", "--dims", "4,8"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solver_error_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    std::fs::write(&cfg, "[solver]\ndims = [4, 8, 4]\nauto_truncate = true\nmax_dim = 150\n").unwrap();
    let o = run(&["steady", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stderr_error(&o)["error"]["kind"], "certification");
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["steady", "--dims", "4,8,4"])
        .env("BOSONIC_FRIDGE_OUT", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(dir.path().join("summary.json").exists());
}

#[test]
fn presets_list_names_all_presets() {
    let o = bin().args(["presets", "list"]).output().unwrap();
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for name in ["table1", "fig1b", "fig2", "fig2_inset", "fig3", "appB", "appC"] {
        assert!(text.lines().any(|l| l.split_whitespace().next() == Some(name)), "{name}");
    }
}

#[test]
fn validate_invariants_reports_checks() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["validate", "invariants", "--dims", "5,14,5"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let s = summary(dir.path());
    let n = s["checks"].as_array().unwrap().len();
    assert!(n > 0);
    assert_eq!(s["passed"].as_u64().unwrap() as usize, n);
    assert_eq!(s["failed"], 0);
}

#[test]
fn auto_truncate_records_certified_dims() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["steady", "--dims", "4,8,4", "--auto-truncate", "--t-hot-mk", "300"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(dir.path());
    let dims: Vec<u64> = serde_json::from_value(s["config"]["certified_dims"].clone()).unwrap();
    assert!(dims[0] >= 4 && dims[1] > 8 && dims[2] >= 4, "{dims:?}");
}

#[test]
fn transient_protocol_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["protocol", "transient", "--dims", "5,12,5", "--format", "both"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(dir.path());
    assert_eq!(s["event"]["qualifying"], true);
    assert!(s["records"].as_array().unwrap().len() > 10);
    assert!(dir.path().join("trajectory.csv").exists());
}
