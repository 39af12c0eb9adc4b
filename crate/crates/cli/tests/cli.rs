use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn vpb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vpb"))
        .args(args)
        .env_remove("VPB_OUT_DIR")
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn write_short_equilibrium(dir: &Path) -> String {
    let out = vpb(&["describe-preset", "equilibrium_sanity"]);
    let text = String::from_utf8(out.stdout).unwrap().replace("t_end = 1.0", "t_end = 0.05");
    let path = dir.join("eq.toml");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn describe_lists_presets() {
    let out = vpb(&["describe-preset"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["rarefaction_stability", "two_shock_stability", "neutrality_decay", "equilibrium_sanity"] {
        assert!(text.contains(name));
    }
}

#[test]
fn unknown_preset_is_a_config_error() {
    let out = vpb(&["describe-preset", "nope"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_reports_unknown_key() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_short_equilibrium(dir.path());
    let text = fs::read_to_string(&path).unwrap().replace("[grid]", "[grid]\ncellz = 4");
    fs::write(&path, text).unwrap();
    let out = vpb(&["validate", "--config", &path]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("cellz") && err.contains("x_lo"), "{err}");
}

#[test]
fn validate_missing_file_names_path() {
    let out = vpb(&["validate", "--config", "/no/such/config.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("/no/such/config.toml"));
}

#[test]
fn validate_echoes_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("min.toml");
    fs::write(
        &path,
        "schema_version = 1\npreset = \"equilibrium_sanity\"\n[wave]\nkind = \"constant\"\nstate = { rho = 1.0, theta = 1.0 }\n\
         [grid]\ncells = 8\nx_lo = 0.0\nx_hi = 1.0\nnv = 8\nhalf_width = 5.0\n[solver]\nt_end = 1.0\n",
    )
    .unwrap();
    let out = vpb(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("cfl = 0.5") && text.contains("every = 10"), "{text}");
}

#[test]
fn equilibrium_run_passes_and_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_short_equilibrium(dir.path());
    let out_dir = dir.path().join("out");
    let out = vpb(&["run", "--config", &cfg, "--out-dir", out_dir.to_str().unwrap(), "--threads", "1", "--snapshot-every", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["config.toml", "diagnostics.csv", "final.ckpt", "summary.json", "ansatz_initial.csv", "snapshot_000004.ckpt"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["status"], "pass");
    let drift = &summary["diagnostics"]["worst_drift"];
    for k in ["mass", "momentum", "energy", "n2"] {
        assert!(drift[k].as_f64().unwrap().abs() <= 1e-12, "{k}");
    }
}

#[test]
fn out_dir_env_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_short_equilibrium(dir.path());
    let target = dir.path().join("from_env");
    let out = Command::new(env!("CARGO_BIN_EXE_vpb"))
        .args(["run", "--config", &cfg])
        .env("VPB_OUT_DIR", &target)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(target.join("summary.json").exists());
}

#[test]
fn config_list_gets_subdirectories() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_short_equilibrium(dir.path());
    let b = dir.path().join("second.toml");
    fs::copy(&a, &b).unwrap();
    let out_dir = dir.path().join("out");
    let out = vpb(&["run", "--config", &a, "--config", b.to_str().unwrap(), "--out-dir", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out_dir.join("eq/summary.json").exists());
    assert!(out_dir.join("second/summary.json").exists());
}

#[test]
fn single_thread_csv_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_short_equilibrium(dir.path());
    let mut csvs = Vec::new();
    for k in 0..2 {
        let out_dir = dir.path().join(format!("r{k}"));
        let out = vpb(&["run", "--config", &cfg, "--out-dir", out_dir.to_str().unwrap(), "--threads", "1"]);
        assert_eq!(out.status.code(), Some(0));
        csvs.push(fs::read(out_dir.join("diagnostics.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
}

#[test]
fn failed_invariants_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = vpb(&["describe-preset", "neutrality_decay"]);
    // far too short for the seed to decay by a factor of ten
    let text = String::from_utf8(out.stdout).unwrap().replace("t_end = 20.0", "t_end = 0.3");
    let cfg = dir.path().join("short.toml");
    fs::write(&cfg, text).unwrap();
    let out_dir = dir.path().join("out");
    let out = vpb(&["run", "--config", cfg.to_str().unwrap(), "--out-dir", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["status"], "fail");
}

#[test]
fn unwritable_output_is_a_run_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_short_equilibrium(dir.path());
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = vpb(&["run", "--config", &cfg, "--out-dir", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}
