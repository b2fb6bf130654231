//! Exit-code contract of the command-line interface.

use std::fs;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bnesim"))
}

fn write_config(dir: &std::path::Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("config.toml");
    fs::write(&path, body).unwrap();
    path
}

const VALID: &str = r#"
N = [4, 4]
rho = [0.5, 0.5]
[game]
name = "rent_seeking"
[engine]
T = 20
[outputs]
oracle = false
"#;

#[test]
fn valid_config_runs_with_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let mut body = VALID.to_string();
    body.push_str(&format!("dir = {:?}\n", dir.path().join("out")));
    let cfg = write_config(dir.path(), &body);

    let out = bin().arg("validate").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");

    let out = bin().arg("run").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    assert!(dir.path().join("out/metrics.csv").exists());
}

#[test]
fn invalid_config_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &VALID.replace("rho = [0.5, 0.5]", "rho = [0.0, 0.5]"));
    let out = bin().arg("validate").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{out:?}");
}

#[test]
fn unknown_key_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{VALID}bogus = 1\n"));
    let out = bin().arg("run").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{out:?}");
}

#[test]
fn divergent_run_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    // A huge stepsize factor forces the penalty descent to blow up.
    let text = format!(
        r#"
N = [4, 4]
rho = [0.5, 0.5]
[game]
name = "rent_seeking"
[engine]
T = 20
[engine.stepsize]
kind = "square_summable"
a = 1e12
[outputs]
oracle = false
dir = {:?}
"#,
        dir.path().join("out")
    );
    let cfg = write_config(dir.path(), &text);
    let out = bin().arg("run").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(3), "{out:?}");
}

#[test]
fn sweep_produces_one_directory_per_combination() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        r#"
N = [4, 4]
rho = [0.5, 0.5]
[game]
name = "rent_seeking"
[engine]
T = 10
[outputs]
oracle = false
dir = {:?}
"#,
        dir.path().join("sweep")
    );
    let cfg = write_config(dir.path(), &text);
    let out = bin()
        .args(["sweep"])
        .arg(&cfg)
        .args(["--vary", "N=2,4;rho=0.5,1.0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    for label in ["N2_rho0.5", "N2_rho1", "N4_rho0.5", "N4_rho1"] {
        assert!(
            dir.path().join("sweep").join(label).join("metrics.csv").exists(),
            "missing {label}"
        );
    }
}
