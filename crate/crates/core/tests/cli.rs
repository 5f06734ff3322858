use std::process::{Command, Output};

fn dilatlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dilatlab")).args(args).env_remove("DILATLAB_SEED").output().unwrap()
}

fn code(args: &[&str]) -> i32 {
    dilatlab(args).status.code().unwrap()
}

#[test]
fn verify_exit_codes() {
    assert_eq!(code(&["--quiet", "verify", "euclidean:2"]), 0);
    assert_eq!(code(&["--quiet", "verify", "conical:heisenberg:koranyi"]), 0);
    assert_eq!(code(&["--quiet", "verify", "nosuch"]), 2);
    assert_eq!(code(&["--quiet", "verify", "euclidean:2", "--radius", "-1"]), 2);
}

#[test]
fn ccdist_examples() {
    let out = dilatlab(&["--json", "ccdist", "heisenberg:1", "--from", "0,0,0", "--to", "1,0,0"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["lower"], 1.0);
    assert!(v["upper"].as_f64().unwrap() <= 1.0 + 1e-6);
    for key in ["group", "from", "to", "K", "residual", "word"] {
        assert!(v.get(key).is_some(), "{key}");
    }

    let out = dilatlab(&["--json", "ccdist", "heisenberg:1", "--to", "0,0,1"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["upper"].as_f64().unwrap() <= 4.0);
    assert_eq!(v["word"], "[X:1, Y:1, X:-1, Y:-1]");

    assert_eq!(code(&["ccdist", "engel", "--to", "0,0,0,1"]), 4);
    assert_eq!(code(&["--quiet", "ccdist", "engel", "--to", "0,0,0,1", "--optimize-only"]), 0);
    assert_eq!(code(&["ccdist", "heisenberg:1", "--to", "0,1"]), 2);
}

#[test]
fn sweep_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("a3.csv");
    let out = dilatlab(&["sweep", "conical:heisenberg", "--defect", "a3", "--samples", "20", "--out", csv.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("epsilon,defect"));
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 16);
    assert!(rows.iter().all(|r| r.ends_with(",0e0")), "{text}");
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(csv.with_extension("json")).unwrap()).unwrap();
    assert_eq!(report["verdict"], "pass");

    let blocked = dir.path().join("missing").join("x.csv");
    assert_eq!(code(&["sweep", "euclidean:2", "--defect", "embed", "--out", blocked.to_str().unwrap()]), 3);
}

#[test]
fn embed_on_euclidean_is_zero() {
    let out = dilatlab(&["--json", "sweep", "euclidean:2", "--defect", "embed", "--samples", "20"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["defects"].as_array().unwrap().iter().all(|d| d.as_f64().unwrap() == 0.0));
}

#[test]
fn seed_flag_and_env_agree() {
    let args = ["--json", "sweep", "chart:2", "--defect", "a3", "--samples", "30"];
    let a = dilatlab(&[&["--seed", "9"], &args[..]].concat()).stdout;
    let b = Command::new(env!("CARGO_BIN_EXE_dilatlab")).args(args).env("DILATLAB_SEED", "9").output().unwrap().stdout;
    let c = dilatlab(&args).stdout;
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn quiet_and_json_modes() {
    let out = dilatlab(&["--quiet", "list"]);
    assert!(out.stdout.is_empty());
    let out = dilatlab(&["--json", "list"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v.as_array().unwrap().len() >= 10);
    let out = dilatlab(&["--json", "decompose", "heisenberg:1", "--point", "0.5,-0.25,0.125"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["residual"].as_f64().unwrap() <= 1e-10);
}
