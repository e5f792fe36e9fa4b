use std::path::Path;
use std::process::{Command, Output};

fn nssia(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nssia")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn write(path: &Path, text: &str) -> String {
    std::fs::write(path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn init_writes_share_files_and_refuses_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("state");
    let s = state.to_str().unwrap();

    let out = nssia(&["init", "--state-dir", s, "--seed", "1", "--json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let shares: Vec<_> = std::fs::read_dir(state.join("shares")).unwrap().collect();
    assert_eq!(shares.len(), 10);
    for i in 0..5 {
        assert!(state.join(format!("shares/ss-{i}.share")).is_file());
        assert!(state.join(format!("shares/ra-{i}.share")).is_file());
    }
    assert_eq!(std::fs::read_to_string(state.join("ledger.journal")).unwrap(), "");
    let r = json(&out);
    assert_eq!(r["identities"], 0);
    assert_eq!(r["server_total"], 0);
    assert_eq!(r["chain"]["total"], 0);
    assert_eq!(r["user_local_bytes"], 0);

    let again = nssia(&["init", "--state-dir", s]);
    assert_eq!(code(&again), 4);
    assert!(String::from_utf8_lossy(&again.stderr).contains("--force"));
    assert_eq!(code(&nssia(&["init", "--state-dir", s, "--force"])), 0);
}

#[test]
fn zero_threshold_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(&dir.path().join("cfg.json"), r#"{"t1": 0, "n1": 5}"#);
    let out = nssia(&["init", "--state-dir", dir.path().join("s").to_str().unwrap(), "--config", &cfg]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid threshold"));
}

#[test]
fn run_report_and_audit() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("state");
    let s = s.to_str().unwrap();
    let sc = write(
        &dir.path().join("life.json"),
        r#"{"seed": 11, "steps": [{"op":"init"},{"op":"digitize","person":"a"},{"op":"generate","person":"a"}]}"#,
    );
    let out = nssia(&["run", "--scenario", &sc, "--state-dir", s, "--json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out);
    assert_eq!(r["chain"]["identity"], 94);
    assert_eq!(r["server_total"], 505);
    assert_eq!(r["gas"], "not measured");

    let report = json(&nssia(&["report", "--state-dir", s, "--json"]));
    assert_eq!(report["chain"], r["chain"]);
    assert_eq!(report["servers"], r["servers"]);

    let people: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(Path::new(s).join("people.json")).unwrap()).unwrap();
    let dai = people["a"]["dai"].as_str().unwrap();
    let audit = nssia(&["audit", "--state-dir", s, "--dai", dai, "--ra", "4", "--json"]);
    assert_eq!(code(&audit), 0, "{}", String::from_utf8_lossy(&audit.stderr));
    let md = hex::decode(json(&audit)["metadata"].as_str().unwrap()).unwrap();
    assert!(md.starts_with(b"name=a;"));

    let after = json(&nssia(&["report", "--state-dir", s, "--json"]));
    assert_eq!(after["chain"]["ta"], 34);
    assert_eq!(after["chain"]["total"], 94 + 34);

    let unknown = nssia(&["audit", "--state-dir", s, "--dai", &"0".repeat(40)]);
    assert_eq!(code(&unknown), 2);
}

#[test]
fn tamper_scenario_exits_with_finding() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write(
        &dir.path().join("t.json"),
        r#"{"seed": 2, "steps": [{"op":"init"},{"op":"digitize","person":"a"},{"op":"generate","person":"a"},
            {"op":"tamper","target":"avatar","person":"a","byte":3}]}"#,
    );
    let out = nssia(&["run", "--scenario", &sc, "--state-dir", dir.path().join("s").to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stdout).contains("detected"));
}

#[test]
fn ledger_fault_is_reported_by_later_commands() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s");
    let s = s.to_str().unwrap();
    let sc = write(
        &dir.path().join("f.json"),
        r#"{"steps": [{"op":"init"},{"op":"tamper","target":"ledger","fault":"bad-linkage"}]}"#,
    );
    assert_eq!(code(&nssia(&["run", "--scenario", &sc, "--state-dir", s])), 3);
    let out = nssia(&["report", "--state-dir", s, "--json"]);
    assert_eq!(code(&out), 3);
    assert_eq!(json(&out)["ledger_findings"].as_array().unwrap().len(), 1);
}

#[test]
fn protocol_error_and_missing_state() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write(
        &dir.path().join("p.json"),
        r#"{"steps": [{"op":"init"},{"op":"digitize","person":"a"},{"op":"generate","person":"a","face_noise_bits":5}]}"#,
    );
    let s = dir.path().join("s");
    let out = nssia(&["run", "--scenario", &sc, "--state-dir", s.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("live face"));
    // state up to the failure is kept
    assert!(s.join("people.json").is_file());

    let missing = nssia(&["report", "--state-dir", dir.path().join("nope").to_str().unwrap()]);
    assert_eq!(code(&missing), 4);

    let bad = write(&dir.path().join("bad.json"), r#"{"steps": [{"op":"fly"}]}"#);
    assert_eq!(code(&nssia(&["run", "--scenario", &bad, "--state-dir", s.to_str().unwrap()])), 3);
}
