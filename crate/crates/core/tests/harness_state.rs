use nssia::avatar::CodeModuleLibrary;
use nssia::harness::{cmd_report, cmd_run, HarnessError, Runner, Scenario, StateDir};
use nssia::protocol::{AuditPlan, NaturalPerson, PhysicalIdentityProof, ServerStatus};

fn scenario(json: &str) -> Scenario {
    Scenario::from_json(json).unwrap()
}

#[test]
fn reload_resumes_the_same_simulation() {
    let dir = tempfile::tempdir().unwrap();
    let state = StateDir::new(dir.path());
    cmd_run(
        &state,
        &scenario(r#"{"seed": 5, "steps": [{"op":"init"},{"op":"digitize","person":"a"},{"op":"generate","person":"a"},
            {"op":"tamper","target":"server","role":"ra","index":3,"status":"offline"}]}"#),
        None,
        false,
    )
    .unwrap();

    let mut runner = Runner::load(&state).unwrap();
    let dai = runner.people["a"].dai.unwrap();
    assert_eq!(runner.system.regulators[3].status, ServerStatus::Offline);
    let res = runner.system.audit(3, &dai, &AuditPlan::default()).unwrap();
    assert!(res.recovered_md.starts_with(b"name=a;"));

    // a new person enrolled after reload gets a fresh TM and valid chain
    let np = NaturalPerson::synthetic("b", runner.system.rng());
    let cred = runner.system.digitize(&np).unwrap();
    runner.system.generate(&PhysicalIdentityProof::new(&np, &cred), &np.face).unwrap();
    assert!(runner.system.ledger.verify_chain().is_empty());
}

#[test]
fn replay_is_deterministic() {
    let sc = scenario(
        r#"{"seed": 9, "steps": [{"op":"init"},{"op":"digitize","person":"a"},{"op":"generate","person":"a"},
            {"op":"audit","person":"a","ra":1},{"op":"log","person":"a","action":"pay"}]}"#,
    );
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    cmd_run(&StateDir::new(a.path()), &sc, None, false).unwrap();
    cmd_run(&StateDir::new(b.path()), &sc, None, false).unwrap();
    for f in ["ledger.journal", "people.json", "behavior.jsonl", "storage/ss-0.records", "shares/ra-2.share"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f} differs"
        );
    }
    let c = tempfile::tempdir().unwrap();
    cmd_run(&StateDir::new(c.path()), &sc, Some(10), false).unwrap();
    assert_ne!(
        std::fs::read(a.path().join("ledger.journal")).unwrap(),
        std::fs::read(c.path().join("ledger.journal")).unwrap()
    );
}

#[test]
fn report_recounts_persisted_records() {
    let dir = tempfile::tempdir().unwrap();
    let state = StateDir::new(dir.path());
    cmd_run(
        &state,
        &scenario(r#"{"seed": 1, "steps": [{"op":"init"},{"op":"digitize","person":"a"},{"op":"generate","person":"a"}]}"#),
        None,
        false,
    )
    .unwrap();
    std::fs::write(dir.path().join("storage/ss-2.records"), "").unwrap();
    let r = cmd_report(&state).unwrap();
    assert_eq!(r.servers, vec![101, 101, 0, 101, 101]);
    assert_eq!(r.server_total, 404);
}

#[test]
fn expectations_are_enforced() {
    let dir = tempfile::tempdir().unwrap();
    let wrong = scenario(
        r#"{"steps": [{"op":"init"},{"op":"digitize","person":"a","expect_error":"CertMismatch"}]}"#,
    );
    let err = cmd_run(&StateDir::new(dir.path().join("x")), &wrong, None, false).unwrap_err();
    assert!(matches!(err, HarnessError::UnexpectedSuccess { step: 1, .. }));

    let late_init = scenario(r#"{"steps": [{"op":"init"},{"op":"init"}]}"#);
    let err = cmd_run(&StateDir::new(dir.path().join("y")), &late_init, None, false).unwrap_err();
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn custom_library_is_persisted() {
    let dir = tempfile::tempdir().unwrap();
    let lib = CodeModuleLibrary::with_variants(9);
    std::fs::write(dir.path().join("lib.json"), lib.to_json()).unwrap();
    std::fs::write(
        dir.path().join("sc.json"),
        r#"{"steps": [{"op":"init","library":"lib.json"},{"op":"digitize","person":"a"},{"op":"generate","person":"a"}]}"#,
    )
    .unwrap();
    let sc = Scenario::from_file(&dir.path().join("sc.json")).unwrap();
    let state = StateDir::new(dir.path().join("state"));
    cmd_run(&state, &sc, None, false).unwrap();
    let runner = Runner::load(&state).unwrap();
    assert_eq!(runner.system.dag.library(), &lib);
}
