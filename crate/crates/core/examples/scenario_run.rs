//! Run a scenario file through the harness and print the byte report.
//!
//! `cargo run --example scenario_run -- [scenario.json]`

use std::path::PathBuf;

use nssia::harness::{cmd_report, cmd_run, Scenario, StateDir};

fn main() {
    let path = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/scenarios/lifecycle.json")
    });
    let scenario = Scenario::from_file(&path).unwrap();
    let dir = std::env::temp_dir().join(format!("nssia-scenario-{}", std::process::id()));
    let state = StateDir::new(&dir);

    let report = cmd_run(&state, &scenario, None, true).unwrap();
    print!("{report}");

    let again = cmd_report(&state).unwrap();
    println!("re-parsed state: chain {} B, servers {} B", again.chain.total, again.server_total);
    std::fs::remove_dir_all(dir).ok();
}
