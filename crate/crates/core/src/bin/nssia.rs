use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nssia::crypto::Digest20;
use nssia::harness::{cmd_audit, cmd_init, cmd_report, cmd_run, HarnessError, InitConfig, RunReport, Scenario, StateDir};
use nssia::protocol::AuditPlan;

#[derive(Parser)]
#[command(name = "nssia", version, about = "Identity protocol simulator")]
struct Cli {
    #[arg(long, global = true, default_value = "nssia-state")]
    state_dir: PathBuf,
    /// Print machine-readable JSON.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Create entity keys, subkeys and an empty ledger.
    Init {
        /// JSON with n1, t1, n2, t2, n, b and an optional library path.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        force: bool,
    },
    /// Execute a scenario file.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        force: bool,
    },
    /// Byte and timing accounting of the saved state.
    Report,
    /// Recover the metadata behind an avatar id.
    Audit {
        #[arg(long)]
        dai: String,
        #[arg(long, default_value_t = 0)]
        ra: usize,
    },
}

fn print_report(report: &RunReport, json: bool) {
    if json {
        println!("{}", serde_json::to_string_pretty(report).expect("report serializes"));
    } else {
        print!("{report}");
    }
}

fn run(cli: Cli) -> Result<ExitCode, HarnessError> {
    let state = StateDir::new(&cli.state_dir);
    let report = match cli.cmd {
        Cmd::Init { config, seed, force } => {
            let cfg = match config {
                Some(p) => InitConfig::from_file(&p)?,
                None => InitConfig::default(),
            };
            cmd_init(&state, &cfg, seed, force)?
        }
        Cmd::Run { scenario, seed, force } => cmd_run(&state, &Scenario::from_file(&scenario)?, seed, force)?,
        Cmd::Report => cmd_report(&state)?,
        Cmd::Audit { dai, ra } => {
            let dai = Digest20::from_hex(&dai).ok_or_else(|| HarnessError::Scenario("--dai must be 40 hex digits".into()))?;
            let res = cmd_audit(&state, &dai, ra, &AuditPlan::default())?;
            if cli.json {
                let out = serde_json::json!({
                    "dai": res.dai,
                    "ta": res.ta_tid,
                    "metadata": hex::encode(&res.recovered_md),
                });
                println!("{out:#}");
            } else {
                println!("dai       {}", res.dai);
                println!("ta        {}", res.ta_tid);
                println!("metadata  {}", String::from_utf8_lossy(&res.recovered_md).trim_end_matches('\0'));
            }
            return Ok(ExitCode::SUCCESS);
        }
    };
    print_report(&report, cli.json);
    let findings = !report.detections.is_empty() || !report.ledger_findings.is_empty();
    Ok(if findings { ExitCode::from(3) } else { ExitCode::SUCCESS })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
