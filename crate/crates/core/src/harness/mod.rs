//! Scenario runner, persisted simulation state, and byte/time accounting.
//!
//! A scenario is a JSON file:
//!
//! ```json
//! {
//!   "seed": 7,
//!   "steps": [
//!     { "op": "init" },
//!     { "op": "digitize", "person": "alice" },
//!     { "op": "generate", "person": "alice" },
//!     { "op": "audit", "person": "alice", "ra": 0 },
//!     { "op": "log", "person": "alice", "action": "login" },
//!     { "op": "tamper", "target": "avatar", "person": "alice", "byte": 12 }
//!   ]
//! }
//! ```
//!
//! Any step may carry `"expect_error": "<code>"` (see
//! [`ProtocolError::code`]) to assert that it fails.

mod report;
mod scenario;
mod state;

pub use report::{ChainBytes, RunReport, TimingReport};
pub use scenario::{inject_ledger_fault, LedgerFault, Op, Role, Runner, Scenario, Step, Tamper};
pub use state::{People, PersonRecord, StateDir};

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::avatar::CodeModuleLibrary;
use crate::crypto::Digest20;
use crate::protocol::{AuditPlan, AuditResult, ProtocolError, SystemParams};
use crate::shamir::ShamirError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("step {step}: expected {expected}, but it succeeded")]
    UnexpectedSuccess { step: usize, expected: String },
    #[error("step {step}: expected {expected}, got {got}")]
    WrongError { step: usize, expected: String, got: ProtocolError },
    #[error("scenario: {0}")]
    Scenario(String),
    #[error("tamper went undetected: {0}")]
    UndetectedTamper(String),
    #[error("{0} already holds files; pass --force to overwrite")]
    StateExists(PathBuf),
    #[error("{0} is not an initialized state directory")]
    NotInitialized(PathBuf),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("corrupt state: {0}")]
    CorruptState(String),
}

impl From<ShamirError> for HarnessError {
    fn from(e: ShamirError) -> Self {
        Self::Protocol(e.into())
    }
}

impl HarnessError {
    /// 2 protocol error, 3 validation or tamper finding, 4 I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Protocol(_) | Self::UnexpectedSuccess { .. } | Self::WrongError { .. } => 2,
            Self::Scenario(_) | Self::UndetectedTamper(_) => 3,
            Self::StateExists(_) | Self::NotInitialized(_) | Self::Io { .. } | Self::CorruptState(_) => 4,
        }
    }
}

/// Contents of an init config file: system parameters plus an optional
/// template library path, resolved against the config file's directory.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InitConfig {
    #[serde(flatten)]
    pub params: SystemParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub library: Option<PathBuf>,
}

impl InitConfig {
    pub fn from_file(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io { path: path.into(), source })?;
        let mut cfg: Self = serde_json::from_str(&text).map_err(|e| HarnessError::Scenario(e.to_string()))?;
        if let (Some(lib), Some(dir)) = (&cfg.library, path.parent()) {
            cfg.library = Some(dir.join(lib));
        }
        Ok(cfg)
    }
}

pub(crate) fn load_library(path: Option<&Path>) -> Result<CodeModuleLibrary, HarnessError> {
    match path {
        None => Ok(CodeModuleLibrary::default_library()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|source| HarnessError::Io { path: p.into(), source })?;
            CodeModuleLibrary::from_json(&text).map_err(|e| HarnessError::Scenario(format!("{}: {e}", p.display())))
        }
    }
}

/// Initializes a fresh simulation in `state`. An occupied directory is
/// refused unless `force` is set.
pub fn cmd_init(state: &StateDir, config: &InitConfig, seed: u64, force: bool) -> Result<RunReport, HarnessError> {
    if state.is_occupied() && !force {
        return Err(HarnessError::StateExists(state.root().to_path_buf()));
    }
    let runner = Runner::init(config.params, load_library(config.library.as_deref())?, seed)?;
    runner.save(state)?;
    cmd_report(state)
}

/// Runs a scenario against `state`. A leading `init` step creates a fresh
/// simulation (subject to `force`); otherwise the existing state is loaded.
/// `seed` overrides the scenario's seed. State is saved even when a step
/// fails.
pub fn cmd_run(
    state: &StateDir,
    scenario: &Scenario,
    seed: Option<u64>,
    force: bool,
) -> Result<RunReport, HarnessError> {
    let mut steps = scenario.steps.iter().enumerate().peekable();
    let runner = match steps.peek() {
        Some((_, Step { op: Op::Init { params, library }, .. })) => {
            if state.is_occupied() && !force {
                return Err(HarnessError::StateExists(state.root().to_path_buf()));
            }
            let lib = load_library(library.as_deref())?;
            let mut r = Runner::init(*params, lib, seed.unwrap_or(scenario.seed))?;
            steps.next();
            r.log_step(format!("init: {} storage servers, {} regulators", params.n1, params.n2));
            r
        }
        _ => {
            let mut r = Runner::load(state)?;
            r.log_step(format!("loaded {}", state.root().display()));
            r
        }
    };
    let mut runner = runner;
    let mut outcome = Ok(());
    for (i, step) in steps {
        if let Err(e) = runner.apply(i, step, Some(state)) {
            outcome = Err(e);
            break;
        }
    }
    runner.save(state)?;
    outcome?;
    let mut report = cmd_report(state)?;
    report.steps = runner.step_log;
    report.detections = runner.detections;
    Ok(report)
}

/// Recomputes the report from a fresh parse of the persisted state.
pub fn cmd_report(state: &StateDir) -> Result<RunReport, HarnessError> {
    let (sys, people) = state.load()?;
    Ok(RunReport::from_system(&sys, &people))
}

/// Runs one audit against persisted state and saves the resulting TA.
pub fn cmd_audit(state: &StateDir, dai: &Digest20, ra: usize, plan: &AuditPlan) -> Result<AuditResult, HarnessError> {
    let mut runner = Runner::load(state)?;
    let outcome = runner.system.audit(ra, dai, plan);
    runner.save(state)?;
    Ok(outcome?)
}
