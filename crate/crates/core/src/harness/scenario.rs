use std::collections::HashMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::avatar::{CodeModuleLibrary, DigitalAvatar};
use crate::crypto::{hash, Digest20};
use crate::ledger::{Tid, Transaction, TxKind};
use crate::protocol::{AuditPlan, NaturalPerson, PhysicalIdentityProof, ServerStatus, System, SystemParams};

use super::state::{People, PersonRecord, StateDir};
use super::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default)]
    pub seed: u64,
    pub steps: Vec<Step>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Scenario(e.to_string()))
    }

    /// Reads a scenario file; a relative library path in an `init` step is
    /// resolved against the file's directory.
    pub fn from_file(path: &std::path::Path) -> Result<Self, HarnessError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| HarnessError::Io { path: path.into(), source })?;
        let mut s = Self::from_json(&text)?;
        for step in &mut s.steps {
            if let (Op::Init { library: Some(lib), .. }, Some(dir)) = (&mut step.op, path.parent()) {
                *lib = dir.join(&*lib);
            }
        }
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    #[serde(flatten)]
    pub op: Op,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum Op {
    Init {
        #[serde(default)]
        params: SystemParams,
        #[serde(default)]
        library: Option<PathBuf>,
    },
    Digitize {
        person: String,
        /// Reuse another person's iris.
        #[serde(default)]
        iris_of: Option<String>,
    },
    Generate {
        person: String,
        /// Bits flipped in the live face capture.
        #[serde(default)]
        face_noise_bits: usize,
    },
    Audit {
        #[serde(default)]
        person: Option<String>,
        #[serde(default)]
        dai: Option<Digest20>,
        #[serde(default)]
        ra: usize,
        #[serde(default)]
        storage: Option<Vec<usize>>,
        #[serde(default)]
        regulators: Option<Vec<usize>>,
    },
    Log {
        person: String,
        action: String,
    },
    Tamper(Tamper),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "target", rename_all = "kebab-case")]
pub enum Tamper {
    /// Flip one byte of a person's serialized avatar and re-verify it.
    Avatar {
        person: String,
        #[serde(default)]
        byte: usize,
    },
    /// Append a forged transaction carrying one fault.
    Ledger { fault: LedgerFault },
    /// Change a server's availability.
    Server { role: Role, index: usize, status: ServerStatus },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LedgerFault {
    BadSignature,
    BadLinkage,
    BadPayloadLength,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Ss,
    Ra,
}

/// Appends one forged transaction to the ledger, bypassing validation, so
/// that `verify_chain` reports exactly one finding for it.
pub fn inject_ledger_fault(sys: &mut System, fault: LedgerFault) -> Tid {
    use rand::RngCore;
    let mut filler = [0u8; 32];
    sys.rng.fill_bytes(&mut filler);
    let tx = match fault {
        LedgerFault::BadSignature => {
            let mut tx = Transaction::new(TxKind::Tm, &sys.mv.keys, None, sys.bc.public_key(), filler[..20].to_vec());
            tx.omega.0[63] ^= 0x01;
            tx
        }
        LedgerFault::BadLinkage => Transaction::new(
            TxKind::Ti,
            &sys.bc.keys,
            Some(Tid(filler)),
            sys.dag.public_key(),
            hash(&filler).as_bytes().to_vec(),
        ),
        LedgerFault::BadPayloadLength => {
            Transaction::new(TxKind::Tm, &sys.mv.keys, None, sys.bc.public_key(), filler[..19].to_vec())
        }
    };
    let tid = tx.tid;
    sys.ledger.push_unchecked(tx);
    tid
}

/// Drives a [`System`] through scenario steps.
pub struct Runner {
    pub system: System,
    pub people: People,
    persons: HashMap<String, NaturalPerson>,
    new_avatars: Vec<DigitalAvatar>,
    pub step_log: Vec<String>,
    pub detections: Vec<String>,
}

impl Runner {
    pub fn init(params: SystemParams, library: CodeModuleLibrary, seed: u64) -> Result<Self, HarnessError> {
        Ok(Self::from_system(System::init(params, library, seed)?, People::new()))
    }

    pub fn load(state: &StateDir) -> Result<Self, HarnessError> {
        let (sys, people) = state.load()?;
        Ok(Self::from_system(sys, people))
    }

    pub fn from_system(system: System, people: People) -> Self {
        Self {
            system,
            people,
            persons: HashMap::new(),
            new_avatars: Vec::new(),
            step_log: Vec::new(),
            detections: Vec::new(),
        }
    }

    pub fn save(&self, state: &StateDir) -> Result<(), HarnessError> {
        state.save(&self.system, &self.people, &self.new_avatars)
    }

    pub(crate) fn log_step(&mut self, line: String) {
        self.step_log.push(line);
    }

    pub fn person(&self, label: &str) -> Option<&NaturalPerson> {
        self.persons.get(label)
    }

    fn dai_of(&self, label: &str) -> Result<Digest20, HarnessError> {
        self.people
            .get(label)
            .and_then(|p| p.dai)
            .ok_or_else(|| HarnessError::Scenario(format!("{label} has no avatar")))
    }

    fn avatar_bytes(&self, dai: &Digest20, state: Option<&StateDir>) -> Result<Vec<u8>, HarnessError> {
        if let Some(da) = self.new_avatars.iter().find(|d| d.dai() == *dai) {
            return Ok(da.to_bytes());
        }
        match state {
            Some(s) => s.load_avatar(dai),
            None => Err(HarnessError::Scenario(format!("avatar {dai} not available"))),
        }
    }

    /// Runs one step, checking `expect_error` if present.
    pub fn apply(&mut self, index: usize, step: &Step, state: Option<&StateDir>) -> Result<(), HarnessError> {
        let result = self.execute(&step.op, state);
        match (result, &step.expect_error) {
            (Ok(line), None) => {
                self.log_step(line);
                Ok(())
            }
            (Ok(_), Some(expected)) => Err(HarnessError::UnexpectedSuccess { step: index, expected: expected.clone() }),
            (Err(HarnessError::Protocol(e)), Some(expected)) if e.code() == expected => {
                self.log_step(format!("{} rejected as expected: {e}", op_name(&step.op)));
                Ok(())
            }
            (Err(HarnessError::Protocol(e)), Some(expected)) => {
                Err(HarnessError::WrongError { step: index, expected: expected.clone(), got: e })
            }
            (Err(e), _) => Err(e),
        }
    }

    fn execute(&mut self, op: &Op, state: Option<&StateDir>) -> Result<String, HarnessError> {
        let sys = &mut self.system;
        match op {
            Op::Init { .. } => Err(HarnessError::Scenario("init is only allowed as the first step".into())),
            Op::Digitize { person, iris_of } => {
                let mut np = NaturalPerson::synthetic(person, sys.rng());
                if let Some(other) = iris_of {
                    let src = self
                        .persons
                        .get(other)
                        .ok_or_else(|| HarnessError::Scenario(format!("unknown person {other}")))?;
                    np.iris = src.iris.clone();
                }
                let cred = sys.digitize(&np)?;
                self.people.insert(person.clone(), PersonRecord::from_credential(&cred));
                self.persons.insert(person.clone(), np);
                Ok(format!("digitize {person}: TM {}", &cred.tnum.to_hex()[..16]))
            }
            Op::Generate { person, face_noise_bits } => {
                let np = self
                    .persons
                    .get(person)
                    .ok_or_else(|| HarnessError::Scenario(format!("{person} was not digitized in this run")))?;
                let cred = self.people.get(person).and_then(|p| p.credential()).ok_or_else(|| {
                    HarnessError::Scenario(format!("{person} has no credential"))
                })?;
                let live = if *face_noise_bits == 0 { np.face.clone() } else { np.live_face(*face_noise_bits, sys.rng()) };
                let issued = sys.generate(&PhysicalIdentityProof::new(np, &cred), &live)?;
                if let Some(rec) = self.people.get_mut(person) {
                    rec.dai = Some(issued.dai);
                }
                self.new_avatars.push(issued.avatar);
                Ok(format!("generate {person}: DAI {}", issued.dai))
            }
            Op::Audit { person, dai, ra, storage, regulators } => {
                let dai = match (dai, person) {
                    (Some(d), _) => *d,
                    (None, Some(p)) => self.dai_of(p)?,
                    (None, None) => return Err(HarnessError::Scenario("audit needs a person or a dai".into())),
                };
                let plan = AuditPlan { storage: storage.clone(), regulators: regulators.clone() };
                let res = self.system.audit(*ra, &dai, &plan)?;
                let who = person.as_deref().unwrap_or("?");
                let matches = match person.as_ref().and_then(|p| self.persons.get(p)) {
                    Some(np) if np.md == res.recovered_md => "matches enrolment",
                    Some(_) => return Err(HarnessError::Scenario(format!("audit of {who} recovered different metadata"))),
                    None => "enrolment not in this run",
                };
                Ok(format!("audit {who} by RA{ra}: {} bytes recovered, {matches}", res.recovered_md.len()))
            }
            Op::Log { person, action } => {
                let dai = self.dai_of(person)?;
                let pos = self.system.log_behavior(&dai, action);
                Ok(format!("log {person} {action}: entry {pos}"))
            }
            Op::Tamper(Tamper::Avatar { person, byte }) => {
                let dai = self.dai_of(person)?;
                let mut bytes = self.avatar_bytes(&dai, state)?;
                let at = byte % bytes.len();
                bytes[at] ^= 0x01;
                let what = format!("avatar of {person}, byte {at} flipped");
                if DigitalAvatar::verify_serialized(&bytes, &self.system.dag.public_key()) {
                    return Err(HarnessError::UndetectedTamper(what));
                }
                self.detections.push(what.clone());
                Ok(format!("tamper {what}: signature check failed"))
            }
            Op::Tamper(Tamper::Ledger { fault }) => {
                let tid = inject_ledger_fault(&mut self.system, *fault);
                Ok(format!("tamper ledger: {fault:?} injected as {}", &tid.to_hex()[..16]))
            }
            Op::Tamper(Tamper::Server { role, index, status }) => {
                let slot = match role {
                    Role::Ss => self.system.storage.get_mut(*index).map(|s| &mut s.status),
                    Role::Ra => self.system.regulators.get_mut(*index).map(|r| &mut r.status),
                };
                *slot.ok_or(crate::protocol::ProtocolError::UnknownEntity(*index))? = *status;
                Ok(format!("tamper {role:?}{index}: now {status:?}"))
            }
        }
    }
}

fn op_name(op: &Op) -> &'static str {
    match op {
        Op::Init { .. } => "init",
        Op::Digitize { .. } => "digitize",
        Op::Generate { .. } => "generate",
        Op::Audit { .. } => "audit",
        Op::Log { .. } => "log",
        Op::Tamper(_) => "tamper",
    }
}
