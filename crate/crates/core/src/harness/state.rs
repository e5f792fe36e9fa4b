//! On-disk layout of a simulation:
//!
//! ```text
//! config.json          parameters, escrow x-coordinates, clock
//! rng.json             ChaCha20 seed, stream and word position
//! library.json         code-module templates
//! keys/<entity>.key    hex secret keys (mv, bc, dag, ss-i, ra-i)
//! shares/<entity>.share  hex subkey wire encodings (ss-i, ra-i)
//! status.json          availability of every SS and RA
//! storage/ss-i.records one "SI IRI" hex pair per line
//! ledger.journal       one base64 transaction per line
//! behavior.jsonl       behaviour log
//! people.json          credentials and avatar ids by label
//! avatars/<dai>.da     serialized signed avatars
//! timings.json         accumulated phase timings
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDateTime;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::avatar::{CodeModuleLibrary, DigitalAvatar};
use crate::crypto::{Digest20, KeyPair, PublicParams, SignatureBytes, SignedCiphertext};
use crate::ledger::{read_journal, write_journal, Tid};
use crate::protocol::{
    AvatarGenerator, BehaviorLog, BiometricCollector, Clock, Credential, MetadataVerifier,
    PhaseTimings, RegulatoryAuthority, ServerStatus, StorageServer, System, SystemParams,
};
use crate::shamir::{FieldSpec, Iri, ShamirShare};

use super::HarnessError;

const CLOCK_FORMAT: &str = "%Y%m%d%H%M%S";

#[derive(Debug, Serialize, Deserialize)]
struct Config {
    params: SystemParams,
    escrow_xs: Vec<u8>,
    /// `"wall"` or a simulated `YYYYMMDDHHMMSS` instant.
    clock: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct RngState {
    seed: String,
    stream: u64,
    word_pos: String,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct Status {
    storage: Vec<ServerStatus>,
    regulators: Vec<ServerStatus>,
}

/// What a person keeps after digitization and generation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersonRecord {
    pub tnum: Tid,
    pub m1_ciphertext: String,
    pub m1_signature: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dai: Option<Digest20>,
}

impl PersonRecord {
    pub fn from_credential(cred: &Credential) -> Self {
        Self {
            tnum: cred.tnum,
            m1_ciphertext: hex::encode(&cred.m1.ciphertext),
            m1_signature: hex::encode(cred.m1.signature.as_bytes()),
            dai: None,
        }
    }

    pub fn credential(&self) -> Option<Credential> {
        let ciphertext = hex::decode(&self.m1_ciphertext).ok()?;
        let signature = SignatureBytes::from_slice(&hex::decode(&self.m1_signature).ok()?).ok()?;
        Some(Credential { tnum: self.tnum, m1: SignedCiphertext { ciphertext, signature } })
    }
}

pub type People = BTreeMap<String, PersonRecord>;

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io { path: path.to_path_buf(), source }
}

fn corrupt(path: &Path, what: impl std::fmt::Display) -> HarnessError {
    HarnessError::CorruptState(format!("{}: {what}", path.display()))
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), HarnessError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io(parent))?;
    }
    fs::write(path, contents).map_err(io(path))
}

fn read_text(path: &Path) -> Result<String, HarnessError> {
    fs::read_to_string(path).map_err(io(path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| corrupt(path, e))?;
    write(path, text + "\n")
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, HarnessError> {
    serde_json::from_str(&read_text(path)?).map_err(|e| corrupt(path, e))
}

fn read_hex(path: &Path) -> Result<Vec<u8>, HarnessError> {
    hex::decode(read_text(path)?.trim()).map_err(|e| corrupt(path, e))
}

fn read_key(path: &Path) -> Result<KeyPair, HarnessError> {
    KeyPair::from_secret_bytes(&read_hex(path)?).map_err(|e| corrupt(path, e))
}

fn read_share(path: &Path) -> Result<ShamirShare, HarnessError> {
    ShamirShare::from_wire(&read_hex(path)?, FieldSpec::subkey()).map_err(|e| corrupt(path, e))
}

/// A directory holding (or about to hold) one simulation.
#[derive(Debug, Clone)]
pub struct StateDir {
    root: PathBuf,
}

impl StateDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn is_initialized(&self) -> bool {
        self.path("config.json").is_file()
    }

    /// True when the directory exists and has any entry.
    pub fn is_occupied(&self) -> bool {
        fs::read_dir(&self.root).map(|mut d| d.next().is_some()).unwrap_or(false)
    }

    pub fn ledger_path(&self) -> PathBuf {
        self.path("ledger.journal")
    }

    pub fn avatar_path(&self, dai: &Digest20) -> PathBuf {
        self.path("avatars").join(format!("{}.da", dai.to_hex()))
    }

    /// Writes the full state of `sys`. Record and avatar directories are
    /// rewritten from scratch.
    pub fn save(&self, sys: &System, people: &People, avatars: &[DigitalAvatar]) -> Result<(), HarnessError> {
        fs::create_dir_all(&self.root).map_err(io(&self.root))?;
        let clock = match &sys.clock {
            Clock::Wall => "wall".to_string(),
            Clock::Simulated(t) => t.format(CLOCK_FORMAT).to_string(),
        };
        write_json(
            &self.path("config.json"),
            &Config { params: sys.params, escrow_xs: sys.escrow_xs.clone(), clock },
        )?;
        write_json(
            &self.path("rng.json"),
            &RngState {
                seed: hex::encode(sys.rng.get_seed()),
                stream: sys.rng.get_stream(),
                word_pos: sys.rng.get_word_pos().to_string(),
            },
        )?;
        write(&self.path("library.json"), sys.dag.library.to_json())?;

        let keys = self.path("keys");
        write(&keys.join("mv.key"), hex::encode(sys.mv.keys.secret_bytes()))?;
        write(&keys.join("bc.key"), hex::encode(sys.bc.keys.secret_bytes()))?;
        write(&keys.join("dag.key"), hex::encode(sys.dag.keys.secret_bytes()))?;
        let shares = self.path("shares");
        let subkey = FieldSpec::subkey();
        for (i, ss) in sys.storage.iter().enumerate() {
            write(&keys.join(format!("ss-{i}.key")), hex::encode(ss.keys.secret_bytes()))?;
            write(&shares.join(format!("ss-{i}.share")), hex::encode(ss.subkey.to_wire(subkey)))?;
        }
        for (i, ra) in sys.regulators.iter().enumerate() {
            write(&keys.join(format!("ra-{i}.key")), hex::encode(ra.keys.secret_bytes()))?;
            write(&shares.join(format!("ra-{i}.share")), hex::encode(ra.subkey.to_wire(subkey)))?;
        }
        write_json(
            &self.path("status.json"),
            &Status {
                storage: sys.storage.iter().map(|s| s.status).collect(),
                regulators: sys.regulators.iter().map(|r| r.status).collect(),
            },
        )?;

        let storage = self.path("storage");
        if storage.exists() {
            fs::remove_dir_all(&storage).map_err(io(&storage))?;
        }
        fs::create_dir_all(&storage).map_err(io(&storage))?;
        for (i, ss) in sys.storage.iter().enumerate() {
            let mut text = String::new();
            for (si, iri) in &ss.records {
                let packed = iri.pack(sys.params.b)?;
                text += &format!("{} {}\n", si.to_hex(), hex::encode(packed));
            }
            write(&storage.join(format!("ss-{i}.records")), text)?;
        }

        let ledger = self.ledger_path();
        write_journal(&sys.ledger, &ledger).map_err(|e| corrupt(&ledger, e))?;
        write(&self.path("behavior.jsonl"), sys.behavior.to_json_lines())?;
        write_json(&self.path("people.json"), people)?;
        write_json(&self.path("timings.json"), &sys.timings)?;

        let dir = self.path("avatars");
        fs::create_dir_all(&dir).map_err(io(&dir))?;
        for da in avatars {
            write(&self.avatar_path(&da.dai()), da.to_bytes())?;
        }
        Ok(())
    }

    pub fn load(&self) -> Result<(System, People), HarnessError> {
        if !self.is_initialized() {
            return Err(HarnessError::NotInitialized(self.root.clone()));
        }
        let config: Config = read_json(&self.path("config.json"))?;
        let params = config.params;
        params.validate()?;
        let clock = if config.clock == "wall" {
            Clock::Wall
        } else {
            Clock::Simulated(
                NaiveDateTime::parse_from_str(&config.clock, CLOCK_FORMAT)
                    .map_err(|e| corrupt(&self.path("config.json"), e))?,
            )
        };

        let rng_path = self.path("rng.json");
        let rs: RngState = read_json(&rng_path)?;
        let seed: [u8; 32] = hex::decode(&rs.seed)
            .ok()
            .and_then(|v| v.try_into().ok())
            .ok_or_else(|| corrupt(&rng_path, "bad seed"))?;
        let word_pos: u128 = rs.word_pos.parse().map_err(|e| corrupt(&rng_path, e))?;
        let mut rng = ChaCha20Rng::from_seed(seed);
        rng.set_stream(rs.stream);
        rng.set_word_pos(word_pos);

        let lib_path = self.path("library.json");
        let library = CodeModuleLibrary::from_json(&read_text(&lib_path)?).map_err(|e| corrupt(&lib_path, e))?;
        let keys = self.path("keys");
        let shares = self.path("shares");
        let status: Status = read_json(&self.path("status.json"))?;

        let mut storage = Vec::with_capacity(params.n1);
        for i in 0..params.n1 {
            let mut ss = StorageServer::new(
                read_key(&keys.join(format!("ss-{i}.key")))?,
                read_share(&shares.join(format!("ss-{i}.share")))?,
            );
            ss.status = status.storage.get(i).copied().unwrap_or_default();
            let path = self.path("storage").join(format!("ss-{i}.records"));
            for line in read_text(&path)?.lines().filter(|l| !l.trim().is_empty()) {
                let (si, iri) = line.split_once(' ').ok_or_else(|| corrupt(&path, "bad record line"))?;
                let si = Digest20::from_hex(si).ok_or_else(|| corrupt(&path, "bad storage index"))?;
                let bytes = hex::decode(iri.trim()).map_err(|e| corrupt(&path, e))?;
                let iri = Iri::unpack(&bytes, params.n, params.b).map_err(|e| corrupt(&path, e))?;
                ss.records.insert(si, iri);
            }
            storage.push(ss);
        }
        let mut regulators = Vec::with_capacity(params.n2);
        for i in 0..params.n2 {
            let mut ra = RegulatoryAuthority::new(
                read_key(&keys.join(format!("ra-{i}.key")))?,
                read_share(&shares.join(format!("ra-{i}.share")))?,
            );
            ra.status = status.regulators.get(i).copied().unwrap_or_default();
            regulators.push(ra);
        }

        let ledger_path = self.ledger_path();
        let ledger = read_journal(&ledger_path).map_err(|e| corrupt(&ledger_path, e))?;
        let behavior_path = self.path("behavior.jsonl");
        let behavior =
            BehaviorLog::from_json_lines(&read_text(&behavior_path)?).map_err(|e| corrupt(&behavior_path, e))?;
        let people: People = read_json(&self.path("people.json"))?;
        let timings: PhaseTimings = read_json(&self.path("timings.json"))?;

        let sys = System {
            params,
            public_params: PublicParams::secp256k1(),
            escrow_field: FieldSpec::escrow(params.b)?,
            escrow_xs: config.escrow_xs,
            mv: MetadataVerifier { keys: read_key(&keys.join("mv.key"))? },
            bc: BiometricCollector { keys: read_key(&keys.join("bc.key"))? },
            dag: AvatarGenerator { keys: read_key(&keys.join("dag.key"))?, library },
            storage,
            regulators,
            ledger,
            behavior,
            clock,
            timings,
            rng,
        };
        Ok((sys, people))
    }

    pub fn load_avatar(&self, dai: &Digest20) -> Result<Vec<u8>, HarnessError> {
        let path = self.avatar_path(dai);
        fs::read(&path).map_err(io(&path))
    }
}
