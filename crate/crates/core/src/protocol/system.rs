use std::time::{Duration, Instant};

use chrono::{NaiveDate, NaiveDateTime, TimeDelta};
use num_bigint::BigUint;
use rand::{CryptoRng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::avatar::{derive_das, face_matches, generate_da, CodeModuleLibrary, DigitalAvatar, DEFAULT_DAS_LEN};
use crate::crypto::{
    ec_decrypt, hash, sym_ciphertext_len, xor_cyclic, Digest20, KeyPair, MasterKey, PublicParams, SignatureBytes, MASTER_KEY_LEN,
};
use crate::ledger::{Ledger, LedgerError, Tid, Timestamp, Transaction, TxKind};
use crate::shamir::{
    reconstruct_at_zero, reconstruct_secinfo, sample_x_coordinates, split_secret_at, EscrowLayout,
    FieldSpec, ShamirShare, XMode,
};

use super::entities::open_share;
use super::escrow::{escrow_identity, recover_metadata};
use super::{
    AvatarGenerator, BehaviorLog, BiometricCollector, Credential, MetadataVerifier, NaturalPerson,
    PhysicalIdentityProof, ProtocolError, RegulatoryAuthority, StorageServer, MD_LEN,
};

/// Deployment parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SystemParams {
    /// Storage servers and their threshold.
    pub n1: usize,
    pub t1: usize,
    /// Regulators and their threshold.
    pub n2: usize,
    pub t2: usize,
    /// Escrow polynomials.
    pub n: usize,
    /// Bytes per escrow coefficient and share value.
    pub b: usize,
    pub x_mode: XMode,
    pub das_len: usize,
    /// Largest tolerated fraction of differing face bits.
    pub face_tolerance: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            n1: 5,
            t1: 3,
            n2: 5,
            t2: 3,
            n: 20,
            b: 5,
            x_mode: XMode::Sequential,
            das_len: DEFAULT_DAS_LEN,
            face_tolerance: 0.0,
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<(), ProtocolError> {
        for (t, n) in [(self.t1, self.n1), (self.t2, self.n2)] {
            if t == 0 || n != 2 * t - 1 {
                return Err(ProtocolError::InvalidThreshold { t, n });
            }
        }
        let layout = self.layout();
        layout.validate()?;
        let needed = sym_ciphertext_len(MD_LEN);
        if layout.secinfo_len() < needed {
            return Err(ProtocolError::EscrowCapacity { capacity: layout.secinfo_len(), needed });
        }
        Ok(())
    }

    pub fn layout(&self) -> EscrowLayout {
        EscrowLayout { t1: self.t1, n1: self.n1, n: self.n, b: self.b, x_mode: self.x_mode }
    }
}

/// Source of audit timestamps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Clock {
    Wall,
    /// Starts at the given instant and advances one second per reading.
    Simulated(NaiveDateTime),
}

impl Default for Clock {
    fn default() -> Self {
        Clock::Simulated(
            NaiveDate::from_ymd_opt(2022, 5, 1).unwrap().and_hms_opt(0, 0, 0).unwrap(),
        )
    }
}

impl Clock {
    pub fn now(&mut self) -> NaiveDateTime {
        match self {
            Clock::Wall => chrono::Local::now().naive_local(),
            Clock::Simulated(t) => {
                let now = *t;
                *t += TimeDelta::seconds(1);
                now
            }
        }
    }
}

/// Accumulated wall-clock time per phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseTimings {
    pub digitization: Duration,
    pub generation: Duration,
    pub accountability: Duration,
    pub digitizations: u32,
    pub generations: u32,
    pub audits: u32,
}

impl PhaseTimings {
    pub fn total(&self) -> Duration {
        self.digitization + self.generation + self.accountability
    }
}

/// Result of the generation flow.
#[derive(Debug, Clone)]
pub struct IssuedAvatar {
    pub avatar: DigitalAvatar,
    pub signature: SignatureBytes,
    pub dai: Digest20,
    pub si: Digest20,
    pub tda: Tid,
    pub escrow_attempts: usize,
}

/// Which servers an audit contacts, in order. `None` means every server.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditPlan {
    pub storage: Option<Vec<usize>>,
    /// Other regulators asked for subkeys; the auditor's own subkey is
    /// always used.
    pub regulators: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditResult {
    pub dai: Digest20,
    pub recovered_md: Vec<u8>,
    pub ta_tid: Tid,
}

/// Every actor plus the ledger, driven in-process.
pub struct System {
    pub(crate) params: SystemParams,
    pub(crate) public_params: PublicParams,
    pub(crate) escrow_field: FieldSpec,
    pub(crate) escrow_xs: Vec<u8>,
    pub mv: MetadataVerifier,
    pub bc: BiometricCollector,
    pub dag: AvatarGenerator,
    pub storage: Vec<StorageServer>,
    pub regulators: Vec<RegulatoryAuthority>,
    pub ledger: Ledger,
    pub behavior: BehaviorLog,
    pub clock: Clock,
    pub timings: PhaseTimings,
    pub(crate) rng: ChaCha20Rng,
}

impl std::fmt::Debug for System {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("System")
            .field("params", &self.params)
            .field("ledger_len", &self.ledger.len())
            .finish_non_exhaustive()
    }
}

fn mk_to_field(mk: &MasterKey) -> BigUint {
    BigUint::from_bytes_be(mk.as_bytes())
}

fn mk_from_field(v: &BigUint) -> Option<MasterKey> {
    let bytes = FieldSpec::encode(v, MASTER_KEY_LEN)?;
    MasterKey::from_slice(&bytes).ok()
}

impl System {
    /// Publishes curve parameters, generates every entity's keys, draws the
    /// master key, and hands each storage server and regulator its subkey
    /// encrypted under that entity's public key. The master key itself is
    /// dropped afterwards.
    pub fn init(params: SystemParams, library: CodeModuleLibrary, seed: u64) -> Result<Self, ProtocolError> {
        Self::init_with_rng(params, library, ChaCha20Rng::seed_from_u64(seed))
    }

    pub fn init_with_rng(
        params: SystemParams,
        library: CodeModuleLibrary,
        mut rng: ChaCha20Rng,
    ) -> Result<Self, ProtocolError> {
        params.validate()?;
        let public_params = PublicParams::secp256k1();
        let subkey_field = FieldSpec::subkey();
        let escrow_field = FieldSpec::escrow(params.b)?;
        let escrow_xs = params.layout().x_coordinates(&escrow_field, &mut rng)?;

        let mv = MetadataVerifier { keys: KeyPair::generate(&mut rng) };
        let bc = BiometricCollector { keys: KeyPair::generate(&mut rng) };
        let dag = AvatarGenerator { keys: KeyPair::generate(&mut rng), library };
        let ss_keys: Vec<KeyPair> = (0..params.n1).map(|_| KeyPair::generate(&mut rng)).collect();
        let ra_keys: Vec<KeyPair> = (0..params.n2).map(|_| KeyPair::generate(&mut rng)).collect();

        let mk = MasterKey::random(&mut rng);
        let secret = mk_to_field(&mk);
        let xs = sample_x_coordinates(params.n1 + params.n2, subkey_field, &mut rng)?;
        let ss_shares = split_secret_at(&secret, params.t1, &xs[..params.n1], subkey_field, &mut rng)?;
        let ra_shares = split_secret_at(&secret, params.t2, &xs[params.n1..], subkey_field, &mut rng)?;
        drop(mk);

        // Subkeys travel encrypted under each recipient's public key.
        let mut deliver = |keys: &KeyPair, share: &ShamirShare| -> Result<ShamirShare, ProtocolError> {
            let ct = crate::crypto::ec_encrypt(&share.to_wire(subkey_field), &keys.public(), &mut rng)?;
            let wire = ec_decrypt(&ct, keys)?;
            Ok(ShamirShare::from_wire(&wire, subkey_field)?)
        };
        let storage = ss_keys
            .into_iter()
            .zip(&ss_shares)
            .map(|(k, s)| Ok(StorageServer::new(k.clone(), deliver(&k, s)?)))
            .collect::<Result<Vec<_>, ProtocolError>>()?;
        let regulators = ra_keys
            .into_iter()
            .zip(&ra_shares)
            .map(|(k, s)| Ok(RegulatoryAuthority::new(k.clone(), deliver(&k, s)?)))
            .collect::<Result<Vec<_>, ProtocolError>>()?;

        Ok(Self {
            params,
            public_params,
            escrow_field,
            escrow_xs,
            mv,
            bc,
            dag,
            storage,
            regulators,
            ledger: Ledger::new(),
            behavior: BehaviorLog::new(),
            clock: Clock::default(),
            timings: PhaseTimings::default(),
            rng,
        })
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn public_params(&self) -> &PublicParams {
        &self.public_params
    }

    pub fn escrow_field(&self) -> &FieldSpec {
        &self.escrow_field
    }

    pub fn escrow_x_coordinates(&self) -> &[u8] {
        &self.escrow_xs
    }

    pub fn rng(&mut self) -> &mut (impl RngCore + CryptoRng) {
        &mut self.rng
    }

    // ---- digitization -------------------------------------------------

    /// Metadata verifier side: checks the certificates, then records
    /// `H_M = H(MD)` in a TM addressed to the biometric collector and
    /// returns its transaction number.
    pub fn register_metadata(&mut self, np: &NaturalPerson) -> Result<Tid, ProtocolError> {
        if np.md.len() != MD_LEN || np.certificates != NaturalPerson::attest(&np.md) {
            return Err(ProtocolError::CertMismatch);
        }
        let h_m = hash(&np.md);
        if self.ledger.find_payload(TxKind::Tm, h_m.as_bytes()).is_some() {
            return Err(ProtocolError::DuplicateRegistration);
        }
        let tm = Transaction::new(TxKind::Tm, &self.mv.keys, None, self.bc.public_key(), h_m.as_bytes().to_vec());
        let tid = tm.tid;
        self.ledger.append(tm)?;
        Ok(tid)
    }

    /// Biometric collector side: checks `H(MD)` against the TM, refuses an
    /// iris already on the ledger, records `H_I` in a TI, and returns
    /// `M1 = Sig(En(face ⊕ H_I, PK_DAG), SK_BC)`.
    pub fn collect_biometrics(
        &mut self,
        md: &[u8],
        tnum: Tid,
        iris: &[u8],
        face: &[u8],
    ) -> Result<Credential, ProtocolError> {
        let tm = self.ledger.get(&tnum).map_err(|_| ProtocolError::MetadataMismatch)?;
        if tm.kind != TxKind::Tm || tm.data != hash(md).as_bytes() {
            return Err(ProtocolError::MetadataMismatch);
        }
        let h_i = hash(iris);
        if self.ledger.find_payload(TxKind::Ti, h_i.as_bytes()).is_some() {
            return Err(ProtocolError::DuplicateRegistration);
        }
        let ti = Transaction::new(TxKind::Ti, &self.bc.keys, Some(tnum), self.dag.public_key(), h_i.as_bytes().to_vec());
        self.ledger.append(ti)?;

        let masked = xor_cyclic(face, h_i.as_bytes());
        let m1 = crate::crypto::SignedCiphertext::seal(&masked, &self.dag.public_key(), &self.bc.keys, &mut self.rng)?;
        Ok(Credential { tnum, m1 })
    }

    /// Full digitization of a person.
    pub fn digitize(&mut self, np: &NaturalPerson) -> Result<Credential, ProtocolError> {
        let start = Instant::now();
        let tnum = self.register_metadata(np)?;
        let cred = self.collect_biometrics(&np.md, tnum, &np.iris, &np.face)?;
        self.timings.digitization += start.elapsed();
        self.timings.digitizations += 1;
        Ok(cred)
    }

    // ---- generation ---------------------------------------------------

    fn ti_for(&self, tnum: &Tid) -> Option<&Transaction> {
        self.ledger
            .transactions()
            .iter()
            .find(|t| t.kind == TxKind::Ti && t.prev_tid.as_ref() == Some(tnum))
    }

    /// Generation flow: checks the proof against the ledger, recovers and
    /// live-checks the face, builds the avatar, restores the master key from
    /// `t1` storage-server subkeys, escrows the metadata across the storage
    /// servers, records the TDA, and signs the avatar.
    pub fn generate(
        &mut self,
        pip: &PhysicalIdentityProof,
        live_face: &[u8],
    ) -> Result<IssuedAvatar, ProtocolError> {
        let start = Instant::now();
        let out = self.generate_inner(pip, live_face);
        if out.is_ok() {
            self.timings.generation += start.elapsed();
            self.timings.generations += 1;
        }
        out
    }

    fn generate_inner(
        &mut self,
        pip: &PhysicalIdentityProof,
        live_face: &[u8],
    ) -> Result<IssuedAvatar, ProtocolError> {
        let t1 = self.params.t1;
        let n1 = self.params.n1;

        // M2 = De(Ver(M1, PK_BC), SK_DAG)
        if !pip.m1.verify(&self.bc.public_key()) {
            return Err(ProtocolError::ProofMismatch("M1 is not signed by the biometric collector".into()));
        }
        let tm = self
            .ledger
            .get(&pip.tnum)
            .map_err(|_| ProtocolError::ProofMismatch("unknown transaction number".into()))?;
        if tm.kind != TxKind::Tm || tm.data != hash(&pip.md).as_bytes() {
            return Err(ProtocolError::ProofMismatch("metadata hash differs from the TM".into()));
        }
        let ti = self
            .ti_for(&pip.tnum)
            .ok_or_else(|| ProtocolError::ProofMismatch("no iris proof linked to the TM".into()))?;
        let (ti_tid, h_i) = (ti.tid, ti.data.clone());
        let m2 = ec_decrypt(&pip.m1.ciphertext, &self.dag.keys)
            .map_err(|_| ProtocolError::ProofMismatch("M1 does not decrypt".into()))?;
        let m3 = xor_cyclic(&m2, &h_i);
        if !face_matches(&m3, live_face, self.params.face_tolerance) {
            return Err(ProtocolError::FaceMismatch);
        }

        let das = derive_das(&m3, self.params.das_len, self.dag.library.k());
        let mut avatar = generate_da(das.as_str(), &self.dag.library)?;
        let dai = avatar.dai();
        if self.ledger.find_tda(&dai).is_ok() {
            return Err(ProtocolError::DaiCollision(dai));
        }

        // Subkeys from the storage servers, opened with SK_DAG.
        let dag_pk = self.dag.public_key();
        let responses: Vec<Vec<u8>> = self
            .storage
            .iter()
            .filter_map(|ss| ss.encrypted_subkey(&dag_pk, &mut self.rng))
            .collect();
        let shares: Vec<ShamirShare> = responses
            .iter()
            .filter_map(|ct| open_share(ct, &self.dag.keys))
            .take(t1)
            .collect();
        if shares.len() < t1 {
            return Err(ProtocolError::InsufficientSubkeys { need: t1, got: shares.len() });
        }
        let mk = reconstruct_at_zero(&shares, t1, FieldSpec::subkey())
            .ok()
            .as_ref()
            .and_then(mk_from_field)
            .ok_or(ProtocolError::DecryptFailure)?;

        let si = hash(&[dai.as_bytes().as_slice(), &ti_tid.0].concat());
        let layout = self.params.layout();
        let escrow = escrow_identity(&pip.md, &dai, &mk, &layout, &self.escrow_field, &self.escrow_xs, &mut self.rng)?;
        drop(mk);

        let mut acks = 0;
        for (ss, iri) in self.storage.iter_mut().zip(escrow.iris) {
            acks += usize::from(ss.store(si, iri));
        }
        if acks * 2 <= n1 {
            for ss in &mut self.storage {
                ss.remove(&si);
            }
            return Err(ProtocolError::InsufficientAcks { need_over: n1 / 2, got: acks });
        }

        let mut payload = dai.as_bytes().to_vec();
        payload.extend_from_slice(si.as_bytes());
        let tda = Transaction::new(TxKind::Tda, &self.dag.keys, Some(ti_tid), dag_pk, payload);
        let tda_tid = tda.tid;
        if let Err(e) = self.ledger.append(tda) {
            for ss in &mut self.storage {
                ss.remove(&si);
            }
            return Err(e.into());
        }

        avatar.bind_face(m3);
        let signature = avatar.sign_with(&self.dag.keys);
        Ok(IssuedAvatar { avatar, signature, dai, si, tda: tda_tid, escrow_attempts: escrow.attempts })
    }

    // ---- accountability -----------------------------------------------

    /// Accountability flow run by regulator `ra_index`: looks up the storage
    /// index, logs a TA, rebuilds the escrowed blob from `t1` records,
    /// restores the master key from its own and `t2 − 1` other regulators'
    /// subkeys, and decrypts the metadata.
    pub fn audit(&mut self, ra_index: usize, dai: &Digest20, plan: &AuditPlan) -> Result<AuditResult, ProtocolError> {
        let start = Instant::now();
        let out = self.audit_inner(ra_index, dai, plan);
        if out.is_ok() {
            self.timings.accountability += start.elapsed();
            self.timings.audits += 1;
        }
        out
    }

    fn audit_inner(&mut self, ra_index: usize, dai: &Digest20, plan: &AuditPlan) -> Result<AuditResult, ProtocolError> {
        let (t1, t2) = (self.params.t1, self.params.t2);
        if ra_index >= self.regulators.len() {
            return Err(ProtocolError::UnknownEntity(ra_index));
        }
        let si = match self.ledger.find_si(dai) {
            Ok(si) => si,
            Err(LedgerError::NotFound) => return Err(ProtocolError::NotFound),
            Err(e) => return Err(e.into()),
        };

        let auditor = &self.regulators[ra_index];
        let ra_pk = auditor.public_key();
        let mut payload = Timestamp::from_datetime(&self.clock.now()).0.to_vec();
        payload.extend_from_slice(dai.as_bytes());
        let ta = Transaction::new(TxKind::Ta, &auditor.keys, self.ledger.last_ta(), ra_pk, payload);
        let ta_tid = ta.tid;
        self.ledger.append(ta)?;

        let storage_order: Vec<usize> = plan.storage.clone().unwrap_or_else(|| (0..self.storage.len()).collect());
        let mut iris = Vec::with_capacity(t1);
        for i in storage_order {
            let ss = self.storage.get(i).ok_or(ProtocolError::UnknownEntity(i))?;
            if let Some(iri) = ss.fetch(&si) {
                iris.push(iri);
                if iris.len() == t1 {
                    break;
                }
            }
        }
        if iris.len() < t1 {
            return Err(ProtocolError::InsufficientIris { need: t1, got: iris.len() });
        }
        let secinfo = reconstruct_secinfo(&iris, &self.params.layout(), &self.escrow_field)
            .map_err(|_| ProtocolError::DecryptFailure)?;

        let others: Vec<usize> = plan
            .regulators
            .clone()
            .unwrap_or_else(|| (0..self.regulators.len()).collect())
            .into_iter()
            .filter(|&j| j != ra_index)
            .collect();
        let mut shares = vec![self.regulators[ra_index].subkey.clone()];
        for j in others {
            if shares.len() == t2 {
                break;
            }
            let ra = self.regulators.get(j).ok_or(ProtocolError::UnknownEntity(j))?;
            let Some(ct) = ra.respond(&ra_pk, &mut self.rng) else { continue };
            if let Some(share) = self.regulators[ra_index].open_subkey(&ct) {
                shares.push(share);
            }
        }
        if shares.len() < t2 {
            return Err(ProtocolError::InsufficientRas { need: t2, got: shares.len() });
        }
        let mk = reconstruct_at_zero(&shares, t2, FieldSpec::subkey())
            .ok()
            .as_ref()
            .and_then(mk_from_field)
            .ok_or(ProtocolError::DecryptFailure)?;

        let recovered_md = recover_metadata(&secinfo, dai, &mk, MD_LEN)?;
        if self.registered_md_hash(dai).as_deref() != Some(hash(&recovered_md).as_bytes().as_slice()) {
            return Err(ProtocolError::DecryptFailure);
        }
        Ok(AuditResult { dai: *dai, recovered_md, ta_tid })
    }

    /// `H_M` from the TM reached by following the avatar's TDA back
    /// through its TI.
    fn registered_md_hash(&self, dai: &Digest20) -> Option<Vec<u8>> {
        let tda = self.ledger.find_tda(dai).ok()?;
        let ti = self.ledger.get(tda.prev_tid.as_ref()?).ok()?;
        let tm = self.ledger.get(ti.prev_tid.as_ref()?).ok()?;
        Some(tm.data.clone())
    }

    /// Records an avatar action in the behaviour log.
    pub fn log_behavior(&mut self, dai: &Digest20, action: &str) -> usize {
        let ts = Timestamp::from_datetime(&self.clock.now());
        self.behavior.log(&dai.to_hex(), action, ts.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::ServerStatus;

    fn system(seed: u64) -> System {
        System::init(SystemParams::default(), CodeModuleLibrary::default_library(), seed).unwrap()
    }

    fn lifecycle(sys: &mut System, label: &str) -> (NaturalPerson, IssuedAvatar) {
        let np = NaturalPerson::synthetic(label, sys.rng());
        let cred = sys.digitize(&np).unwrap();
        let issued = sys.generate(&PhysicalIdentityProof::new(&np, &cred), &np.face).unwrap();
        (np, issued)
    }

    #[test]
    fn init_validates_thresholds() {
        let lib = CodeModuleLibrary::default_library;
        let bad = SystemParams { n1: 4, ..SystemParams::default() };
        assert!(matches!(System::init(bad, lib(), 1), Err(ProtocolError::InvalidThreshold { t: 3, n: 4 })));
        let small = SystemParams { n1: 1, t1: 1, ..SystemParams::default() };
        assert!(matches!(System::init(small, lib(), 1), Err(ProtocolError::EscrowCapacity { capacity: 100, needed: 288 })));
        let zero = SystemParams { t1: 0, ..SystemParams::default() };
        assert!(matches!(System::init(zero, lib(), 1), Err(ProtocolError::InvalidThreshold { .. })));
    }

    #[test]
    fn init_shares_recover_a_128_bit_key() {
        let sys = system(1);
        let field = FieldSpec::subkey();
        let ss: Vec<ShamirShare> = sys.storage.iter().map(|s| s.subkey.clone()).collect();
        let ra: Vec<ShamirShare> = sys.regulators.iter().map(|r| r.subkey.clone()).collect();
        let a = reconstruct_at_zero(&ss, 3, field).unwrap();
        let b = reconstruct_at_zero(&ra[2..], 3, field).unwrap();
        assert_eq!(a, b);
        assert!(a.bits() <= 128);
        let mut xs: Vec<u8> = ss.iter().chain(&ra).map(|s| s.x).collect();
        xs.sort_unstable();
        xs.dedup();
        assert_eq!(xs.len(), 10);
    }

    #[test]
    fn threshold_one_gives_the_key_to_everyone() {
        let params = SystemParams { n1: 1, t1: 1, n2: 1, t2: 1, n: 60, ..SystemParams::default() };
        let sys = System::init(params, CodeModuleLibrary::default_library(), 2).unwrap();
        assert_eq!(sys.storage[0].subkey.y, sys.regulators[0].subkey.y);
    }

    #[test]
    fn full_lifecycle_recovers_metadata() {
        let mut sys = system(3);
        let (np, issued) = lifecycle(&mut sys, "alice");
        assert!(issued.avatar.verify(&sys.dag.public_key()));
        assert_eq!(issued.dai, issued.avatar.dai());
        assert_eq!(sys.ledger.find_si(&issued.dai).unwrap(), issued.si);
        let res = sys.audit(0, &issued.dai, &AuditPlan::default()).unwrap();
        assert_eq!(res.recovered_md, np.md);
        assert!(sys.ledger.verify_chain().is_empty());
        assert_eq!(sys.ledger.count(TxKind::Ta), 1);
        assert_eq!(sys.timings.audits, 1);
    }

    #[test]
    fn small_library_collides_between_people() {
        let params = SystemParams::default();
        let lib = CodeModuleLibrary::new(vec![crate::avatar::Slot { name: "only".into(), templates: vec!["x".into()] }]).unwrap();
        let mut sys = System::init(params, lib, 8).unwrap();
        lifecycle(&mut sys, "first");
        let np = NaturalPerson::synthetic("second", sys.rng());
        let cred = sys.digitize(&np).unwrap();
        let err = sys.generate(&PhysicalIdentityProof::new(&np, &cred), &np.face).unwrap_err();
        assert!(matches!(err, ProtocolError::DaiCollision(_)));
        assert!(sys.storage.iter().all(|s| s.records().len() == 1));
    }

    #[test]
    fn digitization_errors() {
        let mut sys = system(4);
        let np = NaturalPerson::synthetic("carol", sys.rng());

        let mut forged = np.clone();
        forged.certificates[0] ^= 1;
        assert!(matches!(sys.register_metadata(&forged), Err(ProtocolError::CertMismatch)));

        let tnum = sys.register_metadata(&np).unwrap();
        let mut tampered = np.md.clone();
        tampered[0] ^= 1;
        assert!(matches!(
            sys.collect_biometrics(&tampered, tnum, &np.iris, &np.face),
            Err(ProtocolError::MetadataMismatch)
        ));
        sys.collect_biometrics(&np.md, tnum, &np.iris, &np.face).unwrap();
        assert!(matches!(sys.digitize(&np), Err(ProtocolError::DuplicateRegistration)));

        let mut twin = NaturalPerson::synthetic("dave", sys.rng());
        twin.iris = np.iris.clone();
        assert!(matches!(sys.digitize(&twin), Err(ProtocolError::DuplicateRegistration)));
        assert_eq!(sys.ledger.count(TxKind::Ti), 1);
    }

    #[test]
    fn generation_errors() {
        let mut sys = system(5);
        let np = NaturalPerson::synthetic("erin", sys.rng());
        let cred = sys.digitize(&np).unwrap();
        let pip = PhysicalIdentityProof::new(&np, &cred);

        let mut resigned = pip.clone();
        resigned.m1.signature = crate::crypto::sign(&pip.m1.ciphertext, &sys.mv.keys);
        assert!(matches!(sys.generate(&resigned, &np.face), Err(ProtocolError::ProofMismatch(_))));

        let mut wrong_md = pip.clone();
        wrong_md.md[5] ^= 1;
        assert!(matches!(sys.generate(&wrong_md, &np.face), Err(ProtocolError::ProofMismatch(_))));

        let noisy = np.live_face(1, sys.rng());
        assert!(matches!(sys.generate(&pip, &noisy), Err(ProtocolError::FaceMismatch)));

        for ss in &mut sys.storage[..3] {
            ss.status = ServerStatus::Offline;
        }
        assert!(matches!(
            sys.generate(&pip, &np.face),
            Err(ProtocolError::InsufficientSubkeys { need: 3, got: 2 })
        ));
        sys.storage[0].status = ServerStatus::Corrupt;
        assert!(matches!(
            sys.generate(&pip, &np.face),
            Err(ProtocolError::InsufficientSubkeys { need: 3, got: 2 })
        ));

        for ss in &mut sys.storage {
            ss.status = ServerStatus::ReadOnly;
        }
        sys.storage[4].status = ServerStatus::Online;
        sys.storage[3].status = ServerStatus::Online;
        assert!(matches!(sys.generate(&pip, &np.face), Err(ProtocolError::InsufficientAcks { got: 2, .. })));
        assert!(sys.storage.iter().all(|s| s.records().is_empty()));
        assert_eq!(sys.ledger.count(TxKind::Tda), 0);

        sys.storage[2].status = ServerStatus::Online;
        let issued = sys.generate(&pip, &np.face).unwrap();
        assert_eq!(sys.storage.iter().filter(|s| !s.records().is_empty()).count(), 3);
        assert!(matches!(sys.generate(&pip, &np.face), Err(ProtocolError::DaiCollision(_))));
        // the three holders are enough for the audit
        let res = sys.audit(1, &issued.dai, &AuditPlan::default()).unwrap();
        assert_eq!(res.recovered_md, np.md);
    }

    #[test]
    fn audit_errors() {
        let mut sys = system(6);
        let (np, issued) = lifecycle(&mut sys, "frank");
        assert!(matches!(sys.audit(0, &hash(b"nobody"), &AuditPlan::default()), Err(ProtocolError::NotFound)));
        assert_eq!(sys.ledger.count(TxKind::Ta), 0);
        assert!(matches!(sys.audit(9, &issued.dai, &AuditPlan::default()), Err(ProtocolError::UnknownEntity(9))));

        let two_ras = AuditPlan { storage: None, regulators: Some(vec![1]) };
        assert!(matches!(
            sys.audit(0, &issued.dai, &two_ras),
            Err(ProtocolError::InsufficientRas { need: 3, got: 2 })
        ));
        let two_ss = AuditPlan { storage: Some(vec![0, 4]), regulators: None };
        assert!(matches!(
            sys.audit(0, &issued.dai, &two_ss),
            Err(ProtocolError::InsufficientIris { need: 3, got: 2 })
        ));

        sys.regulators[1].status = ServerStatus::Corrupt;
        let res = sys.audit(0, &issued.dai, &AuditPlan::default()).unwrap();
        assert_eq!(res.recovered_md, np.md);

        sys.storage[0].status = ServerStatus::Corrupt;
        assert!(matches!(sys.audit(0, &issued.dai, &AuditPlan::default()), Err(ProtocolError::DecryptFailure)));
        // every attempt, failed or not, leaves a TA
        assert_eq!(sys.ledger.count(TxKind::Ta), 4);
        assert!(sys.ledger.verify_chain().is_empty());
    }

    #[test]
    fn behaviour_log_uses_dai_hex() {
        let mut sys = system(7);
        let dai = hash(b"x");
        sys.log_behavior(&dai, "login");
        sys.log_behavior(&dai, "transfer");
        assert_eq!(sys.behavior.entries_for(&dai.to_hex()).count(), 2);
    }

    #[test]
    fn simulated_clock_ticks() {
        let mut c = Clock::default();
        let a = c.now();
        let b = c.now();
        assert_eq!(b - a, TimeDelta::seconds(1));
        assert_eq!(Timestamp::from_datetime(&a).as_str(), "20220501000000");
    }
}
