use std::collections::BTreeMap;

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use crate::avatar::CodeModuleLibrary;
use crate::crypto::{ec_decrypt, ec_encrypt, Digest20, KeyPair, PublicKeyBytes};
use crate::shamir::{FieldSpec, Iri, ShamirShare};

/// Availability of a storage server or regulator in a simulation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ServerStatus {
    #[default]
    Online,
    /// Answers nothing.
    Offline,
    /// Answers subkey and record requests but refuses new records.
    ReadOnly,
    /// Answers, but every response is damaged in transit.
    Corrupt,
}

fn damage(mut bytes: Vec<u8>) -> Vec<u8> {
    if let Some(b) = bytes.last_mut() {
        *b ^= 0x01;
    }
    bytes
}

/// Checks metadata against certificates and records its digest (TM).
#[derive(Debug, Clone)]
pub struct MetadataVerifier {
    pub(crate) keys: KeyPair,
}

impl MetadataVerifier {
    pub fn public_key(&self) -> PublicKeyBytes {
        self.keys.public()
    }
}

/// Collects biometrics, records the iris digest (TI), and issues M1.
#[derive(Debug, Clone)]
pub struct BiometricCollector {
    pub(crate) keys: KeyPair,
}

impl BiometricCollector {
    pub fn public_key(&self) -> PublicKeyBytes {
        self.keys.public()
    }
}

/// Builds avatars, escrows identities, and records TDAs.
#[derive(Debug, Clone)]
pub struct AvatarGenerator {
    pub(crate) keys: KeyPair,
    pub(crate) library: CodeModuleLibrary,
}

impl AvatarGenerator {
    pub fn public_key(&self) -> PublicKeyBytes {
        self.keys.public()
    }

    pub fn library(&self) -> &CodeModuleLibrary {
        &self.library
    }
}

/// Holds one master-key subkey and one record per storage index.
#[derive(Debug, Clone)]
pub struct StorageServer {
    pub(crate) keys: KeyPair,
    pub(crate) subkey: ShamirShare,
    pub(crate) records: BTreeMap<Digest20, Iri>,
    pub status: ServerStatus,
}

impl StorageServer {
    pub(crate) fn new(keys: KeyPair, subkey: ShamirShare) -> Self {
        Self { keys, subkey, records: BTreeMap::new(), status: ServerStatus::Online }
    }

    pub fn public_key(&self) -> PublicKeyBytes {
        self.keys.public()
    }

    /// `ESubK = En(SubK, PK_requester)`, or `None` when offline.
    pub fn encrypted_subkey<R: RngCore + CryptoRng>(
        &self,
        requester: &PublicKeyBytes,
        rng: &mut R,
    ) -> Option<Vec<u8>> {
        if self.status == ServerStatus::Offline {
            return None;
        }
        let ct = ec_encrypt(&self.subkey.to_wire(FieldSpec::subkey()), requester, rng).ok()?;
        Some(if self.status == ServerStatus::Corrupt { damage(ct) } else { ct })
    }

    /// Stores `iri` under `si`; the returned flag is the acknowledgement.
    /// A second record for the same index is refused.
    pub fn store(&mut self, si: Digest20, iri: Iri) -> bool {
        if matches!(self.status, ServerStatus::Offline | ServerStatus::ReadOnly) {
            return false;
        }
        if self.records.contains_key(&si) {
            return false;
        }
        self.records.insert(si, iri);
        true
    }

    pub(crate) fn remove(&mut self, si: &Digest20) {
        self.records.remove(si);
    }

    pub fn fetch(&self, si: &Digest20) -> Option<Iri> {
        if self.status == ServerStatus::Offline {
            return None;
        }
        let iri = self.records.get(si)?.clone();
        if self.status == ServerStatus::Corrupt {
            let mut iri = iri;
            if let Some(y) = iri.ys.first_mut() {
                *y ^= num_bigint::BigUint::from(1u32);
            }
            return Some(iri);
        }
        Some(iri)
    }

    pub fn records(&self) -> &BTreeMap<Digest20, Iri> {
        &self.records
    }

    pub fn subkey(&self) -> &ShamirShare {
        &self.subkey
    }
}

/// Regulator holding one master-key subkey.
#[derive(Debug, Clone)]
pub struct RegulatoryAuthority {
    pub(crate) keys: KeyPair,
    pub(crate) subkey: ShamirShare,
    pub status: ServerStatus,
}

impl RegulatoryAuthority {
    pub(crate) fn new(keys: KeyPair, subkey: ShamirShare) -> Self {
        Self { keys, subkey, status: ServerStatus::Online }
    }

    pub fn public_key(&self) -> PublicKeyBytes {
        self.keys.public()
    }

    /// `ESubK_RAj = En(SubK_RAj, PK_RAi)` in answer to an audit request.
    pub fn respond<R: RngCore + CryptoRng>(&self, requester: &PublicKeyBytes, rng: &mut R) -> Option<Vec<u8>> {
        if self.status == ServerStatus::Offline {
            return None;
        }
        let ct = ec_encrypt(&self.subkey.to_wire(FieldSpec::subkey()), requester, rng).ok()?;
        Some(if self.status == ServerStatus::Corrupt { damage(ct) } else { ct })
    }

    pub(crate) fn open_subkey(&self, ciphertext: &[u8]) -> Option<ShamirShare> {
        open_share(ciphertext, &self.keys)
    }

    pub fn subkey(&self) -> &ShamirShare {
        &self.subkey
    }
}

pub(crate) fn open_share(ciphertext: &[u8], keys: &KeyPair) -> Option<ShamirShare> {
    let wire = ec_decrypt(ciphertext, keys).ok()?;
    ShamirShare::from_wire(&wire, FieldSpec::subkey()).ok()
}
