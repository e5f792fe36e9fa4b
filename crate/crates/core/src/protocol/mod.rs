//! Protocol entities and the three implemented flows.
//!
//! | flow | entities | ledger writes |
//! |------|----------|---------------|
//! | initialization | IIC, SS, RA, MV, BC, DAG | none |
//! | digitization | NP, MV, BC | TM, TI |
//! | generation | NP, DAG, SS | TDA |
//! | accountability | RA, SS | TA |
//!
//! [`System`] owns every actor plus the ledger and drives the flows
//! in-process. Actors only exchange values that are signed, encrypted, or
//! both, so tampering at any hop surfaces as a verification failure.

mod behavior;
mod entities;
mod escrow;
mod person;
mod system;

pub use behavior::{BehaviorEntry, BehaviorLog};
pub use entities::{
    AvatarGenerator, BiometricCollector, MetadataVerifier, RegulatoryAuthority, ServerStatus,
    StorageServer,
};
pub use escrow::{escrow_identity, recover_metadata, EscrowOutput, MAX_ESCROW_ATTEMPTS};
pub use person::{Credential, NaturalPerson, PhysicalIdentityProof, FACE_LEN, IRIS_LEN, MD_LEN};
pub use system::{
    AuditPlan, AuditResult, Clock, IssuedAvatar, PhaseTimings, System, SystemParams,
};

use thiserror::Error;

use crate::avatar::AvatarError;
use crate::crypto::Digest20;
use crate::crypto::CryptoError;
use crate::ledger::LedgerError;
use crate::shamir::ShamirError;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("invalid threshold: t = {t}, n = {n} (need 1 <= t and n = 2t - 1)")]
    InvalidThreshold { t: usize, n: usize },
    #[error("escrow layout holds {capacity} bytes but the encrypted metadata needs {needed}")]
    EscrowCapacity { capacity: usize, needed: usize },
    #[error("certificates do not attest the presented metadata")]
    CertMismatch,
    #[error("metadata hash does not match the TM on the ledger")]
    MetadataMismatch,
    #[error("identity already registered")]
    DuplicateRegistration,
    #[error("avatar {0} is already issued to another identity")]
    DaiCollision(Digest20),
    #[error("physical identity proof rejected: {0}")]
    ProofMismatch(String),
    #[error("live face does not match the enrolled face")]
    FaceMismatch,
    #[error("need {need} storage-server subkeys, got {got}")]
    InsufficientSubkeys { need: usize, got: usize },
    #[error("need more than {need_over} storage acknowledgements, got {got}")]
    InsufficientAcks { need_over: usize, got: usize },
    #[error("DAI not registered on the ledger")]
    NotFound,
    #[error("need {need} identity restoration records, got {got}")]
    InsufficientIris { need: usize, got: usize },
    #[error("need {need} regulator subkeys, got {got}")]
    InsufficientRas { need: usize, got: usize },
    #[error("escrowed identity failed to decrypt")]
    DecryptFailure,
    #[error("no entity with index {0}")]
    UnknownEntity(usize),
    #[error("escrow encryption kept overflowing the field after {0} attempts")]
    EscrowOverflow(usize),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error(transparent)]
    Shamir(#[from] ShamirError),
    #[error(transparent)]
    Crypto(#[from] CryptoError),
    #[error(transparent)]
    Avatar(#[from] AvatarError),
}

impl ProtocolError {
    /// Stable variant name, used by scenario files to name expected errors.
    pub fn code(&self) -> &'static str {
        match self {
            Self::InvalidThreshold { .. } => "InvalidThreshold",
            Self::EscrowCapacity { .. } => "EscrowCapacity",
            Self::CertMismatch => "CertMismatch",
            Self::MetadataMismatch => "MetadataMismatch",
            Self::DuplicateRegistration => "DuplicateRegistration",
            Self::DaiCollision(_) => "DaiCollision",
            Self::ProofMismatch(_) => "ProofMismatch",
            Self::FaceMismatch => "FaceMismatch",
            Self::InsufficientSubkeys { .. } => "InsufficientSubkeys",
            Self::InsufficientAcks { .. } => "InsufficientAcks",
            Self::NotFound => "NotFound",
            Self::InsufficientIris { .. } => "InsufficientIris",
            Self::InsufficientRas { .. } => "InsufficientRas",
            Self::DecryptFailure => "DecryptFailure",
            Self::UnknownEntity(_) => "UnknownEntity",
            Self::EscrowOverflow(_) => "EscrowOverflow",
            Self::Ledger(_) => "Ledger",
            Self::Shamir(_) => "Shamir",
            Self::Crypto(_) => "Crypto",
            Self::Avatar(_) => "Avatar",
        }
    }
}
