//! Digital avatar assembly.
//!
//! A seed of decimal digits is cut into `k` equal substrings; substring `i`
//! read as a decimal number, reduced mod the number of templates in slot
//! `i`, picks that slot's code module. The selected modules are concatenated
//! in slot order and the avatar is identified by the hash of that
//! concatenation (the DAI).

mod da;
mod library;
mod seed;

pub use da::{
    face_distance, face_matches, generate_da, select_indices, AvatarSession, DigitalAvatar,
    DEFAULT_MAX_FAILURES, DA_MAGIC,
};
pub use library::{CodeModuleLibrary, Slot, DEFAULT_TEMPLATE_LEN};
pub use seed::{derive_das, Seed, DEFAULT_DAS_LEN};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AvatarError {
    #[error("seed contains a non-digit character")]
    NonDigitSeed,
    #[error("seed length {len} is not a positive multiple of {k}")]
    SeedLength { len: usize, k: usize },
    #[error("code module library is invalid: {0}")]
    Library(String),
    #[error("avatar has no bound face")]
    Unbound,
    #[error("avatar is locked")]
    Locked,
    #[error("avatar has not been activated")]
    NotActivated,
    #[error("malformed avatar file: {0}")]
    Malformed(&'static str),
}
