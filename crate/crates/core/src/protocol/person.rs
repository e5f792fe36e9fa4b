use rand::{Rng, RngCore};

use crate::crypto::{hash, SignedCiphertext};
use crate::ledger::Tid;

pub const MD_LEN: usize = 256;
pub const IRIS_LEN: usize = 25 * 1024;
pub const FACE_LEN: usize = 30 * 1024;

/// A registrant: metadata record, two biometric captures, and the
/// certificates shown to the metadata verifier. Holds no keys.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NaturalPerson {
    pub md: Vec<u8>,
    pub iris: Vec<u8>,
    pub face: Vec<u8>,
    pub certificates: Vec<u8>,
}

impl NaturalPerson {
    /// Builds a 256-byte zero-padded metadata record from its fields.
    pub fn metadata_record(name: &str, id_number: &str, address: &str, gender: &str) -> Vec<u8> {
        let mut md = format!("name={name};id={id_number};address={address};gender={gender}").into_bytes();
        md.truncate(MD_LEN);
        md.resize(MD_LEN, 0);
        md
    }

    /// Certificates are modeled as an issuer's attestation of the metadata
    /// digest.
    pub fn attest(md: &[u8]) -> Vec<u8> {
        hash(&[b"certificate:".as_slice(), md].concat()).as_bytes().to_vec()
    }

    pub fn new(md: Vec<u8>, iris: Vec<u8>, face: Vec<u8>) -> Self {
        let certificates = Self::attest(&md);
        Self { md, iris, face, certificates }
    }

    /// A random person with the default capture sizes.
    pub fn synthetic<R: RngCore>(label: &str, rng: &mut R) -> Self {
        let id: u64 = rng.gen_range(100_000_000_000..999_999_999_999);
        let street: u16 = rng.gen_range(1..999);
        let gender = if rng.gen_bool(0.5) { "F" } else { "M" };
        let md = Self::metadata_record(label, &id.to_string(), &format!("{street} Ledger Lane"), gender);
        let mut iris = vec![0u8; IRIS_LEN];
        let mut face = vec![0u8; FACE_LEN];
        rng.fill_bytes(&mut iris);
        rng.fill_bytes(&mut face);
        Self::new(md, iris, face)
    }

    /// A fresh face capture: the enrolled face with `flipped_bits` random bit errors.
    pub fn live_face<R: RngCore>(&self, flipped_bits: usize, rng: &mut R) -> Vec<u8> {
        let mut out = self.face.clone();
        let bits = out.len() * 8;
        for i in rand::seq::index::sample(rng, bits, flipped_bits.min(bits)) {
            out[i / 8] ^= 1 << (i % 8);
        }
        out
    }
}

/// What the biometric collector hands back after digitization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Credential {
    pub tnum: Tid,
    pub m1: SignedCiphertext,
}

impl Credential {
    /// Secret key material the person must keep: none. The transaction
    /// number and M1 are public or encrypted to the generator.
    pub fn local_key_bytes(&self) -> usize {
        0
    }
}

/// `PIP = {MD_NP, TNum, M1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhysicalIdentityProof {
    pub md: Vec<u8>,
    pub tnum: Tid,
    pub m1: SignedCiphertext,
}

impl PhysicalIdentityProof {
    pub fn new(np: &NaturalPerson, credential: &Credential) -> Self {
        Self { md: np.md.clone(), tnum: credential.tnum, m1: credential.m1.clone() }
    }
}
