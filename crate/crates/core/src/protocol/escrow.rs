use rand::{CryptoRng, RngCore};

use crate::crypto::{sym_ciphertext_len, sym_decrypt, sym_encrypt, xor_cyclic, Digest20, MasterKey};
use crate::shamir::{split_secinfo, EscrowLayout, FieldSpec, Iri, SecInfo, ShamirError};

use super::ProtocolError;

/// Upper bound on re-encryptions when a ciphertext chunk is not a field
/// element. Each chunk overflows with probability below 2^-33.
pub const MAX_ESCROW_ATTEMPTS: usize = 16;

#[derive(Debug, Clone)]
pub struct EscrowOutput {
    pub secinfo: SecInfo,
    pub iris: Vec<Iri>,
    /// Encryptions performed, 1 unless a chunk overflowed.
    pub attempts: usize,
}

/// `SecInfo = En(md ⊕ DAI, MK)` zero-expanded to the layout length and
/// split into one record per x. Re-encrypts with a fresh IV whenever a
/// chunk is not below the escrow modulus.
pub fn escrow_identity<R: RngCore + CryptoRng>(
    md: &[u8],
    dai: &Digest20,
    mk: &MasterKey,
    layout: &EscrowLayout,
    field: &FieldSpec,
    xs: &[u8],
    rng: &mut R,
) -> Result<EscrowOutput, ProtocolError> {
    let masked = xor_cyclic(md, dai.as_bytes());
    for attempts in 1..=MAX_ESCROW_ATTEMPTS {
        let ct = sym_encrypt(&masked, mk, rng);
        let secinfo = SecInfo::zero_expand(&ct, layout)?;
        match split_secinfo(&secinfo, layout, field, xs) {
            Ok(iris) => return Ok(EscrowOutput { secinfo, iris, attempts }),
            Err(ShamirError::ChunkOverflow { .. }) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Err(ProtocolError::EscrowOverflow(MAX_ESCROW_ATTEMPTS))
}

/// Inverse of [`escrow_identity`] given the reassembled blob: drops the zero
/// expansion, decrypts, and removes the DAI mask.
pub fn recover_metadata(
    secinfo: &SecInfo,
    dai: &Digest20,
    mk: &MasterKey,
    md_len: usize,
) -> Result<Vec<u8>, ProtocolError> {
    let ct_len = sym_ciphertext_len(md_len);
    let bytes = secinfo.as_bytes();
    if bytes.len() < ct_len {
        return Err(ProtocolError::DecryptFailure);
    }
    let masked = sym_decrypt(&bytes[..ct_len], mk).map_err(|_| ProtocolError::DecryptFailure)?;
    if masked.len() != md_len {
        return Err(ProtocolError::DecryptFailure);
    }
    Ok(xor_cyclic(&masked, dai.as_bytes()))
}
