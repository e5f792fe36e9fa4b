//! Cryptographic primitive layer.
//!
//! Every protocol entity goes through this module for hashing, symmetric
//! encryption under the master key, integrated encryption to a curve public
//! key, and curve signatures. The default profile is SHA-1 (20-byte
//! digests), AES-128-CBC with an explicit IV prefix, and secp256k1 for both
//! ECIES-style encryption and ECDSA.

mod ec;
mod hash;
mod sym;

pub use ec::{
    ec_decrypt, ec_encrypt, sign, verify, KeyPair, PublicKeyBytes, PublicParams, SignatureBytes,
    SignedCiphertext, EC_OVERHEAD, PUBLIC_KEY_LEN, SIGNATURE_LEN,
};
pub use hash::{hash, Digest20, HashProfile, DIGEST_LEN};
pub use sym::{sym_ciphertext_len, sym_decrypt, sym_encrypt, MasterKey, BLOCK_LEN, MASTER_KEY_LEN};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CryptoError {
    #[error("invalid block padding or truncated ciphertext")]
    Padding,
    #[error("authentication tag mismatch")]
    TagMismatch,
    #[error("malformed public key encoding")]
    InvalidPublicKey,
    #[error("secret key is not a valid curve scalar")]
    InvalidSecretKey,
    #[error("expected {expected} bytes, got {actual}")]
    BadLength { expected: usize, actual: usize },
}

/// XOR `data` with `key` repeated cyclically across the length of `data`.
///
/// Used wherever the protocol XORs a 20-byte digest into a longer blob
/// (face ⊕ H_I, metadata ⊕ DAI). Applying it twice with the same key is the
/// identity.
pub fn xor_cyclic(data: &[u8], key: &[u8]) -> Vec<u8> {
    assert!(!key.is_empty(), "xor key must be nonempty");
    data.iter()
        .zip(key.iter().cycle())
        .map(|(d, k)| d ^ k)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xor_cyclic_is_self_inverse() {
        let key = hash(b"key");
        for len in [0usize, 1, 19, 20, 21, 256, 30 * 1024] {
            let data: Vec<u8> = (0..len).map(|i| (i * 31 + 7) as u8).collect();
            let once = xor_cyclic(&data, key.as_bytes());
            assert_eq!(once.len(), len);
            assert_eq!(xor_cyclic(&once, key.as_bytes()), data);
        }
    }

    #[test]
    fn xor_cyclic_repeats_key() {
        let out = xor_cyclic(&[0u8; 5], &[1, 2]);
        assert_eq!(out, vec![1, 2, 1, 2, 1]);
    }
}
