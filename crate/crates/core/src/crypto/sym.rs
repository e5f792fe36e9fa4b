use aes::cipher::{block_padding::Pkcs7, BlockDecryptMut, BlockEncryptMut, KeyIvInit};
use rand::{CryptoRng, RngCore};
use zeroize::{Zeroize, ZeroizeOnDrop};

use super::CryptoError;

type Aes128CbcEnc = cbc::Encryptor<aes::Aes128>;
type Aes128CbcDec = cbc::Decryptor<aes::Aes128>;

pub const MASTER_KEY_LEN: usize = 16;
pub const BLOCK_LEN: usize = 16;

/// 128-bit symmetric master key. Wiped on drop.
#[derive(Clone, PartialEq, Eq, Zeroize, ZeroizeOnDrop)]
pub struct MasterKey([u8; MASTER_KEY_LEN]);

impl MasterKey {
    pub fn from_bytes(bytes: [u8; MASTER_KEY_LEN]) -> Self {
        Self(bytes)
    }

    pub fn from_slice(bytes: &[u8]) -> Result<Self, CryptoError> {
        let arr: [u8; MASTER_KEY_LEN] = bytes.try_into().map_err(|_| CryptoError::BadLength {
            expected: MASTER_KEY_LEN,
            actual: bytes.len(),
        })?;
        Ok(Self(arr))
    }

    pub fn random<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        let mut k = [0u8; MASTER_KEY_LEN];
        rng.fill_bytes(&mut k);
        Self(k)
    }

    pub fn as_bytes(&self) -> &[u8; MASTER_KEY_LEN] {
        &self.0
    }
}

impl std::fmt::Debug for MasterKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("MasterKey(..)")
    }
}

/// Length of `sym_encrypt` output for a plaintext of `plaintext_len` bytes:
/// IV plus PKCS#7-padded blocks (a full block is added when already aligned).
pub const fn sym_ciphertext_len(plaintext_len: usize) -> usize {
    BLOCK_LEN + (plaintext_len / BLOCK_LEN + 1) * BLOCK_LEN
}

/// AES-128-CBC with a fresh random IV prepended to the ciphertext.
pub fn sym_encrypt<R: RngCore + CryptoRng>(plaintext: &[u8], key: &MasterKey, rng: &mut R) -> Vec<u8> {
    let mut iv = [0u8; BLOCK_LEN];
    rng.fill_bytes(&mut iv);
    sym_encrypt_with_iv(plaintext, key.as_bytes(), &iv)
}

pub(crate) fn sym_encrypt_with_iv(plaintext: &[u8], key: &[u8; 16], iv: &[u8; BLOCK_LEN]) -> Vec<u8> {
    let body = Aes128CbcEnc::new(key.into(), iv.into()).encrypt_padded_vec_mut::<Pkcs7>(plaintext);
    let mut out = Vec::with_capacity(BLOCK_LEN + body.len());
    out.extend_from_slice(iv);
    out.extend_from_slice(&body);
    out
}

pub fn sym_decrypt(ciphertext: &[u8], key: &MasterKey) -> Result<Vec<u8>, CryptoError> {
    sym_decrypt_raw(ciphertext, key.as_bytes())
}

pub(crate) fn sym_decrypt_raw(ciphertext: &[u8], key: &[u8; 16]) -> Result<Vec<u8>, CryptoError> {
    if ciphertext.len() < 2 * BLOCK_LEN || !ciphertext.len().is_multiple_of(BLOCK_LEN) {
        return Err(CryptoError::Padding);
    }
    let (iv, body) = ciphertext.split_at(BLOCK_LEN);
    let iv: &[u8; BLOCK_LEN] = iv.try_into().expect("split at block length");
    Aes128CbcDec::new(key.into(), iv.into())
        .decrypt_padded_vec_mut::<Pkcs7>(body)
        .map_err(|_| CryptoError::Padding)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    use super::*;

    #[test]
    fn metadata_sized_ciphertext_is_288_bytes() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let key = MasterKey::random(&mut rng);
        let ct = sym_encrypt(&[7u8; 256], &key, &mut rng);
        assert_eq!(ct.len(), 16 + 272);
        assert_eq!(sym_ciphertext_len(256), 288);
        assert_eq!(sym_ciphertext_len(0), 32);
        assert_eq!(sym_ciphertext_len(15), 32);
    }

    // NIST SP 800-38A F.2.1, first block, with PKCS#7 tail stripped off.
    #[test]
    fn cbc_known_answer() {
        let key: [u8; 16] = hex::decode("2b7e151628aed2a6abf7158809cf4f3c").unwrap().try_into().unwrap();
        let iv: [u8; 16] = hex::decode("000102030405060708090a0b0c0d0e0f").unwrap().try_into().unwrap();
        let pt = hex::decode("6bc1bee22e409f96e93d7e117393172a").unwrap();
        let ct = sym_encrypt_with_iv(&pt, &key, &iv);
        assert_eq!(hex::encode(&ct[16..32]), "7649abac8119b246cee98e9b12e9197d");
    }

    #[test]
    fn round_trip_and_fresh_iv() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let key = MasterKey::random(&mut rng);
        let msg = b"metadata record".to_vec();
        let a = sym_encrypt(&msg, &key, &mut rng);
        let b = sym_encrypt(&msg, &key, &mut rng);
        assert_ne!(a, b);
        assert_eq!(sym_decrypt(&a, &key).unwrap(), msg);
        assert_eq!(sym_decrypt(&b, &key).unwrap(), msg);
    }

    #[test]
    fn wrong_key_or_truncation_fails() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let key = MasterKey::random(&mut rng);
        let ct = sym_encrypt(&[1u8; 256], &key, &mut rng);
        assert_eq!(sym_decrypt(&ct[..ct.len() - 1], &key), Err(CryptoError::Padding));
        assert_eq!(sym_decrypt(&ct[..16], &key), Err(CryptoError::Padding));
        // A wrong key yields valid padding with probability ~1/256 per trial,
        // so count failures across many keys instead of asserting one.
        let failures = (0..64)
            .filter(|_| sym_decrypt(&ct, &MasterKey::random(&mut rng)).is_err())
            .count();
        assert!(failures >= 60, "only {failures}/64 wrong keys rejected");
    }
}
