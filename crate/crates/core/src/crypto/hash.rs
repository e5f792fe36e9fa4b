use std::fmt;

use serde::{Deserialize, Serialize};
use sha1::Sha1;
use sha2::{Digest, Sha256};

pub const DIGEST_LEN: usize = 20;

/// 20-byte digest produced by [`hash`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Digest20(#[serde(with = "hex_digest")] [u8; DIGEST_LEN]);

impl Digest20 {
    pub const fn from_bytes(bytes: [u8; DIGEST_LEN]) -> Self {
        Self(bytes)
    }

    pub fn from_slice(bytes: &[u8]) -> Option<Self> {
        <[u8; DIGEST_LEN]>::try_from(bytes).ok().map(Self)
    }

    pub fn as_bytes(&self) -> &[u8; DIGEST_LEN] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Option<Self> {
        hex::decode(s).ok().and_then(|b| Self::from_slice(&b))
    }
}

impl AsRef<[u8]> for Digest20 {
    fn as_ref(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Debug for Digest20 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest20({})", self.to_hex())
    }
}

impl fmt::Display for Digest20 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// The protocol hash: SHA-1, 20-byte output.
pub fn hash(data: &[u8]) -> Digest20 {
    Digest20(Sha1::digest(data).into())
}

/// Selectable digest profile.
///
/// The protocol itself runs on [`HashProfile::Sha1`] because every on-chain
/// and escrow byte budget is sized for 20-byte digests. `Sha256` is offered
/// for deployments that accept 32-byte digests and the larger records that
/// follow from them.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum HashProfile {
    #[default]
    Sha1,
    Sha256,
}

impl HashProfile {
    pub fn output_len(self) -> usize {
        match self {
            HashProfile::Sha1 => DIGEST_LEN,
            HashProfile::Sha256 => 32,
        }
    }

    pub fn digest(self, data: &[u8]) -> Vec<u8> {
        match self {
            HashProfile::Sha1 => Sha1::digest(data).to_vec(),
            HashProfile::Sha256 => Sha256::digest(data).to_vec(),
        }
    }
}

mod hex_digest {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    use super::DIGEST_LEN;

    pub fn serialize<S: Serializer>(bytes: &[u8; DIGEST_LEN], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[u8; DIGEST_LEN], D::Error> {
        let s = String::deserialize(d)?;
        let v = hex::decode(&s).map_err(D::Error::custom)?;
        v.try_into()
            .map_err(|_| D::Error::custom("digest must be 20 bytes"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // FIPS 180-1 / RFC 3174 test vectors.
    #[test]
    fn sha1_known_vectors() {
        assert_eq!(hash(b"").to_hex(), "da39a3ee5e6b4b0d3255bfef95601890afd80709");
        assert_eq!(hash(b"abc").to_hex(), "a9993e364706816aba3e25717850c26c9cd0d89d");
        assert_eq!(
            hash(b"abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq").to_hex(),
            "84983e441c3bd26ebaae4aa1f95129e5e54670f1"
        );
        let million_a = vec![b'a'; 1_000_000];
        assert_eq!(hash(&million_a).to_hex(), "34aa973cd4c4daa4f61eeb2bdbad27316534016f");
    }

    #[test]
    fn digest_length_across_sizes() {
        for len in [0usize, 1, 256, 25 * 1024, 30 * 1024] {
            let data = vec![0x5au8; len];
            assert_eq!(hash(&data).as_bytes().len(), DIGEST_LEN);
            assert_eq!(hash(&data), hash(&data));
        }
    }

    #[test]
    fn profiles() {
        assert_eq!(HashProfile::default().digest(b"abc"), hash(b"abc").as_bytes().to_vec());
        assert_eq!(HashProfile::Sha256.digest(b"abc").len(), 32);
        assert_eq!(
            hex::encode(HashProfile::Sha256.digest(b"abc")),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn hex_round_trip() {
        let d = hash(b"x");
        assert_eq!(Digest20::from_hex(&d.to_hex()), Some(d));
        assert_eq!(Digest20::from_hex("abcd"), None);
    }
}
