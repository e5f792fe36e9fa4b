use std::fmt;

use hkdf::Hkdf;
use hmac::{Hmac, Mac};
use k256::ecdsa::signature::hazmat::{PrehashSigner, PrehashVerifier};
use k256::ecdsa::{Signature, SigningKey, VerifyingKey};
use k256::elliptic_curve::sec1::ToEncodedPoint;
use k256::{PublicKey, SecretKey};
use num_bigint::BigUint;
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};
use sha2::Sha256;

use super::sym::{sym_decrypt_raw, sym_encrypt_with_iv};
use super::{hash, CryptoError, BLOCK_LEN};

pub const PUBLIC_KEY_LEN: usize = 33;
pub const SIGNATURE_LEN: usize = 64;
const TAG_LEN: usize = 32;

/// Bytes added by [`ec_encrypt`] on top of the padded symmetric body:
/// ephemeral point, IV and tag.
pub const EC_OVERHEAD: usize = PUBLIC_KEY_LEN + BLOCK_LEN + TAG_LEN;

/// Curve parameters published at system setup (secp256k1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicParams {
    pub p: BigUint,
    pub a: BigUint,
    pub b: BigUint,
    pub g: PublicKeyBytes,
    pub n: BigUint,
}

impl PublicParams {
    pub fn secp256k1() -> Self {
        let hexnum = |s: &str| BigUint::parse_bytes(s.as_bytes(), 16).expect("static hex");
        let g = PublicKey::from_secret_scalar(&k256::NonZeroScalar::new(k256::Scalar::ONE).unwrap());
        Self {
            p: hexnum("FFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEFFFFFC2F"),
            a: BigUint::from(0u32),
            b: BigUint::from(7u32),
            g: PublicKeyBytes::from_public(&g),
            n: hexnum("FFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141"),
        }
    }

    /// Checks that G lies on y² = x³ + ax + b over F_p and that n·G is the
    /// identity, i.e. (n−1)·G = −G.
    pub fn validate(&self) -> bool {
        let Ok(g) = PublicKey::from_sec1_bytes(self.g.as_bytes()) else {
            return false;
        };
        let enc = g.to_encoded_point(false);
        let (Some(x), Some(y)) = (enc.x(), enc.y()) else {
            return false;
        };
        let x = BigUint::from_bytes_be(x);
        let y = BigUint::from_bytes_be(y);
        let lhs = (&y * &y) % &self.p;
        let rhs = (&x * &x * &x + &self.a * &x + &self.b) % &self.p;
        if lhs != rhs {
            return false;
        }

        let n_minus_one = &self.n - 1u32;
        let mut be = n_minus_one.to_bytes_be();
        if be.len() > 32 {
            return false;
        }
        let mut buf = vec![0u8; 32 - be.len()];
        buf.append(&mut be);
        let Some(scalar) = Option::<k256::Scalar>::from(
            <k256::Scalar as k256::elliptic_curve::PrimeField>::from_repr(
                *k256::FieldBytes::from_slice(&buf),
            ),
        ) else {
            return false;
        };
        let gp = g.to_projective();
        gp * scalar == -gp
    }
}

/// Compressed SEC1 encoding of a curve point.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PublicKeyBytes([u8; PUBLIC_KEY_LEN]);

impl PublicKeyBytes {
    fn from_public(pk: &PublicKey) -> Self {
        let enc = pk.to_encoded_point(true);
        Self(enc.as_bytes().try_into().expect("compressed point is 33 bytes"))
    }

    pub fn from_slice(bytes: &[u8]) -> Result<Self, CryptoError> {
        let arr: [u8; PUBLIC_KEY_LEN] = bytes.try_into().map_err(|_| CryptoError::BadLength {
            expected: PUBLIC_KEY_LEN,
            actual: bytes.len(),
        })?;
        PublicKey::from_sec1_bytes(&arr).map_err(|_| CryptoError::InvalidPublicKey)?;
        Ok(Self(arr))
    }

    /// Accepts any 33 bytes without checking that they decode to a point.
    pub(crate) fn from_raw(bytes: [u8; PUBLIC_KEY_LEN]) -> Self {
        Self(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; PUBLIC_KEY_LEN] {
        &self.0
    }

    fn to_point(self) -> Result<PublicKey, CryptoError> {
        PublicKey::from_sec1_bytes(&self.0).map_err(|_| CryptoError::InvalidPublicKey)
    }
}

impl fmt::Debug for PublicKeyBytes {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PublicKey({})", hex::encode(self.0))
    }
}

impl Serialize for PublicKeyBytes {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(self.0))
    }
}

impl<'de> Deserialize<'de> for PublicKeyBytes {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let s = String::deserialize(d)?;
        let v = hex::decode(s).map_err(D::Error::custom)?;
        Self::from_slice(&v).map_err(D::Error::custom)
    }
}

/// Fixed-width `r ‖ s` ECDSA signature, big-endian.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct SignatureBytes(pub [u8; SIGNATURE_LEN]);

impl SignatureBytes {
    pub fn from_slice(bytes: &[u8]) -> Result<Self, CryptoError> {
        bytes
            .try_into()
            .map(Self)
            .map_err(|_| CryptoError::BadLength { expected: SIGNATURE_LEN, actual: bytes.len() })
    }

    pub fn as_bytes(&self) -> &[u8; SIGNATURE_LEN] {
        &self.0
    }
}

impl fmt::Debug for SignatureBytes {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Signature({}..)", hex::encode(&self.0[..8]))
    }
}

/// An entity's secp256k1 key pair.
#[derive(Clone)]
pub struct KeyPair {
    secret: SecretKey,
    public: PublicKeyBytes,
}

impl KeyPair {
    pub fn generate<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        Self::from_secret(SecretKey::random(rng))
    }

    fn from_secret(secret: SecretKey) -> Self {
        let public = PublicKeyBytes::from_public(&secret.public_key());
        Self { secret, public }
    }

    pub fn from_secret_bytes(bytes: &[u8]) -> Result<Self, CryptoError> {
        SecretKey::from_slice(bytes)
            .map(Self::from_secret)
            .map_err(|_| CryptoError::InvalidSecretKey)
    }

    pub fn secret_bytes(&self) -> [u8; 32] {
        self.secret.to_bytes().into()
    }

    pub fn public(&self) -> PublicKeyBytes {
        self.public
    }
}

impl fmt::Debug for KeyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KeyPair").field("public", &self.public).finish_non_exhaustive()
    }
}

/// Asymmetric ciphertext together with a signature over it (sign-after-encrypt).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedCiphertext {
    pub ciphertext: Vec<u8>,
    pub signature: SignatureBytes,
}

impl SignedCiphertext {
    pub fn seal<R: RngCore + CryptoRng>(
        plaintext: &[u8],
        recipient: &PublicKeyBytes,
        signer: &KeyPair,
        rng: &mut R,
    ) -> Result<Self, CryptoError> {
        let ciphertext = ec_encrypt(plaintext, recipient, rng)?;
        let signature = sign(&ciphertext, signer);
        Ok(Self { ciphertext, signature })
    }

    pub fn verify(&self, signer: &PublicKeyBytes) -> bool {
        verify(&self.ciphertext, &self.signature, signer)
    }
}

struct WrapKeys {
    enc: [u8; 16],
    mac: [u8; 32],
}

fn derive_wrap_keys(shared_x: &[u8], ephemeral: &[u8]) -> WrapKeys {
    let hk = Hkdf::<Sha256>::new(Some(ephemeral), shared_x);
    let mut okm = [0u8; 48];
    hk.expand(b"nssia-ecies", &mut okm).expect("48 bytes is a valid HKDF length");
    let mut enc = [0u8; 16];
    let mut mac = [0u8; 32];
    enc.copy_from_slice(&okm[..16]);
    mac.copy_from_slice(&okm[16..]);
    WrapKeys { enc, mac }
}

fn tag(mac_key: &[u8; 32], ephemeral: &[u8], body: &[u8]) -> Hmac<Sha256> {
    let mut mac = <Hmac<Sha256> as Mac>::new_from_slice(mac_key).expect("any key length");
    mac.update(ephemeral);
    mac.update(body);
    mac
}

/// Integrated encryption to `pk`: `ephemeral point ‖ IV ‖ AES-CBC body ‖ HMAC tag`.
pub fn ec_encrypt<R: RngCore + CryptoRng>(
    plaintext: &[u8],
    pk: &PublicKeyBytes,
    rng: &mut R,
) -> Result<Vec<u8>, CryptoError> {
    let recipient = pk.to_point()?;
    let eph = SecretKey::random(rng);
    let eph_pub = PublicKeyBytes::from_public(&eph.public_key());
    let shared = k256::ecdh::diffie_hellman(eph.to_nonzero_scalar(), recipient.as_affine());
    let keys = derive_wrap_keys(shared.raw_secret_bytes(), eph_pub.as_bytes());

    let mut iv = [0u8; BLOCK_LEN];
    rng.fill_bytes(&mut iv);
    let body = sym_encrypt_with_iv(plaintext, &keys.enc, &iv);
    let t = tag(&keys.mac, eph_pub.as_bytes(), &body).finalize().into_bytes();

    let mut out = Vec::with_capacity(PUBLIC_KEY_LEN + body.len() + TAG_LEN);
    out.extend_from_slice(eph_pub.as_bytes());
    out.extend_from_slice(&body);
    out.extend_from_slice(&t);
    Ok(out)
}

pub fn ec_decrypt(ciphertext: &[u8], keys: &KeyPair) -> Result<Vec<u8>, CryptoError> {
    if ciphertext.len() < PUBLIC_KEY_LEN + 2 * BLOCK_LEN + TAG_LEN {
        return Err(CryptoError::TagMismatch);
    }
    let (eph_bytes, rest) = ciphertext.split_at(PUBLIC_KEY_LEN);
    let (body, t) = rest.split_at(rest.len() - TAG_LEN);
    let eph = PublicKey::from_sec1_bytes(eph_bytes).map_err(|_| CryptoError::TagMismatch)?;
    let shared = k256::ecdh::diffie_hellman(keys.secret.to_nonzero_scalar(), eph.as_affine());
    let wrap = derive_wrap_keys(shared.raw_secret_bytes(), eph_bytes);
    tag(&wrap.mac, eph_bytes, body)
        .verify_slice(t)
        .map_err(|_| CryptoError::TagMismatch)?;
    sym_decrypt_raw(body, &wrap.enc).map_err(|_| CryptoError::TagMismatch)
}

/// ECDSA over the 20-byte protocol digest of `data`.
pub fn sign(data: &[u8], keys: &KeyPair) -> SignatureBytes {
    let digest = hash(data);
    let sk = SigningKey::from(&keys.secret);
    let sig: Signature = sk
        .sign_prehash(digest.as_bytes())
        .expect("20-byte prehash is accepted for a 256-bit curve");
    SignatureBytes(sig.to_bytes().into())
}

pub fn verify(data: &[u8], signature: &SignatureBytes, pk: &PublicKeyBytes) -> bool {
    let Ok(point) = pk.to_point() else {
        return false;
    };
    let Ok(sig) = Signature::from_slice(signature.as_bytes()) else {
        return false;
    };
    let digest = hash(data);
    VerifyingKey::from(&point).verify_prehash(digest.as_bytes(), &sig).is_ok()
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    use super::*;

    fn rng() -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(0xec)
    }

    #[test]
    fn published_params_are_consistent() {
        let pp = PublicParams::secp256k1();
        assert!(pp.validate());
        assert_eq!(
            hex::encode(pp.g.as_bytes()),
            "0279be667ef9dcbbac55a06295ce870b07029bfcdb2dce28d959f2815b16f81798"
        );
        let mut bad = pp.clone();
        bad.b = BigUint::from(5u32);
        assert!(!bad.validate());
        let mut bad_order = pp;
        bad_order.n -= 2u32;
        assert!(!bad_order.validate());
    }

    #[test]
    fn subkey_sized_encryption_binds_to_recipient() {
        let mut rng = rng();
        let dag = KeyPair::generate(&mut rng);
        let other = KeyPair::generate(&mut rng);
        let subkey = [0xabu8; 17];
        let ct = ec_encrypt(&subkey, &dag.public(), &mut rng).unwrap();
        assert_eq!(ct.len(), EC_OVERHEAD + 32);
        assert_eq!(ec_decrypt(&ct, &dag).unwrap(), subkey);
        assert_eq!(ec_decrypt(&ct, &other), Err(CryptoError::TagMismatch));
    }

    #[test]
    fn face_sized_round_trip_and_corruption() {
        let mut rng = rng();
        let kp = KeyPair::generate(&mut rng);
        let mut blob = vec![0u8; 30 * 1024];
        rng.fill_bytes(&mut blob);
        let mut ct = ec_encrypt(&blob, &kp.public(), &mut rng).unwrap();
        assert_eq!(ec_decrypt(&ct, &kp).unwrap(), blob);
        ct[100] ^= 1;
        assert_eq!(ec_decrypt(&ct, &kp), Err(CryptoError::TagMismatch));
        assert_eq!(ec_decrypt(&ct[..20], &kp), Err(CryptoError::TagMismatch));
    }

    #[test]
    fn signatures_bind_data_and_key() {
        let mut rng = rng();
        let kp = KeyPair::generate(&mut rng);
        let other = KeyPair::generate(&mut rng);
        let mut da = vec![0u8; 1024];
        rng.fill_bytes(&mut da);
        let sig = sign(&da, &kp);
        assert!(verify(&da, &sig, &kp.public()));
        assert!(!verify(&da, &sig, &other.public()));
        da[512] ^= 0x80;
        assert!(!verify(&da, &sig, &kp.public()));
    }

    #[test]
    fn key_encodings() {
        let mut rng = rng();
        let kp = KeyPair::generate(&mut rng);
        let restored = KeyPair::from_secret_bytes(&kp.secret_bytes()).unwrap();
        assert_eq!(restored.public(), kp.public());
        assert!(matches!(kp.public().as_bytes()[0], 2 | 3));
        assert!(PublicKeyBytes::from_slice(&[0u8; 33]).is_err());
        assert!(KeyPair::from_secret_bytes(&[0u8; 32]).is_err());
    }

    #[test]
    fn signed_ciphertext() {
        let mut rng = rng();
        let bc = KeyPair::generate(&mut rng);
        let dag = KeyPair::generate(&mut rng);
        let m1 = SignedCiphertext::seal(b"face", &dag.public(), &bc, &mut rng).unwrap();
        assert!(m1.verify(&bc.public()));
        assert!(!m1.verify(&dag.public()));
        assert_eq!(ec_decrypt(&m1.ciphertext, &dag).unwrap(), b"face");
    }
}
