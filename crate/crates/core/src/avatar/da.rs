use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::crypto::{hash, sign, verify, Digest20, KeyPair, PublicKeyBytes, SignatureBytes, SIGNATURE_LEN};

use super::{AvatarError, CodeModuleLibrary, Seed};

pub const DA_MAGIC: &[u8; 8] = b"NSSIA-DA";
pub const DEFAULT_MAX_FAILURES: u32 = 3;

/// Template index chosen for each slot: `Decimal(substring_i) mod num[i]`.
pub fn select_indices(das: &str, lib: &CodeModuleLibrary) -> Result<Vec<usize>, AvatarError> {
    let seed = Seed::new(das)?;
    let k = lib.k();
    if seed.is_empty() || seed.len() % k != 0 {
        return Err(AvatarError::SeedLength { len: seed.len(), k });
    }
    let len = seed.len() / k;
    Ok((0..k)
        .map(|i| {
            let sub = &seed.as_str()[i * len..(i + 1) * len];
            let value = BigUint::parse_bytes(sub.as_bytes(), 10).expect("digits parse");
            (value % lib.num(i)).to_usize().expect("below num[i]")
        })
        .collect())
}

/// Assembles the unsigned, unbound avatar selected by `das`.
pub fn generate_da(das: &str, lib: &CodeModuleLibrary) -> Result<DigitalAvatar, AvatarError> {
    let indices = select_indices(das, lib)?;
    Ok(DigitalAvatar {
        modules: indices
            .iter()
            .enumerate()
            .map(|(slot, &i)| lib.template(slot, i).to_vec())
            .collect(),
        bound_face: None,
        signature: None,
    })
}

/// Fraction of differing bits, or `None` when lengths differ.
pub fn face_distance(bound: &[u8], live: &[u8]) -> Option<f64> {
    if bound.len() != live.len() || bound.is_empty() {
        return None;
    }
    let diff: u32 = bound.iter().zip(live).map(|(a, b)| (a ^ b).count_ones()).sum();
    Some(f64::from(diff) / (bound.len() * 8) as f64)
}

pub fn face_matches(bound: &[u8], live: &[u8], tolerance: f64) -> bool {
    face_distance(bound, live).is_some_and(|d| d <= tolerance)
}

/// Selected code modules plus the face the avatar is bound to and the
/// generator's signature.
///
/// File layout: `"NSSIA-DA" ‖ k:1 ‖ (len:2 BE ‖ blob)×k ‖ face_len:4 BE ‖
/// face ‖ S:64`. The DAI covers `k` through the last blob; the signature
/// covers everything before `S`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitalAvatar {
    modules: Vec<Vec<u8>>,
    bound_face: Option<Vec<u8>>,
    signature: Option<SignatureBytes>,
}

impl DigitalAvatar {
    pub fn modules(&self) -> &[Vec<u8>] {
        &self.modules
    }

    pub fn bound_face(&self) -> Option<&[u8]> {
        self.bound_face.as_deref()
    }

    pub fn signature(&self) -> Option<&SignatureBytes> {
        self.signature.as_ref()
    }

    fn module_region(&self) -> Vec<u8> {
        let mut out = vec![self.modules.len() as u8];
        for m in &self.modules {
            out.extend_from_slice(&(m.len() as u16).to_be_bytes());
            out.extend_from_slice(m);
        }
        out
    }

    /// Size of the concatenated module blobs.
    pub fn module_bytes(&self) -> usize {
        self.modules.iter().map(Vec::len).sum()
    }

    pub fn dai(&self) -> Digest20 {
        hash(&self.module_region())
    }

    pub fn bind_face(&mut self, face: Vec<u8>) {
        self.bound_face = Some(face);
        self.signature = None;
    }

    fn signed_region(&self) -> Vec<u8> {
        let face = self.bound_face.as_deref().unwrap_or(&[]);
        let mut out = DA_MAGIC.to_vec();
        out.extend(self.module_region());
        out.extend_from_slice(&(face.len() as u32).to_be_bytes());
        out.extend_from_slice(face);
        out
    }

    pub fn sign_with(&mut self, keys: &KeyPair) -> SignatureBytes {
        let s = sign(&self.signed_region(), keys);
        self.signature = Some(s);
        s
    }

    pub fn verify(&self, signer: &PublicKeyBytes) -> bool {
        self.signature
            .is_some_and(|s| verify(&self.signed_region(), &s, signer))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.signed_region();
        out.extend_from_slice(self.signature.map(|s| s.0).unwrap_or([0; SIGNATURE_LEN]).as_slice());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, AvatarError> {
        let rest = bytes.strip_prefix(DA_MAGIC.as_slice()).ok_or(AvatarError::Malformed("magic"))?;
        let (&k, mut rest) = rest.split_first().ok_or(AvatarError::Malformed("truncated"))?;
        let mut take = |n: usize, what: &'static str| -> Result<&[u8], AvatarError> {
            if rest.len() < n {
                return Err(AvatarError::Malformed(what));
            }
            let (a, b) = rest.split_at(n);
            rest = b;
            Ok(a)
        };
        let mut modules = Vec::with_capacity(k as usize);
        for _ in 0..k {
            let len = u16::from_be_bytes(take(2, "module length")?.try_into().unwrap()) as usize;
            modules.push(take(len, "module")?.to_vec());
        }
        let face_len = u32::from_be_bytes(take(4, "face length")?.try_into().unwrap()) as usize;
        let face = take(face_len, "face")?.to_vec();
        let sig: [u8; SIGNATURE_LEN] = take(SIGNATURE_LEN, "signature")?.try_into().unwrap();
        if !rest.is_empty() {
            return Err(AvatarError::Malformed("trailing bytes"));
        }
        Ok(Self {
            modules,
            bound_face: (face_len > 0).then_some(face),
            signature: (sig != [0; SIGNATURE_LEN]).then_some(SignatureBytes(sig)),
        })
    }

    /// Parses and verifies a serialized avatar; any parse failure counts as
    /// a failed verification.
    pub fn verify_serialized(bytes: &[u8], signer: &PublicKeyBytes) -> bool {
        Self::from_bytes(bytes).is_ok_and(|da| da.verify(signer))
    }
}

/// An avatar in use: tracks activation and consecutive failed challenges.
/// Once locked it stays locked.
#[derive(Debug, Clone)]
pub struct AvatarSession {
    avatar: DigitalAvatar,
    max_failures: u32,
    failures: u32,
    activated: bool,
    locked: bool,
}

impl AvatarSession {
    pub fn new(avatar: DigitalAvatar) -> Self {
        Self::with_max_failures(avatar, DEFAULT_MAX_FAILURES)
    }

    pub fn with_max_failures(avatar: DigitalAvatar, max_failures: u32) -> Self {
        Self { avatar, max_failures: max_failures.max(1), failures: 0, activated: false, locked: false }
    }

    pub fn avatar(&self) -> &DigitalAvatar {
        &self.avatar
    }

    pub fn is_locked(&self) -> bool {
        self.locked
    }

    pub fn is_activated(&self) -> bool {
        self.activated
    }

    /// Live-face check that unlocks use of the avatar. Always false once locked.
    pub fn activate(&mut self, live_face: &[u8], tolerance: f64) -> Result<bool, AvatarError> {
        let bound = self.avatar.bound_face().ok_or(AvatarError::Unbound)?;
        if self.locked {
            return Ok(false);
        }
        let ok = face_matches(bound, live_face, tolerance);
        self.activated |= ok;
        Ok(ok)
    }

    /// Dynamic re-verification. The `max_failures`-th consecutive failure
    /// locks the avatar; a success resets the counter.
    pub fn challenge(&mut self, live_face: &[u8], tolerance: f64) -> Result<bool, AvatarError> {
        if self.locked {
            return Err(AvatarError::Locked);
        }
        if !self.activated {
            return Err(AvatarError::NotActivated);
        }
        let bound = self.avatar.bound_face().ok_or(AvatarError::Unbound)?;
        if face_matches(bound, live_face, tolerance) {
            self.failures = 0;
            return Ok(true);
        }
        self.failures += 1;
        if self.failures >= self.max_failures {
            self.locked = true;
            self.activated = false;
        }
        Ok(false)
    }
}
