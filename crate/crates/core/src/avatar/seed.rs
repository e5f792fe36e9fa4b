use std::fmt;

use crate::crypto::hash;

use super::AvatarError;

/// 32 digits, eight per slot of the default library.
pub const DEFAULT_DAS_LEN: usize = 32;

/// Digital avatar seed: a string of decimal digits.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Seed(String);

impl Seed {
    pub fn new(digits: impl Into<String>) -> Result<Self, AvatarError> {
        let s = digits.into();
        if !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(AvatarError::NonDigitSeed);
        }
        Ok(Self(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Debug for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Seed({})", self.0)
    }
}

/// Deterministic stand-in for a fuzzy extractor: hashes `m3 ‖ counter`
/// (counter as u32 big-endian, from 0) and maps each digest byte to
/// `byte mod 10` until `length` digits exist, then right-pads with '0' up
/// to a multiple of `k`.
///
/// Not noise tolerant: any change to `m3` changes the seed.
pub fn derive_das(m3: &[u8], length: usize, k: usize) -> Seed {
    assert!(k > 0, "slot count must be positive");
    let mut digits = String::with_capacity(length + k);
    let mut counter: u32 = 0;
    let mut input = Vec::with_capacity(m3.len() + 4);
    while digits.len() < length {
        input.clear();
        input.extend_from_slice(m3);
        input.extend_from_slice(&counter.to_be_bytes());
        for b in hash(&input).as_bytes() {
            if digits.len() == length {
                break;
            }
            digits.push(char::from(b'0' + b % 10));
        }
        counter += 1;
    }
    while !digits.len().is_multiple_of(k) || digits.is_empty() {
        digits.push('0');
    }
    Seed(digits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_sensitive() {
        let face = vec![3u8; 30 * 1024];
        let a = derive_das(&face, 32, 4);
        assert_eq!(a, derive_das(&face, 32, 4));
        assert_eq!(a.len(), 32);
        let mut other = face.clone();
        other[100] ^= 1;
        assert_ne!(a, derive_das(&other, 32, 4));
    }

    #[test]
    fn first_digits_follow_the_digest() {
        // oracle: first digest byte of hash(m3 ‖ 0u32) mod 10
        let m3 = b"face";
        let d = hash(&[m3.as_slice(), &[0, 0, 0, 0]].concat());
        let expected: String = d.as_bytes()[..8].iter().map(|b| char::from(b'0' + b % 10)).collect();
        assert_eq!(derive_das(m3, 8, 4).as_str(), expected);
    }

    #[test]
    fn pads_to_multiple_of_k() {
        let s = derive_das(b"x", 10, 4);
        assert_eq!(s.len(), 12);
        assert!(s.as_str().ends_with("00"));
        assert_eq!(&s.as_str()[..10], derive_das(b"x", 10, 1).as_str());
        assert_eq!(derive_das(b"x", 45, 1).len(), 45);
    }

    #[test]
    fn rejects_non_digits() {
        assert_eq!(Seed::new("12a4"), Err(AvatarError::NonDigitSeed));
        assert!(Seed::new("0123").is_ok());
    }
}
