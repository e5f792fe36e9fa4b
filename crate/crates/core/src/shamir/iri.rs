use num_bigint::BigUint;

use super::{FieldSpec, ShamirError};

/// Identity restoration information held by one storage server: a shared
/// `x` and one `y` per escrow polynomial.
///
/// Wire layout: `x (1 byte) ‖ y_1 ‖ … ‖ y_n`, each `y` big-endian and
/// zero-padded to `b` bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Iri {
    pub x: u8,
    pub ys: Vec<BigUint>,
}

impl Iri {
    pub const fn packed_len(n: usize, b: usize) -> usize {
        1 + n * b
    }

    pub fn pack(&self, b: usize) -> Result<Vec<u8>, ShamirError> {
        let mut out = Vec::with_capacity(Self::packed_len(self.ys.len(), b));
        out.push(self.x);
        for y in &self.ys {
            out.extend(FieldSpec::encode(y, b).ok_or(ShamirError::ModulusTooWide { b })?);
        }
        Ok(out)
    }

    pub fn unpack(bytes: &[u8], n: usize, b: usize) -> Result<Self, ShamirError> {
        let expected = Self::packed_len(n, b);
        if bytes.len() != expected || b == 0 {
            return Err(ShamirError::MalformedIri { expected, actual: bytes.len() });
        }
        if bytes[0] == 0 {
            return Err(ShamirError::InvalidX);
        }
        Ok(Self {
            x: bytes[0],
            ys: bytes[1..].chunks_exact(b).map(BigUint::from_bytes_be).collect(),
        })
    }
}
