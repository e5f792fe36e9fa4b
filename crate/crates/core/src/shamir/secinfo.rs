use std::collections::HashSet;

use num_bigint::BigUint;
use num_traits::Zero;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::field::{evaluate_polynomial, lagrange_basis};
use super::{sample_x_coordinates, FieldSpec, Iri, ShamirError};

/// How the shared x-coordinates of the escrow records are chosen.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum XMode {
    /// `1, 2, …, n1`.
    #[default]
    Sequential,
    /// Distinct random one-byte values.
    Random,
}

/// Shape of the escrow split: `n` polynomials of `t1` coefficients of `b`
/// bytes each, evaluated at `n1` points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EscrowLayout {
    pub t1: usize,
    pub n1: usize,
    pub n: usize,
    pub b: usize,
    #[serde(default)]
    pub x_mode: XMode,
}

impl Default for EscrowLayout {
    fn default() -> Self {
        Self { t1: 3, n1: 5, n: 20, b: 5, x_mode: XMode::Sequential }
    }
}

impl EscrowLayout {
    pub fn secinfo_len(&self) -> usize {
        self.n * self.t1 * self.b
    }

    pub fn iri_len(&self) -> usize {
        Iri::packed_len(self.n, self.b)
    }

    pub fn validate(&self) -> Result<(), ShamirError> {
        if self.t1 == 0 || self.t1 > self.n1 || self.n1 > 255 {
            return Err(ShamirError::InvalidThreshold { t: self.t1, n: self.n1 });
        }
        if self.n == 0 || self.b == 0 {
            return Err(ShamirError::SecInfoLength { expected: 1, actual: 0 });
        }
        Ok(())
    }

    pub fn x_coordinates<R: Rng + ?Sized>(
        &self,
        field: &FieldSpec,
        rng: &mut R,
    ) -> Result<Vec<u8>, ShamirError> {
        match self.x_mode {
            XMode::Sequential => {
                if self.n1 as u64 > field.max_x() {
                    return Err(ShamirError::TooManyShares { requested: self.n1 });
                }
                Ok((1..=self.n1 as u8).collect())
            }
            XMode::Random => sample_x_coordinates(self.n1, field, rng),
        }
    }
}

/// The escrowed identity blob, exactly `n·t1·b` bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecInfo(Vec<u8>);

impl SecInfo {
    pub fn new(bytes: Vec<u8>, layout: &EscrowLayout) -> Result<Self, ShamirError> {
        let expected = layout.secinfo_len();
        if bytes.len() != expected {
            return Err(ShamirError::SecInfoLength { expected, actual: bytes.len() });
        }
        Ok(Self(bytes))
    }

    /// Right-pads `ciphertext` with zeros to the layout length.
    pub fn zero_expand(ciphertext: &[u8], layout: &EscrowLayout) -> Result<Self, ShamirError> {
        let expected = layout.secinfo_len();
        if ciphertext.len() > expected {
            return Err(ShamirError::SecInfoLength { expected, actual: ciphertext.len() });
        }
        let mut bytes = ciphertext.to_vec();
        bytes.resize(expected, 0);
        Ok(Self(bytes))
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.0
    }

    /// Index of the first `b`-byte chunk that is not below the modulus.
    pub fn first_overflow(&self, b: usize, field: &FieldSpec) -> Option<usize> {
        self.0
            .chunks_exact(b)
            .position(|c| !field.contains(&BigUint::from_bytes_be(c)))
    }
}

fn check_field_fits(field: &FieldSpec, b: usize) -> Result<(), ShamirError> {
    if field.element_width() > b {
        return Err(ShamirError::ModulusTooWide { b });
    }
    Ok(())
}

/// Cuts `secinfo` into `n` polynomials of `t1` ordered coefficients and
/// evaluates every polynomial at each of `xs`, one [`Iri`] per x.
pub fn split_secinfo(
    secinfo: &SecInfo,
    layout: &EscrowLayout,
    field: &FieldSpec,
    xs: &[u8],
) -> Result<Vec<Iri>, ShamirError> {
    layout.validate()?;
    check_field_fits(field, layout.b)?;
    let expected = layout.secinfo_len();
    if secinfo.0.len() != expected {
        return Err(ShamirError::SecInfoLength { expected, actual: secinfo.0.len() });
    }
    if xs.len() != layout.n1 {
        return Err(ShamirError::InvalidThreshold { t: layout.t1, n: xs.len() });
    }
    let mut seen = HashSet::new();
    for &x in xs {
        if x == 0 || u64::from(x) > field.max_x() {
            return Err(ShamirError::InvalidX);
        }
        if !seen.insert(x) {
            return Err(ShamirError::DuplicateX(x.into()));
        }
    }

    let coeffs: Vec<BigUint> = secinfo.0.chunks_exact(layout.b).map(BigUint::from_bytes_be).collect();
    if let Some(index) = coeffs.iter().position(|c| !field.contains(c)) {
        return Err(ShamirError::ChunkOverflow { index });
    }

    Ok(xs
        .iter()
        .map(|&x| {
            let xb = BigUint::from(x);
            Iri {
                x,
                ys: coeffs
                    .chunks_exact(layout.t1)
                    .map(|poly| evaluate_polynomial(poly, &xb, field))
                    .collect(),
            }
        })
        .collect())
}

/// Interpolates every escrow polynomial from the first `t1` records and
/// splices their coefficients back into the blob.
///
/// With fewer than `t1` records the interpolation still runs (the missing
/// high coefficients come out as zero) but the result is not the escrowed
/// blob.
pub fn reconstruct_secinfo(
    iris: &[Iri],
    layout: &EscrowLayout,
    field: &FieldSpec,
) -> Result<SecInfo, ShamirError> {
    layout.validate()?;
    check_field_fits(field, layout.b)?;
    if iris.is_empty() {
        return Err(ShamirError::InsufficientShares { need: layout.t1, got: 0 });
    }
    for iri in iris {
        if iri.ys.len() != layout.n {
            return Err(ShamirError::MalformedIri { expected: layout.n, actual: iri.ys.len() });
        }
        if iri.ys.iter().any(|y| !field.contains(y)) {
            return Err(ShamirError::OutOfField);
        }
    }
    let used = &iris[..iris.len().min(layout.t1)];
    let xs: Vec<BigUint> = used.iter().map(|i| BigUint::from(i.x)).collect();
    let basis = lagrange_basis(&xs, field)?;

    let mut out = Vec::with_capacity(layout.secinfo_len());
    for j in 0..layout.n {
        for k in 0..layout.t1 {
            let coeff = used.iter().zip(&basis).fold(BigUint::zero(), |acc, (iri, b)| match b.get(k) {
                Some(bk) => field.add(&acc, &field.mul(&iri.ys[j], bk)),
                None => acc,
            });
            out.extend(FieldSpec::encode(&coeff, layout.b).expect("field fits b bytes"));
        }
    }
    SecInfo::new(out, layout)
}
