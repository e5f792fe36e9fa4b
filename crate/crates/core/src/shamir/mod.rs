//! Shamir threshold sharing over prime fields.
//!
//! Two uses share this machinery:
//!
//! * the master key is split into one subkey per storage server and one per
//!   regulator ([`split_secret`], [`reconstruct_at_zero`]) over a field just
//!   above 2^128, so each subkey `y` serializes to 17 bytes;
//! * the escrowed identity blob is cut into `n·t` coefficients of `b` bytes,
//!   packed into `n` polynomials and evaluated at one shared `x` per storage
//!   server ([`split_secinfo`], [`reconstruct_secinfo`]), producing one
//!   fixed-layout [`Iri`] record per server.
//!
//! All arithmetic, including Lagrange interpolation, stays in the prime
//! field. Randomness is always injected by the caller.

mod field;
mod iri;
mod secinfo;
mod share;

pub use field::{
    evaluate_polynomial, interpolate_coefficients, is_probable_prime, largest_prime_below,
    smallest_prime_above, FieldSpec, PRIMALITY_ROUNDS,
};
pub use iri::Iri;
pub use secinfo::{reconstruct_secinfo, split_secinfo, EscrowLayout, SecInfo, XMode};
pub use share::{
    reconstruct_at_zero, reconstruct_strict, sample_x_coordinates, split_secret, split_secret_at,
    split_with_polynomial, ShamirShare,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ShamirError {
    #[error("invalid threshold: t = {t}, n = {n}")]
    InvalidThreshold { t: usize, n: usize },
    #[error("duplicate x-coordinate {0}")]
    DuplicateX(u64),
    #[error("x-coordinate must be nonzero and below the modulus")]
    InvalidX,
    #[error("secret or share value is not a field element")]
    OutOfField,
    #[error("cannot draw {requested} distinct one-byte x-coordinates from this field")]
    TooManyShares { requested: usize },
    #[error("need {need} shares, got {got}")]
    InsufficientShares { need: usize, got: usize },
    #[error("share subsets reconstruct different secrets")]
    Inconsistent,
    #[error("chunk {index} is not below the escrow modulus")]
    ChunkOverflow { index: usize },
    #[error("malformed IRI: expected {expected} bytes/values, got {actual}")]
    MalformedIri { expected: usize, actual: usize },
    #[error("secinfo must be {expected} bytes, got {actual}")]
    SecInfoLength { expected: usize, actual: usize },
    #[error("malformed share encoding")]
    MalformedShare,
    #[error("modulus is not prime")]
    NotPrime,
    #[error("modulus does not fit the {b}-byte value width")]
    ModulusTooWide { b: usize },
}
