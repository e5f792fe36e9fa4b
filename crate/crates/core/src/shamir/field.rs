use std::sync::OnceLock;

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::ShamirError;

/// Miller–Rabin rounds used for every modulus check.
pub const PRIMALITY_ROUNDS: usize = 128;

const SMALL_PRIMES: [u32; 25] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
];

/// Miller–Rabin with `rounds` bases drawn from a fixed-seed stream, so the
/// verdict for a given `n` is reproducible.
pub fn is_probable_prime(n: &BigUint, rounds: usize) -> bool {
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    for p in SMALL_PRIMES {
        let p = BigUint::from(p);
        if *n == p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }

    let n_minus_one = n - 1u32;
    let s = n_minus_one.trailing_zeros().expect("n - 1 > 0");
    let d = &n_minus_one >> s;

    let mut rng = ChaCha20Rng::seed_from_u64(0x6d69_6c6c_6572);
    'witness: for _ in 0..rounds {
        let a = rng.gen_biguint_range(&two, &n_minus_one);
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == n_minus_one {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_one {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub fn smallest_prime_above(n: &BigUint) -> BigUint {
    let mut c = n + 1u32;
    while !is_probable_prime(&c, PRIMALITY_ROUNDS) {
        c += 1u32;
    }
    c
}

pub fn largest_prime_below(n: &BigUint) -> Option<BigUint> {
    let mut c = n.clone();
    while c > BigUint::from(2u32) {
        c -= 1u32;
        if is_probable_prime(&c, PRIMALITY_ROUNDS) {
            return Some(c);
        }
    }
    None
}

/// A prime modulus and the byte width needed to encode any residue.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldSpec {
    modulus: BigUint,
    element_width: usize,
}

impl FieldSpec {
    pub fn new(modulus: BigUint) -> Result<Self, ShamirError> {
        if !is_probable_prime(&modulus, PRIMALITY_ROUNDS) {
            return Err(ShamirError::NotPrime);
        }
        let element_width = (modulus.bits() as usize).div_ceil(8);
        Ok(Self { modulus, element_width })
    }

    pub fn from_u64(modulus: u64) -> Result<Self, ShamirError> {
        Self::new(BigUint::from(modulus))
    }

    /// Field for master-key subkeys: the smallest prime above 2^128.
    pub fn subkey() -> &'static FieldSpec {
        static FIELD: OnceLock<FieldSpec> = OnceLock::new();
        FIELD.get_or_init(|| {
            let p = smallest_prime_above(&(BigUint::one() << 128u32));
            FieldSpec { element_width: (p.bits() as usize).div_ceil(8), modulus: p }
        })
    }

    /// Field for escrow coefficients of `b` bytes: the largest prime below
    /// 2^(8b), so every share value also fits in `b` bytes.
    pub fn escrow(b: usize) -> Result<FieldSpec, ShamirError> {
        static DEFAULT: OnceLock<FieldSpec> = OnceLock::new();
        let build = |b: usize| -> Result<FieldSpec, ShamirError> {
            let p = largest_prime_below(&(BigUint::one() << (8 * b)))
                .ok_or(ShamirError::ModulusTooWide { b })?;
            Ok(FieldSpec { element_width: (p.bits() as usize).div_ceil(8), modulus: p })
        };
        if b == 5 {
            return Ok(DEFAULT.get_or_init(|| build(5).expect("2^40 has primes below it")).clone());
        }
        build(b)
    }

    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    pub fn element_width(&self) -> usize {
        self.element_width
    }

    pub fn contains(&self, v: &BigUint) -> bool {
        *v < self.modulus
    }

    /// Largest usable one-byte x-coordinate.
    pub(crate) fn max_x(&self) -> u64 {
        let cap = BigUint::from(255u32).min(&self.modulus - 1u32);
        cap.try_into().expect("at most 255")
    }

    pub fn add(&self, a: &BigUint, b: &BigUint) -> BigUint {
        (a + b) % &self.modulus
    }

    pub fn sub(&self, a: &BigUint, b: &BigUint) -> BigUint {
        ((a % &self.modulus) + &self.modulus - (b % &self.modulus)) % &self.modulus
    }

    pub fn mul(&self, a: &BigUint, b: &BigUint) -> BigUint {
        (a * b) % &self.modulus
    }

    /// Inverse by Fermat's little theorem. `a` must be nonzero mod p.
    pub fn inv(&self, a: &BigUint) -> BigUint {
        let a = a % &self.modulus;
        assert!(!a.is_zero(), "inverse of zero");
        a.modpow(&(&self.modulus - 2u32), &self.modulus)
    }

    pub fn random_element<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> BigUint {
        rng.gen_biguint_below(&self.modulus)
    }

    /// Big-endian encoding left-padded to `width` bytes. `None` if it does not fit.
    pub fn encode(v: &BigUint, width: usize) -> Option<Vec<u8>> {
        let be = if v.is_zero() { Vec::new() } else { v.to_bytes_be() };
        if be.len() > width {
            return None;
        }
        let mut out = vec![0u8; width - be.len()];
        out.extend_from_slice(&be);
        Some(out)
    }
}

/// Horner evaluation; `coeffs` are lowest degree first.
pub fn evaluate_polynomial(coeffs: &[BigUint], x: &BigUint, field: &FieldSpec) -> BigUint {
    coeffs
        .iter()
        .rev()
        .fold(BigUint::zero(), |acc, c| field.add(&field.mul(&acc, x), c))
}

/// Lagrange basis polynomials for `xs`, each as `xs.len()` coefficients
/// lowest degree first: `basis[i](xs[j]) = [i == j]`.
pub(crate) fn lagrange_basis(xs: &[BigUint], field: &FieldSpec) -> Result<Vec<Vec<BigUint>>, ShamirError> {
    for (i, a) in xs.iter().enumerate() {
        if !field.contains(a) {
            return Err(ShamirError::InvalidX);
        }
        if xs[..i].contains(a) {
            return Err(ShamirError::DuplicateX(a.try_into().unwrap_or(u64::MAX)));
        }
    }
    let m = xs.len();
    let mut basis = Vec::with_capacity(m);
    for (i, xi) in xs.iter().enumerate() {
        // numerator Π_{j≠i} (x − x_j), built up one linear factor at a time
        let mut num = vec![BigUint::one()];
        let mut denom = BigUint::one();
        for (j, xj) in xs.iter().enumerate() {
            if i == j {
                continue;
            }
            let neg_xj = field.sub(&BigUint::zero(), xj);
            let mut next = vec![BigUint::zero(); num.len() + 1];
            for (k, c) in num.iter().enumerate() {
                next[k + 1] = field.add(&next[k + 1], c);
                next[k] = field.add(&next[k], &field.mul(c, &neg_xj));
            }
            num = next;
            denom = field.mul(&denom, &field.sub(xi, xj));
        }
        let scale = field.inv(&denom);
        basis.push(num.iter().map(|c| field.mul(c, &scale)).collect());
    }
    debug_assert!(basis.iter().all(|b: &Vec<BigUint>| b.len() == m));
    Ok(basis)
}

/// Coefficients (lowest degree first) of the unique polynomial of degree
/// below `points.len()` passing through `points`.
pub fn interpolate_coefficients(
    points: &[(BigUint, BigUint)],
    field: &FieldSpec,
) -> Result<Vec<BigUint>, ShamirError> {
    let xs: Vec<BigUint> = points.iter().map(|(x, _)| x.clone()).collect();
    let basis = lagrange_basis(&xs, field)?;
    let mut coeffs = vec![BigUint::zero(); points.len()];
    for ((_, y), b) in points.iter().zip(&basis) {
        if !field.contains(y) {
            return Err(ShamirError::OutOfField);
        }
        for (c, bk) in coeffs.iter_mut().zip(b) {
            *c = field.add(c, &field.mul(y, bk));
        }
    }
    Ok(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn primality_small_numbers() {
        let primes: Vec<u64> = (0..200).filter(|&n| is_probable_prime(&big(n), 16)).collect();
        let sieve: Vec<u64> = (0..200u64)
            .filter(|&n| n >= 2 && (2..n).all(|d| n % d != 0))
            .collect();
        assert_eq!(primes, sieve);
        // Carmichael numbers fool Fermat but not Miller–Rabin.
        for c in [561u64, 1105, 1729, 2465, 2821, 6601, 8911] {
            assert!(!is_probable_prime(&big(c), PRIMALITY_ROUNDS));
        }
    }

    #[test]
    fn default_field_widths() {
        assert_eq!(FieldSpec::subkey().element_width(), 17);
        let escrow = FieldSpec::escrow(5).unwrap();
        assert_eq!(escrow.element_width(), 5);
        assert!(escrow.modulus() < &(BigUint::one() << 40u32));
    }

    #[test]
    fn rejects_composite_modulus() {
        assert_eq!(FieldSpec::from_u64(255), Err(ShamirError::NotPrime));
        assert!(FieldSpec::from_u64(251).is_ok());
    }

    #[test]
    fn arithmetic_is_closed() {
        let f = FieldSpec::from_u64(251).unwrap();
        for a in [0u64, 1, 2, 125, 250] {
            for b in [0u64, 1, 77, 250] {
                let (a, b) = (big(a), big(b));
                assert!(f.contains(&f.add(&a, &b)));
                assert!(f.contains(&f.sub(&a, &b)));
                assert!(f.contains(&f.mul(&a, &b)));
                assert_eq!(f.add(&f.sub(&a, &b), &b), a);
            }
        }
        for a in 1..251u64 {
            assert_eq!(f.mul(&big(a), &f.inv(&big(a))), big(1));
        }
    }

    #[test]
    fn interpolation_recovers_coefficients() {
        let f = FieldSpec::from_u64(251).unwrap();
        let coeffs = vec![big(42), big(7), big(200)];
        let pts: Vec<_> = [3u64, 9, 17]
            .iter()
            .map(|&x| (big(x), evaluate_polynomial(&coeffs, &big(x), &f)))
            .collect();
        assert_eq!(interpolate_coefficients(&pts, &f).unwrap(), coeffs);
    }

    #[test]
    fn encode_pads_and_rejects_overflow() {
        assert_eq!(FieldSpec::encode(&big(0), 3), Some(vec![0, 0, 0]));
        assert_eq!(FieldSpec::encode(&big(0x0102), 3), Some(vec![0, 1, 2]));
        assert_eq!(FieldSpec::encode(&big(0x01_0000), 2), None);
    }
}
