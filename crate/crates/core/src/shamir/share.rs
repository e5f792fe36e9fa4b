use std::collections::HashSet;

use num_bigint::BigUint;
use num_traits::Zero;
use rand::Rng;

use super::field::{evaluate_polynomial, lagrange_basis};
use super::{FieldSpec, ShamirError};

/// One point `(x, y)` on a sharing polynomial. `x` is a nonzero one-byte
/// coordinate, `y` a residue of the sharing field.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ShamirShare {
    pub x: u8,
    pub y: BigUint,
}

impl ShamirShare {
    /// `x (1 byte) ‖ y (element_width bytes, big-endian)`; 18 bytes in the
    /// subkey field.
    pub fn to_wire(&self, field: &FieldSpec) -> Vec<u8> {
        let mut out = Vec::with_capacity(1 + field.element_width());
        out.push(self.x);
        out.extend(FieldSpec::encode(&self.y, field.element_width()).expect("y is a field element"));
        out
    }

    pub fn from_wire(bytes: &[u8], field: &FieldSpec) -> Result<Self, ShamirError> {
        if bytes.len() != 1 + field.element_width() {
            return Err(ShamirError::MalformedShare);
        }
        let x = bytes[0];
        let y = BigUint::from_bytes_be(&bytes[1..]);
        if x == 0 || u64::from(x) > field.max_x() || !field.contains(&y) {
            return Err(ShamirError::MalformedShare);
        }
        Ok(Self { x, y })
    }
}

/// `count` distinct x-coordinates drawn without replacement from
/// `[1, min(modulus, 256))`.
pub fn sample_x_coordinates<R: Rng + ?Sized>(
    count: usize,
    field: &FieldSpec,
    rng: &mut R,
) -> Result<Vec<u8>, ShamirError> {
    let max_x = field.max_x() as usize;
    if count > max_x {
        return Err(ShamirError::TooManyShares { requested: count });
    }
    Ok(rand::seq::index::sample(rng, max_x, count)
        .into_iter()
        .map(|i| (i + 1) as u8)
        .collect())
}

/// Evaluates `secret + coeffs[0]·x + coeffs[1]·x² + …` at each of `xs`.
pub fn split_with_polynomial(
    secret: &BigUint,
    coeffs: &[BigUint],
    xs: &[u8],
    field: &FieldSpec,
) -> Result<Vec<ShamirShare>, ShamirError> {
    if !field.contains(secret) || coeffs.iter().any(|c| !field.contains(c)) {
        return Err(ShamirError::OutOfField);
    }
    check_xs(xs, field)?;
    let mut poly = Vec::with_capacity(coeffs.len() + 1);
    poly.push(secret.clone());
    poly.extend_from_slice(coeffs);
    Ok(xs
        .iter()
        .map(|&x| ShamirShare { x, y: evaluate_polynomial(&poly, &BigUint::from(x), field) })
        .collect())
}

fn check_xs(xs: &[u8], field: &FieldSpec) -> Result<(), ShamirError> {
    let mut seen = HashSet::with_capacity(xs.len());
    for &x in xs {
        if x == 0 || u64::from(x) > field.max_x() {
            return Err(ShamirError::InvalidX);
        }
        if !seen.insert(x) {
            return Err(ShamirError::DuplicateX(x.into()));
        }
    }
    Ok(())
}

/// Shares of `secret` at caller-chosen `xs` on a fresh random polynomial of
/// degree `t − 1`.
pub fn split_secret_at<R: Rng + ?Sized>(
    secret: &BigUint,
    t: usize,
    xs: &[u8],
    field: &FieldSpec,
    rng: &mut R,
) -> Result<Vec<ShamirShare>, ShamirError> {
    if t == 0 || t > xs.len() {
        return Err(ShamirError::InvalidThreshold { t, n: xs.len() });
    }
    let coeffs: Vec<BigUint> = (1..t).map(|_| field.random_element(rng)).collect();
    split_with_polynomial(secret, &coeffs, xs, field)
}

/// Splits `secret` into `n_shares` points, any `t` of which reconstruct it.
pub fn split_secret<R: Rng + ?Sized>(
    secret: &BigUint,
    t: usize,
    n_shares: usize,
    field: &FieldSpec,
    rng: &mut R,
) -> Result<Vec<ShamirShare>, ShamirError> {
    if t == 0 || t > n_shares {
        return Err(ShamirError::InvalidThreshold { t, n: n_shares });
    }
    if !field.contains(secret) {
        return Err(ShamirError::OutOfField);
    }
    let xs = sample_x_coordinates(n_shares, field, rng)?;
    split_secret_at(secret, t, &xs, field, rng)
}

/// `f(0)` of the polynomial through the first `t` shares; later shares are
/// ignored.
pub fn reconstruct_at_zero(
    shares: &[ShamirShare],
    t: usize,
    field: &FieldSpec,
) -> Result<BigUint, ShamirError> {
    if t == 0 {
        return Err(ShamirError::InvalidThreshold { t, n: shares.len() });
    }
    if shares.len() < t {
        return Err(ShamirError::InsufficientShares { need: t, got: shares.len() });
    }
    let used = &shares[..t];
    if used.iter().any(|s| !field.contains(&s.y)) {
        return Err(ShamirError::OutOfField);
    }
    let xs: Vec<BigUint> = used.iter().map(|s| BigUint::from(s.x)).collect();
    let basis = lagrange_basis(&xs, field)?;
    Ok(used
        .iter()
        .zip(&basis)
        .fold(BigUint::zero(), |acc, (s, b)| field.add(&acc, &field.mul(&s.y, &b[0]))))
}

/// Like [`reconstruct_at_zero`] but checks that every `t`-subset of
/// `shares` agrees, returning [`ShamirError::Inconsistent`] otherwise.
pub fn reconstruct_strict(
    shares: &[ShamirShare],
    t: usize,
    field: &FieldSpec,
) -> Result<BigUint, ShamirError> {
    let first = reconstruct_at_zero(shares, t, field)?;
    let mut idx: Vec<usize> = (0..t).collect();
    loop {
        let subset: Vec<ShamirShare> = idx.iter().map(|&i| shares[i].clone()).collect();
        if reconstruct_at_zero(&subset, t, field)? != first {
            return Err(ShamirError::Inconsistent);
        }
        // next combination in lexicographic order
        let n = shares.len();
        let Some(pos) = (0..t).rev().find(|&i| idx[i] != i + n - t) else {
            return Ok(first);
        };
        idx[pos] += 1;
        for j in pos + 1..t {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use num_bigint::RandBigInt;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    use super::*;

    fn f251() -> FieldSpec {
        FieldSpec::from_u64(251).unwrap()
    }

    fn share(x: u8, y: u64) -> ShamirShare {
        ShamirShare { x, y: BigUint::from(y) }
    }

    #[test]
    fn degree_zero_polynomial_repeats_secret() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let shares = split_secret(&BigUint::from(42u32), 1, 3, &f251(), &mut rng).unwrap();
        assert_eq!(shares.len(), 3);
        assert!(shares.iter().all(|s| s.y == BigUint::from(42u32)));
    }

    #[test]
    fn pinned_linear_polynomial() {
        // f(x) = 42 + 7x evaluated directly at 1, 2, 3.
        let expected: Vec<ShamirShare> = (1u8..=3).map(|x| share(x, 42 + 7 * x as u64)).collect();
        let got = split_with_polynomial(&BigUint::from(42u32), &[BigUint::from(7u32)], &[1, 2, 3], &f251())
            .unwrap();
        assert_eq!(got, expected);
        assert_eq!(got[0], share(1, 49));
        assert_eq!(got[2], share(3, 63));
    }

    #[test]
    fn hand_lagrange_at_zero() {
        // (49·3 − 63·1) · 2⁻¹ mod 251 = 84 / 2 = 42
        let r = reconstruct_at_zero(&[share(1, 49), share(3, 63)], 2, &f251()).unwrap();
        assert_eq!(r, BigUint::from(42u32));
    }

    #[test]
    fn duplicate_x_is_rejected() {
        assert_eq!(
            reconstruct_at_zero(&[share(1, 49), share(1, 50)], 2, &f251()),
            Err(ShamirError::DuplicateX(1))
        );
    }

    #[test]
    fn threshold_validation() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let s = BigUint::from(1u32);
        assert!(matches!(
            split_secret(&s, 4, 3, &f251(), &mut rng),
            Err(ShamirError::InvalidThreshold { t: 4, n: 3 })
        ));
        assert!(matches!(
            split_secret(&s, 0, 3, &f251(), &mut rng),
            Err(ShamirError::InvalidThreshold { .. })
        ));
        assert_eq!(
            split_secret(&BigUint::from(251u32), 2, 3, &f251(), &mut rng),
            Err(ShamirError::OutOfField)
        );
        assert_eq!(
            split_secret(&s, 2, 251, &f251(), &mut rng),
            Err(ShamirError::TooManyShares { requested: 251 })
        );
        assert_eq!(
            reconstruct_at_zero(&[share(1, 2)], 2, &f251()),
            Err(ShamirError::InsufficientShares { need: 2, got: 1 })
        );
    }

    #[test]
    fn master_key_shares_are_17_bytes() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let field = FieldSpec::subkey();
        let mk = rng.gen_biguint(128);
        let shares = split_secret(&mk, 3, 5, field, &mut rng).unwrap();
        assert_eq!(shares.len(), 5);
        for s in &shares {
            let wire = s.to_wire(field);
            assert_eq!(wire.len(), 18);
            assert_eq!(wire[1..].len(), 17);
            assert_eq!(ShamirShare::from_wire(&wire, field).unwrap(), *s);
        }
        assert_eq!(reconstruct_at_zero(&shares[2..], 3, field).unwrap(), mk);
    }

    #[test]
    fn random_round_trips() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let field = FieldSpec::subkey();
        for _ in 0..1000 {
            let secret = field.random_element(&mut rng);
            let t = rng.gen_range(1..=5);
            let n = rng.gen_range(t..=7);
            let mut shares = split_secret(&secret, t, n, field, &mut rng).unwrap();
            shares.shuffle(&mut rng);
            assert_eq!(reconstruct_at_zero(&shares, t, field).unwrap(), secret);
        }
    }

    #[test]
    fn strict_mode_detects_a_bad_share() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let field = f251();
        let mut shares = split_secret(&BigUint::from(9u32), 2, 4, &field, &mut rng).unwrap();
        assert_eq!(reconstruct_strict(&shares, 2, &field).unwrap(), BigUint::from(9u32));
        shares[3].y = field.add(&shares[3].y, &BigUint::from(1u32));
        assert_eq!(reconstruct_strict(&shares, 2, &field), Err(ShamirError::Inconsistent));
        // the lenient path only reads the first t
        assert_eq!(reconstruct_at_zero(&shares, 2, &field).unwrap(), BigUint::from(9u32));
    }

    #[test]
    fn wire_decoding_rejects_garbage() {
        let field = FieldSpec::subkey();
        assert_eq!(ShamirShare::from_wire(&[0u8; 17], field), Err(ShamirError::MalformedShare));
        assert_eq!(ShamirShare::from_wire(&[0u8; 18], field), Err(ShamirError::MalformedShare));
        assert_eq!(ShamirShare::from_wire(&[1u8; 18], field), Err(ShamirError::MalformedShare));
    }
}
