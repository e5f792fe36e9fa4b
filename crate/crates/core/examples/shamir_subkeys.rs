//! Split a 128-bit master key into subkeys and rebuild it from any three.

use nssia::crypto::MasterKey;
use nssia::shamir::{reconstruct_at_zero, split_secret, FieldSpec};
use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let field = FieldSpec::subkey();
    println!("subkey modulus  = {} ({} bytes per y)", field.modulus(), field.element_width());
    let escrow = FieldSpec::escrow(5).unwrap();
    println!("escrow modulus  = {} ({} bytes per y)", escrow.modulus(), escrow.element_width());

    let mk = MasterKey::random(&mut rng);
    let secret = BigUint::from_bytes_be(mk.as_bytes());
    let shares = split_secret(&secret, 3, 5, field, &mut rng).unwrap();
    for s in &shares {
        println!("  x = {:3}  y = {:x}", s.x, s.y);
    }
    for subset in [[0, 1, 2], [0, 2, 4], [1, 3, 4]] {
        let picked: Vec<_> = subset.iter().map(|&i| shares[i].clone()).collect();
        let back = reconstruct_at_zero(&picked, 3, field).unwrap();
        println!("shares {subset:?} -> {}", if back == secret { "MK" } else { "wrong" });
    }
    let two = reconstruct_at_zero(&shares[..2], 2, field).unwrap();
    println!("two shares alone  -> {}", if two == secret { "MK" } else { "unrelated value" });
}
