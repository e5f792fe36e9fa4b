//! Hashing, symmetric encryption, ECIES and signatures on secp256k1.

use nssia::crypto::{
    ec_decrypt, ec_encrypt, hash, sign, sym_decrypt, sym_encrypt, verify, KeyPair, MasterKey, PublicParams,
    SignedCiphertext,
};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    assert!(PublicParams::secp256k1().validate());

    println!("H(\"abc\")          = {}", hash(b"abc"));

    let mk = MasterKey::random(&mut rng);
    let md = [7u8; 256];
    let ct = sym_encrypt(&md, &mk, &mut rng);
    println!("En(256 B, MK)     = {} bytes", ct.len());
    assert_eq!(sym_decrypt(&ct, &mk).unwrap(), md);

    let alice = KeyPair::generate(&mut rng);
    let bob = KeyPair::generate(&mut rng);
    let sealed = ec_encrypt(b"subkey", &bob.public(), &mut rng).unwrap();
    println!("ECIES(6 B)        = {} bytes", sealed.len());
    assert_eq!(ec_decrypt(&sealed, &bob).unwrap(), b"subkey");

    let sig = sign(b"avatar", &alice);
    println!("Sig               = {} bytes, verifies: {}", sig.as_bytes().len(), verify(b"avatar", &sig, &alice.public()));

    // encrypt to bob, sign as alice
    let m1 = SignedCiphertext::seal(b"face", &bob.public(), &alice, &mut rng).unwrap();
    println!("sealed M1 verifies under alice: {}, under bob: {}", m1.verify(&alice.public()), m1.verify(&bob.public()));
}
