//! Assemble a digital avatar from a seed, sign it, and exercise the
//! activation lockout.

use nssia::avatar::{derive_das, generate_da, select_indices, AvatarSession, CodeModuleLibrary, DigitalAvatar, Slot};
use nssia::crypto::KeyPair;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() {
    let toy = CodeModuleLibrary::new(
        (0..4)
            .map(|i| Slot { name: format!("slot{i}"), templates: (0..5).map(|j| format!("m{i}{j}")).collect() })
            .collect(),
    )
    .unwrap();
    println!("\"12345678\" over num = [5,5,5,5] -> {:?}", select_indices("12345678", &toy).unwrap());

    let lib = CodeModuleLibrary::default_library();
    let face = vec![0x5a; 64];
    let das = derive_das(&face, 32, lib.k());
    println!("DAS   {}", das.as_str());
    println!("slots {:?}", select_indices(das.as_str(), &lib).unwrap());

    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let dag = KeyPair::generate(&mut rng);
    let mut da = generate_da(das.as_str(), &lib).unwrap();
    da.bind_face(face.clone());
    da.sign_with(&dag);
    let bytes = da.to_bytes();
    println!("DA    {} bytes, modules {} bytes, DAI {}", bytes.len(), da.module_bytes(), da.dai());
    assert!(DigitalAvatar::verify_serialized(&bytes, &dag.public()));

    let mut flipped = bytes.clone();
    flipped[20] ^= 1;
    println!("one flipped byte verifies: {}", DigitalAvatar::verify_serialized(&flipped, &dag.public()));

    let mut session = AvatarSession::new(da);
    println!("activate with enrolled face: {:?}", session.activate(&face, 0.0));
    for _ in 0..3 {
        println!("challenge with wrong face: {:?}", session.challenge(&[0u8; 64], 0.0));
    }
    println!("challenge with right face after lockout: {:?}", session.challenge(&face, 0.0));
    println!("re-activate after lockout: {:?}", session.activate(&face, 0.0));
}
