//! Escrow an encrypted identity blob as one 101-byte record per storage
//! server and restore it from any threshold subset.

use nssia::crypto::{hash, MasterKey};
use nssia::protocol::{escrow_identity, recover_metadata, NaturalPerson};
use nssia::shamir::{reconstruct_secinfo, EscrowLayout, FieldSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() {
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let layout = EscrowLayout::default();
    let field = FieldSpec::escrow(layout.b).unwrap();
    let xs = layout.x_coordinates(&field, &mut rng).unwrap();

    let md = NaturalPerson::metadata_record("Ada", "420102199001011234", "12 Ledger Lane", "F");
    let dai = hash(b"some avatar");
    let mk = MasterKey::random(&mut rng);
    let out = escrow_identity(&md, &dai, &mk, &layout, &field, &xs, &mut rng).unwrap();
    println!("SecInfo {} bytes, {} encryption(s)", out.secinfo.as_bytes().len(), out.attempts);
    for iri in &out.iris {
        println!("  x = {}  record {} bytes", iri.x, iri.pack(layout.b).unwrap().len());
    }

    let subset = [out.iris[4].clone(), out.iris[1].clone(), out.iris[2].clone()];
    let secinfo = reconstruct_secinfo(&subset, &layout, &field).unwrap();
    let back = recover_metadata(&secinfo, &dai, &mk, md.len()).unwrap();
    println!("restored from x = {:?}: {}", subset.iter().map(|i| i.x).collect::<Vec<_>>(), String::from_utf8_lossy(&back).trim_end_matches('\0'));
}
