use std::thread;

use nssia::avatar::CodeModuleLibrary;
use nssia::crypto::{hash, KeyPair};
use nssia::ledger::{SharedLedger, Transaction, TxKind};
use nssia::protocol::{
    AuditPlan, NaturalPerson, PhysicalIdentityProof, ProtocolError, ServerStatus, System, SystemParams,
};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn system(seed: u64) -> System {
    System::init(SystemParams::default(), CodeModuleLibrary::with_variants(64), seed).unwrap()
}

#[test]
fn every_registered_avatar_is_recoverable() {
    let mut sys = system(1);
    let mut people = Vec::new();
    for i in 0..12 {
        let np = NaturalPerson::synthetic(&format!("p{i}"), sys.rng());
        let cred = sys.digitize(&np).unwrap();
        let issued = sys.generate(&PhysicalIdentityProof::new(&np, &cred), &np.face).unwrap();
        people.push((np, issued.dai));
    }
    let tdas: Vec<_> = sys
        .ledger
        .transactions()
        .iter()
        .filter(|t| t.kind == TxKind::Tda)
        .map(|t| t.dai().unwrap())
        .collect();
    assert_eq!(tdas.len(), people.len());
    for (i, dai) in tdas.iter().enumerate() {
        let res = sys.audit(i % 5, dai, &AuditPlan::default()).unwrap();
        let (np, _) = people.iter().find(|(_, d)| d == dai).unwrap();
        assert_eq!(res.recovered_md, np.md);
    }
    let tas: Vec<_> = sys.ledger.transactions().iter().filter(|t| t.kind == TxKind::Ta).collect();
    for pair in tas.windows(2) {
        assert_eq!(pair[1].prev_tid, Some(pair[0].tid));
    }
}

#[test]
fn thresholds_other_than_three_of_five() {
    for (t, n) in [(1, 1), (2, 3), (4, 7)] {
        let polys = 288usize.div_ceil(t * 5);
        let params = SystemParams { t1: t, n1: n, t2: t, n2: n, n: polys, ..SystemParams::default() };
        let mut sys = System::init(params, CodeModuleLibrary::default_library(), 40 + t as u64).unwrap();
        let np = NaturalPerson::synthetic("q", sys.rng());
        let cred = sys.digitize(&np).unwrap();
        let issued = sys.generate(&PhysicalIdentityProof::new(&np, &cred), &np.face).unwrap();
        for ss in sys.storage.iter_mut().skip(t) {
            ss.status = ServerStatus::Offline;
        }
        let res = sys.audit(n - 1, &issued.dai, &AuditPlan::default()).unwrap();
        assert_eq!(res.recovered_md, np.md, "t = {t}, n = {n}");
    }
}

#[test]
fn face_tolerance_admits_noisy_capture() {
    let params = SystemParams { face_tolerance: 0.001, ..SystemParams::default() };
    let mut sys = System::init(params, CodeModuleLibrary::default_library(), 3).unwrap();
    let np = NaturalPerson::synthetic("r", sys.rng());
    let cred = sys.digitize(&np).unwrap();
    let pip = PhysicalIdentityProof::new(&np, &cred);
    let too_noisy = np.live_face(FACE_BITS / 500, sys.rng());
    assert!(matches!(sys.generate(&pip, &too_noisy), Err(ProtocolError::FaceMismatch)));
    let slight = np.live_face(10, sys.rng());
    let issued = sys.generate(&pip, &slight).unwrap();
    // the avatar is bound to the enrolled face, not the noisy capture
    assert_eq!(issued.avatar.bound_face(), Some(np.face.as_slice()));
}

const FACE_BITS: usize = nssia::protocol::FACE_LEN * 8;

#[test]
fn shared_ledger_serializes_concurrent_appends() {
    let shared = SharedLedger::default();
    let handles: Vec<_> = (0..4u64)
        .map(|w| {
            let ledger = shared.clone();
            thread::spawn(move || {
                let mut rng = ChaCha20Rng::seed_from_u64(w);
                let mv = KeyPair::generate(&mut rng);
                let bc = KeyPair::generate(&mut rng);
                for i in 0..25u64 {
                    let h = hash(&[w.to_be_bytes(), i.to_be_bytes()].concat());
                    let tm = Transaction::new(TxKind::Tm, &mv, None, bc.public(), h.as_bytes().to_vec());
                    ledger.append(tm).unwrap();
                }
            })
        })
        .collect();
    for h in handles {
        h.join().unwrap();
    }
    shared.read(|l| {
        assert_eq!(l.len(), 100);
        assert!(l.verify_chain().is_empty());
    });
}
