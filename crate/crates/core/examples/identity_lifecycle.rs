//! Digitize a person, issue an avatar, and de-anonymize it through a
//! regulator audit.

use nssia::avatar::CodeModuleLibrary;
use nssia::ledger::TxKind;
use nssia::protocol::{AuditPlan, NaturalPerson, PhysicalIdentityProof, System, SystemParams};

fn main() {
    let mut sys = System::init(SystemParams::default(), CodeModuleLibrary::default_library(), 42).unwrap();
    let np = NaturalPerson::synthetic("Grace", sys.rng());

    let cred = sys.digitize(&np).unwrap();
    println!("credential: TM {}, key bytes held by the person: {}", cred.tnum, cred.local_key_bytes());

    let issued = sys.generate(&PhysicalIdentityProof::new(&np, &cred), &np.face).unwrap();
    println!("avatar {} ({} bytes), SI {}", issued.dai, issued.avatar.to_bytes().len(), issued.si);
    for (i, ss) in sys.storage.iter().enumerate() {
        println!("  SS{i} holds {} record(s)", ss.records().len());
    }

    sys.log_behavior(&issued.dai, "transfer 10 tokens");
    let plan = AuditPlan { storage: Some(vec![4, 2, 0]), regulators: Some(vec![3, 1]) };
    let res = sys.audit(0, &issued.dai, &plan).unwrap();
    println!("audit by RA0 -> {}", String::from_utf8_lossy(&res.recovered_md).trim_end_matches('\0'));
    assert_eq!(res.recovered_md, np.md);

    let l = &sys.ledger;
    println!(
        "ledger: TM {} B, TI {} B, TDA {} B, TA {} B, findings {}",
        l.payload_bytes(TxKind::Tm),
        l.payload_bytes(TxKind::Ti),
        l.payload_bytes(TxKind::Tda),
        l.payload_bytes(TxKind::Ta),
        l.verify_chain().len()
    );
    let t = sys.timings;
    println!("timings: digitize {:?}, generate {:?}, audit {:?}", t.digitization, t.generation, t.accountability);
}
