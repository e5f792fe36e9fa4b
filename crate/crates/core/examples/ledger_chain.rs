//! Build a registration and audit chain, round-trip it through a journal,
//! and watch verification catch forged entries.

use nssia::crypto::{hash, KeyPair};
use nssia::ledger::{read_journal, write_journal, Ledger, Tid, Timestamp, Transaction, TxKind};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() {
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let [mv, bc, dag, ra] = [(); 4].map(|_| KeyPair::generate(&mut rng));
    let mut ledger = Ledger::new();

    let tm = Transaction::new(TxKind::Tm, &mv, None, bc.public(), hash(b"metadata").as_bytes().to_vec());
    let ti = Transaction::new(TxKind::Ti, &bc, Some(tm.tid), dag.public(), hash(b"iris").as_bytes().to_vec());
    let dai = hash(b"avatar");
    let si = hash(&[dai.as_bytes().as_slice(), &ti.tid.0].concat());
    let tda = Transaction::new(TxKind::Tda, &dag, Some(ti.tid), dag.public(), [dai.as_bytes().as_slice(), si.as_bytes()].concat());
    let ts = Timestamp::from_datetime(&chrono::NaiveDate::from_ymd_opt(2022, 5, 1).unwrap().and_hms_opt(9, 30, 0).unwrap());
    let ta = Transaction::new(TxKind::Ta, &ra, None, ra.public(), [ts.0.as_slice(), dai.as_bytes()].concat());
    for tx in [tm, ti.clone(), tda, ta] {
        let kind = tx.kind;
        ledger.append(tx).unwrap();
        println!("{:>3} payload {:2} bytes", kind.label(), kind.payload_len());
    }
    println!("SI for DAI {} = {}", dai, ledger.find_si(&dai).unwrap());

    // a second TDA on the same TI is refused
    let again = Transaction::new(TxKind::Tda, &dag, Some(ti.tid), dag.public(), vec![0; 40]);
    println!("double spend of TI: {}", ledger.append(again).unwrap_err());

    let path = std::env::temp_dir().join("nssia-ledger-example.journal");
    write_journal(&ledger, &path).unwrap();
    let mut replay = read_journal(&path).unwrap();
    println!("journal replay: {} transactions, {} findings", replay.len(), replay.verify_chain().len());

    let orphan = Transaction::new(TxKind::Ti, &bc, Some(Tid([9; 32])), dag.public(), vec![1; 20]);
    replay.push_unchecked(orphan);
    for f in replay.verify_chain() {
        println!("finding at #{}: {:?}", f.position, f.kind);
    }
    std::fs::remove_file(path).ok();
}
