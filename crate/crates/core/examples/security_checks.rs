//! Sybil, tamper, impersonation and outage behaviour of a running system.

use nssia::avatar::{AvatarSession, CodeModuleLibrary, DigitalAvatar};
use nssia::protocol::{AuditPlan, NaturalPerson, PhysicalIdentityProof, ServerStatus, System, SystemParams};

fn main() {
    let mut sys = System::init(SystemParams::default(), CodeModuleLibrary::default_library(), 9).unwrap();
    let np = NaturalPerson::synthetic("Ida", sys.rng());
    let cred = sys.digitize(&np).unwrap();
    let issued = sys.generate(&PhysicalIdentityProof::new(&np, &cred), &np.face).unwrap();

    let mut twin = NaturalPerson::synthetic("Ida's twin", sys.rng());
    twin.iris = np.iris.clone();
    println!("second identity, same iris: {}", sys.digitize(&twin).unwrap_err());

    let mut bytes = issued.avatar.to_bytes();
    bytes[100] ^= 0x80;
    println!("tampered avatar verifies: {}", DigitalAvatar::verify_serialized(&bytes, &sys.dag.public_key()));

    let noisy = np.live_face(8, sys.rng());
    let mut session = AvatarSession::new(issued.avatar.clone());
    session.activate(&np.face, 0.0).unwrap();
    for _ in 0..3 {
        session.challenge(&noisy, 0.0).unwrap();
    }
    println!("after 3 failed challenges, genuine face: {:?}", session.challenge(&np.face, 0.0));

    sys.storage[1].status = ServerStatus::Offline;
    sys.storage[3].status = ServerStatus::Offline;
    println!("audit with 2 storage servers down: {}", sys.audit(0, &issued.dai, &AuditPlan::default()).is_ok());
    sys.storage[4].status = ServerStatus::Offline;
    println!("audit with 3 down: {}", sys.audit(0, &issued.dai, &AuditPlan::default()).unwrap_err());
}
