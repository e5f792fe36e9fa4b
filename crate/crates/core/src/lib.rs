pub mod avatar;
pub mod crypto;
pub mod harness;
pub mod ledger;
pub mod protocol;
pub mod shamir;
