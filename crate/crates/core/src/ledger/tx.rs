use std::fmt;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::crypto::{sign, verify, Digest20, KeyPair, PublicKeyBytes, SignatureBytes, DIGEST_LEN, PUBLIC_KEY_LEN, SIGNATURE_LEN};

use super::LedgerError;

pub const TID_LEN: usize = 32;
pub const TIMESTAMP_LEN: usize = 14;

/// Transaction number: SHA-256 of the serialized transaction body.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tid(pub [u8; TID_LEN]);

impl Tid {
    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Option<Self> {
        hex::decode(s).ok()?.try_into().ok().map(Self)
    }
}

impl fmt::Debug for Tid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tid({})", &self.to_hex()[..16])
    }
}

impl fmt::Display for Tid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl Serialize for Tid {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Tid {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Tid::from_hex(&s).ok_or_else(|| serde::de::Error::custom("tid must be 32 hex bytes"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum TxKind {
    /// Metadata proof, H_M.
    Tm = 1,
    /// Iris proof, H_I.
    Ti = 2,
    /// Avatar registration, DAI ‖ SI.
    Tda = 3,
    /// Audit log, timestamp ‖ DAI.
    Ta = 4,
}

impl TxKind {
    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            1 => Some(Self::Tm),
            2 => Some(Self::Ti),
            3 => Some(Self::Tda),
            4 => Some(Self::Ta),
            _ => None,
        }
    }

    pub fn payload_len(self) -> usize {
        match self {
            Self::Tm | Self::Ti => DIGEST_LEN,
            Self::Tda => 2 * DIGEST_LEN,
            Self::Ta => TIMESTAMP_LEN + DIGEST_LEN,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Tm => "TM",
            Self::Ti => "TI",
            Self::Tda => "TDA",
            Self::Ta => "TA",
        }
    }
}

/// `YYYYMMDDHHMMSS` in ASCII.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Timestamp(pub [u8; TIMESTAMP_LEN]);

impl Timestamp {
    pub fn from_datetime(dt: &NaiveDateTime) -> Self {
        let s = dt.format("%Y%m%d%H%M%S").to_string();
        Self(s.as_bytes().try_into().expect("four-digit years give 14 characters"))
    }

    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.0).unwrap_or("")
    }
}

/// One ledger record: `Tin[input_address, prev_tid, ∅]`,
/// `Tout[output_address, data, ω]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transaction {
    pub tid: Tid,
    pub kind: TxKind,
    pub input_address: PublicKeyBytes,
    pub prev_tid: Option<Tid>,
    pub output_address: PublicKeyBytes,
    pub data: Vec<u8>,
    /// Signature by the input address over `tid ‖ tin ‖ output_address ‖ data`.
    pub omega: SignatureBytes,
}

fn prev_bytes(prev: &Option<Tid>) -> [u8; TID_LEN] {
    prev.map(|t| t.0).unwrap_or([0u8; TID_LEN])
}

impl Transaction {
    /// Builds and signs a transaction from `signer` (the input address).
    pub fn new(
        kind: TxKind,
        signer: &KeyPair,
        prev_tid: Option<Tid>,
        output_address: PublicKeyBytes,
        data: Vec<u8>,
    ) -> Self {
        let mut tx = Self {
            tid: Tid([0; TID_LEN]),
            kind,
            input_address: signer.public(),
            prev_tid,
            output_address,
            data,
            omega: SignatureBytes([0; SIGNATURE_LEN]),
        };
        tx.tid = tx.compute_tid();
        tx.omega = sign(&tx.signed_message(), signer);
        tx
    }

    fn body(&self) -> Vec<u8> {
        let mut b = Vec::with_capacity(1 + 2 * PUBLIC_KEY_LEN + TID_LEN + 2 + self.data.len());
        b.push(self.kind as u8);
        b.extend_from_slice(self.input_address.as_bytes());
        b.extend_from_slice(&prev_bytes(&self.prev_tid));
        b.extend_from_slice(self.output_address.as_bytes());
        b.extend_from_slice(&(self.data.len() as u16).to_be_bytes());
        b.extend_from_slice(&self.data);
        b
    }

    pub fn compute_tid(&self) -> Tid {
        Tid(Sha256::digest(self.body()).into())
    }

    fn signed_message(&self) -> Vec<u8> {
        let mut m = Vec::with_capacity(TID_LEN * 2 + PUBLIC_KEY_LEN * 2 + self.data.len());
        m.extend_from_slice(&self.tid.0);
        m.extend_from_slice(self.input_address.as_bytes());
        m.extend_from_slice(&prev_bytes(&self.prev_tid));
        m.extend_from_slice(self.output_address.as_bytes());
        m.extend_from_slice(&self.data);
        m
    }

    pub fn signature_valid(&self) -> bool {
        verify(&self.signed_message(), &self.omega, &self.input_address)
    }

    /// The DAI carried by a TDA or TA payload.
    pub fn dai(&self) -> Option<Digest20> {
        match self.kind {
            TxKind::Tda if self.data.len() >= DIGEST_LEN => Digest20::from_slice(&self.data[..DIGEST_LEN]),
            TxKind::Ta if self.data.len() == TIMESTAMP_LEN + DIGEST_LEN => {
                Digest20::from_slice(&self.data[TIMESTAMP_LEN..])
            }
            _ => None,
        }
    }

    /// Journal record: `kind ‖ tid ‖ input_address ‖ prev_tid|zeros ‖
    /// output_address ‖ payload_len (u16 BE) ‖ payload ‖ ω`.
    pub fn to_record(&self) -> Vec<u8> {
        let mut r = Vec::with_capacity(1 + TID_LEN * 2 + PUBLIC_KEY_LEN * 2 + 2 + self.data.len() + SIGNATURE_LEN);
        r.push(self.kind as u8);
        r.extend_from_slice(&self.tid.0);
        r.extend_from_slice(self.input_address.as_bytes());
        r.extend_from_slice(&prev_bytes(&self.prev_tid));
        r.extend_from_slice(self.output_address.as_bytes());
        r.extend_from_slice(&(self.data.len() as u16).to_be_bytes());
        r.extend_from_slice(&self.data);
        r.extend_from_slice(self.omega.as_bytes());
        r
    }

    pub fn from_record(r: &[u8]) -> Result<Self, LedgerError> {
        const FIXED: usize = 1 + TID_LEN + PUBLIC_KEY_LEN + TID_LEN + PUBLIC_KEY_LEN + 2;
        let bad = |why: &str| LedgerError::Journal(why.to_string());
        if r.len() < FIXED + SIGNATURE_LEN {
            return Err(bad("record too short"));
        }
        let kind = TxKind::from_byte(r[0]).ok_or_else(|| bad("unknown transaction kind"))?;
        let mut at = 1;
        let mut take = |n: usize| {
            let s = &r[at..at + n];
            at += n;
            s
        };
        let tid = Tid(take(TID_LEN).try_into().unwrap());
        let input: [u8; PUBLIC_KEY_LEN] = take(PUBLIC_KEY_LEN).try_into().unwrap();
        let prev: [u8; TID_LEN] = take(TID_LEN).try_into().unwrap();
        let output: [u8; PUBLIC_KEY_LEN] = take(PUBLIC_KEY_LEN).try_into().unwrap();
        let len = u16::from_be_bytes(take(2).try_into().unwrap()) as usize;
        if r.len() != FIXED + len + SIGNATURE_LEN {
            return Err(bad("payload length disagrees with record size"));
        }
        let data = take(len).to_vec();
        let omega = SignatureBytes(take(SIGNATURE_LEN).try_into().unwrap());
        Ok(Self {
            tid,
            kind,
            input_address: PublicKeyBytes::from_raw(input),
            prev_tid: (prev != [0u8; TID_LEN]).then_some(Tid(prev)),
            output_address: PublicKeyBytes::from_raw(output),
            data,
            omega,
        })
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    use super::*;

    #[test]
    fn timestamp_is_fourteen_ascii_bytes() {
        let dt = NaiveDateTime::parse_from_str("2022-05-04 09:08:07", "%Y-%m-%d %H:%M:%S").unwrap();
        let ts = Timestamp::from_datetime(&dt);
        assert_eq!(ts.as_str(), "20220504090807");
        assert_eq!(ts.0.len(), TIMESTAMP_LEN);
    }

    #[test]
    fn record_round_trip_and_signature() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let mv = KeyPair::generate(&mut rng);
        let bc = KeyPair::generate(&mut rng);
        let tx = Transaction::new(TxKind::Tm, &mv, None, bc.public(), vec![9; 20]);
        assert!(tx.signature_valid());
        assert_eq!(tx.compute_tid(), tx.tid);
        let rec = tx.to_record();
        assert_eq!(rec.len(), 1 + 32 + 33 + 32 + 33 + 2 + 20 + 64);
        assert_eq!(Transaction::from_record(&rec).unwrap(), tx);
        assert!(Transaction::from_record(&rec[..rec.len() - 1]).is_err());

        let mut forged = tx.clone();
        forged.data[0] ^= 1;
        assert!(!forged.signature_valid());
    }

    #[test]
    fn payload_lengths() {
        assert_eq!(TxKind::Tm.payload_len(), 20);
        assert_eq!(TxKind::Ti.payload_len(), 20);
        assert_eq!(TxKind::Tda.payload_len(), 40);
        assert_eq!(TxKind::Ta.payload_len(), 34);
    }
}
