//! Identity information chain: an append-only, fully validated log of the
//! four protocol transaction kinds.
//!
//! The chain is trusted, so a single writer with complete validation
//! replaces consensus. Linkage rules:
//!
//! * TM opens a registration and has no predecessor;
//! * TI spends a TM, TDA spends a TI (each at most once), and the spender's
//!   input address must be the predecessor's output address;
//! * TA links to the previous TA, or to nothing for the first audit.

mod journal;
mod tx;

use std::collections::{HashMap, HashSet};
use std::sync::{Arc, RwLock};

use thiserror::Error;

use crate::crypto::{Digest20, DIGEST_LEN};

pub use journal::{read_journal, write_journal};
pub use tx::{Tid, Timestamp, Transaction, TxKind, TID_LEN, TIMESTAMP_LEN};

#[derive(Debug, Error)]
pub enum LedgerError {
    #[error("transaction signature does not verify under its input address")]
    BadSignature,
    #[error("bad linkage: {0}")]
    BadLinkage(String),
    #[error("transaction {0} already on the ledger")]
    DuplicateTid(Tid),
    #[error("{kind:?} payload must be {expected} bytes, got {actual}")]
    BadPayloadLength { kind: TxKind, expected: usize, actual: usize },
    #[error("transaction id does not match its body")]
    TidMismatch,
    #[error("DAI {0} is already registered")]
    DuplicateDai(Digest20),
    #[error("not found")]
    NotFound,
    #[error("more than one TDA carries DAI {0}")]
    Ambiguous(Digest20),
    #[error("journal: {0}")]
    Journal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// What `verify_chain` found wrong with one transaction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FindingKind {
    BadSignature,
    BadLinkage(String),
    BadPayloadLength { expected: usize, actual: usize },
    TidMismatch,
    DuplicateTid,
    DuplicateDai,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub position: usize,
    pub tid: Tid,
    pub kind: FindingKind,
}

/// Index state accumulated while walking the chain in order.
#[derive(Debug, Default, Clone)]
struct ChainState {
    by_tid: HashMap<Tid, usize>,
    by_dai: HashMap<Digest20, Vec<usize>>,
    spent: HashSet<Tid>,
    last_ta: Option<Tid>,
}

impl ChainState {
    fn check(&self, tx: &Transaction, txs: &[Transaction]) -> Vec<FindingKind> {
        let mut out = Vec::new();
        let expected = tx.kind.payload_len();
        if tx.data.len() != expected {
            out.push(FindingKind::BadPayloadLength { expected, actual: tx.data.len() });
        }
        if tx.compute_tid() != tx.tid {
            out.push(FindingKind::TidMismatch);
        }
        if self.by_tid.contains_key(&tx.tid) {
            out.push(FindingKind::DuplicateTid);
        }
        if !tx.signature_valid() {
            out.push(FindingKind::BadSignature);
        }
        if let Some(why) = self.linkage_violation(tx, txs) {
            out.push(FindingKind::BadLinkage(why));
        }
        if tx.kind == TxKind::Tda {
            if let Some(dai) = tx.dai() {
                if self.by_dai.contains_key(&dai) {
                    out.push(FindingKind::DuplicateDai);
                }
            }
        }
        out
    }

    fn linkage_violation(&self, tx: &Transaction, txs: &[Transaction]) -> Option<String> {
        let required = match tx.kind {
            TxKind::Tm => {
                return tx.prev_tid.map(|_| "TM must not reference a predecessor".to_string());
            }
            TxKind::Ta => {
                return (tx.prev_tid != self.last_ta).then(|| match self.last_ta {
                    Some(t) => format!("TA must link to the previous TA {t}"),
                    None => "first TA must not reference a predecessor".to_string(),
                });
            }
            TxKind::Ti => TxKind::Tm,
            TxKind::Tda => TxKind::Ti,
        };
        let Some(prev) = tx.prev_tid else {
            return Some(format!("{} requires a {} predecessor", tx.kind.label(), required.label()));
        };
        let Some(&pos) = self.by_tid.get(&prev) else {
            return Some(format!("predecessor {prev} is not an earlier transaction"));
        };
        let prev_tx = &txs[pos];
        if prev_tx.kind != required {
            return Some(format!(
                "{} must spend a {}, not a {}",
                tx.kind.label(),
                required.label(),
                prev_tx.kind.label()
            ));
        }
        if prev_tx.output_address != tx.input_address {
            return Some("input address is not the predecessor's output address".to_string());
        }
        if self.spent.contains(&prev) {
            return Some(format!("{} {prev} already spent", required.label()));
        }
        None
    }

    fn admit(&mut self, tx: &Transaction, position: usize) {
        self.by_tid.entry(tx.tid).or_insert(position);
        match tx.kind {
            TxKind::Tda => {
                if let Some(prev) = tx.prev_tid {
                    self.spent.insert(prev);
                }
                if let Some(dai) = tx.dai() {
                    self.by_dai.entry(dai).or_default().push(position);
                }
            }
            TxKind::Ti => {
                if let Some(prev) = tx.prev_tid {
                    self.spent.insert(prev);
                }
            }
            TxKind::Ta => self.last_ta = Some(tx.tid),
            TxKind::Tm => {}
        }
    }
}

#[derive(Debug, Default, Clone)]
pub struct Ledger {
    txs: Vec<Transaction>,
    state: ChainState,
}

impl Ledger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Validates `tx` against the current chain and appends it.
    pub fn append(&mut self, tx: Transaction) -> Result<usize, LedgerError> {
        let findings = self.state.check(&tx, &self.txs);
        if let Some(f) = findings.into_iter().next() {
            return Err(match f {
                FindingKind::BadPayloadLength { expected, actual } => {
                    LedgerError::BadPayloadLength { kind: tx.kind, expected, actual }
                }
                FindingKind::TidMismatch => LedgerError::TidMismatch,
                FindingKind::DuplicateTid => LedgerError::DuplicateTid(tx.tid),
                FindingKind::BadSignature => LedgerError::BadSignature,
                FindingKind::BadLinkage(why) => LedgerError::BadLinkage(why),
                FindingKind::DuplicateDai => {
                    LedgerError::DuplicateDai(tx.dai().expect("checked TDA has a DAI"))
                }
            });
        }
        Ok(self.push_unchecked(tx))
    }

    /// Appends without validation. Used to replay journals and to inject
    /// faults in tests; run [`Ledger::verify_chain`] afterwards.
    pub fn push_unchecked(&mut self, tx: Transaction) -> usize {
        let pos = self.txs.len();
        self.state.admit(&tx, pos);
        self.txs.push(tx);
        pos
    }

    pub fn from_transactions_unchecked(txs: impl IntoIterator<Item = Transaction>) -> Self {
        let mut l = Self::new();
        for tx in txs {
            l.push_unchecked(tx);
        }
        l
    }

    pub fn get(&self, tid: &Tid) -> Result<&Transaction, LedgerError> {
        self.state
            .by_tid
            .get(tid)
            .map(|&p| &self.txs[p])
            .ok_or(LedgerError::NotFound)
    }

    pub fn position(&self, tid: &Tid) -> Option<usize> {
        self.state.by_tid.get(tid).copied()
    }

    /// Storage index recorded next to `dai` by its unique TDA.
    pub fn find_si(&self, dai: &Digest20) -> Result<Digest20, LedgerError> {
        let tda = self.find_tda(dai)?;
        Digest20::from_slice(&tda.data[DIGEST_LEN..2 * DIGEST_LEN])
            .ok_or_else(|| LedgerError::BadLinkage("TDA payload too short".into()))
    }

    pub fn find_tda(&self, dai: &Digest20) -> Result<&Transaction, LedgerError> {
        match self.state.by_dai.get(dai).map(Vec::as_slice) {
            None | Some([]) => Err(LedgerError::NotFound),
            Some([p]) if self.txs[*p].data.len() >= 2 * DIGEST_LEN => Ok(&self.txs[*p]),
            Some([_]) => Err(LedgerError::NotFound),
            Some(_) => Err(LedgerError::Ambiguous(*dai)),
        }
    }

    /// First transaction of `kind` whose payload equals `payload`.
    pub fn find_payload(&self, kind: TxKind, payload: &[u8]) -> Option<&Transaction> {
        self.txs.iter().find(|t| t.kind == kind && t.data == payload)
    }

    pub fn last_ta(&self) -> Option<Tid> {
        self.state.last_ta
    }

    pub fn transactions(&self) -> &[Transaction] {
        &self.txs
    }

    /// Mutable access for fault injection. Indexes are not updated.
    #[doc(hidden)]
    pub fn transactions_mut(&mut self) -> &mut [Transaction] {
        &mut self.txs
    }

    pub fn len(&self) -> usize {
        self.txs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.txs.is_empty()
    }

    pub fn payload_bytes(&self, kind: TxKind) -> usize {
        self.txs.iter().filter(|t| t.kind == kind).map(|t| t.data.len()).sum()
    }

    pub fn count(&self, kind: TxKind) -> usize {
        self.txs.iter().filter(|t| t.kind == kind).count()
    }

    /// Re-validates every transaction in order from scratch.
    pub fn verify_chain(&self) -> Vec<Finding> {
        let mut state = ChainState::default();
        let mut findings = Vec::new();
        for (position, tx) in self.txs.iter().enumerate() {
            findings.extend(
                state
                    .check(tx, &self.txs)
                    .into_iter()
                    .map(|kind| Finding { position, tid: tx.tid, kind }),
            );
            state.admit(tx, position);
        }
        findings
    }
}

/// A ledger behind a reader–writer lock: appends are serialized, readers
/// always see a complete prefix.
#[derive(Debug, Clone, Default)]
pub struct SharedLedger(Arc<RwLock<Ledger>>);

impl SharedLedger {
    pub fn new(ledger: Ledger) -> Self {
        Self(Arc::new(RwLock::new(ledger)))
    }

    pub fn append(&self, tx: Transaction) -> Result<usize, LedgerError> {
        self.0.write().expect("ledger lock poisoned").append(tx)
    }

    pub fn read<T>(&self, f: impl FnOnce(&Ledger) -> T) -> T {
        f(&self.0.read().expect("ledger lock poisoned"))
    }
}
