use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;

use super::{Ledger, LedgerError, Transaction};

/// Writes one base64 record per line.
pub fn write_journal(ledger: &Ledger, path: &Path) -> Result<(), LedgerError> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for tx in ledger.transactions() {
        writeln!(w, "{}", STANDARD.encode(tx.to_record()))?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a journal without validating it; call `verify_chain` on the result.
pub fn read_journal(path: &Path) -> Result<Ledger, LedgerError> {
    let text = fs::read_to_string(path)?;
    let mut txs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let rec = STANDARD
            .decode(line)
            .map_err(|e| LedgerError::Journal(format!("line {}: {e}", lineno + 1)))?;
        txs.push(Transaction::from_record(&rec)?);
    }
    Ok(Ledger::from_transactions_unchecked(txs))
}
