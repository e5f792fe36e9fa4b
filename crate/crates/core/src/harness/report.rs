use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::ledger::{TxKind, TIMESTAMP_LEN};
use crate::protocol::{PhaseTimings, System};

use super::state::People;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub digitization_ms: f64,
    pub generation_ms: f64,
    pub accountability_ms: f64,
    pub total_ms: f64,
    pub digitizations: u32,
    pub generations: u32,
    pub audits: u32,
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

impl From<&PhaseTimings> for TimingReport {
    fn from(t: &PhaseTimings) -> Self {
        Self {
            digitization_ms: ms(t.digitization),
            generation_ms: ms(t.generation),
            accountability_ms: ms(t.accountability),
            total_ms: ms(t.total()),
            digitizations: t.digitizations,
            generations: t.generations,
            audits: t.audits,
        }
    }
}

/// On-chain payload bytes by category.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainBytes {
    /// `H_M` payloads.
    pub tm: usize,
    /// `H_I` payloads.
    pub ti: usize,
    /// `DAI ‖ SI` payloads.
    pub tda: usize,
    /// One registration timestamp per avatar.
    pub timestamps: usize,
    /// `tm + ti + tda + timestamps`.
    pub identity: usize,
    /// Audit log payloads.
    pub ta: usize,
    pub total: usize,
}

impl ChainBytes {
    pub fn from_system(sys: &System) -> Self {
        let l = &sys.ledger;
        let tm = l.payload_bytes(TxKind::Tm);
        let ti = l.payload_bytes(TxKind::Ti);
        let tda = l.payload_bytes(TxKind::Tda);
        let timestamps = TIMESTAMP_LEN * l.count(TxKind::Tda);
        let ta = l.payload_bytes(TxKind::Ta);
        let identity = tm + ti + tda + timestamps;
        Self { tm, ti, tda, timestamps, identity, ta, total: identity + ta }
    }
}

/// Byte and time accounting for a simulation. Every count is recomputed
/// from the artifacts it describes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub identities: usize,
    pub audits: usize,
    pub timings: TimingReport,
    pub chain: ChainBytes,
    /// Packed IRI bytes held by each storage server.
    pub servers: Vec<usize>,
    pub server_total: usize,
    /// Key material every person must keep, summed.
    pub user_local_bytes: usize,
    pub gas: String,
    /// Problems found by `verify_chain`.
    pub ledger_findings: Vec<String>,
    /// Tamper attempts the run detected.
    pub detections: Vec<String>,
    /// One line per scenario step.
    pub steps: Vec<String>,
}

impl RunReport {
    pub fn from_system(sys: &System, people: &People) -> Self {
        let b = sys.params.b;
        let servers: Vec<usize> = sys
            .storage
            .iter()
            .map(|ss| ss.records.values().map(|iri| iri.pack(b).map_or(0, |p| p.len())).sum())
            .collect();
        let user_local_bytes = people
            .values()
            .filter_map(|p| p.credential())
            .map(|c| c.local_key_bytes())
            .sum();
        Self {
            identities: sys.ledger.count(TxKind::Tda),
            audits: sys.ledger.count(TxKind::Ta),
            timings: TimingReport::from(&sys.timings),
            chain: ChainBytes::from_system(sys),
            server_total: servers.iter().sum(),
            servers,
            user_local_bytes,
            gas: "not measured".into(),
            ledger_findings: sys
                .ledger
                .verify_chain()
                .iter()
                .map(|f| format!("#{} {}: {:?}", f.position, f.tid, f.kind))
                .collect(),
            detections: Vec::new(),
            steps: Vec::new(),
        }
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.steps {
            writeln!(f, "step  {s}")?;
        }
        let t = &self.timings;
        writeln!(f, "identities            {}", self.identities)?;
        writeln!(f, "audits                {}", self.audits)?;
        writeln!(f, "digitization          {:.4} ms over {}", t.digitization_ms, t.digitizations)?;
        writeln!(f, "generation            {:.4} ms over {}", t.generation_ms, t.generations)?;
        writeln!(f, "accountability        {:.4} ms over {}", t.accountability_ms, t.audits)?;
        writeln!(f, "total                 {:.4} ms", t.total_ms)?;
        let c = &self.chain;
        writeln!(
            f,
            "chain bytes           {} (TM {} + TI {} + TDA {} + timestamps {}) + audits {} = {}",
            c.identity, c.tm, c.ti, c.tda, c.timestamps, c.ta, c.total
        )?;
        writeln!(f, "server bytes          {} {:?}", self.server_total, self.servers)?;
        writeln!(f, "user local bytes      {}", self.user_local_bytes)?;
        writeln!(f, "gas                   {}", self.gas)?;
        for d in &self.detections {
            writeln!(f, "detected  {d}")?;
        }
        for l in &self.ledger_findings {
            writeln!(f, "ledger    {l}")?;
        }
        Ok(())
    }
}
