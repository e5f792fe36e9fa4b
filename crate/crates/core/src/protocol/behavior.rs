use serde::{Deserialize, Serialize};

/// Append-only activity log standing in for the avatar behaviour chain.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BehaviorLog {
    entries: Vec<BehaviorEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BehaviorEntry {
    /// DAI in hex, or a pseudonym.
    pub subject: String,
    pub action: String,
    pub timestamp: String,
}

impl BehaviorLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn log(&mut self, subject: &str, action: &str, timestamp: &str) -> usize {
        self.entries.push(BehaviorEntry {
            subject: subject.to_string(),
            action: action.to_string(),
            timestamp: timestamp.to_string(),
        });
        self.entries.len() - 1
    }

    pub fn entries(&self) -> &[BehaviorEntry] {
        &self.entries
    }

    pub fn entries_for<'a>(&'a self, subject: &'a str) -> impl Iterator<Item = &'a BehaviorEntry> + 'a {
        self.entries.iter().filter(move |e| e.subject == subject)
    }

    /// One JSON object per line.
    pub fn to_json_lines(&self) -> String {
        self.entries
            .iter()
            .map(|e| serde_json::to_string(e).expect("entry serializes") + "\n")
            .collect()
    }

    pub fn from_json_lines(text: &str) -> Result<Self, serde_json::Error> {
        let entries = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<Result<_, _>>()?;
        Ok(Self { entries })
    }
}
