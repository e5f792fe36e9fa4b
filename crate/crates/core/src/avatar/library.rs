use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::AvatarError;

pub const DEFAULT_TEMPLATE_LEN: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub name: String,
    pub templates: Vec<String>,
}

/// Code module templates, one list per avatar slot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeModuleLibrary {
    slots: Vec<Slot>,
}

impl CodeModuleLibrary {
    pub fn new(slots: Vec<Slot>) -> Result<Self, AvatarError> {
        let lib = Self { slots };
        lib.validate()?;
        Ok(lib)
    }

    fn validate(&self) -> Result<(), AvatarError> {
        if self.slots.is_empty() || self.slots.len() > u8::MAX as usize {
            return Err(AvatarError::Library("slot count must be in 1..=255".into()));
        }
        for slot in &self.slots {
            if slot.templates.is_empty() {
                return Err(AvatarError::Library(format!("slot {} has no templates", slot.name)));
            }
            let mut seen = HashSet::new();
            for t in &slot.templates {
                if t.len() > u16::MAX as usize {
                    return Err(AvatarError::Library(format!("template in {} too long", slot.name)));
                }
                if !seen.insert(t) {
                    return Err(AvatarError::Library(format!("duplicate template in {}", slot.name)));
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, AvatarError> {
        let lib: Self = serde_json::from_str(text).map_err(|e| AvatarError::Library(e.to_string()))?;
        lib.validate()?;
        Ok(lib)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("library serializes")
    }

    /// Four slots of four templates, each [`DEFAULT_TEMPLATE_LEN`] bytes,
    /// for a 1 KB avatar. Only 4^4 = 256 distinct avatars exist, so a
    /// deployment serving more people needs [`Self::with_variants`].
    pub fn default_library() -> Self {
        Self::with_variants(4)
    }

    /// The default four slots with `variants` templates each.
    pub fn with_variants(variants: usize) -> Self {
        const SLOTS: [(&str, &str); 4] = [
            ("identity-proof", "present DAI and prove possession of the issuer signature"),
            ("dynamic-verification", "periodically request a live face sample and compare"),
            ("file-transfer", "encrypt outbound files to the peer and log the transfer"),
            ("messaging", "exchange signed messages under the avatar identifier"),
        ];
        let slots = SLOTS
            .iter()
            .map(|(name, duty)| Slot {
                name: name.to_string(),
                templates: (0..variants.max(1)).map(|v| template_text(name, duty, v)).collect(),
            })
            .collect();
        Self { slots }
    }

    pub fn k(&self) -> usize {
        self.slots.len()
    }

    /// `num[i]`: number of templates available in slot `i`.
    pub fn num(&self, slot: usize) -> usize {
        self.slots[slot].templates.len()
    }

    pub fn template(&self, slot: usize, index: usize) -> &[u8] {
        self.slots[slot].templates[index].as_bytes()
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }
}

fn template_text(name: &str, duty: &str, variant: usize) -> String {
    let mut s = format!("module {name} v{variant}\n// {duty}\n");
    let mut step = 0;
    while s.len() < DEFAULT_TEMPLATE_LEN {
        s.push_str(&format!("step {step}: {name}.op{variant}.{step}();\n"));
        step += 1;
    }
    s.truncate(DEFAULT_TEMPLATE_LEN - 1);
    s.push('\n');
    s
}
