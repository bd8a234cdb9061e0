//! Off-ledger discovery index.
//!
//! The registry is a convenience: entries point at ledger addresses,
//! the ledger stays the source of truth. Entries are announced only
//! after a successful attach, so a search hit always resolves (or
//! fails authentication for lack of credentials), never to a missing
//! address.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::gopprr::{DeaRecord, Dikw};
use crate::hashing::Digest;
use crate::mam::ChannelMode;

use super::{MarketError, PublishReceipt};

/// Tags embedding a record's marketplace coordinates, so searches can
/// filter on them like on any other tag.
pub fn coordinate_tags(record: &DeaRecord) -> Vec<String> {
    vec![
        format!("view:{}", record.view),
        format!("alpha:{}", record.alpha),
    ]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarketEntry {
    pub address: Digest,
    pub tags: Vec<String>,
    pub description: String,
    pub mode: ChannelMode,
    pub publisher_id: String,
    /// Milliseconds, publisher clock.
    pub timestamp: u64,
}

impl MarketEntry {
    /// Entry for a completed publish: the record's own tags plus its
    /// coordinate tags.
    pub fn from_publish(
        receipt: &PublishReceipt,
        record: &DeaRecord,
        publisher_id: impl Into<String>,
        timestamp: u64,
    ) -> MarketEntry {
        let mut tags = record.tags.clone();
        for tag in coordinate_tags(record) {
            if !tags.contains(&tag) {
                tags.push(tag);
            }
        }
        MarketEntry {
            address: receipt.address,
            tags,
            description: record.description.clone(),
            mode: receipt.mode,
            publisher_id: publisher_id.into(),
            timestamp,
        }
    }

    fn has_all(&self, required: &BTreeSet<&str>) -> bool {
        required
            .iter()
            .all(|t| self.tags.iter().any(|have| have == t))
    }
}

/// In-process registry, persistable as one JSON entry per line.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Registry {
    entries: Vec<MarketEntry>,
}

impl Registry {
    pub fn new() -> Self {
        Registry::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[MarketEntry] {
        &self.entries
    }

    /// Add or replace the entry for an address. Addresses are unique;
    /// re-announcing updates in place.
    pub fn announce(&mut self, entry: MarketEntry) {
        match self.entries.iter_mut().find(|e| e.address == entry.address) {
            Some(existing) => *existing = entry,
            None => self.entries.push(entry),
        }
    }

    /// Entries whose tags contain every query tag (and the optional
    /// coordinate filters), newest first.
    pub fn search(
        &self,
        tags: &[String],
        view: Option<&str>,
        alpha: Option<Dikw>,
    ) -> Vec<&MarketEntry> {
        let mut required: BTreeSet<&str> = tags.iter().map(String::as_str).collect();
        let view_tag = view.map(|v| format!("view:{v}"));
        let alpha_tag = alpha.map(|a| format!("alpha:{a}"));
        if let Some(t) = &view_tag {
            required.insert(t);
        }
        if let Some(t) = &alpha_tag {
            required.insert(t);
        }
        let mut hits: Vec<(usize, &MarketEntry)> = self
            .entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.has_all(&required))
            .collect();
        hits.sort_by(|(ia, a), (ib, b)| b.timestamp.cmp(&a.timestamp).then(ib.cmp(ia)));
        hits.into_iter().map(|(_, e)| e).collect()
    }

    pub fn save(&self, path: &Path) -> Result<(), MarketError> {
        let mut out = String::new();
        for entry in &self.entries {
            out.push_str(&serde_json::to_string(entry).expect("entry serializes"));
            out.push('\n');
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, MarketError> {
        let text = std::fs::read_to_string(path)?;
        let mut registry = Registry::new();
        for (number, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let entry: MarketEntry = serde_json::from_str(line).map_err(|e| {
                MarketError::Integrity(format!("registry line {}: {e}", number + 1))
            })?;
            registry.announce(entry);
        }
        Ok(registry)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hashing::sha256;
    use tempfile::TempDir;

    fn entry(address: &[u8], tags: &[&str], timestamp: u64) -> MarketEntry {
        MarketEntry {
            address: sha256(&[address]),
            tags: tags.iter().map(|s| s.to_string()).collect(),
            description: "entry".into(),
            mode: ChannelMode::Public,
            publisher_id: "seller".into(),
            timestamp,
        }
    }

    #[test]
    fn empty_registry_matches_nothing() {
        let registry = Registry::new();
        assert!(registry.search(&[], None, None).is_empty());
        assert!(registry.search(&["embedded".into()], None, None).is_empty());
    }

    #[test]
    fn superset_matching() {
        let mut registry = Registry::new();
        registry.announce(entry(b"a", &["vehicle", "embedded", "requirement"], 10));

        let hit = registry.search(&["embedded".into()], None, None);
        assert_eq!(hit.len(), 1);
        assert!(registry
            .search(&["embedded".into(), "thermal".into()], None, None)
            .is_empty());
    }

    #[test]
    fn coordinate_filters_and_order() {
        let mut registry = Registry::new();
        registry.announce(entry(
            b"a",
            &["demo", "view:requirement", "alpha:information"],
            10,
        ));
        registry.announce(entry(
            b"b",
            &["demo", "view:function", "alpha:information"],
            30,
        ));
        registry.announce(entry(b"c", &["demo", "view:requirement", "alpha:data"], 20));

        let all = registry.search(&["demo".into()], None, None);
        let stamps: Vec<u64> = all.iter().map(|e| e.timestamp).collect();
        assert_eq!(stamps, vec![30, 20, 10]);

        let reqs = registry.search(&[], Some("requirement"), None);
        assert_eq!(reqs.len(), 2);
        let info_reqs = registry.search(&[], Some("requirement"), Some(Dikw::Information));
        assert_eq!(info_reqs.len(), 1);
        assert_eq!(info_reqs[0].timestamp, 10);
    }

    #[test]
    fn announce_replaces_by_address() {
        let mut registry = Registry::new();
        registry.announce(entry(b"a", &["old"], 1));
        registry.announce(entry(b"a", &["new"], 2));
        assert_eq!(registry.len(), 1);
        assert_eq!(registry.entries()[0].tags, vec!["new"]);
    }

    #[test]
    fn file_roundtrip() {
        let mut registry = Registry::new();
        registry.announce(entry(b"a", &["vehicle", "view:requirement"], 10));
        registry.announce(entry(b"b", &["embedded"], 20));

        let dir = TempDir::new().unwrap();
        let path = dir.path().join("registry.jsonl");
        registry.save(&path).unwrap();
        let loaded = Registry::load(&path).unwrap();
        assert_eq!(loaded, registry);

        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(Registry::load(&dir.path().join("missing.jsonl")).is_err());
    }
}
