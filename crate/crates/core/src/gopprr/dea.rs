//! Records: graphs stamped with marketplace coordinates.
//!
//! A record fixes a serialized graph to a position in the asset space:
//! which system it belongs to, which asset it is, where in the
//! development process it sits, which view it shows, and which DIKW
//! level it carries. Collections group records of one system and
//! enforce coordinate uniqueness.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::graph::{parse_graph, serialize_graph, GopprrGraph};
use super::metamodel::MetaModel;
use super::validate::validate_graph;
use super::DeaError;

/// The four DIKW levels an asset can be declared at.
///
/// The level is caller-declared metadata; nothing infers it from the
/// graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dikw {
    Data,
    Information,
    Knowledge,
    Wisdom,
}

impl Dikw {
    pub const ALL: [Dikw; 4] = [Dikw::Data, Dikw::Information, Dikw::Knowledge, Dikw::Wisdom];

    pub fn as_str(self) -> &'static str {
        match self {
            Dikw::Data => "data",
            Dikw::Information => "information",
            Dikw::Knowledge => "knowledge",
            Dikw::Wisdom => "wisdom",
        }
    }
}

impl fmt::Display for Dikw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Dikw {
    type Err = DeaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "data" => Ok(Dikw::Data),
            "information" => Ok(Dikw::Information),
            "knowledge" => Ok(Dikw::Knowledge),
            "wisdom" => Ok(Dikw::Wisdom),
            other => Err(DeaError::Parse(format!(
                "unknown DIKW level {other:?}, expected data|information|knowledge|wisdom"
            ))),
        }
    }
}

/// Position on the development-process axis: a timestamp plus an
/// optional stage label ("design", "verification", ...).
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProcessTime {
    pub timestamp: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage: Option<String>,
}

impl ProcessTime {
    pub fn at(timestamp: u64) -> Self {
        ProcessTime {
            timestamp,
            stage: None,
        }
    }

    pub fn staged(timestamp: u64, stage: impl Into<String>) -> Self {
        ProcessTime {
            timestamp,
            stage: Some(stage.into()),
        }
    }
}

impl fmt::Display for ProcessTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.stage {
            Some(stage) => write!(f, "{}/{}", self.timestamp, stage),
            None => write!(f, "{}", self.timestamp),
        }
    }
}

impl FromStr for ProcessTime {
    type Err = DeaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (ts, stage) = match s.split_once('/') {
            Some((ts, stage)) => (ts, Some(stage.to_string())),
            None => (s, None),
        };
        let timestamp = ts.parse::<u64>().map_err(|_| {
            DeaError::Parse(format!(
                "bad process time {s:?}, expected <timestamp>[/<stage>]"
            ))
        })?;
        Ok(ProcessTime { timestamp, stage })
    }
}

/// Everything but the payload: where a realized record lands in the
/// asset space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeaDescriptor {
    pub system_id: String,
    pub asset_id: String,
    pub t: ProcessTime,
    pub view: String,
    pub alpha: Dikw,
    pub description: String,
    pub tags: Vec<String>,
}

/// A realized asset: coordinates plus the canonical graph bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeaRecord {
    pub system_id: String,
    pub asset_id: String,
    pub t: ProcessTime,
    pub view: String,
    pub alpha: Dikw,
    /// Canonical [`serialize_graph`] output.
    pub payload: Vec<u8>,
    pub description: String,
    pub tags: Vec<String>,
}

impl DeaRecord {
    /// Parse the payload back into the graph it was realized from.
    pub fn graph(&self) -> Result<GopprrGraph, DeaError> {
        parse_graph(&self.payload)
    }

    /// The uniqueness key within a collection.
    pub fn coordinates(&self) -> (String, ProcessTime, String, Dikw) {
        (
            self.asset_id.clone(),
            self.t.clone(),
            self.view.clone(),
            self.alpha,
        )
    }
}

/// Realize a graph into a record. Refuses graphs that do not validate
/// against `meta`; the error carries the full report.
pub fn realize_dea(
    meta: &MetaModel,
    graph: &GopprrGraph,
    desc: DeaDescriptor,
) -> Result<DeaRecord, DeaError> {
    let report = validate_graph(meta, graph);
    if !report.is_valid() {
        return Err(DeaError::Invalid(report));
    }
    Ok(DeaRecord {
        system_id: desc.system_id,
        asset_id: desc.asset_id,
        t: desc.t,
        view: desc.view,
        alpha: desc.alpha,
        payload: serialize_graph(graph),
        description: desc.description,
        tags: desc.tags,
    })
}

/// File and wire form of a record: the same coordinates with the graph
/// inline instead of as bytes. Field order is fixed, the graph is
/// canonical, so equal records serialize identically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeaDocument {
    pub system_id: String,
    pub asset_id: String,
    pub t: ProcessTime,
    pub view: String,
    pub alpha: Dikw,
    #[serde(default)]
    pub description: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tags: Vec<String>,
    pub graph: GopprrGraph,
}

impl DeaDocument {
    pub fn from_record(record: &DeaRecord) -> Result<Self, DeaError> {
        Ok(DeaDocument {
            system_id: record.system_id.clone(),
            asset_id: record.asset_id.clone(),
            t: record.t.clone(),
            view: record.view.clone(),
            alpha: record.alpha,
            description: record.description.clone(),
            tags: record.tags.clone(),
            graph: record.graph()?,
        })
    }

    pub fn into_record(self) -> DeaRecord {
        DeaRecord {
            system_id: self.system_id,
            asset_id: self.asset_id,
            t: self.t,
            view: self.view,
            alpha: self.alpha,
            payload: serialize_graph(&self.graph),
            description: self.description,
            tags: self.tags,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("document serializes")
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, DeaError> {
        serde_json::from_slice(bytes).map_err(|e| DeaError::Parse(format!("document: {e}")))
    }
}

/// Records of one system, keyed by (asset, t, view, alpha).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeaCollection {
    system_id: String,
    records: BTreeMap<(String, ProcessTime, String, Dikw), DeaRecord>,
}

impl DeaCollection {
    pub fn new(system_id: impl Into<String>) -> Self {
        DeaCollection {
            system_id: system_id.into(),
            records: BTreeMap::new(),
        }
    }

    pub fn system_id(&self) -> &str {
        &self.system_id
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn insert(&mut self, record: DeaRecord) -> Result<(), DeaError> {
        if record.system_id != self.system_id {
            return Err(DeaError::MixedSystemIds {
                expected: self.system_id.clone(),
                found: record.system_id,
            });
        }
        let key = record.coordinates();
        if self.records.contains_key(&key) {
            return Err(DeaError::DuplicateCoordinates(format!(
                "asset={} t={} view={} alpha={}",
                key.0, key.1, key.2, key.3
            )));
        }
        self.records.insert(key, record);
        Ok(())
    }

    pub fn get(
        &self,
        asset_id: &str,
        t: &ProcessTime,
        view: &str,
        alpha: Dikw,
    ) -> Option<&DeaRecord> {
        self.records
            .get(&(asset_id.to_string(), t.clone(), view.to_string(), alpha))
    }

    /// Records in coordinate order.
    pub fn records(&self) -> impl Iterator<Item = &DeaRecord> {
        self.records.values()
    }
}

/// Group records under one system id, enforcing the uniqueness
/// invariant.
pub fn aggregate(
    system_id: impl Into<String>,
    records: impl IntoIterator<Item = DeaRecord>,
) -> Result<DeaCollection, DeaError> {
    let mut collection = DeaCollection::new(system_id);
    for record in records {
        collection.insert(record)?;
    }
    Ok(collection)
}
