//! Instance graphs: models conforming to a metamodel.
//!
//! A model is a forest of graph bodies keyed by id. One graph is the
//! root; any object may decompose into another graph, and those
//! decomposition edges must form a tree over the graphs. All
//! containers are ordered maps, so two equal models always serialize
//! to identical bytes no matter how they were built.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::DeaError;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointInst {
    pub kind: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub properties: BTreeMap<String, String>,
}

/// What a role attaches to. A point is named through its owning
/// object, so the two variants are distinguishable by shape.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RoleTarget {
    Point { object: String, point: String },
    Object { object: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleInst {
    pub kind: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub properties: BTreeMap<String, String>,
    /// None models a dangling role: syntactically representable,
    /// semantically a validation violation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<RoleTarget>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationshipInst {
    pub kind: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub properties: BTreeMap<String, String>,
    pub roles: Vec<RoleInst>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectInst {
    pub kind: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub properties: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub points: BTreeMap<String, PointInst>,
    /// Id of the graph this object decomposes into.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphBody {
    pub kind: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub properties: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub objects: BTreeMap<String, ObjectInst>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub relationships: BTreeMap<String, RelationshipInst>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GopprrGraph {
    /// Id of the top-level graph.
    pub root: String,
    pub graphs: BTreeMap<String, GraphBody>,
}

impl GopprrGraph {
    /// Single-graph model with no content.
    pub fn empty(root_id: impl Into<String>, kind: impl Into<String>) -> Self {
        let root = root_id.into();
        let mut graphs = BTreeMap::new();
        graphs.insert(
            root.clone(),
            GraphBody {
                kind: kind.into(),
                ..GraphBody::default()
            },
        );
        GopprrGraph { root, graphs }
    }

    pub fn root_body(&self) -> Option<&GraphBody> {
        self.graphs.get(&self.root)
    }
}

/// Canonical byte form of a model: compact JSON with every container
/// ordered. Equal models yield identical bytes.
pub fn serialize_graph(graph: &GopprrGraph) -> Vec<u8> {
    serde_json::to_vec(graph).expect("graph serializes")
}

/// Inverse of [`serialize_graph`]. Malformed input reports the
/// location the parser stopped at.
pub fn parse_graph(bytes: &[u8]) -> Result<GopprrGraph, DeaError> {
    serde_json::from_slice(bytes).map_err(|e| DeaError::Parse(format!("graph document: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> GopprrGraph {
        let mut g = GopprrGraph::empty("g0", "RequirementDiagram");
        let body = g.graphs.get_mut("g0").unwrap();
        body.properties.insert("name".into(), "demo".into());
        body.objects.insert(
            "o1".into(),
            ObjectInst {
                kind: "Requirement".into(),
                properties: [("text".to_string(), "shall work".to_string())].into(),
                points: BTreeMap::new(),
                decomposition: None,
            },
        );
        body.objects.insert(
            "o2".into(),
            ObjectInst {
                kind: "Function".into(),
                properties: BTreeMap::new(),
                points: [(
                    "p1".to_string(),
                    PointInst {
                        kind: "Port".into(),
                        properties: BTreeMap::new(),
                    },
                )]
                .into(),
                decomposition: None,
            },
        );
        body.relationships.insert(
            "r1".into(),
            RelationshipInst {
                kind: "Satisfies".into(),
                properties: BTreeMap::new(),
                roles: vec![
                    RoleInst {
                        kind: "satisfier".into(),
                        properties: BTreeMap::new(),
                        target: Some(RoleTarget::Object {
                            object: "o2".into(),
                        }),
                    },
                    RoleInst {
                        kind: "satisfied".into(),
                        properties: BTreeMap::new(),
                        target: Some(RoleTarget::Object {
                            object: "o1".into(),
                        }),
                    },
                ],
            },
        );
        g
    }

    #[test]
    fn roundtrip() {
        let g = sample();
        let bytes = serialize_graph(&g);
        assert_eq!(parse_graph(&bytes).unwrap(), g);
    }

    #[test]
    fn serialization_ignores_insertion_order() {
        let forward = sample();
        // rebuild inserting objects and relationships in reverse
        let mut reversed = GopprrGraph::empty("g0", "RequirementDiagram");
        let src = forward.graphs.get("g0").unwrap();
        let dst = reversed.graphs.get_mut("g0").unwrap();
        for (k, v) in src.relationships.iter().rev() {
            dst.relationships.insert(k.clone(), v.clone());
        }
        for (k, v) in src.objects.iter().rev() {
            dst.objects.insert(k.clone(), v.clone());
        }
        for (k, v) in src.properties.iter().rev() {
            dst.properties.insert(k.clone(), v.clone());
        }
        assert_eq!(serialize_graph(&reversed), serialize_graph(&forward));
    }

    #[test]
    fn role_target_shapes() {
        let obj = RoleTarget::Object {
            object: "o1".into(),
        };
        let pt = RoleTarget::Point {
            object: "o1".into(),
            point: "p2".into(),
        };
        let obj_json = serde_json::to_string(&obj).unwrap();
        let pt_json = serde_json::to_string(&pt).unwrap();
        assert_eq!(serde_json::from_str::<RoleTarget>(&obj_json).unwrap(), obj);
        assert_eq!(serde_json::from_str::<RoleTarget>(&pt_json).unwrap(), pt);
    }

    #[test]
    fn truncated_document_is_a_parse_error() {
        let bytes = serialize_graph(&sample());
        let err = parse_graph(&bytes[..bytes.len() / 2]).unwrap_err();
        let text = err.to_string();
        assert!(text.contains("column") || text.contains("line"), "{text}");
    }
}
