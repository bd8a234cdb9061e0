//! Decomposition of a graph into its element multisets.
//!
//! A model is the sum of its objects, relationships, roles, points and
//! properties. [`decompose`] flattens a [`GopprrGraph`] into those five
//! multisets (plus the graph skeleton that contains them) and
//! [`reconstruct`] rebuilds an equal graph from any ordering of the
//! parts, which is what makes the sum a sum.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::graph::{
    GopprrGraph, GraphBody, ObjectInst, PointInst, RelationshipInst, RoleInst, RoleTarget,
};
use super::DeaError;

/// Path to the element a property sits on.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropertyOwner {
    Graph {
        graph: String,
    },
    Object {
        graph: String,
        object: String,
    },
    Point {
        graph: String,
        object: String,
        point: String,
    },
    Relationship {
        graph: String,
        relationship: String,
    },
    Role {
        graph: String,
        relationship: String,
        position: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PropertyPart {
    pub owner: PropertyOwner,
    pub key: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ObjectPart {
    pub graph: String,
    pub object: String,
    pub kind: String,
    pub decomposition: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PointPart {
    pub graph: String,
    pub object: String,
    pub point: String,
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RelationshipPart {
    pub graph: String,
    pub relationship: String,
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RolePart {
    pub graph: String,
    pub relationship: String,
    pub position: usize,
    pub kind: String,
    pub target: Option<RoleTarget>,
}

/// The five element multisets plus the graph skeleton.
///
/// The skeleton (root id and per-graph kinds) is the container the sum
/// lives in, not one of the summands.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphParts {
    pub root: String,
    /// (graph id, graph kind) pairs.
    pub graphs: Vec<(String, String)>,
    pub objects: Vec<ObjectPart>,
    pub points: Vec<PointPart>,
    pub relationships: Vec<RelationshipPart>,
    pub roles: Vec<RolePart>,
    pub properties: Vec<PropertyPart>,
}

impl GraphParts {
    pub fn len(&self) -> usize {
        self.graphs.len()
            + self.objects.len()
            + self.points.len()
            + self.relationships.len()
            + self.roles.len()
            + self.properties.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn decompose(graph: &GopprrGraph) -> GraphParts {
    let mut parts = GraphParts {
        root: graph.root.clone(),
        graphs: Vec::new(),
        objects: Vec::new(),
        points: Vec::new(),
        relationships: Vec::new(),
        roles: Vec::new(),
        properties: Vec::new(),
    };
    let prop =
        |owner: PropertyOwner, map: &BTreeMap<String, String>, out: &mut Vec<PropertyPart>| {
            for (key, value) in map {
                out.push(PropertyPart {
                    owner: owner.clone(),
                    key: key.clone(),
                    value: value.clone(),
                });
            }
        };

    for (graph_id, body) in &graph.graphs {
        parts.graphs.push((graph_id.clone(), body.kind.clone()));
        prop(
            PropertyOwner::Graph {
                graph: graph_id.clone(),
            },
            &body.properties,
            &mut parts.properties,
        );
        for (object_id, object) in &body.objects {
            parts.objects.push(ObjectPart {
                graph: graph_id.clone(),
                object: object_id.clone(),
                kind: object.kind.clone(),
                decomposition: object.decomposition.clone(),
            });
            prop(
                PropertyOwner::Object {
                    graph: graph_id.clone(),
                    object: object_id.clone(),
                },
                &object.properties,
                &mut parts.properties,
            );
            for (point_id, point) in &object.points {
                parts.points.push(PointPart {
                    graph: graph_id.clone(),
                    object: object_id.clone(),
                    point: point_id.clone(),
                    kind: point.kind.clone(),
                });
                prop(
                    PropertyOwner::Point {
                        graph: graph_id.clone(),
                        object: object_id.clone(),
                        point: point_id.clone(),
                    },
                    &point.properties,
                    &mut parts.properties,
                );
            }
        }
        for (rel_id, rel) in &body.relationships {
            parts.relationships.push(RelationshipPart {
                graph: graph_id.clone(),
                relationship: rel_id.clone(),
                kind: rel.kind.clone(),
            });
            prop(
                PropertyOwner::Relationship {
                    graph: graph_id.clone(),
                    relationship: rel_id.clone(),
                },
                &rel.properties,
                &mut parts.properties,
            );
            for (position, role) in rel.roles.iter().enumerate() {
                parts.roles.push(RolePart {
                    graph: graph_id.clone(),
                    relationship: rel_id.clone(),
                    position,
                    kind: role.kind.clone(),
                    target: role.target.clone(),
                });
                prop(
                    PropertyOwner::Role {
                        graph: graph_id.clone(),
                        relationship: rel_id.clone(),
                        position,
                    },
                    &role.properties,
                    &mut parts.properties,
                );
            }
        }
    }
    parts
}

/// Rebuild a graph from parts. Order within each multiset does not
/// matter; the result is independent of it.
pub fn reconstruct(parts: &GraphParts) -> Result<GopprrGraph, DeaError> {
    let mut graph = GopprrGraph {
        root: parts.root.clone(),
        graphs: BTreeMap::new(),
    };
    for (graph_id, kind) in &parts.graphs {
        let prior = graph.graphs.insert(
            graph_id.clone(),
            GraphBody {
                kind: kind.clone(),
                ..Default::default()
            },
        );
        if prior.is_some() {
            return Err(DeaError::Parse(format!("duplicate graph part {graph_id}")));
        }
    }

    for part in &parts.objects {
        let body = graph.graphs.get_mut(&part.graph).ok_or_else(|| {
            DeaError::Parse(format!(
                "object part {} names missing graph {}",
                part.object, part.graph
            ))
        })?;
        let prior = body.objects.insert(
            part.object.clone(),
            ObjectInst {
                kind: part.kind.clone(),
                properties: BTreeMap::new(),
                points: BTreeMap::new(),
                decomposition: part.decomposition.clone(),
            },
        );
        if prior.is_some() {
            return Err(DeaError::Parse(format!(
                "duplicate object part {}.{}",
                part.graph, part.object
            )));
        }
    }

    for part in &parts.points {
        let object = graph
            .graphs
            .get_mut(&part.graph)
            .and_then(|b| b.objects.get_mut(&part.object))
            .ok_or_else(|| {
                DeaError::Parse(format!(
                    "point part {} names missing object {}.{}",
                    part.point, part.graph, part.object
                ))
            })?;
        let prior = object.points.insert(
            part.point.clone(),
            PointInst {
                kind: part.kind.clone(),
                properties: BTreeMap::new(),
            },
        );
        if prior.is_some() {
            return Err(DeaError::Parse(format!(
                "duplicate point part {}.{}.{}",
                part.graph, part.object, part.point
            )));
        }
    }

    for part in &parts.relationships {
        let body = graph.graphs.get_mut(&part.graph).ok_or_else(|| {
            DeaError::Parse(format!(
                "relationship part {} names missing graph {}",
                part.relationship, part.graph
            ))
        })?;
        let prior = body.relationships.insert(
            part.relationship.clone(),
            RelationshipInst {
                kind: part.kind.clone(),
                properties: BTreeMap::new(),
                roles: Vec::new(),
            },
        );
        if prior.is_some() {
            return Err(DeaError::Parse(format!(
                "duplicate relationship part {}.{}",
                part.graph, part.relationship
            )));
        }
    }

    // roles are positional: collect, then lay out each relationship's
    // role vector as the contiguous positions 0..n
    let mut roles: BTreeMap<(String, String), Vec<&RolePart>> = BTreeMap::new();
    for part in &parts.roles {
        roles
            .entry((part.graph.clone(), part.relationship.clone()))
            .or_default()
            .push(part);
    }
    for ((graph_id, rel_id), mut group) in roles {
        group.sort_by_key(|p| p.position);
        let rel = graph
            .graphs
            .get_mut(&graph_id)
            .and_then(|b| b.relationships.get_mut(&rel_id))
            .ok_or_else(|| {
                DeaError::Parse(format!(
                    "role part names missing relationship {graph_id}.{rel_id}"
                ))
            })?;
        for (expected, part) in group.iter().enumerate() {
            if part.position != expected {
                return Err(DeaError::Parse(format!(
                    "role positions for {graph_id}.{rel_id} are not contiguous"
                )));
            }
            rel.roles.push(RoleInst {
                kind: part.kind.clone(),
                properties: BTreeMap::new(),
                target: part.target.clone(),
            });
        }
    }

    for part in &parts.properties {
        let missing = || {
            DeaError::Parse(format!(
                "property part {} names a missing owner {:?}",
                part.key, part.owner
            ))
        };
        let map = match &part.owner {
            PropertyOwner::Graph { graph: g } => {
                &mut graph.graphs.get_mut(g).ok_or_else(missing)?.properties
            }
            PropertyOwner::Object { graph: g, object } => {
                &mut graph
                    .graphs
                    .get_mut(g)
                    .and_then(|b| b.objects.get_mut(object))
                    .ok_or_else(missing)?
                    .properties
            }
            PropertyOwner::Point {
                graph: g,
                object,
                point,
            } => {
                &mut graph
                    .graphs
                    .get_mut(g)
                    .and_then(|b| b.objects.get_mut(object))
                    .and_then(|o| o.points.get_mut(point))
                    .ok_or_else(missing)?
                    .properties
            }
            PropertyOwner::Relationship {
                graph: g,
                relationship,
            } => {
                &mut graph
                    .graphs
                    .get_mut(g)
                    .and_then(|b| b.relationships.get_mut(relationship))
                    .ok_or_else(missing)?
                    .properties
            }
            PropertyOwner::Role {
                graph: g,
                relationship,
                position,
            } => {
                &mut graph
                    .graphs
                    .get_mut(g)
                    .and_then(|b| b.relationships.get_mut(relationship))
                    .and_then(|r| r.roles.get_mut(*position))
                    .ok_or_else(missing)?
                    .properties
            }
        };
        if map.insert(part.key.clone(), part.value.clone()).is_some() {
            return Err(DeaError::Parse(format!(
                "duplicate property part {}",
                part.key
            )));
        }
    }

    Ok(graph)
}
