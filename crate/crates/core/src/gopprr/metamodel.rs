//! Meta-meta model: the six GOPPRR kind namespaces and the binding
//! rules between them.
//!
//! A metamodel declares what kinds exist (graphs, objects, points,
//! properties, roles, relationships), which property slots each kind
//! carries, and how relationships bind: every relationship kind names
//! exactly two role kinds, and every role kind lists the object and
//! point kinds it may attach to.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

/// A kind with declared property slots (graphs, objects, points).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KindDef {
    #[serde(default)]
    pub properties: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationshipKindDef {
    #[serde(default)]
    pub properties: BTreeSet<String>,
    /// The two role kinds this relationship carries, in order.
    pub roles: [String; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleKindDef {
    #[serde(default)]
    pub properties: BTreeSet<String>,
    /// Object and point kinds this role may attach to.
    pub targets: BTreeSet<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetaModel {
    pub name: String,
    #[serde(default)]
    pub property_kinds: BTreeSet<String>,
    #[serde(default)]
    pub graph_kinds: BTreeMap<String, KindDef>,
    #[serde(default)]
    pub object_kinds: BTreeMap<String, KindDef>,
    #[serde(default)]
    pub point_kinds: BTreeMap<String, KindDef>,
    #[serde(default)]
    pub role_kinds: BTreeMap<String, RoleKindDef>,
    #[serde(default)]
    pub relationship_kinds: BTreeMap<String, RelationshipKindDef>,
}

impl MetaModel {
    /// Internal consistency: every kind reference inside the metamodel
    /// must resolve. Returns human-readable issues; empty means sound.
    pub fn check(&self) -> Vec<String> {
        let mut issues = Vec::new();
        let mut check_properties = |owner: &str, props: &BTreeSet<String>| {
            for p in props {
                if !self.property_kinds.contains(p) {
                    issues.push(format!("{owner} declares unknown property kind {p:?}"));
                }
            }
        };
        for (name, def) in &self.graph_kinds {
            check_properties(&format!("graph kind {name:?}"), &def.properties);
        }
        for (name, def) in &self.object_kinds {
            check_properties(&format!("object kind {name:?}"), &def.properties);
        }
        for (name, def) in &self.point_kinds {
            check_properties(&format!("point kind {name:?}"), &def.properties);
        }
        for (name, def) in &self.role_kinds {
            check_properties(&format!("role kind {name:?}"), &def.properties);
        }
        for (name, def) in &self.relationship_kinds {
            check_properties(&format!("relationship kind {name:?}"), &def.properties);
        }

        for (name, def) in &self.role_kinds {
            for target in &def.targets {
                if !self.object_kinds.contains_key(target) && !self.point_kinds.contains_key(target)
                {
                    issues.push(format!(
                        "role kind {name:?} targets unknown object/point kind {target:?}"
                    ));
                }
            }
        }
        for (name, def) in &self.relationship_kinds {
            for role in &def.roles {
                if !self.role_kinds.contains_key(role) {
                    issues.push(format!(
                        "relationship kind {name:?} references unknown role kind {role:?}"
                    ));
                }
            }
        }
        issues
    }

    /// Canonical byte form (compact JSON; all maps are ordered).
    pub fn to_bytes(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("metamodel serializes")
    }

    /// Parse and check a metamodel document.
    pub fn from_bytes(bytes: &[u8]) -> Result<MetaModel, super::DeaError> {
        let meta: MetaModel = serde_json::from_slice(bytes)
            .map_err(|e| super::DeaError::Parse(format!("metamodel: {e}")))?;
        let issues = meta.check();
        if !issues.is_empty() {
            return Err(super::DeaError::Parse(format!(
                "metamodel is inconsistent: {}",
                issues.join("; ")
            )));
        }
        Ok(meta)
    }
}
