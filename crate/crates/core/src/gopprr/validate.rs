//! Binding-rule validation.
//!
//! Violations are data, not exceptions: validation always completes
//! and returns everything it found. A graph is valid exactly when the
//! report is empty.

use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

use super::graph::{GopprrGraph, GraphBody, RoleTarget};
use super::metamodel::MetaModel;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "code", rename_all = "snake_case")]
pub enum Violation {
    UnknownGraphKind {
        graph: String,
        kind: String,
    },
    UnknownObjectKind {
        graph: String,
        object: String,
        kind: String,
    },
    UnknownPointKind {
        graph: String,
        object: String,
        point: String,
        kind: String,
    },
    UnknownRelationshipKind {
        graph: String,
        relationship: String,
        kind: String,
    },
    UnknownRoleKind {
        graph: String,
        relationship: String,
        kind: String,
    },
    /// A relationship must carry exactly two roles.
    RoleCountMismatch {
        graph: String,
        relationship: String,
        count: usize,
    },
    /// The two role kinds do not match the relationship kind's declaration.
    RoleKindsMismatch {
        graph: String,
        relationship: String,
        expected: Vec<String>,
        found: Vec<String>,
    },
    /// A role with no target at all.
    UnboundRole {
        graph: String,
        relationship: String,
        position: usize,
    },
    /// A role targeting an object or point id that is not in the graph.
    RoleTargetMissing {
        graph: String,
        relationship: String,
        position: usize,
        target: String,
    },
    /// The target exists but its kind is not allowed for this role kind.
    DisallowedRoleTarget {
        graph: String,
        relationship: String,
        role_kind: String,
        target_kind: String,
    },
    /// A property key the element's kind does not declare.
    UndeclaredProperty {
        element: String,
        property: String,
    },
    UnknownDecompositionTarget {
        graph: String,
        object: String,
        target: String,
    },
    /// An object decomposing into its own graph or an ancestor graph.
    CyclicDecomposition {
        graph: String,
        object: String,
        target: String,
    },
    /// Two objects claiming the same decomposition graph.
    SharedDecomposition {
        target: String,
        objects: Vec<String>,
    },
    /// A graph unreachable from the root through decompositions.
    OrphanGraph {
        graph: String,
    },
    MissingRootGraph {
        root: String,
    },
}

impl Violation {
    pub fn code(&self) -> &'static str {
        match self {
            Violation::UnknownGraphKind { .. } => "unknown_graph_kind",
            Violation::UnknownObjectKind { .. } => "unknown_object_kind",
            Violation::UnknownPointKind { .. } => "unknown_point_kind",
            Violation::UnknownRelationshipKind { .. } => "unknown_relationship_kind",
            Violation::UnknownRoleKind { .. } => "unknown_role_kind",
            Violation::RoleCountMismatch { .. } => "role_count_mismatch",
            Violation::RoleKindsMismatch { .. } => "role_kinds_mismatch",
            Violation::UnboundRole { .. } => "unbound_role",
            Violation::RoleTargetMissing { .. } => "role_target_missing",
            Violation::DisallowedRoleTarget { .. } => "disallowed_role_target",
            Violation::UndeclaredProperty { .. } => "undeclared_property",
            Violation::UnknownDecompositionTarget { .. } => "unknown_decomposition_target",
            Violation::CyclicDecomposition { .. } => "cyclic_decomposition",
            Violation::SharedDecomposition { .. } => "shared_decomposition",
            Violation::OrphanGraph { .. } => "orphan_graph",
            Violation::MissingRootGraph { .. } => "missing_root_graph",
        }
    }

    /// Every code [`validate_graph`] can emit.
    pub const ALL_CODES: [&'static str; 16] = [
        "unknown_graph_kind",
        "unknown_object_kind",
        "unknown_point_kind",
        "unknown_relationship_kind",
        "unknown_role_kind",
        "role_count_mismatch",
        "role_kinds_mismatch",
        "unbound_role",
        "role_target_missing",
        "disallowed_role_target",
        "undeclared_property",
        "unknown_decomposition_target",
        "cyclic_decomposition",
        "shared_decomposition",
        "orphan_graph",
        "missing_root_graph",
    ];
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(
                f,
                "{} {}",
                v.code(),
                serde_json::to_string(v).unwrap_or_default()
            )?;
        }
        Ok(())
    }
}

/// Check `graph` against `meta` and report every violation found.
pub fn validate_graph(meta: &MetaModel, graph: &GopprrGraph) -> ValidationReport {
    let mut v = Vec::new();

    if !graph.graphs.contains_key(&graph.root) {
        v.push(Violation::MissingRootGraph {
            root: graph.root.clone(),
        });
    }

    for (graph_id, body) in &graph.graphs {
        validate_body(meta, graph, graph_id, body, &mut v);
    }
    validate_decomposition(graph, &mut v);

    ValidationReport { violations: v }
}

fn check_properties(
    declared: Option<&std::collections::BTreeSet<String>>,
    actual: &BTreeMap<String, String>,
    element: &str,
    out: &mut Vec<Violation>,
) {
    // with an unknown kind the declared slots are unknowable; the
    // unknown-kind violation already covers the element
    let Some(declared) = declared else { return };
    for key in actual.keys() {
        if !declared.contains(key) {
            out.push(Violation::UndeclaredProperty {
                element: element.to_string(),
                property: key.clone(),
            });
        }
    }
}

fn validate_body(
    meta: &MetaModel,
    whole: &GopprrGraph,
    graph_id: &str,
    body: &GraphBody,
    out: &mut Vec<Violation>,
) {
    match meta.graph_kinds.get(&body.kind) {
        None => out.push(Violation::UnknownGraphKind {
            graph: graph_id.to_string(),
            kind: body.kind.clone(),
        }),
        Some(def) => check_properties(
            Some(&def.properties),
            &body.properties,
            &format!("graph {graph_id}"),
            out,
        ),
    }

    for (object_id, object) in &body.objects {
        match meta.object_kinds.get(&object.kind) {
            None => out.push(Violation::UnknownObjectKind {
                graph: graph_id.to_string(),
                object: object_id.clone(),
                kind: object.kind.clone(),
            }),
            Some(def) => check_properties(
                Some(&def.properties),
                &object.properties,
                &format!("graph {graph_id} object {object_id}"),
                out,
            ),
        }
        for (point_id, point) in &object.points {
            match meta.point_kinds.get(&point.kind) {
                None => out.push(Violation::UnknownPointKind {
                    graph: graph_id.to_string(),
                    object: object_id.clone(),
                    point: point_id.clone(),
                    kind: point.kind.clone(),
                }),
                Some(def) => check_properties(
                    Some(&def.properties),
                    &point.properties,
                    &format!("graph {graph_id} object {object_id} point {point_id}"),
                    out,
                ),
            }
        }
        if let Some(target) = &object.decomposition {
            if !whole.graphs.contains_key(target) {
                out.push(Violation::UnknownDecompositionTarget {
                    graph: graph_id.to_string(),
                    object: object_id.clone(),
                    target: target.clone(),
                });
            }
        }
    }

    for (rel_id, rel) in &body.relationships {
        let kind_def = meta.relationship_kinds.get(&rel.kind);
        if kind_def.is_none() {
            out.push(Violation::UnknownRelationshipKind {
                graph: graph_id.to_string(),
                relationship: rel_id.clone(),
                kind: rel.kind.clone(),
            });
        } else {
            check_properties(
                kind_def.map(|d| &d.properties),
                &rel.properties,
                &format!("graph {graph_id} relationship {rel_id}"),
                out,
            );
        }

        if rel.roles.len() != 2 {
            out.push(Violation::RoleCountMismatch {
                graph: graph_id.to_string(),
                relationship: rel_id.clone(),
                count: rel.roles.len(),
            });
        } else if let Some(def) = kind_def {
            let found: Vec<String> = rel.roles.iter().map(|r| r.kind.clone()).collect();
            if found != def.roles {
                out.push(Violation::RoleKindsMismatch {
                    graph: graph_id.to_string(),
                    relationship: rel_id.clone(),
                    expected: def.roles.to_vec(),
                    found,
                });
            }
        }

        for (position, role) in rel.roles.iter().enumerate() {
            let role_def = meta.role_kinds.get(&role.kind);
            if role_def.is_none() {
                out.push(Violation::UnknownRoleKind {
                    graph: graph_id.to_string(),
                    relationship: rel_id.clone(),
                    kind: role.kind.clone(),
                });
            } else {
                check_properties(
                    role_def.map(|d| &d.properties),
                    &role.properties,
                    &format!("graph {graph_id} relationship {rel_id} role {position}"),
                    out,
                );
            }

            let Some(target) = &role.target else {
                out.push(Violation::UnboundRole {
                    graph: graph_id.to_string(),
                    relationship: rel_id.clone(),
                    position,
                });
                continue;
            };
            let target_kind = match target {
                RoleTarget::Object { object } => match body.objects.get(object) {
                    Some(o) => Some(o.kind.clone()),
                    None => {
                        out.push(Violation::RoleTargetMissing {
                            graph: graph_id.to_string(),
                            relationship: rel_id.clone(),
                            position,
                            target: object.clone(),
                        });
                        None
                    }
                },
                RoleTarget::Point { object, point } => {
                    match body.objects.get(object).and_then(|o| o.points.get(point)) {
                        Some(p) => Some(p.kind.clone()),
                        None => {
                            out.push(Violation::RoleTargetMissing {
                                graph: graph_id.to_string(),
                                relationship: rel_id.clone(),
                                position,
                                target: format!("{object}.{point}"),
                            });
                            None
                        }
                    }
                }
            };
            if let (Some(kind), Some(def)) = (target_kind, role_def) {
                if !def.targets.contains(&kind) {
                    out.push(Violation::DisallowedRoleTarget {
                        graph: graph_id.to_string(),
                        relationship: rel_id.clone(),
                        role_kind: role.kind.clone(),
                        target_kind: kind,
                    });
                }
            }
        }
    }
}

/// Decomposition edges must form a tree rooted at the root graph:
/// every non-root graph is claimed by exactly one object, and no
/// object decomposes into its own graph or an ancestor.
fn validate_decomposition(graph: &GopprrGraph, out: &mut Vec<Violation>) {
    // who claims each target graph
    let mut claims: BTreeMap<&str, Vec<(String, String)>> = BTreeMap::new();
    for (graph_id, body) in &graph.graphs {
        for (object_id, object) in &body.objects {
            if let Some(target) = &object.decomposition {
                if graph.graphs.contains_key(target) {
                    claims
                        .entry(target.as_str())
                        .or_default()
                        .push((graph_id.clone(), object_id.clone()));
                }
            }
        }
    }
    for (target, owners) in &claims {
        if owners.len() > 1 {
            out.push(Violation::SharedDecomposition {
                target: target.to_string(),
                objects: owners.iter().map(|(g, o)| format!("{g}.{o}")).collect(),
            });
        }
    }

    // walk from the root; a decomposition edge into the active path
    // is a cycle, a graph never visited is an orphan
    let mut visited: HashSet<&str> = HashSet::new();
    let mut path: Vec<&str> = Vec::new();
    fn walk<'a>(
        graph: &'a GopprrGraph,
        current: &'a str,
        visited: &mut HashSet<&'a str>,
        path: &mut Vec<&'a str>,
        out: &mut Vec<Violation>,
    ) {
        if !visited.insert(current) {
            return;
        }
        path.push(current);
        if let Some(body) = graph.graphs.get(current) {
            for (object_id, object) in &body.objects {
                if let Some(target) = &object.decomposition {
                    if path.iter().any(|p| p == target) {
                        out.push(Violation::CyclicDecomposition {
                            graph: current.to_string(),
                            object: object_id.clone(),
                            target: target.clone(),
                        });
                    } else if graph.graphs.contains_key(target.as_str()) {
                        walk(graph, target, visited, path, out);
                    }
                }
            }
        }
        path.pop();
    }
    if graph.graphs.contains_key(&graph.root) {
        walk(graph, &graph.root, &mut visited, &mut path, out);
    }
    for graph_id in graph.graphs.keys() {
        if graph_id != &graph.root && !visited.contains(graph_id.as_str()) {
            out.push(Violation::OrphanGraph {
                graph: graph_id.clone(),
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gopprr::graph::{ObjectInst, PointInst, RelationshipInst, RoleInst};
    use crate::gopprr::metamodel::{KindDef, RelationshipKindDef, RoleKindDef};
    use std::collections::BTreeSet;

    fn set(names: &[&str]) -> BTreeSet<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn meta() -> MetaModel {
        MetaModel {
            name: "test".into(),
            property_kinds: set(&["name", "text"]),
            graph_kinds: [(
                "Diagram".to_string(),
                KindDef {
                    properties: set(&["name"]),
                },
            )]
            .into(),
            object_kinds: [
                (
                    "Block".to_string(),
                    KindDef {
                        properties: set(&["name", "text"]),
                    },
                ),
                ("Note".to_string(), KindDef::default()),
            ]
            .into(),
            point_kinds: [(
                "Pin".to_string(),
                KindDef {
                    properties: set(&["name"]),
                },
            )]
            .into(),
            role_kinds: [
                (
                    "from".to_string(),
                    RoleKindDef {
                        properties: set(&[]),
                        targets: set(&["Block", "Pin"]),
                    },
                ),
                (
                    "to".to_string(),
                    RoleKindDef {
                        properties: set(&["name"]),
                        targets: set(&["Block"]),
                    },
                ),
            ]
            .into(),
            relationship_kinds: [(
                "Link".to_string(),
                RelationshipKindDef {
                    properties: set(&["name"]),
                    roles: ["from".to_string(), "to".to_string()],
                },
            )]
            .into(),
        }
    }

    fn block(id: &str, g: &mut GopprrGraph) {
        g.graphs.get_mut("g0").unwrap().objects.insert(
            id.into(),
            ObjectInst {
                kind: "Block".into(),
                properties: Default::default(),
                points: Default::default(),
                decomposition: None,
            },
        );
    }

    fn role(kind: &str, target: Option<RoleTarget>) -> RoleInst {
        RoleInst {
            kind: kind.into(),
            properties: Default::default(),
            target,
        }
    }

    fn link(g: &mut GopprrGraph, roles: Vec<RoleInst>) {
        g.graphs.get_mut("g0").unwrap().relationships.insert(
            "r0".into(),
            RelationshipInst {
                kind: "Link".into(),
                properties: Default::default(),
                roles,
            },
        );
    }

    fn codes(report: &ValidationReport) -> Vec<&'static str> {
        report.violations.iter().map(|v| v.code()).collect()
    }

    #[test]
    fn empty_graph_of_known_kind_is_valid() {
        let g = GopprrGraph::empty("g0", "Diagram");
        let report = validate_graph(&meta(), &g);
        assert!(report.is_valid(), "{report}");
    }

    #[test]
    fn valid_two_block_link() {
        let mut g = GopprrGraph::empty("g0", "Diagram");
        block("a", &mut g);
        block("b", &mut g);
        link(
            &mut g,
            vec![
                role("from", Some(RoleTarget::Object { object: "a".into() })),
                role("to", Some(RoleTarget::Object { object: "b".into() })),
            ],
        );
        assert!(validate_graph(&meta(), &g).is_valid());
    }

    #[test]
    fn unbound_role_reported() {
        let mut g = GopprrGraph::empty("g0", "Diagram");
        block("a", &mut g);
        link(
            &mut g,
            vec![
                role("from", Some(RoleTarget::Object { object: "a".into() })),
                role("to", None),
            ],
        );
        assert_eq!(codes(&validate_graph(&meta(), &g)), vec!["unbound_role"]);
    }

    #[test]
    fn cyclic_decomposition_reported() {
        // two-level fixture: child's object decomposes back into the root
        let mut g = GopprrGraph::empty("g0", "Diagram");
        g.graphs.insert(
            "g1".into(),
            GraphBody {
                kind: "Diagram".into(),
                ..Default::default()
            },
        );
        g.graphs.get_mut("g0").unwrap().objects.insert(
            "o0".into(),
            ObjectInst {
                kind: "Block".into(),
                properties: Default::default(),
                points: Default::default(),
                decomposition: Some("g1".into()),
            },
        );
        g.graphs.get_mut("g1").unwrap().objects.insert(
            "o1".into(),
            ObjectInst {
                kind: "Block".into(),
                properties: Default::default(),
                points: Default::default(),
                decomposition: Some("g0".into()),
            },
        );
        let report = validate_graph(&meta(), &g);
        assert!(codes(&report).contains(&"cyclic_decomposition"), "{report}");
        // self-decomposition is the smallest cycle
        let mut selfy = GopprrGraph::empty("g0", "Diagram");
        selfy.graphs.get_mut("g0").unwrap().objects.insert(
            "o".into(),
            ObjectInst {
                kind: "Block".into(),
                properties: Default::default(),
                points: Default::default(),
                decomposition: Some("g0".into()),
            },
        );
        assert!(codes(&validate_graph(&meta(), &selfy)).contains(&"cyclic_decomposition"));
    }

    #[test]
    fn every_code_has_a_fixture() {
        let mut produced: BTreeSet<&'static str> = BTreeSet::new();
        let m = meta();
        let mut check = |g: &GopprrGraph| {
            for v in validate_graph(&m, g).violations {
                produced.insert(v.code());
            }
        };

        // unknown kinds, one namespace at a time
        check(&GopprrGraph::empty("g0", "Mystery"));
        let mut g = GopprrGraph::empty("g0", "Diagram");
        g.graphs.get_mut("g0").unwrap().objects.insert(
            "o".into(),
            ObjectInst {
                kind: "Mystery".into(),
                properties: Default::default(),
                points: [(
                    "p".to_string(),
                    PointInst {
                        kind: "Mystery".into(),
                        properties: Default::default(),
                    },
                )]
                .into(),
                decomposition: None,
            },
        );
        check(&g);
        let mut g = GopprrGraph::empty("g0", "Diagram");
        block("a", &mut g);
        g.graphs.get_mut("g0").unwrap().relationships.insert(
            "r".into(),
            RelationshipInst {
                kind: "Mystery".into(),
                properties: Default::default(),
                roles: vec![
                    role(
                        "mystery_role",
                        Some(RoleTarget::Object { object: "a".into() }),
                    ),
                    role("from", Some(RoleTarget::Object { object: "a".into() })),
                ],
            },
        );
        check(&g);

        // role shape violations
        let mut g = GopprrGraph::empty("g0", "Diagram");
        block("a", &mut g);
        link(
            &mut g,
            vec![role(
                "from",
                Some(RoleTarget::Object { object: "a".into() }),
            )],
        );
        check(&g);
        let mut g = GopprrGraph::empty("g0", "Diagram");
        block("a", &mut g);
        block("b", &mut g);
        link(
            &mut g,
            vec![
                role("to", Some(RoleTarget::Object { object: "a".into() })),
                role("from", Some(RoleTarget::Object { object: "b".into() })),
            ],
        );
        check(&g);
        let mut g = GopprrGraph::empty("g0", "Diagram");
        block("a", &mut g);
        link(
            &mut g,
            vec![
                role("from", None),
                role(
                    "to",
                    Some(RoleTarget::Object {
                        object: "ghost".into(),
                    }),
                ),
            ],
        );
        check(&g);
        let mut g = GopprrGraph::empty("g0", "Diagram");
        block("a", &mut g);
        g.graphs.get_mut("g0").unwrap().objects.insert(
            "n".into(),
            ObjectInst {
                kind: "Note".into(),
                properties: Default::default(),
                points: Default::default(),
                decomposition: None,
            },
        );
        link(
            &mut g,
            vec![
                role("from", Some(RoleTarget::Object { object: "n".into() })),
                role(
                    "to",
                    Some(RoleTarget::Point {
                        object: "a".into(),
                        point: "nope".into(),
                    }),
                ),
            ],
        );
        check(&g);

        // property discipline
        let mut g = GopprrGraph::empty("g0", "Diagram");
        g.graphs
            .get_mut("g0")
            .unwrap()
            .properties
            .insert("color".into(), "red".into());
        check(&g);

        // decomposition discipline
        let mut g = GopprrGraph::empty("g0", "Diagram");
        g.graphs.get_mut("g0").unwrap().objects.insert(
            "o".into(),
            ObjectInst {
                kind: "Block".into(),
                properties: Default::default(),
                points: Default::default(),
                decomposition: Some("nowhere".into()),
            },
        );
        check(&g);
        let mut g = GopprrGraph::empty("g0", "Diagram");
        g.graphs.get_mut("g0").unwrap().objects.insert(
            "o".into(),
            ObjectInst {
                kind: "Block".into(),
                properties: Default::default(),
                points: Default::default(),
                decomposition: Some("g0".into()),
            },
        );
        check(&g);
        let mut g = GopprrGraph::empty("g0", "Diagram");
        g.graphs.insert(
            "g1".into(),
            GraphBody {
                kind: "Diagram".into(),
                ..Default::default()
            },
        );
        for id in ["o1", "o2"] {
            g.graphs.get_mut("g0").unwrap().objects.insert(
                id.into(),
                ObjectInst {
                    kind: "Block".into(),
                    properties: Default::default(),
                    points: Default::default(),
                    decomposition: Some("g1".into()),
                },
            );
        }
        check(&g);
        let mut g = GopprrGraph::empty("g0", "Diagram");
        g.graphs.insert(
            "floating".into(),
            GraphBody {
                kind: "Diagram".into(),
                ..Default::default()
            },
        );
        check(&g);
        let mut g = GopprrGraph::empty("g0", "Diagram");
        g.root = "absent".into();
        check(&g);

        let missing: Vec<&str> = Violation::ALL_CODES
            .iter()
            .copied()
            .filter(|c| !produced.contains(c))
            .collect();
        assert!(missing.is_empty(), "codes without fixtures: {missing:?}");
    }

    #[test]
    fn report_renders_codes() {
        let mut g = GopprrGraph::empty("g0", "Diagram");
        block("a", &mut g);
        link(
            &mut g,
            vec![
                role("from", Some(RoleTarget::Object { object: "a".into() })),
                role("to", None),
            ],
        );
        let report = validate_graph(&meta(), &g);
        let text = report.to_string();
        assert!(text.contains("unbound_role"), "{text}");
    }
}
