//! Synthetic systems-engineering models.
//!
//! A small but honest metamodel (requirements, functions, components
//! with ports) plus generators that grow random instance graphs to an
//! approximate serialized size. Everything is driven by the caller's
//! RNG, so equal seeds give equal records.

use rand::seq::IndexedRandom;
use rand::Rng;

use super::dea::{realize_dea, DeaDescriptor, DeaRecord, Dikw, ProcessTime};
use super::graph::{
    serialize_graph, GopprrGraph, GraphBody, ObjectInst, PointInst, RelationshipInst, RoleInst,
    RoleTarget,
};
use super::metamodel::{KindDef, MetaModel, RelationshipKindDef, RoleKindDef};

pub const VIEWS: [&str; 3] = ["requirement", "function", "architecture"];

const STAGES: [&str; 4] = ["concept", "design", "implementation", "verification"];

const WORDS: [&str; 48] = [
    "actuator",
    "airframe",
    "altitude",
    "antenna",
    "attitude",
    "battery",
    "beacon",
    "bracket",
    "bus",
    "cabin",
    "camera",
    "cell",
    "chassis",
    "clamp",
    "command",
    "coolant",
    "coupler",
    "datum",
    "downlink",
    "duct",
    "fairing",
    "filter",
    "gimbal",
    "harness",
    "heater",
    "hinge",
    "latch",
    "louver",
    "magnet",
    "manifold",
    "mast",
    "nozzle",
    "payload",
    "pump",
    "radiator",
    "regulator",
    "relay",
    "sensor",
    "shroud",
    "solenoid",
    "strut",
    "tank",
    "telemetry",
    "thruster",
    "truss",
    "uplink",
    "valve",
    "wheel",
];

/// The metamodel all synthetic graphs validate against.
pub fn demo_metamodel() -> MetaModel {
    let props = |names: &[&str]| names.iter().map(|s| s.to_string()).collect();
    MetaModel {
        name: "demo-se".into(),
        property_kinds: props(&["name", "text", "priority", "weight", "direction"]),
        graph_kinds: [
            (
                "RequirementDiagram".to_string(),
                KindDef {
                    properties: props(&["name"]),
                },
            ),
            (
                "FunctionDiagram".to_string(),
                KindDef {
                    properties: props(&["name"]),
                },
            ),
            (
                "ArchitectureDiagram".to_string(),
                KindDef {
                    properties: props(&["name"]),
                },
            ),
        ]
        .into(),
        object_kinds: [
            (
                "Requirement".to_string(),
                KindDef {
                    properties: props(&["name", "text", "priority"]),
                },
            ),
            (
                "Function".to_string(),
                KindDef {
                    properties: props(&["name", "text"]),
                },
            ),
            (
                "Component".to_string(),
                KindDef {
                    properties: props(&["name", "weight"]),
                },
            ),
        ]
        .into(),
        point_kinds: [(
            "Port".to_string(),
            KindDef {
                properties: props(&["name", "direction"]),
            },
        )]
        .into(),
        role_kinds: [
            (
                "satisfier".to_string(),
                RoleKindDef {
                    properties: props(&[]),
                    targets: props(&["Function", "Component"]),
                },
            ),
            (
                "satisfied".to_string(),
                RoleKindDef {
                    properties: props(&[]),
                    targets: props(&["Requirement"]),
                },
            ),
            (
                "from".to_string(),
                RoleKindDef {
                    properties: props(&[]),
                    targets: props(&["Port"]),
                },
            ),
            (
                "to".to_string(),
                RoleKindDef {
                    properties: props(&[]),
                    targets: props(&["Port"]),
                },
            ),
            (
                "refining".to_string(),
                RoleKindDef {
                    properties: props(&[]),
                    targets: props(&["Requirement"]),
                },
            ),
            (
                "refined".to_string(),
                RoleKindDef {
                    properties: props(&[]),
                    targets: props(&["Requirement"]),
                },
            ),
        ]
        .into(),
        relationship_kinds: [
            (
                "Satisfies".to_string(),
                RelationshipKindDef {
                    properties: props(&["name"]),
                    roles: ["satisfier".to_string(), "satisfied".to_string()],
                },
            ),
            (
                "Connects".to_string(),
                RelationshipKindDef {
                    properties: props(&["name"]),
                    roles: ["from".to_string(), "to".to_string()],
                },
            ),
            (
                "Refines".to_string(),
                RelationshipKindDef {
                    properties: props(&["name"]),
                    roles: ["refining".to_string(), "refined".to_string()],
                },
            ),
        ]
        .into(),
    }
}

fn word<R: Rng + ?Sized>(rng: &mut R) -> &'static str {
    WORDS.choose(rng).unwrap()
}

fn sentence<R: Rng + ?Sized>(rng: &mut R, min: usize, max: usize) -> String {
    let n = rng.random_range(min..=max);
    let mut s = String::new();
    for i in 0..n {
        if i > 0 {
            s.push(' ');
        }
        s.push_str(word(rng));
    }
    s
}

struct Synth<'a, R: Rng + ?Sized> {
    rng: &'a mut R,
    view: &'static str,
    /// Ids of root-body objects eligible as relationship targets, by
    /// object kind.
    requirements: Vec<String>,
    functions: Vec<String>,
    /// (component id, port count) pairs.
    components: Vec<(String, usize)>,
    next_object: usize,
    next_rel: usize,
    next_graph: usize,
}

impl<'a, R: Rng + ?Sized> Synth<'a, R> {
    fn requirement(&mut self) -> (String, ObjectInst) {
        let id = format!("req-{:05}", self.next_object);
        self.next_object += 1;
        let inst = ObjectInst {
            kind: "Requirement".into(),
            properties: [
                (
                    "name".to_string(),
                    format!("{} {}", word(self.rng), self.next_object),
                ),
                ("text".to_string(), sentence(self.rng, 8, 24)),
                (
                    "priority".to_string(),
                    ["low", "medium", "high"]
                        .choose(self.rng)
                        .unwrap()
                        .to_string(),
                ),
            ]
            .into(),
            points: Default::default(),
            decomposition: None,
        };
        (id, inst)
    }

    fn function(&mut self) -> (String, ObjectInst) {
        let id = format!("fn-{:05}", self.next_object);
        self.next_object += 1;
        let inst = ObjectInst {
            kind: "Function".into(),
            properties: [
                (
                    "name".to_string(),
                    format!("{} {}", word(self.rng), self.next_object),
                ),
                ("text".to_string(), sentence(self.rng, 6, 18)),
            ]
            .into(),
            points: Default::default(),
            decomposition: None,
        };
        (id, inst)
    }

    fn component(&mut self) -> (String, ObjectInst, usize) {
        let id = format!("cmp-{:05}", self.next_object);
        self.next_object += 1;
        let ports = self.rng.random_range(1..=3);
        let points = (0..ports)
            .map(|i| {
                (
                    format!("p{i}"),
                    PointInst {
                        kind: "Port".into(),
                        properties: [
                            ("name".to_string(), format!("{}-{i}", word(self.rng))),
                            (
                                "direction".to_string(),
                                if self.rng.random::<bool>() {
                                    "in"
                                } else {
                                    "out"
                                }
                                .to_string(),
                            ),
                        ]
                        .into(),
                    },
                )
            })
            .collect();
        let inst = ObjectInst {
            kind: "Component".into(),
            properties: [
                (
                    "name".to_string(),
                    format!("{} {}", word(self.rng), self.next_object),
                ),
                (
                    "weight".to_string(),
                    format!("{:.2}", self.rng.random_range(0.1..500.0)),
                ),
            ]
            .into(),
            points,
            decomposition: None,
        };
        (id, inst, ports)
    }

    fn relationship(
        &mut self,
        kind: &str,
        roles: [(&str, RoleTarget); 2],
    ) -> (String, RelationshipInst) {
        let id = format!("r-{:05}", self.next_rel);
        self.next_rel += 1;
        let inst = RelationshipInst {
            kind: kind.into(),
            properties: if self.rng.random_ratio(1, 3) {
                [("name".to_string(), word(self.rng).to_string())].into()
            } else {
                Default::default()
            },
            roles: roles
                .into_iter()
                .map(|(role_kind, target)| RoleInst {
                    kind: role_kind.into(),
                    properties: Default::default(),
                    target: Some(target),
                })
                .collect(),
        };
        (id, inst)
    }

    /// A small decomposition graph; returns its id. Only root objects
    /// decompose, so the tree has depth one.
    fn child_graph(&mut self, graph: &mut GopprrGraph, kind: &str) -> String {
        let id = format!("g{}", self.next_graph);
        self.next_graph += 1;
        let mut body = GraphBody {
            kind: kind.to_string(),
            properties: [("name".to_string(), format!("{} detail", word(self.rng)))].into(),
            ..Default::default()
        };
        for _ in 0..self.rng.random_range(2..=4) {
            match self.view {
                "function" => {
                    let (oid, inst) = self.function();
                    body.objects.insert(oid, inst);
                }
                "architecture" => {
                    let (oid, inst, _) = self.component();
                    body.objects.insert(oid, inst);
                }
                _ => {
                    let (oid, inst) = self.requirement();
                    body.objects.insert(oid, inst);
                }
            }
        }
        graph.graphs.insert(id.clone(), body);
        id
    }

    fn grow(&mut self, graph: &mut GopprrGraph, root_kind: &str) {
        let decomposition = if self.rng.random_ratio(1, 12) {
            Some(self.child_graph(graph, root_kind))
        } else {
            None
        };
        let body = graph.graphs.get_mut("g0").expect("root body");
        match self.view {
            "function" => {
                // alternate functions and the requirements they satisfy
                if self.functions.len() <= self.requirements.len() {
                    let (id, mut inst) = self.function();
                    inst.decomposition = decomposition;
                    body.objects.insert(id.clone(), inst);
                    self.functions.push(id);
                } else {
                    let (id, mut inst) = self.requirement();
                    inst.decomposition = decomposition;
                    body.objects.insert(id.clone(), inst);
                    self.requirements.push(id);
                }
                if !self.functions.is_empty()
                    && !self.requirements.is_empty()
                    && self.rng.random_ratio(1, 2)
                {
                    let satisfier = self.functions.choose(self.rng).unwrap().clone();
                    let satisfied = self.requirements.choose(self.rng).unwrap().clone();
                    let (rid, rel) = self.relationship(
                        "Satisfies",
                        [
                            ("satisfier", RoleTarget::Object { object: satisfier }),
                            ("satisfied", RoleTarget::Object { object: satisfied }),
                        ],
                    );
                    graph
                        .graphs
                        .get_mut("g0")
                        .unwrap()
                        .relationships
                        .insert(rid, rel);
                }
            }
            "architecture" => {
                let (id, mut inst, ports) = self.component();
                inst.decomposition = decomposition;
                body.objects.insert(id.clone(), inst);
                self.components.push((id, ports));
                if self.components.len() >= 2 && self.rng.random_ratio(2, 3) {
                    let (a, a_ports) = self.components.choose(self.rng).unwrap().clone();
                    let (b, b_ports) = self.components.choose(self.rng).unwrap().clone();
                    let from = RoleTarget::Point {
                        object: a,
                        point: format!("p{}", self.rng.random_range(0..a_ports)),
                    };
                    let to = RoleTarget::Point {
                        object: b,
                        point: format!("p{}", self.rng.random_range(0..b_ports)),
                    };
                    let (rid, rel) = self.relationship("Connects", [("from", from), ("to", to)]);
                    graph
                        .graphs
                        .get_mut("g0")
                        .unwrap()
                        .relationships
                        .insert(rid, rel);
                }
            }
            _ => {
                let (id, mut inst) = self.requirement();
                inst.decomposition = decomposition;
                body.objects.insert(id.clone(), inst);
                self.requirements.push(id);
                if self.requirements.len() >= 2 && self.rng.random_ratio(1, 3) {
                    let refining = self.requirements.last().unwrap().clone();
                    let refined = self.requirements[..self.requirements.len() - 1]
                        .choose(self.rng)
                        .unwrap()
                        .clone();
                    let (rid, rel) = self.relationship(
                        "Refines",
                        [
                            ("refining", RoleTarget::Object { object: refining }),
                            ("refined", RoleTarget::Object { object: refined }),
                        ],
                    );
                    graph
                        .graphs
                        .get_mut("g0")
                        .unwrap()
                        .relationships
                        .insert(rid, rel);
                }
            }
        }
    }
}

/// Grow a random graph for `view` until its canonical serialization
/// reaches `target_bytes`. The overshoot is at most a few elements.
pub fn synth_graph<R: Rng + ?Sized>(rng: &mut R, view: &str, target_bytes: usize) -> GopprrGraph {
    let (view, root_kind) = match view {
        "function" => ("function", "FunctionDiagram"),
        "architecture" => ("architecture", "ArchitectureDiagram"),
        _ => ("requirement", "RequirementDiagram"),
    };
    let mut graph = GopprrGraph::empty("g0", root_kind);
    graph
        .graphs
        .get_mut("g0")
        .unwrap()
        .properties
        .insert("name".into(), format!("{} {}", word(rng), view));

    let mut synth = Synth {
        rng,
        view,
        requirements: Vec::new(),
        functions: Vec::new(),
        components: Vec::new(),
        next_object: 0,
        next_rel: 0,
        next_graph: 1,
    };
    synth.grow(&mut graph, root_kind);
    loop {
        let have = serialize_graph(&graph).len();
        if have >= target_bytes {
            break;
        }
        // overestimate bytes per element so growth converges from below
        let batch = ((target_bytes - have) / 256).clamp(1, 4096);
        for _ in 0..batch {
            synth.grow(&mut graph, root_kind);
        }
    }
    graph
}

/// A full synthetic record: views cycle per index, DIKW levels cycle
/// independently, and the payload grows to roughly `target_bytes`.
pub fn synth_record<R: Rng + ?Sized>(
    rng: &mut R,
    system_id: &str,
    index: usize,
    target_bytes: usize,
) -> DeaRecord {
    let view = VIEWS[index % VIEWS.len()];
    let alpha = Dikw::ALL[index % Dikw::ALL.len()];
    let graph = synth_graph(rng, view, target_bytes);
    let desc = DeaDescriptor {
        system_id: system_id.to_string(),
        asset_id: format!("{view}-{index:04}"),
        t: ProcessTime::staged(
            1_700_000_000 + index as u64 * 3_600,
            STAGES[(index / VIEWS.len()) % STAGES.len()],
        ),
        view: view.to_string(),
        alpha,
        description: sentence(rng, 4, 10),
        tags: vec!["synthetic".to_string(), word(rng).to_string()],
    };
    realize_dea(&demo_metamodel(), &graph, desc).expect("synthetic graphs validate")
}
