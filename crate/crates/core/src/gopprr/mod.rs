//! GOPPRR-formalized digital engineering assets.
//!
//! The meta-meta model gives six element namespaces: Graph, Object,
//! Point, Property, Role, Relationship. A [`MetaModel`] declares kinds
//! in each namespace plus binding rules; a [`GopprrGraph`] instantiates
//! them. Valid graphs are realized into [`DeaRecord`]s carrying the
//! coordinates (asset, process time, view, DIKW attribute) a
//! marketplace indexes on.
//!
//! Everything here is a plain immutable value; validation failures are
//! data, not panics.

pub mod dea;
pub mod graph;
pub mod metamodel;
pub mod parts;
pub mod synth;
pub mod validate;

pub use dea::{
    aggregate, realize_dea, DeaCollection, DeaDescriptor, DeaDocument, DeaRecord, Dikw, ProcessTime,
};
pub use graph::{
    parse_graph, serialize_graph, GopprrGraph, GraphBody, ObjectInst, PointInst, RelationshipInst,
    RoleInst, RoleTarget,
};
pub use metamodel::{KindDef, MetaModel, RelationshipKindDef, RoleKindDef};
pub use parts::{decompose, reconstruct, GraphParts, PropertyOwner, PropertyPart};
pub use validate::{validate_graph, ValidationReport, Violation};

#[derive(Debug, thiserror::Error)]
pub enum DeaError {
    /// Realization refused; the report says why.
    #[error("graph failed validation:\n{0}")]
    Invalid(ValidationReport),
    #[error("record for system {found} cannot join a collection for {expected}")]
    MixedSystemIds { expected: String, found: String },
    #[error("duplicate coordinates {0}")]
    DuplicateCoordinates(String),
    #[error("{0}")]
    Parse(String),
}
