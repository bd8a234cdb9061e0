//! Core library for a desk-scale decentralized marketplace of digital
//! engineering assets.
//!
//! The pieces, bottom up:
//!
//! - [`trinary`]: byte/tryte codec and transaction-sized chunking.
//! - [`mam`]: masked authenticated messaging channels over Merkle trees
//!   of one-time signing keys, in public and restricted modes.
//! - [`tangle`]: a single-node DAG ledger with proof-of-work, two-tip
//!   approval, bundles and coordinator milestones.
//! - [`store`]: content-addressed blob store keyed by SHA-256.
//! - [`gopprr`]: the GOPPRR meta-meta model, validation, graph
//!   decomposition and digital engineering asset records.
//! - [`market`]: the publish/fetch pipeline tying the above together,
//!   plus a searchable registry and channel subscriptions.
//! - [`bench`]: timing harness for the publish pipeline phases.

pub mod bench;
pub mod gopprr;
pub mod hashing;
pub mod mam;
pub mod market;
pub mod store;
pub mod tangle;
pub mod trinary;

pub use hashing::Digest;
pub use trinary::TryteString;
