//! The marketplace pipeline.
//!
//! Publishing runs one fixed sequence: serialize the record, mask it
//! on the publisher's channel, park the big masked blob in the content
//! store, then mask the small announcement (blob id plus the root that
//! opens it) at the channel's next leaf and attach that to the ledger.
//! The ledger address is the announcing root in public mode and its
//! hash in restricted mode, so a restricted address reveals nothing
//! about the channel.
//!
//! Fetching inverts it: read the bundle at the address, open the
//! announcement, pull the blob, open it, parse the record. Every step
//! authenticates before the next one runs; a fetch never returns a
//! record that failed any check along the way.

pub mod registry;
pub mod subscribe;

pub use registry::{coordinate_tags, MarketEntry, Registry};
pub use subscribe::{PollUpdate, Subscriber, SubscriptionStatus};

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::gopprr::{DeaDocument, DeaError, DeaRecord};
use crate::hashing::Digest;
use crate::mam::{channel_address, ChannelMode, MamChannel, MamError, WireMessage};
use crate::store::{Cid, ContentStore, StoreError};
use crate::tangle::node::Node;
use crate::tangle::TangleError;
use crate::trinary::{
    bytes_to_trytes, chunk_trytes, trytes_to_bytes, TryteString, TRANSACTION_CAPACITY_TRYTES,
};

/// Tag carried by every marketplace bundle.
pub const PUBLISH_TAG: &str = "DEAM";

/// Cap on background steps while waiting for confirmation. Generous:
/// with any coordinator cadence k a publish confirms within k steps.
pub const MAX_CONFIRM_STEPS: u64 = 4096;

/// Simulated duration of one confirmation poll. Real confirmation
/// latency is a property of a live network; here each poll of the
/// coordinator stands in for this much waiting.
pub const SIMULATED_POLL_MS: u64 = 100;

#[derive(Debug, thiserror::Error)]
pub enum MarketError {
    #[error("restricted mode requires a non-empty side key")]
    SideKeyRequired,
    #[error("side keys apply to restricted channels only")]
    SideKeyUnexpected,
    #[error("restricted fetch needs the channel root; the address is only its hash")]
    ChannelRootRequired,
    #[error("nothing published at {0}")]
    NotFound(Digest),
    #[error("message authentication failed")]
    Authentication,
    #[error("integrity violation: {0}")]
    Integrity(String),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Ledger(#[from] TangleError),
    #[error(transparent)]
    Record(#[from] DeaError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn map_mam(e: MamError) -> MarketError {
    match e {
        MamError::AuthenticationFailure => MarketError::Authentication,
        MamError::SideKeyRequired => MarketError::SideKeyRequired,
        MamError::NotRestricted => MarketError::SideKeyUnexpected,
        MamError::Malformed(m) => MarketError::Integrity(m),
        MamError::Merkle(m) => MarketError::Integrity(m.to_string()),
    }
}

/// What the ledger bundle announces: where the masked blob lives and
/// the root that opens it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub(crate) struct Announcement {
    pub cid: Cid,
    pub payload_root: Digest,
}

/// Milliseconds per publish phase. Processing and attaching are
/// wall-clock; confirming counts coordinator polls at
/// [`SIMULATED_POLL_MS`] each.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Timings {
    pub processing_ms: f64,
    pub attaching_ms: f64,
    pub confirming_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PublishReceipt {
    /// Ledger address of the announcement bundle.
    pub address: Digest,
    pub mode: ChannelMode,
    /// Content id of the masked payload blob.
    pub cid: Cid,
    /// Root that opens the stored blob.
    pub payload_root: Digest,
    /// Root that opens the announcement; the address derives from it.
    pub channel_root: Digest,
    pub bundle_hash: Digest,
    pub timings: Timings,
}

fn elapsed_ms(from: Instant) -> f64 {
    from.elapsed().as_secs_f64() * 1e3
}

/// A seller's side of one channel. Publishing consumes two channel
/// leaves per record (blob, then announcement).
pub struct Publisher {
    channel: MamChannel,
    publisher_id: String,
}

impl Publisher {
    pub fn new(
        seed: Digest,
        mode: ChannelMode,
        side_key: Option<&str>,
        tree_depth: u32,
        publisher_id: impl Into<String>,
    ) -> Result<Self, MarketError> {
        let channel = match mode {
            ChannelMode::Public => {
                if side_key.is_some_and(|k| !k.is_empty()) {
                    return Err(MarketError::SideKeyUnexpected);
                }
                MamChannel::public(seed, tree_depth)
            }
            ChannelMode::Restricted => {
                let key = side_key
                    .filter(|k| !k.is_empty())
                    .ok_or(MarketError::SideKeyRequired)?;
                MamChannel::restricted(seed, tree_depth, key).map_err(map_mam)?
            }
        };
        Ok(Publisher {
            channel,
            publisher_id: publisher_id.into(),
        })
    }

    pub fn mode(&self) -> ChannelMode {
        self.channel.mode()
    }

    pub fn publisher_id(&self) -> &str {
        &self.publisher_id
    }

    /// Root of the channel state the next publish will announce under.
    /// This is what a seller hands to subscribers.
    pub fn channel_root(&self) -> Digest {
        self.channel.current_root()
    }

    pub fn rotate_side_key(&mut self, new_key: &str) -> Result<(), MarketError> {
        self.channel.rotate_side_key(new_key).map_err(map_mam)
    }

    /// Run the publish sequence for one record.
    pub fn publish(
        &mut self,
        record: &DeaRecord,
        node: &Node,
        store: &ContentStore,
    ) -> Result<PublishReceipt, MarketError> {
        let started = Instant::now();
        let document = DeaDocument::from_record(record)?;
        let dea_trytes = bytes_to_trytes(&document.to_bytes());

        let inner = self.channel.mask(&dea_trytes);
        let payload_root = inner.root;
        let cid = store.put(inner.to_wire().as_str().as_bytes())?;

        let announcement = Announcement { cid, payload_root };
        let announcement_bytes =
            serde_json::to_vec(&announcement).expect("announcement serializes");
        let outer = self.channel.mask(&bytes_to_trytes(&announcement_bytes));
        let channel_root = outer.root;
        let address = channel_address(&channel_root, self.channel.mode());
        let chunks = chunk_trytes(&outer.to_wire(), TRANSACTION_CAPACITY_TRYTES);
        let processing_ms = elapsed_ms(started);

        let started = Instant::now();
        let tag = TryteString::from_trytes(PUBLISH_TAG).expect("constant tag");
        let bundle = node.attach(&chunks, address, &tag)?;
        let attaching_ms = elapsed_ms(started);

        let polls = node.await_confirmation(&bundle, MAX_CONFIRM_STEPS)?;
        let confirming_ms = (polls * SIMULATED_POLL_MS) as f64;

        Ok(PublishReceipt {
            address,
            mode: self.channel.mode(),
            cid,
            payload_root,
            channel_root,
            bundle_hash: bundle.bundle_hash(),
            timings: Timings {
                processing_ms,
                attaching_ms,
                confirming_ms,
            },
        })
    }
}

/// Open one reassembled ledger payload as an announcement.
pub(crate) fn open_announcement(
    payload: &TryteString,
    root: &Digest,
    side_key: Option<&str>,
) -> Result<(Announcement, Digest), MamError> {
    let wire = WireMessage::parse(payload)?;
    let (clear, next_root) = wire.open(root, side_key)?;
    let bytes = trytes_to_bytes(&clear)
        .map_err(|e| MamError::Malformed(format!("announcement cleartext: {e}")))?;
    let announcement: Announcement = serde_json::from_slice(&bytes)
        .map_err(|e| MamError::Malformed(format!("announcement: {e}")))?;
    Ok((announcement, next_root))
}

/// Pull and open the blob an announcement points at.
pub(crate) fn open_blob(
    store: &ContentStore,
    announcement: &Announcement,
    side_key: Option<&str>,
) -> Result<DeaRecord, MarketError> {
    let blob = store.get(&announcement.cid)?;
    let text = String::from_utf8(blob)
        .map_err(|_| MarketError::Integrity("stored blob is not tryte text".into()))?;
    let trytes = TryteString::from_trytes(text)
        .map_err(|e| MarketError::Integrity(format!("stored blob: {e}")))?;
    let wire = WireMessage::parse(&trytes).map_err(map_mam)?;
    let (clear, _) = wire
        .open(&announcement.payload_root, side_key)
        .map_err(map_mam)?;
    let bytes = trytes_to_bytes(&clear)
        .map_err(|e| MarketError::Integrity(format!("payload cleartext: {e}")))?;
    Ok(DeaDocument::from_bytes(&bytes)?.into_record())
}

/// Inverse of [`Publisher::publish`].
///
/// Public mode derives the channel root from the address itself;
/// restricted mode cannot (the address is a hash), so the caller must
/// supply the root along with the side key. The earliest bundle at the
/// address that verifies is returned; unverifiable bundles at the same
/// address fail authentication, never produce a record.
pub fn fetch(
    node: &Node,
    store: &ContentStore,
    address: &Digest,
    mode: ChannelMode,
    channel_root: Option<&Digest>,
    side_key: Option<&str>,
) -> Result<DeaRecord, MarketError> {
    let root = match mode {
        ChannelMode::Public => *address,
        ChannelMode::Restricted => *channel_root.ok_or(MarketError::ChannelRootRequired)?,
    };
    let bundles = node.with_ledger(|ledger| ledger.get_bundle(address));
    if bundles.is_empty() {
        return Err(MarketError::NotFound(*address));
    }
    let mut last_failure = MamError::AuthenticationFailure;
    for bundle in &bundles {
        match open_announcement(&bundle.payload(), &root, side_key) {
            Ok((announcement, _)) => return open_blob(store, &announcement, side_key),
            Err(e) => last_failure = e,
        }
    }
    Err(map_mam(last_failure))
}
