//! Passive channel subscription.
//!
//! A subscriber starts from a channel root handed over out-of-band and
//! polls the ledger, following the next-root chain across tree
//! rollovers so one handle tracks the channel forever. Restricted
//! subscribers hold a side key; when the publisher rotates it, their
//! next poll reports the stream as revoked instead of yielding
//! unreadable messages.

use std::collections::HashSet;

use crate::gopprr::DeaRecord;
use crate::hashing::Digest;
use crate::mam::{channel_address, ChannelMode, MamError};
use crate::store::ContentStore;
use crate::tangle::node::Node;

use super::{open_announcement, open_blob, MarketError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubscriptionStatus {
    Active,
    /// The publisher rotated the side key away from ours; no further
    /// messages will ever verify.
    Revoked,
}

/// Records found by one poll, in channel order.
#[derive(Debug)]
pub struct PollUpdate {
    pub records: Vec<DeaRecord>,
    pub status: SubscriptionStatus,
}

pub struct Subscriber {
    mode: ChannelMode,
    side_key: Option<String>,
    current_root: Digest,
    /// Bundles already consumed or deliberately skipped.
    seen: HashSet<Digest>,
    revoked: bool,
}

impl Subscriber {
    pub fn new(
        channel_root: Digest,
        mode: ChannelMode,
        side_key: Option<&str>,
    ) -> Result<Self, MarketError> {
        match mode {
            ChannelMode::Public => {
                if side_key.is_some_and(|k| !k.is_empty()) {
                    return Err(MarketError::SideKeyUnexpected);
                }
            }
            ChannelMode::Restricted => {
                if side_key.is_none_or(str::is_empty) {
                    return Err(MarketError::SideKeyRequired);
                }
            }
        }
        Ok(Subscriber {
            mode,
            side_key: side_key.map(String::from),
            current_root: channel_root,
            seen: HashSet::new(),
            revoked: false,
        })
    }

    /// Root whose address the next poll reads from.
    pub fn current_root(&self) -> Digest {
        self.current_root
    }

    pub fn address(&self) -> Digest {
        channel_address(&self.current_root, self.mode)
    }

    /// Non-blocking: collect every new record currently on the ledger,
    /// crossing tree rollovers within the same call. An empty channel
    /// yields an empty active update.
    pub fn poll(&mut self, node: &Node, store: &ContentStore) -> Result<PollUpdate, MarketError> {
        let mut records = Vec::new();
        if self.revoked {
            return Ok(PollUpdate {
                records,
                status: SubscriptionStatus::Revoked,
            });
        }
        loop {
            let address = self.address();
            let bundles = node.with_ledger(|ledger| ledger.get_bundle(&address));
            let root_before = self.current_root;
            for bundle in &bundles {
                if !self.seen.insert(bundle.bundle_hash()) {
                    continue;
                }
                match open_announcement(
                    &bundle.payload(),
                    &self.current_root,
                    self.side_key.as_deref(),
                ) {
                    Ok((announcement, next_root)) => {
                        records.push(open_blob(store, &announcement, self.side_key.as_deref())?);
                        self.current_root = next_root;
                    }
                    Err(MamError::AuthenticationFailure)
                        if self.mode == ChannelMode::Restricted =>
                    {
                        // rotation: our key stopped opening the channel
                        self.revoked = true;
                        return Ok(PollUpdate {
                            records,
                            status: SubscriptionStatus::Revoked,
                        });
                    }
                    Err(_) => {
                        // foreign or damaged traffic at a public address
                        // is not ours to report
                    }
                }
            }
            if self.current_root == root_before {
                break;
            }
        }
        Ok(PollUpdate {
            records,
            status: SubscriptionStatus::Active,
        })
    }
}
