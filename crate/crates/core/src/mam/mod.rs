//! Masked authenticated messaging over Merkle-tree channels.
//!
//! A channel is a deterministic sequence of one-time signing keys,
//! grouped into perfect binary trees of 2^depth leaves. Messages are
//! masked with a keystream, signed with the current leaf key and
//! carry the root of the tree that will sign the next message, so a
//! reader who starts from one root can follow the channel forever.
//!
//! Two modes differ only in addressing and key material:
//!
//! - public: address = root, keystream keyed by the root alone, anyone
//!   who sees the message can read it.
//! - restricted: address = H(root), keystream additionally keyed by a
//!   side key. The address no longer reveals the root, so possession
//!   of the address alone grants nothing; readers need (root, side key).

pub mod keystream;
pub mod merkle;
pub mod ots;
mod wire;

pub use wire::WireMessage;

use serde::{Deserialize, Serialize};

use crate::hashing::{sha256, Digest};
use crate::trinary::{bytes_to_trytes, TryteString};

const LEAF_SEED_DOMAIN: &[u8] = b"deam.mam.leafseed";
const ADDRESS_DOMAIN: &[u8] = b"deam.mam.address";
const SIG_DOMAIN: &[u8] = b"deam.mam.sig";

/// Trytes occupied by the successor root inside the cleartext.
pub const NEXT_ROOT_TRYTES: usize = 64;
/// Trytes occupied by the one-time signature at the end of the payload.
pub const SIGNATURE_TRYTES: usize = ots::SIGNATURE_BYTES * 2;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MamError {
    /// Wrong side key, tampered payload, or a signature that does not
    /// chain to the claimed root. Deliberately one variant: the
    /// verifier cannot (and should not) tell these apart.
    #[error("message authentication failed")]
    AuthenticationFailure,
    #[error("malformed masked message: {0}")]
    Malformed(String),
    #[error("restricted mode requires a non-empty side key")]
    SideKeyRequired,
    #[error("side keys apply to restricted channels only")]
    NotRestricted,
    #[error(transparent)]
    Merkle(#[from] merkle::MerkleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelMode {
    Public,
    Restricted,
}

impl std::fmt::Display for ChannelMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ChannelMode::Public => "public",
            ChannelMode::Restricted => "restricted",
        })
    }
}

impl std::str::FromStr for ChannelMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "public" => Ok(ChannelMode::Public),
            "restricted" => Ok(ChannelMode::Restricted),
            other => Err(format!("unknown channel mode {other:?}")),
        }
    }
}

/// Where on the ledger a channel's messages live.
pub fn channel_address(root: &Digest, mode: ChannelMode) -> Digest {
    match mode {
        ChannelMode::Public => *root,
        ChannelMode::Restricted => sha256(&[ADDRESS_DOMAIN, root.as_bytes()]),
    }
}

/// A masked, signed message, ready for wire encoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskedMessage {
    /// Masked (message, next root, signature), all trytes.
    pub payload: TryteString,
    /// Root of the tree whose leaf signed this message.
    pub root: Digest,
    /// Root under which the channel's next message verifies.
    pub next_root: Digest,
    pub auth_path: Vec<Digest>,
    pub leaf_index: u32,
}

/// Recover (message, next root) from a masked message.
///
/// Public mode passes `side_key = None`. Every verification failure,
/// including undecodable intermediate trytes, reports as
/// [`MamError::AuthenticationFailure`]; garbage is never returned.
pub fn unmask(
    message: &MaskedMessage,
    root: &Digest,
    side_key: Option<&str>,
) -> Result<(TryteString, Digest), MamError> {
    WireMessage {
        leaf_index: message.leaf_index,
        auth_path: message.auth_path.clone(),
        payload: message.payload.clone(),
    }
    .open(root, side_key)
}

/// Deterministic leaf key material for (channel seed, tree, leaf).
fn leaf_seed(seed: &Digest, tree_index: u64, leaf: u32) -> Digest {
    sha256(&[
        LEAF_SEED_DOMAIN,
        seed.as_bytes(),
        &tree_index.to_le_bytes(),
        &leaf.to_le_bytes(),
    ])
}

/// All leaf public digests and the root for one tree of a channel.
pub fn channel_keys(seed: &Digest, tree_depth: u32, tree_index: u64) -> (Vec<Digest>, Digest) {
    let leaves: Vec<Digest> = (0..1u32 << tree_depth)
        .map(|leaf| ots::leaf_public(&leaf_seed(seed, tree_index, leaf)))
        .collect();
    let root = merkle::merkle_root(&leaves).expect("2^depth leaves");
    (leaves, root)
}

/// Digest covered by the one-time signature: the masked prefix plus
/// its position in the channel.
pub(crate) fn signed_digest(root: &Digest, leaf_index: u32, masked_prefix: &TryteString) -> Digest {
    sha256(&[
        SIG_DOMAIN,
        root.as_bytes(),
        &leaf_index.to_le_bytes(),
        masked_prefix.as_str().as_bytes(),
    ])
}

struct TreeCache {
    tree_index: u64,
    leaves: Vec<Digest>,
    root: Digest,
}

fn build_tree(seed: &Digest, tree_depth: u32, tree_index: u64) -> TreeCache {
    let (leaves, root) = channel_keys(seed, tree_depth, tree_index);
    TreeCache {
        tree_index,
        leaves,
        root,
    }
}

pub struct MamChannel {
    seed: Digest,
    mode: ChannelMode,
    side_key: Option<String>,
    tree_depth: u32,
    leaf_index: u32,
    current: TreeCache,
    next: TreeCache,
}

impl MamChannel {
    pub fn public(seed: Digest, tree_depth: u32) -> Self {
        Self::new(seed, ChannelMode::Public, None, tree_depth)
    }

    pub fn restricted(seed: Digest, tree_depth: u32, side_key: &str) -> Result<Self, MamError> {
        if side_key.is_empty() {
            return Err(MamError::SideKeyRequired);
        }
        Ok(Self::new(
            seed,
            ChannelMode::Restricted,
            Some(side_key.to_string()),
            tree_depth,
        ))
    }

    fn new(seed: Digest, mode: ChannelMode, side_key: Option<String>, tree_depth: u32) -> Self {
        assert!(
            tree_depth <= 16,
            "tree depth {tree_depth} is unreasonably large"
        );
        MamChannel {
            current: build_tree(&seed, tree_depth, 0),
            next: build_tree(&seed, tree_depth, 1),
            seed,
            mode,
            side_key,
            tree_depth,
            leaf_index: 0,
        }
    }

    pub fn mode(&self) -> ChannelMode {
        self.mode
    }

    pub fn tree_depth(&self) -> u32 {
        self.tree_depth
    }

    /// Next unused leaf in the current tree; always < 2^tree_depth.
    pub fn leaf_index(&self) -> u32 {
        self.leaf_index
    }

    /// Root of the tree that will sign the next message.
    pub fn current_root(&self) -> Digest {
        self.current.root
    }

    /// Ledger address of the next message.
    pub fn address(&self) -> Digest {
        channel_address(&self.current.root, self.mode)
    }

    pub fn side_key(&self) -> Option<&str> {
        self.side_key.as_deref()
    }

    /// Swap in a new side key. Messages already masked stay readable
    /// under the old key; later ones require the new key. The root
    /// sequence (and with it the channel address) is untouched.
    pub fn rotate_side_key(&mut self, new_key: &str) -> Result<(), MamError> {
        if self.mode != ChannelMode::Restricted {
            return Err(MamError::NotRestricted);
        }
        if new_key.is_empty() {
            return Err(MamError::SideKeyRequired);
        }
        self.side_key = Some(new_key.to_string());
        Ok(())
    }

    /// Mask and sign a message with the current leaf, then advance.
    ///
    /// When the last leaf of a tree is consumed the successor tree
    /// (whose root this message carries as `next_root`) becomes
    /// current and a fresh successor is prepared.
    pub fn mask(&mut self, message: &TryteString) -> MaskedMessage {
        let leaf = self.leaf_index;
        let leaves_per_tree = 1u32 << self.tree_depth;
        let next_root = if leaf + 1 < leaves_per_tree {
            self.current.root
        } else {
            self.next.root
        };
        let key = self.side_key.as_deref().unwrap_or("").as_bytes();

        let mut clear = message.clone();
        clear.push(&bytes_to_trytes(next_root.as_bytes()));
        let masked_prefix = keystream::mask(&clear, &self.current.root, key, leaf);

        let digest = signed_digest(&self.current.root, leaf, &masked_prefix);
        let signature = ots::sign(
            &leaf_seed(&self.seed, self.current.tree_index, leaf),
            &digest,
        );
        let sig_trytes = bytes_to_trytes(&signature.to_bytes());
        let masked_sig = keystream::mask_at(
            &sig_trytes,
            &self.current.root,
            key,
            leaf,
            masked_prefix.len(),
        );

        let mut payload = masked_prefix;
        payload.push(&masked_sig);
        let auth_path =
            merkle::auth_path(&self.current.leaves, leaf as usize).expect("cached tree shape");

        let masked = MaskedMessage {
            payload,
            root: self.current.root,
            next_root,
            auth_path,
            leaf_index: leaf,
        };
        self.advance();
        masked
    }

    fn advance(&mut self) {
        self.leaf_index += 1;
        if self.leaf_index == 1 << self.tree_depth {
            self.leaf_index = 0;
            let upcoming = self.next.tree_index + 1;
            self.current = std::mem::replace(
                &mut self.next,
                build_tree(&self.seed, self.tree_depth, upcoming),
            );
        }
    }
}
