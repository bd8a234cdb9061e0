//! Binary Merkle hash tree over one-time-key leaf digests.
//!
//! Trees are perfect: leaf counts must be a power of two, and a single
//! leaf is its own root. Channels never produce other shapes, so odd
//! counts are rejected instead of padded.

use crate::hashing::{sha256, Digest};

const NODE_DOMAIN: &[u8] = b"deam.mht.node";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MerkleError {
    #[error("leaf count {0} is not a power of two")]
    BadLeafCount(usize),
    #[error("leaf index {index} out of range for {leaves} leaves")]
    LeafIndexOutOfRange { index: usize, leaves: usize },
}

pub fn node_hash(left: &Digest, right: &Digest) -> Digest {
    sha256(&[NODE_DOMAIN, left.as_bytes(), right.as_bytes()])
}

/// Root of the perfect binary hash tree over `leaves`.
pub fn merkle_root(leaves: &[Digest]) -> Result<Digest, MerkleError> {
    if leaves.is_empty() || !leaves.len().is_power_of_two() {
        return Err(MerkleError::BadLeafCount(leaves.len()));
    }
    let mut level = leaves.to_vec();
    while level.len() > 1 {
        level = level
            .chunks_exact(2)
            .map(|pair| node_hash(&pair[0], &pair[1]))
            .collect();
    }
    Ok(level[0])
}

/// Sibling digests from the leaf at `index` up to (not including) the root.
pub fn auth_path(leaves: &[Digest], index: usize) -> Result<Vec<Digest>, MerkleError> {
    if leaves.is_empty() || !leaves.len().is_power_of_two() {
        return Err(MerkleError::BadLeafCount(leaves.len()));
    }
    if index >= leaves.len() {
        return Err(MerkleError::LeafIndexOutOfRange {
            index,
            leaves: leaves.len(),
        });
    }
    let mut path = Vec::new();
    let mut level = leaves.to_vec();
    let mut idx = index;
    while level.len() > 1 {
        path.push(level[idx ^ 1]);
        level = level
            .chunks_exact(2)
            .map(|pair| node_hash(&pair[0], &pair[1]))
            .collect();
        idx /= 2;
    }
    Ok(path)
}

/// Root implied by a leaf, its index and its authentication path.
///
/// Bit d of `index` says whether the leaf's ancestor at depth d is a
/// left (0) or right (1) child.
pub fn root_from_path(leaf: &Digest, index: u32, path: &[Digest]) -> Digest {
    let mut current = *leaf;
    for (depth, sibling) in path.iter().enumerate() {
        current = if (index >> depth) & 1 == 0 {
            node_hash(&current, sibling)
        } else {
            node_hash(sibling, &current)
        };
    }
    current
}
