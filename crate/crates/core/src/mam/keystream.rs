//! Position-keyed masking of tryte strings.
//!
//! Keystream block j is the hash of (root, side key, leaf index, j);
//! each output byte reduces mod 27 to one keystream symbol, combined
//! with the message by symbol-wise addition mod 27. The leaf index is
//! part of the key material on purpose: messages signed under the same
//! tree share a root, and without it they would share a keystream.

use sha2::{Digest as _, Sha256};

use crate::hashing::{Digest, DIGEST_LEN};
use crate::trinary::TryteString;

const DOMAIN: &[u8] = b"deam.mam.keystream";

/// Keystream symbol values (each in 0..27) for stream positions
/// `offset .. offset + len`.
fn keystream_range(
    root: &Digest,
    side_key: &[u8],
    leaf_index: u32,
    offset: usize,
    len: usize,
) -> Vec<u8> {
    let mut base = Sha256::new();
    base.update(DOMAIN);
    base.update(root.as_bytes());
    base.update((side_key.len() as u32).to_le_bytes());
    base.update(side_key);
    base.update(leaf_index.to_le_bytes());

    let mut out = Vec::with_capacity(len);
    let mut block_index = (offset / DIGEST_LEN) as u64;
    let mut skip = offset % DIGEST_LEN;
    while out.len() < len {
        let mut h = base.clone();
        h.update(block_index.to_le_bytes());
        let block = h.finalize();
        for &b in &block[skip..] {
            out.push(b % 27);
            if out.len() == len {
                break;
            }
        }
        skip = 0;
        block_index += 1;
    }
    out
}

fn combine(
    trytes: &TryteString,
    root: &Digest,
    side_key: &[u8],
    leaf_index: u32,
    offset: usize,
    forward: bool,
) -> TryteString {
    let ks = keystream_range(root, side_key, leaf_index, offset, trytes.len());
    TryteString::from_values(trytes.values().zip(ks).map(|(v, k)| {
        if forward {
            (v + k) % 27
        } else {
            (v + 27 - k) % 27
        }
    }))
}

/// Mask trytes occupying stream positions starting at `offset`.
pub fn mask_at(
    trytes: &TryteString,
    root: &Digest,
    side_key: &[u8],
    leaf_index: u32,
    offset: usize,
) -> TryteString {
    combine(trytes, root, side_key, leaf_index, offset, true)
}

pub fn mask(trytes: &TryteString, root: &Digest, side_key: &[u8], leaf_index: u32) -> TryteString {
    mask_at(trytes, root, side_key, leaf_index, 0)
}

/// Inverse of [`mask_at`] for the same position and key material.
pub fn unmask_at(
    trytes: &TryteString,
    root: &Digest,
    side_key: &[u8],
    leaf_index: u32,
    offset: usize,
) -> TryteString {
    combine(trytes, root, side_key, leaf_index, offset, false)
}

pub fn unmask(
    trytes: &TryteString,
    root: &Digest,
    side_key: &[u8],
    leaf_index: u32,
) -> TryteString {
    unmask_at(trytes, root, side_key, leaf_index, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hashing::sha256;
    use crate::trinary::bytes_to_trytes;
    use proptest::prelude::*;

    fn root() -> Digest {
        sha256(&[b"mask test root"])
    }

    #[test]
    fn deterministic() {
        let t = bytes_to_trytes(b"hello");
        let a = mask(&t, &root(), b"key", 0);
        let b = mask(&t, &root(), b"key", 0);
        assert_eq!(a, b);
        assert_ne!(a, t);
    }

    #[test]
    fn leaf_index_keys_the_stream() {
        let t = bytes_to_trytes(&[0u8; 64]);
        let at0 = mask(&t, &root(), b"", 0);
        let at1 = mask(&t, &root(), b"", 1);
        assert_ne!(at0, at1);
    }

    #[test]
    fn offset_slices_the_same_stream() {
        let t = bytes_to_trytes(b"a longer message split into two parts");
        let whole = mask(&t, &root(), b"k", 3);
        let head = t.slice(0..10);
        let tail = t.slice(10..t.len());
        let mut parts = mask_at(&head, &root(), b"k", 3, 0);
        parts.push(&mask_at(&tail, &root(), b"k", 3, 10));
        assert_eq!(parts, whole);
    }

    #[test]
    fn wrong_key_does_not_unmask() {
        let t = bytes_to_trytes(b"secret payload of useful length");
        let masked = mask(&t, &root(), b"right", 0);
        assert_ne!(unmask(&masked, &root(), b"wrong", 0), t);
        assert_ne!(unmask(&masked, &root(), b"right", 1), t);
        assert_eq!(unmask(&masked, &root(), b"right", 0), t);
    }

    proptest! {
        #[test]
        fn roundtrip(bytes: Vec<u8>, key: Vec<u8>, leaf in 0u32..1024) {
            let t = bytes_to_trytes(&bytes);
            let masked = mask(&t, &root(), &key, leaf);
            prop_assert_eq!(masked.len(), t.len());
            prop_assert_eq!(unmask(&masked, &root(), &key, leaf), t);
        }
    }
}
