//! Winternitz-style one-time signatures (w = 16) over 256-bit digests.
//!
//! A message digest splits into 64 nibbles; 3 more nibbles carry the
//! checksum sum(15 - nibble), which stops an attacker from advancing
//! any chain without retreating another. Verification walks every
//! chain to its end and re-derives the leaf digest, so signatures are
//! checked against a Merkle root instead of a stored public key.

use crate::hashing::{sha256, Digest, Hasher, DIGEST_LEN};

const SK_DOMAIN: &[u8] = b"deam.ots.sk";
const STEP_DOMAIN: &[u8] = b"deam.ots.step";
const LEAF_DOMAIN: &[u8] = b"deam.ots.leaf";

const MESSAGE_CHAINS: usize = 64;
const CHECKSUM_CHAINS: usize = 3;
/// Hash chains per key: one per message nibble plus the checksum.
pub const CHAINS: usize = MESSAGE_CHAINS + CHECKSUM_CHAINS;
/// Flat signature size: one digest per chain.
pub const SIGNATURE_BYTES: usize = CHAINS * DIGEST_LEN;
const STEPS: u8 = 15;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("signature must be {SIGNATURE_BYTES} bytes, got {0}")]
pub struct BadSignatureLength(pub usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OtsSignature(Vec<Digest>);

impl OtsSignature {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(SIGNATURE_BYTES);
        for d in &self.0 {
            out.extend_from_slice(d.as_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, BadSignatureLength> {
        if bytes.len() != SIGNATURE_BYTES {
            return Err(BadSignatureLength(bytes.len()));
        }
        let chains = bytes
            .chunks_exact(DIGEST_LEN)
            .map(|c| Digest(c.try_into().expect("chunk size")))
            .collect();
        Ok(OtsSignature(chains))
    }
}

fn chain_key(leaf_seed: &Digest, chain: usize) -> Digest {
    sha256(&[
        SK_DOMAIN,
        leaf_seed.as_bytes(),
        &(chain as u32).to_le_bytes(),
    ])
}

fn advance(start: &Digest, steps: u8) -> Digest {
    let mut current = *start;
    for _ in 0..steps {
        current = sha256(&[STEP_DOMAIN, current.as_bytes()]);
    }
    current
}

/// Message nibbles (high first within each byte) followed by the
/// three-nibble checksum, most significant first.
pub(crate) fn nibbles_with_checksum(message: &Digest) -> [u8; CHAINS] {
    let mut out = [0u8; CHAINS];
    for (i, byte) in message.as_bytes().iter().enumerate() {
        out[2 * i] = byte >> 4;
        out[2 * i + 1] = byte & 0x0f;
    }
    let checksum: u16 = out[..MESSAGE_CHAINS]
        .iter()
        .map(|&n| (STEPS - n) as u16)
        .sum();
    out[MESSAGE_CHAINS] = ((checksum >> 8) & 0x0f) as u8;
    out[MESSAGE_CHAINS + 1] = ((checksum >> 4) & 0x0f) as u8;
    out[MESSAGE_CHAINS + 2] = (checksum & 0x0f) as u8;
    out
}

/// Digest that commits to all chain ends of the key rooted at `leaf_seed`.
pub fn leaf_public(leaf_seed: &Digest) -> Digest {
    let mut h = Hasher::new();
    h.update(LEAF_DOMAIN);
    for chain in 0..CHAINS {
        h.update(advance(&chain_key(leaf_seed, chain), STEPS).as_bytes());
    }
    h.finalize()
}

pub fn sign(leaf_seed: &Digest, message: &Digest) -> OtsSignature {
    let nibbles = nibbles_with_checksum(message);
    let chains = (0..CHAINS)
        .map(|i| advance(&chain_key(leaf_seed, i), nibbles[i]))
        .collect();
    OtsSignature(chains)
}

/// Leaf digest implied by a signature for `message`.
///
/// Equals `leaf_public` of the signing seed exactly when the signature
/// is valid; the caller compares via the Merkle authentication path.
pub fn recover_leaf(message: &Digest, signature: &OtsSignature) -> Digest {
    let nibbles = nibbles_with_checksum(message);
    let mut h = Hasher::new();
    h.update(LEAF_DOMAIN);
    for (link, &nibble) in signature.0.iter().zip(&nibbles) {
        h.update(advance(link, STEPS - nibble).as_bytes());
    }
    h.finalize()
}
