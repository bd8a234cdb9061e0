//! Ledger wire form of a masked message.
//!
//! Layout, all trytes: a 10-tryte header (leaf index as u32 LE plus a
//! path-length byte), one 64-tryte digest per authentication-path
//! level, then the masked payload. The tree root is deliberately
//! absent: a restricted channel's address is the hash of the root, so
//! the wire form must not carry the preimage.

use crate::hashing::{Digest, DIGEST_LEN};
use crate::trinary::{bytes_to_trytes, trytes_to_bytes, TryteString};

use super::{keystream, merkle, ots, signed_digest, MamError, MaskedMessage};

const HEADER_BYTES: usize = 5;
const HEADER_TRYTES: usize = HEADER_BYTES * 2;
const DIGEST_TRYTES: usize = DIGEST_LEN * 2;
/// Paths longer than this cannot come from any sane tree depth.
const MAX_PATH_LEN: usize = 32;

/// A masked message as read back off the ledger. The signing root is
/// not part of the wire form; the reader supplies it to [`open`].
///
/// [`open`]: WireMessage::open
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WireMessage {
    pub leaf_index: u32,
    pub auth_path: Vec<Digest>,
    pub payload: TryteString,
}

impl MaskedMessage {
    pub fn to_wire(&self) -> TryteString {
        let mut head = Vec::with_capacity(HEADER_BYTES + self.auth_path.len() * DIGEST_LEN);
        head.extend_from_slice(&self.leaf_index.to_le_bytes());
        head.push(self.auth_path.len() as u8);
        for d in &self.auth_path {
            head.extend_from_slice(d.as_bytes());
        }
        let mut wire = bytes_to_trytes(&head);
        wire.push(&self.payload);
        wire
    }
}

impl WireMessage {
    pub fn parse(trytes: &TryteString) -> Result<Self, MamError> {
        if trytes.len() < HEADER_TRYTES {
            return Err(MamError::Malformed(format!(
                "{} trytes is shorter than the header",
                trytes.len()
            )));
        }
        let head = trytes_to_bytes(&trytes.slice(0..HEADER_TRYTES))
            .map_err(|e| MamError::Malformed(e.to_string()))?;
        let leaf_index = u32::from_le_bytes(head[..4].try_into().expect("header size"));
        let path_len = head[4] as usize;
        if path_len > MAX_PATH_LEN {
            return Err(MamError::Malformed(format!(
                "authentication path of {path_len} levels"
            )));
        }
        let body_start = HEADER_TRYTES + path_len * DIGEST_TRYTES;
        let min_len = body_start + super::NEXT_ROOT_TRYTES + super::SIGNATURE_TRYTES;
        if trytes.len() < min_len {
            return Err(MamError::Malformed(format!(
                "{} trytes, need at least {min_len}",
                trytes.len()
            )));
        }
        let mut auth_path = Vec::with_capacity(path_len);
        for level in 0..path_len {
            let start = HEADER_TRYTES + level * DIGEST_TRYTES;
            let bytes = trytes_to_bytes(&trytes.slice(start..start + DIGEST_TRYTES))
                .map_err(|e| MamError::Malformed(e.to_string()))?;
            auth_path.push(Digest(bytes.try_into().expect("digest size")));
        }
        Ok(WireMessage {
            leaf_index,
            auth_path,
            payload: trytes.slice(body_start..trytes.len()),
        })
    }

    /// Verify against `root` and recover (message, next root).
    ///
    /// All post-parse failures collapse into
    /// [`MamError::AuthenticationFailure`]: a reader learns that the
    /// message does not verify, nothing more.
    pub fn open(
        &self,
        root: &Digest,
        side_key: Option<&str>,
    ) -> Result<(TryteString, Digest), MamError> {
        let key = side_key.unwrap_or("").as_bytes();
        if self.payload.len() < super::NEXT_ROOT_TRYTES + super::SIGNATURE_TRYTES {
            return Err(MamError::AuthenticationFailure);
        }
        let split = self.payload.len() - super::SIGNATURE_TRYTES;
        let masked_prefix = self.payload.slice(0..split);
        let masked_sig = self.payload.slice(split..self.payload.len());

        let sig_trytes = keystream::unmask_at(&masked_sig, root, key, self.leaf_index, split);
        let sig_bytes =
            trytes_to_bytes(&sig_trytes).map_err(|_| MamError::AuthenticationFailure)?;
        let signature = ots::OtsSignature::from_bytes(&sig_bytes)
            .map_err(|_| MamError::AuthenticationFailure)?;

        let digest = signed_digest(root, self.leaf_index, &masked_prefix);
        let leaf = ots::recover_leaf(&digest, &signature);
        if merkle::root_from_path(&leaf, self.leaf_index, &self.auth_path) != *root {
            return Err(MamError::AuthenticationFailure);
        }

        let clear = keystream::unmask(&masked_prefix, root, key, self.leaf_index);
        let message_len = clear.len() - super::NEXT_ROOT_TRYTES;
        let next_root_bytes = trytes_to_bytes(&clear.slice(message_len..clear.len()))
            .map_err(|_| MamError::AuthenticationFailure)?;
        let next_root = Digest(
            next_root_bytes
                .try_into()
                .map_err(|_| MamError::AuthenticationFailure)?,
        );
        Ok((clear.slice(0..message_len), next_root))
    }
}
