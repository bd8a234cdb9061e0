//! The repo-wide 256-bit digest type.
//!
//! One hash function (SHA-256) backs everything that needs hashing:
//! Merkle tree nodes, channel addresses, content identifiers and
//! proof-of-work. Fixing a single function keeps every derived value
//! reproducible across runs and platforms.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest as _, Sha256};

/// Number of bytes in a [`Digest`].
pub const DIGEST_LEN: usize = 32;

/// A 256-bit hash output.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Digest(pub [u8; DIGEST_LEN]);

impl Digest {
    /// The all-zero digest, used as the null reference (genesis parents,
    /// coordinator address).
    pub const ZERO: Digest = Digest([0u8; DIGEST_LEN]);

    pub fn as_bytes(&self) -> &[u8; DIGEST_LEN] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0u8; DIGEST_LEN]
    }

    /// Lowercase hex rendering.
    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self, HexError> {
        let bytes = hex::decode(s).map_err(|_| HexError(s.to_string()))?;
        let arr: [u8; DIGEST_LEN] = bytes.try_into().map_err(|_| HexError(s.to_string()))?;
        Ok(Digest(arr))
    }

    /// Count of leading zero bits, the proof-of-work difficulty measure.
    pub fn leading_zero_bits(&self) -> u32 {
        let mut bits = 0;
        for byte in self.0 {
            if byte == 0 {
                bits += 8;
            } else {
                bits += byte.leading_zeros();
                break;
            }
        }
        bits
    }
}

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Debug for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest({})", &self.to_hex()[..12])
    }
}

impl FromStr for Digest {
    type Err = HexError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Digest::from_hex(s)
    }
}

impl Serialize for Digest {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Digest {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Digest::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

/// Not a valid 64-character hex digest.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid digest hex: {0:?}")]
pub struct HexError(pub String);

/// Hash the concatenation of the given parts.
pub fn sha256(parts: &[&[u8]]) -> Digest {
    let mut hasher = Sha256::new();
    for part in parts {
        hasher.update(part);
    }
    Digest(hasher.finalize().into())
}

/// Incremental hasher for streaming large inputs.
pub struct Hasher(Sha256);

impl Hasher {
    pub fn new() -> Self {
        Hasher(Sha256::new())
    }

    pub fn update(&mut self, data: &[u8]) {
        self.0.update(data);
    }

    pub fn finalize(self) -> Digest {
        Digest(self.0.finalize().into())
    }
}

impl Default for Hasher {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_vector() {
        // SHA-256 of the empty string.
        assert_eq!(
            sha256(&[]).to_hex(),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn concatenation_matches_streaming() {
        let whole = sha256(&[b"abc", b"def"]);
        let mut h = Hasher::new();
        h.update(b"ab");
        h.update(b"cdef");
        assert_eq!(whole, h.finalize());
    }

    #[test]
    fn hex_roundtrip() {
        let d = sha256(&[b"roundtrip"]);
        assert_eq!(Digest::from_hex(&d.to_hex()).unwrap(), d);
        assert!(Digest::from_hex("zz").is_err());
        assert!(Digest::from_hex("abcd").is_err());
    }

    #[test]
    fn leading_zero_bits_counts() {
        assert_eq!(Digest::ZERO.leading_zero_bits(), 256);
        let mut one = [0u8; DIGEST_LEN];
        one[0] = 0x01;
        assert_eq!(Digest(one).leading_zero_bits(), 7);
        let mut high = [0u8; DIGEST_LEN];
        high[0] = 0x80;
        assert_eq!(Digest(high).leading_zero_bits(), 0);
        let mut second = [0u8; DIGEST_LEN];
        second[1] = 0xff;
        assert_eq!(Digest(second).leading_zero_bits(), 8);
    }
}
