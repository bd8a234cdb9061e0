//! Byte/tryte conversion.
//!
//! Payloads ride the ledger as strings over the 27-symbol tryte alphabet
//! `9ABCDEFGHIJKLMNOPQRSTUVWXYZ`, where `9` stands for 0 and `A` through
//! `Z` for 1 through 26. A byte maps to two trytes, low first:
//! `v -> (v mod 27, v div 27)`. Two trytes can name values up to 728, so
//! decoding must reject pairs above 255; that check is what turns blind
//! corruption of a stored payload into a hard error instead of garbage.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// The tryte alphabet in value order: index i holds the symbol for i.
pub const TRYTE_ALPHABET: &[u8; 27] = b"9ABCDEFGHIJKLMNOPQRSTUVWXYZ";

/// Payload capacity of a single ledger transaction, in trytes.
pub const TRANSACTION_CAPACITY_TRYTES: usize = 2187;

/// A validated string over the tryte alphabet.
///
/// Construction checks every symbol, so the rest of the crate can treat
/// the inner bytes as values 0..27 without re-validating.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct TryteString(String);

impl TryteString {
    /// Wrap a string, verifying every character is a tryte symbol.
    pub fn from_trytes(s: impl Into<String>) -> Result<Self, TrinaryError> {
        let s = s.into();
        for (index, byte) in s.bytes().enumerate() {
            if symbol_value(byte).is_none() {
                return Err(TrinaryError::InvalidSymbol {
                    symbol: s[index..].chars().next().unwrap_or('?'),
                    index,
                });
            }
        }
        Ok(TryteString(s))
    }

    /// Build from raw tryte values, each in 0..27.
    pub fn from_values(values: impl IntoIterator<Item = u8>) -> Self {
        let inner: String = values
            .into_iter()
            .map(|v| {
                assert!(v < 27, "tryte value out of range: {v}");
                TRYTE_ALPHABET[v as usize] as char
            })
            .collect();
        TryteString(inner)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Tryte values in order, each in 0..27.
    pub fn values(&self) -> impl Iterator<Item = u8> + '_ {
        self.0.bytes().map(|b| symbol_value(b).expect("validated"))
    }

    pub fn push(&mut self, other: &TryteString) {
        self.0.push_str(&other.0);
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> TryteString {
        TryteString(self.0[range].to_string())
    }
}

impl std::fmt::Display for TryteString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::fmt::Debug for TryteString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0.len() <= 32 {
            write!(f, "TryteString({:?})", self.0)
        } else {
            write!(f, "TryteString({:?}.. len={})", &self.0[..32], self.0.len())
        }
    }
}

impl std::str::FromStr for TryteString {
    type Err = TrinaryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TryteString::from_trytes(s)
    }
}

impl Serialize for TryteString {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for TryteString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        TryteString::from_trytes(s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TrinaryError {
    #[error("invalid tryte symbol {symbol:?} at index {index}")]
    InvalidSymbol { symbol: char, index: usize },
    #[error("tryte string length {len} is odd, cannot decode to bytes")]
    OddLength { len: usize },
    #[error("tryte pair at index {index} decodes to {value}, above the byte range")]
    ByteOutOfRange { value: u16, index: usize },
}

/// Value of a tryte symbol, or None for characters outside the alphabet.
pub fn symbol_value(symbol: u8) -> Option<u8> {
    match symbol {
        b'9' => Some(0),
        b'A'..=b'Z' => Some(symbol - b'A' + 1),
        _ => None,
    }
}

/// Encode bytes as trytes, two symbols per byte, low tryte first.
pub fn bytes_to_trytes(bytes: &[u8]) -> TryteString {
    let mut out = String::with_capacity(bytes.len() * 2);
    for &b in bytes {
        out.push(TRYTE_ALPHABET[(b % 27) as usize] as char);
        out.push(TRYTE_ALPHABET[(b / 27) as usize] as char);
    }
    TryteString(out)
}

/// Decode a tryte string produced by [`bytes_to_trytes`].
pub fn trytes_to_bytes(trytes: &TryteString) -> Result<Vec<u8>, TrinaryError> {
    let values: Vec<u8> = trytes.values().collect();
    if !values.len().is_multiple_of(2) {
        return Err(TrinaryError::OddLength { len: values.len() });
    }
    let mut out = Vec::with_capacity(values.len() / 2);
    for (pair, chunk) in values.chunks_exact(2).enumerate() {
        let value = chunk[0] as u16 + 27 * chunk[1] as u16;
        if value > 255 {
            return Err(TrinaryError::ByteOutOfRange {
                value,
                index: pair * 2,
            });
        }
        out.push(value as u8);
    }
    Ok(out)
}

/// Split trytes into transaction-sized chunks.
///
/// Every chunk except the last is exactly `capacity` long. The empty
/// string still yields one (empty) chunk, so every payload maps to at
/// least one transaction.
pub fn chunk_trytes(trytes: &TryteString, capacity: usize) -> Vec<TryteString> {
    assert!(capacity >= 1, "chunk capacity must be positive");
    if trytes.is_empty() {
        return vec![TryteString::default()];
    }
    trytes
        .0
        .as_bytes()
        .chunks(capacity)
        .map(|c| TryteString(String::from_utf8(c.to_vec()).expect("ascii")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fixed_encodings() {
        assert_eq!(bytes_to_trytes(&[]).as_str(), "");
        assert_eq!(bytes_to_trytes(&[0x00]).as_str(), "99");
        // 0x5A = 90 = 9 + 27 * 3
        assert_eq!(bytes_to_trytes(&[0x5A]).as_str(), "IC");
        // 0xFF = 255 = 12 + 27 * 9
        assert_eq!(bytes_to_trytes(&[0xFF]).as_str(), "LI");
        assert_eq!(bytes_to_trytes(&[0x00, 0x5A, 0xFF]).as_str(), "99ICLI");
        // 26 = 'Z' low, zero high
        assert_eq!(bytes_to_trytes(&[26]).as_str(), "Z9");
        // 27 = zero low, 'A' high
        assert_eq!(bytes_to_trytes(&[27]).as_str(), "9A");
    }

    #[test]
    fn decode_rejects_odd_length() {
        let t = TryteString::from_trytes("ABC").unwrap();
        assert_eq!(trytes_to_bytes(&t), Err(TrinaryError::OddLength { len: 3 }));
    }

    #[test]
    fn decode_rejects_out_of_range_pairs() {
        // "ZZ" = 26 + 27 * 26 = 728
        let t = TryteString::from_trytes("ZZ").unwrap();
        assert_eq!(
            trytes_to_bytes(&t),
            Err(TrinaryError::ByteOutOfRange {
                value: 728,
                index: 0
            })
        );
        // "MI" = 13 + 27 * 9 = 256, first pair past the byte range
        let t = TryteString::from_trytes("MI").unwrap();
        assert_eq!(
            trytes_to_bytes(&t),
            Err(TrinaryError::ByteOutOfRange {
                value: 256,
                index: 0
            })
        );
        // "LI" = 255 decodes fine
        let t = TryteString::from_trytes("LI").unwrap();
        assert_eq!(trytes_to_bytes(&t).unwrap(), vec![255]);
        // error index points at the offending pair
        let t = TryteString::from_trytes("99ZZ").unwrap();
        assert_eq!(
            trytes_to_bytes(&t),
            Err(TrinaryError::ByteOutOfRange {
                value: 728,
                index: 2
            })
        );
    }

    #[test]
    fn construction_rejects_foreign_symbols() {
        assert!(TryteString::from_trytes("ABC9Z").is_ok());
        assert_eq!(
            TryteString::from_trytes("AbC"),
            Err(TrinaryError::InvalidSymbol {
                symbol: 'b',
                index: 1
            })
        );
        assert!(TryteString::from_trytes("A1").is_err());
        assert!(TryteString::from_trytes(" ").is_err());
    }

    #[test]
    fn chunking_boundaries() {
        let cap = TRANSACTION_CAPACITY_TRYTES;
        let make = |n: usize| TryteString::from_values(std::iter::repeat_n(7, n));

        let empty = chunk_trytes(&TryteString::default(), cap);
        assert_eq!(empty.len(), 1);
        assert!(empty[0].is_empty());

        let one_under = chunk_trytes(&make(cap - 1), cap);
        assert_eq!(one_under.len(), 1);
        assert_eq!(one_under[0].len(), cap - 1);

        let exact = chunk_trytes(&make(cap), cap);
        assert_eq!(exact.len(), 1);
        assert_eq!(exact[0].len(), cap);

        let one_over = chunk_trytes(&make(cap + 1), cap);
        assert_eq!(one_over.len(), 2);
        assert_eq!(one_over[0].len(), cap);
        assert_eq!(one_over[1].len(), 1);

        let double = chunk_trytes(&make(2 * cap), cap);
        assert_eq!(double.len(), 2);
        assert_eq!(double[1].len(), cap);
    }

    #[test]
    fn chunks_reassemble() {
        let t = bytes_to_trytes(&(0..=255u8).cycle().take(5000).collect::<Vec<_>>());
        let mut joined = TryteString::default();
        for c in chunk_trytes(&t, TRANSACTION_CAPACITY_TRYTES) {
            joined.push(&c);
        }
        assert_eq!(joined, t);
    }

    proptest! {
        #[test]
        fn roundtrip(bytes: Vec<u8>) {
            let trytes = bytes_to_trytes(&bytes);
            prop_assert_eq!(trytes.len(), bytes.len() * 2);
            prop_assert_eq!(trytes_to_bytes(&trytes).unwrap(), bytes);
        }

        #[test]
        fn values_stay_in_range(bytes: Vec<u8>) {
            let trytes = bytes_to_trytes(&bytes);
            prop_assert!(trytes.values().all(|v| v < 27));
        }
    }
}
