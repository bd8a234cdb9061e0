//! Ledger persistence.
//!
//! The on-disk form is line-delimited text:
//!
//! ```text
//! tangle/1 difficulty=<bits>
//! <hash> <trunk> <branch> <address> <tag> <bundle_hash> <index> <last> <timestamp> <nonce> <payload>
//! ...
//! milestones <hash> <hash> ...
//! ```
//!
//! Digests are lowercase hex, tag and payload are raw trytes (either
//! may be empty), numbers are decimal. Transaction lines appear in
//! insertion order, so references always point upward in the file.
//! Loading re-verifies proof-of-work and references for every line;
//! a tampered file cannot load silently.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use crate::hashing::Digest;
use crate::trinary::TryteString;

use super::{Ledger, TangleError, Transaction};

const MAGIC: &str = "tangle/1";

fn tx_line(tx: &Transaction) -> String {
    format!(
        "{} {} {} {} {} {} {} {} {} {} {}",
        tx.hash,
        tx.trunk,
        tx.branch,
        tx.address,
        tx.tag,
        tx.bundle_hash,
        tx.index,
        tx.last,
        tx.timestamp,
        tx.nonce,
        tx.payload
    )
}

fn parse_tx_line(line: &str, lineno: usize) -> Result<Transaction, TangleError> {
    let corrupt = |what: &str| TangleError::Corrupt(format!("line {lineno}: {what}"));
    let fields: Vec<&str> = line.split(' ').collect();
    if fields.len() != 11 {
        return Err(corrupt(&format!("{} fields, expected 11", fields.len())));
    }
    let digest =
        |s: &str, name: &str| Digest::from_hex(s).map_err(|_| corrupt(&format!("bad {name}")));
    let number = |s: &str, name: &str| {
        s.parse::<u64>()
            .map_err(|_| corrupt(&format!("bad {name}")))
    };
    Ok(Transaction {
        hash: digest(fields[0], "hash")?,
        trunk: digest(fields[1], "trunk")?,
        branch: digest(fields[2], "branch")?,
        address: digest(fields[3], "address")?,
        tag: TryteString::from_trytes(fields[4]).map_err(|_| corrupt("bad tag"))?,
        bundle_hash: digest(fields[5], "bundle hash")?,
        index: number(fields[6], "index")? as u32,
        last: number(fields[7], "last")? as u32,
        timestamp: number(fields[8], "timestamp")?,
        nonce: number(fields[9], "nonce")?,
        payload: TryteString::from_trytes(fields[10]).map_err(|_| corrupt("bad payload"))?,
    })
}

impl Ledger {
    /// Render the full ledger in the persistence format.
    pub fn serialize_to_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{MAGIC} difficulty={}\n", self.difficulty));
        for hash in &self.order {
            out.push_str(&tx_line(&self.transactions[hash]));
            out.push('\n');
        }
        out.push_str("milestones");
        for m in &self.milestones {
            out.push(' ');
            out.push_str(&m.to_hex());
        }
        out.push('\n');
        out
    }

    pub fn save(&self, path: &Path) -> Result<(), TangleError> {
        Ok(std::fs::write(path, self.serialize_to_string())?)
    }

    /// Parse and re-validate a serialized ledger.
    pub fn parse(text: &str) -> Result<Ledger, TangleError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| TangleError::Corrupt("empty file".into()))?;
        let difficulty = header
            .strip_prefix(MAGIC)
            .and_then(|rest| rest.trim().strip_prefix("difficulty="))
            .and_then(|d| d.parse::<u32>().ok())
            .ok_or_else(|| TangleError::Corrupt(format!("bad header {header:?}")))?;

        let mut transactions: HashMap<Digest, Transaction> = HashMap::new();
        let mut order = Vec::new();
        let mut milestone_hashes: Option<Vec<Digest>> = None;
        let mut genesis = None;

        for (idx, line) in lines {
            let lineno = idx + 1;
            if milestone_hashes.is_some() {
                return Err(TangleError::Corrupt(format!(
                    "line {lineno}: content after the milestones line"
                )));
            }
            if let Some(rest) = line.strip_prefix("milestones") {
                let mut hashes = Vec::new();
                for part in rest.split_whitespace() {
                    hashes.push(Digest::from_hex(part).map_err(|_| {
                        TangleError::Corrupt(format!("line {lineno}: bad milestone hash"))
                    })?);
                }
                milestone_hashes = Some(hashes);
                continue;
            }
            let tx = parse_tx_line(line, lineno)?;
            if !tx.verify_pow(difficulty) {
                return Err(TangleError::Corrupt(format!(
                    "line {lineno}: proof-of-work does not verify"
                )));
            }
            if genesis.is_none() {
                if !tx.is_genesis() {
                    return Err(TangleError::Corrupt(
                        "first transaction is not a genesis".into(),
                    ));
                }
                genesis = Some(tx.hash);
            } else {
                if tx.is_genesis() {
                    return Err(TangleError::Corrupt(format!(
                        "line {lineno}: second genesis"
                    )));
                }
                for reference in [tx.trunk, tx.branch] {
                    if !transactions.contains_key(&reference) {
                        return Err(TangleError::Corrupt(format!(
                            "line {lineno}: reference to a later or missing transaction"
                        )));
                    }
                }
            }
            if transactions.contains_key(&tx.hash) {
                return Err(TangleError::Corrupt(format!(
                    "line {lineno}: duplicate transaction"
                )));
            }
            order.push(tx.hash);
            transactions.insert(tx.hash, tx);
        }

        let genesis = genesis.ok_or_else(|| TangleError::Corrupt("no transactions".into()))?;
        let milestones = milestone_hashes
            .ok_or_else(|| TangleError::Corrupt("missing milestones line".into()))?;
        for m in &milestones {
            if !transactions.contains_key(m) {
                return Err(TangleError::Corrupt(format!("unknown milestone {m}")));
            }
        }

        // rebuild the derived indices
        let mut approvers: HashMap<Digest, Vec<Digest>> = HashMap::new();
        let mut approved: HashSet<Digest> = HashSet::new();
        for hash in &order {
            let tx = &transactions[hash];
            if tx.is_genesis() {
                continue;
            }
            for reference in if tx.trunk == tx.branch {
                vec![tx.trunk]
            } else {
                vec![tx.trunk, tx.branch]
            } {
                approvers.entry(reference).or_default().push(*hash);
                approved.insert(reference);
            }
        }
        let tips: Vec<Digest> = {
            let mut t: Vec<Digest> = order
                .iter()
                .filter(|h| !approved.contains(h))
                .copied()
                .collect();
            t.sort();
            t
        };

        let mut ledger = Ledger {
            transactions,
            order,
            approvers,
            tips,
            confirmed: HashSet::new(),
            genesis,
            milestones: Vec::new(),
            difficulty,
        };
        ledger.confirmed.insert(genesis);
        for m in milestones {
            ledger.milestones.push(m);
            ledger.confirm_cone(m);
        }
        Ok(ledger)
    }

    pub fn load(path: &Path) -> Result<Ledger, TangleError> {
        Ledger::parse(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hashing::sha256;
    use crate::tangle::TipStrategy;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample_ledger() -> Ledger {
        let mut ledger = Ledger::new(2);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let tag = TryteString::from_trytes("DEAMARKET").unwrap();
        for i in 0..4u64 {
            let payloads = vec![
                TryteString::from_trytes("ABC").unwrap(),
                TryteString::default(),
            ];
            ledger
                .attach(
                    &payloads,
                    sha256(&[b"a", &[i as u8]]),
                    &tag,
                    i + 1,
                    TipStrategy::Uniform,
                    &mut rng,
                )
                .unwrap();
            if i % 2 == 1 {
                ledger
                    .issue_milestone(i + 1, TipStrategy::Uniform, &mut rng)
                    .unwrap();
            }
        }
        ledger
    }

    #[test]
    fn roundtrip_is_byte_identical() {
        let ledger = sample_ledger();
        let text = ledger.serialize_to_string();
        let reloaded = Ledger::parse(&text).unwrap();
        assert_eq!(reloaded.serialize_to_string(), text);
        assert_eq!(reloaded.len(), ledger.len());
        assert_eq!(reloaded.genesis(), ledger.genesis());
        assert_eq!(reloaded.milestones(), ledger.milestones());
        assert_eq!(reloaded.tips(), ledger.tips());
        reloaded.verify_all().unwrap();
        // confirmation state is rebuilt, not stored
        for h in ledger.order() {
            assert_eq!(
                reloaded.is_confirmed(h).unwrap(),
                ledger.is_confirmed(h).unwrap()
            );
        }
    }

    #[test]
    fn save_and_load_via_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("node.tangle");
        let ledger = sample_ledger();
        ledger.save(&path).unwrap();
        let reloaded = Ledger::load(&path).unwrap();
        assert_eq!(reloaded.serialize_to_string(), ledger.serialize_to_string());
    }

    #[test]
    fn tampered_files_fail_to_load() {
        let text = sample_ledger().serialize_to_string();

        // flip one payload tryte on some transaction line
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        let target = lines.iter().position(|l| l.ends_with(" ABC")).unwrap();
        lines[target] = lines[target].replace(" ABC", " ABD");
        match Ledger::parse(&lines.join("\n")) {
            Err(TangleError::Corrupt(_)) => {}
            Err(other) => panic!("expected corruption error, got {other}"),
            Ok(_) => panic!("tampered payload loaded"),
        }

        // drop a referenced line
        let mut dropped: Vec<&str> = text.lines().collect();
        dropped.remove(1);
        assert!(Ledger::parse(&dropped.join("\n")).is_err());

        // bad header
        assert!(Ledger::parse("tangle/9 difficulty=2\n").is_err());
        assert!(Ledger::parse("").is_err());

        // milestone pointing nowhere
        let mut bad_milestone: Vec<String> = text.lines().map(String::from).collect();
        let last = bad_milestone.last_mut().unwrap();
        *last = format!("milestones {}", sha256(&[b"ghost"]));
        assert!(Ledger::parse(&bad_milestone.join("\n")).is_err());
    }

    #[test]
    fn field_order_is_the_documented_one() {
        let ledger = sample_ledger();
        let text = ledger.serialize_to_string();
        let line = text.lines().nth(1).unwrap();
        let fields: Vec<&str> = line.split(' ').collect();
        assert_eq!(fields.len(), 11);
        let tx = ledger.transaction(&ledger.genesis()).unwrap();
        assert_eq!(fields[0], tx.hash.to_hex());
        assert_eq!(fields[1], tx.trunk.to_hex());
        assert_eq!(fields[2], tx.branch.to_hex());
        assert_eq!(fields[3], tx.address.to_hex());
        assert_eq!(fields[4], tx.tag.as_str());
        assert_eq!(fields[5], tx.bundle_hash.to_hex());
        assert_eq!(fields[6], tx.index.to_string());
        assert_eq!(fields[7], tx.last.to_string());
        assert_eq!(fields[8], tx.timestamp.to_string());
        assert_eq!(fields[9], tx.nonce.to_string());
        assert_eq!(fields[10], tx.payload.as_str());
    }
}
