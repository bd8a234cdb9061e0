//! Simulated DAG ledger.
//!
//! Every transaction approves two earlier ones (trunk and branch),
//! carries a proof-of-work nonce and at most one payload chunk.
//! Multi-chunk messages form bundles: chunk 0 approves two selected
//! tips, every later chunk approves its predecessor plus the branch
//! tip, so a bundle adds exactly one new tip and confirming its head
//! confirms the whole chain.
//!
//! Confirmation is milestone reachability: a coordinator transaction
//! approves tips like everyone else, and everything in its past cone
//! counts as confirmed. There is no gossip, no value transfer and no
//! conflict resolution; all transactions are data transactions.

pub mod node;
pub mod persist;

use std::collections::{HashMap, HashSet};

use rand::Rng;

use crate::hashing::{sha256, Digest, Hasher};
use crate::trinary::{TryteString, TRANSACTION_CAPACITY_TRYTES};

const TX_DOMAIN: &[u8] = b"deam.tx";
const BUNDLE_DOMAIN: &[u8] = b"deam.bundle";
/// Tag length cap: one tryte per alphabet symbol.
pub const MAX_TAG_TRYTES: usize = 27;

pub const GENESIS_TAG: &str = "GENESIS";
pub const MILESTONE_TAG: &str = "MILESTONE";

#[derive(Debug, thiserror::Error)]
pub enum TangleError {
    #[error("unknown transaction {0}")]
    UnknownTransaction(Digest),
    #[error("payload of {len} trytes exceeds the {TRANSACTION_CAPACITY_TRYTES}-tryte capacity")]
    PayloadTooLarge { len: usize },
    #[error("tag of {0} trytes exceeds {MAX_TAG_TRYTES}")]
    TagTooLong(usize),
    #[error("bundle must contain at least one payload")]
    EmptyBundle,
    #[error("transaction {hash} fails proof-of-work at difficulty {difficulty}")]
    PowInvalid { hash: Digest, difficulty: u32 },
    #[error("transaction {hash} references missing transaction {reference}")]
    DanglingReference { hash: Digest, reference: Digest },
    #[error("transaction {0} is already in the ledger")]
    DuplicateTransaction(Digest),
    #[error("bundle {0} not confirmed after the step budget")]
    ConfirmationStalled(Digest),
    #[error("corrupt ledger file: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// How tips are chosen for approval.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub enum TipStrategy {
    /// Uniform over the current tip set.
    #[default]
    Uniform,
    /// Random walk from the latest milestone toward the tips, biased
    /// toward approvers with higher cumulative weight.
    Weighted { alpha: f64 },
}

impl TipStrategy {
    pub const DEFAULT_ALPHA: f64 = 0.01;
}

impl std::str::FromStr for TipStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(TipStrategy::Uniform),
            "weighted" => Ok(TipStrategy::Weighted {
                alpha: TipStrategy::DEFAULT_ALPHA,
            }),
            other => Err(format!("unknown tip strategy {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transaction {
    pub hash: Digest,
    pub trunk: Digest,
    pub branch: Digest,
    pub payload: TryteString,
    pub address: Digest,
    pub tag: TryteString,
    pub bundle_hash: Digest,
    /// Position within the bundle, 0-based.
    pub index: u32,
    /// Index of the bundle's final transaction.
    pub last: u32,
    /// Milliseconds; source depends on the node's clock.
    pub timestamp: u64,
    pub nonce: u64,
}

impl Transaction {
    /// Digest of every field except the nonce (and the hash itself).
    /// The transaction hash is H(essence ‖ nonce), so proof-of-work
    /// only rehashes a fixed-size prefix per attempt.
    pub fn essence_digest(&self) -> Digest {
        let mut h = Hasher::new();
        h.update(TX_DOMAIN);
        h.update(self.trunk.as_bytes());
        h.update(self.branch.as_bytes());
        h.update(self.address.as_bytes());
        h.update(&(self.tag.len() as u32).to_le_bytes());
        h.update(self.tag.as_str().as_bytes());
        h.update(self.bundle_hash.as_bytes());
        h.update(&self.index.to_le_bytes());
        h.update(&self.last.to_le_bytes());
        h.update(&self.timestamp.to_le_bytes());
        h.update(&(self.payload.len() as u64).to_le_bytes());
        h.update(self.payload.as_str().as_bytes());
        h.finalize()
    }

    pub fn verify_pow(&self, difficulty: u32) -> bool {
        let hash = pow_hash(&self.essence_digest(), self.nonce);
        hash == self.hash && hash.leading_zero_bits() >= difficulty
    }

    pub fn is_genesis(&self) -> bool {
        self.trunk.is_zero() && self.branch.is_zero()
    }
}

fn pow_hash(essence: &Digest, nonce: u64) -> Digest {
    sha256(&[essence.as_bytes(), &nonce.to_le_bytes()])
}

/// Find the smallest nonce whose hash clears `difficulty` leading
/// zero bits. Returns (nonce, hash).
pub fn pow(essence: &Digest, difficulty: u32) -> (u64, Digest) {
    let mut nonce = 0u64;
    loop {
        let hash = pow_hash(essence, nonce);
        if hash.leading_zero_bits() >= difficulty {
            return (nonce, hash);
        }
        nonce += 1;
    }
}

/// Transactions sharing one bundle hash, ordered by index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bundle {
    pub transactions: Vec<Transaction>,
}

impl Bundle {
    pub fn bundle_hash(&self) -> Digest {
        self.transactions[0].bundle_hash
    }

    /// The bundle's sole tip-facing transaction (highest index).
    pub fn head(&self) -> &Transaction {
        self.transactions.last().expect("bundles are non-empty")
    }

    pub fn timestamp(&self) -> u64 {
        self.transactions[0].timestamp
    }

    /// Concatenated payloads in index order.
    pub fn payload(&self) -> TryteString {
        let mut out = TryteString::default();
        for tx in &self.transactions {
            out.push(&tx.payload);
        }
        out
    }
}

/// Build the chained transactions of one bundle. Pure: needs only the
/// approved tips and the difficulty, so callers can run proof-of-work
/// without holding any ledger lock. `salt` disambiguates bundles that
/// agree on every other input.
#[allow(clippy::too_many_arguments)]
pub fn build_bundle(
    trunk_tip: Digest,
    branch_tip: Digest,
    payloads: &[TryteString],
    address: Digest,
    tag: &TryteString,
    timestamp: u64,
    difficulty: u32,
    salt: u64,
) -> Result<Vec<Transaction>, TangleError> {
    if payloads.is_empty() {
        return Err(TangleError::EmptyBundle);
    }
    if tag.len() > MAX_TAG_TRYTES {
        return Err(TangleError::TagTooLong(tag.len()));
    }
    for p in payloads {
        if p.len() > TRANSACTION_CAPACITY_TRYTES {
            return Err(TangleError::PayloadTooLarge { len: p.len() });
        }
    }

    let mut bh = Hasher::new();
    bh.update(BUNDLE_DOMAIN);
    bh.update(address.as_bytes());
    bh.update(tag.as_str().as_bytes());
    bh.update(&timestamp.to_le_bytes());
    bh.update(&salt.to_le_bytes());
    for p in payloads {
        bh.update(sha256(&[p.as_str().as_bytes()]).as_bytes());
    }
    let bundle_hash = bh.finalize();

    let last = (payloads.len() - 1) as u32;
    let mut transactions = Vec::with_capacity(payloads.len());
    let mut previous = trunk_tip;
    for (i, payload) in payloads.iter().enumerate() {
        let mut tx = Transaction {
            hash: Digest::ZERO,
            trunk: previous,
            branch: branch_tip,
            payload: payload.clone(),
            address,
            tag: tag.clone(),
            bundle_hash,
            index: i as u32,
            last,
            timestamp,
            nonce: 0,
        };
        let (nonce, hash) = pow(&tx.essence_digest(), difficulty);
        tx.nonce = nonce;
        tx.hash = hash;
        previous = tx.hash;
        transactions.push(tx);
    }
    Ok(transactions)
}

pub struct Ledger {
    transactions: HashMap<Digest, Transaction>,
    /// Insertion order; also the persistence order.
    order: Vec<Digest>,
    /// hash → transactions that approve it (deduplicated).
    approvers: HashMap<Digest, Vec<Digest>>,
    /// Unapproved transactions, kept sorted for deterministic choice.
    tips: Vec<Digest>,
    confirmed: HashSet<Digest>,
    genesis: Digest,
    milestones: Vec<Digest>,
    difficulty: u32,
}

impl Ledger {
    /// Fresh ledger holding only the (deterministic) genesis.
    pub fn new(difficulty: u32) -> Self {
        let tag = TryteString::from_trytes(GENESIS_TAG).expect("constant tag");
        let mut genesis = Transaction {
            hash: Digest::ZERO,
            trunk: Digest::ZERO,
            branch: Digest::ZERO,
            payload: TryteString::default(),
            address: Digest::ZERO,
            tag,
            bundle_hash: Digest::ZERO,
            index: 0,
            last: 0,
            timestamp: 0,
            nonce: 0,
        };
        let (nonce, hash) = pow(&genesis.essence_digest(), difficulty);
        genesis.nonce = nonce;
        genesis.hash = hash;

        let mut ledger = Ledger {
            transactions: HashMap::new(),
            order: Vec::new(),
            approvers: HashMap::new(),
            tips: Vec::new(),
            confirmed: HashSet::new(),
            genesis: hash,
            milestones: Vec::new(),
            difficulty,
        };
        ledger.transactions.insert(hash, genesis);
        ledger.order.push(hash);
        ledger.tips.push(hash);
        // genesis is confirmed by convention
        ledger.confirmed.insert(hash);
        ledger
    }

    pub fn difficulty(&self) -> u32 {
        self.difficulty
    }

    pub fn genesis(&self) -> Digest {
        self.genesis
    }

    pub fn len(&self) -> usize {
        self.transactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transactions.is_empty()
    }

    pub fn milestones(&self) -> &[Digest] {
        &self.milestones
    }

    pub fn confirmed_count(&self) -> usize {
        self.confirmed.len()
    }

    pub fn transaction(&self, hash: &Digest) -> Option<&Transaction> {
        self.transactions.get(hash)
    }

    /// Insertion-ordered transaction hashes.
    pub fn order(&self) -> &[Digest] {
        &self.order
    }

    pub fn tips(&self) -> &[Digest] {
        &self.tips
    }

    /// Choose the two tips a new bundle will approve.
    ///
    /// Both results are current tips; they coincide only when the tip
    /// set has a single element (the bootstrap case).
    pub fn select_tips(&self, strategy: TipStrategy, rng: &mut impl Rng) -> (Digest, Digest) {
        debug_assert!(
            !self.tips.is_empty(),
            "a ledger always has at least one tip"
        );
        if self.tips.len() == 1 {
            return (self.tips[0], self.tips[0]);
        }
        match strategy {
            TipStrategy::Uniform => {
                let a = rng.random_range(0..self.tips.len());
                let mut b = rng.random_range(0..self.tips.len() - 1);
                if b >= a {
                    b += 1;
                }
                (self.tips[a], self.tips[b])
            }
            TipStrategy::Weighted { alpha } => {
                let start = *self.milestones.last().unwrap_or(&self.genesis);
                let mut memo = HashMap::new();
                let trunk = self.weighted_walk(start, alpha, rng, &mut memo);
                let mut branch = self.weighted_walk(start, alpha, rng, &mut memo);
                if branch == trunk {
                    // walks converged; honor the distinctness rule
                    let others: Vec<Digest> =
                        self.tips.iter().copied().filter(|t| *t != trunk).collect();
                    branch = others[rng.random_range(0..others.len())];
                }
                (trunk, branch)
            }
        }
    }

    /// Biased random walk from `start` toward the tips. At each step
    /// the walker moves to a direct approver v of the current u with
    /// probability proportional to exp(-alpha * (W(u) - W(v))).
    fn weighted_walk(
        &self,
        start: Digest,
        alpha: f64,
        rng: &mut impl Rng,
        memo: &mut HashMap<Digest, u64>,
    ) -> Digest {
        let mut current = start;
        loop {
            let approvers = match self.approvers.get(&current) {
                Some(a) if !a.is_empty() => a,
                _ => return current,
            };
            let w_current = self.memo_weight(current, memo);
            let weights: Vec<f64> = approvers
                .iter()
                .map(|a| (-alpha * (w_current - self.memo_weight(*a, memo)) as f64).exp())
                .collect();
            let total: f64 = weights.iter().sum();
            let mut draw = rng.random_range(0.0..total);
            let mut chosen = approvers[approvers.len() - 1];
            for (a, w) in approvers.iter().zip(&weights) {
                if draw < *w {
                    chosen = *a;
                    break;
                }
                draw -= w;
            }
            current = chosen;
        }
    }

    fn memo_weight(&self, hash: Digest, memo: &mut HashMap<Digest, u64>) -> u64 {
        if let Some(w) = memo.get(&hash) {
            return *w;
        }
        let w = self.closure_weight(&hash);
        memo.insert(hash, w);
        w
    }

    fn closure_weight(&self, hash: &Digest) -> u64 {
        let mut seen = HashSet::new();
        let mut stack = vec![*hash];
        while let Some(h) = stack.pop() {
            if !seen.insert(h) {
                continue;
            }
            if let Some(approvers) = self.approvers.get(&h) {
                stack.extend(approvers.iter().copied());
            }
        }
        seen.len() as u64
    }

    /// 1 + number of distinct transactions approving `tx`, directly
    /// or transitively.
    pub fn cumulative_weight(&self, tx: &Digest) -> Result<u64, TangleError> {
        if !self.transactions.contains_key(tx) {
            return Err(TangleError::UnknownTransaction(*tx));
        }
        Ok(self.closure_weight(tx))
    }

    /// Validate and insert an externally built bundle. Approved
    /// transactions must exist; this is the linearization point for
    /// concurrent attaches.
    pub fn insert_bundle(&mut self, transactions: Vec<Transaction>) -> Result<Bundle, TangleError> {
        if transactions.is_empty() {
            return Err(TangleError::EmptyBundle);
        }
        // references may point at the ledger or at earlier bundle
        // members only; acyclicity is enforced by construction
        let mut preceding: HashSet<Digest> = HashSet::new();
        for (i, tx) in transactions.iter().enumerate() {
            if !tx.verify_pow(self.difficulty) {
                return Err(TangleError::PowInvalid {
                    hash: tx.hash,
                    difficulty: self.difficulty,
                });
            }
            if tx.index != i as u32 || tx.last != (transactions.len() - 1) as u32 {
                return Err(TangleError::Corrupt(format!(
                    "bundle indices out of shape at position {i}"
                )));
            }
            if self.transactions.contains_key(&tx.hash) {
                return Err(TangleError::DuplicateTransaction(tx.hash));
            }
            for reference in [tx.trunk, tx.branch] {
                if !self.transactions.contains_key(&reference) && !preceding.contains(&reference) {
                    return Err(TangleError::DanglingReference {
                        hash: tx.hash,
                        reference,
                    });
                }
            }
            preceding.insert(tx.hash);
        }
        for tx in &transactions {
            self.insert_transaction(tx.clone());
        }
        Ok(Bundle { transactions })
    }

    fn insert_transaction(&mut self, tx: Transaction) {
        let hash = tx.hash;
        for reference in if tx.trunk == tx.branch {
            vec![tx.trunk]
        } else {
            vec![tx.trunk, tx.branch]
        } {
            self.approvers.entry(reference).or_default().push(hash);
            if let Ok(pos) = self.tips.binary_search(&reference) {
                self.tips.remove(pos);
            }
        }
        if let Err(pos) = self.tips.binary_search(&hash) {
            self.tips.insert(pos, hash);
        }
        self.transactions.insert(hash, tx);
        self.order.push(hash);
    }

    /// Select tips, build, proof-of-work and insert in one call.
    pub fn attach(
        &mut self,
        payloads: &[TryteString],
        address: Digest,
        tag: &TryteString,
        timestamp: u64,
        strategy: TipStrategy,
        rng: &mut impl Rng,
    ) -> Result<Bundle, TangleError> {
        let (trunk, branch) = self.select_tips(strategy, rng);
        let salt = rng.random::<u64>();
        let transactions = build_bundle(
            trunk,
            branch,
            payloads,
            address,
            tag,
            timestamp,
            self.difficulty,
            salt,
        )?;
        self.insert_bundle(transactions)
    }

    /// Attach a zero-payload coordinator transaction and mark its past
    /// cone confirmed.
    pub fn issue_milestone(
        &mut self,
        timestamp: u64,
        strategy: TipStrategy,
        rng: &mut impl Rng,
    ) -> Result<Digest, TangleError> {
        let tag = TryteString::from_trytes(MILESTONE_TAG).expect("constant tag");
        let bundle = self.attach(
            &[TryteString::default()],
            Digest::ZERO,
            &tag,
            timestamp,
            strategy,
            rng,
        )?;
        let milestone = bundle.hash_of_single();
        self.milestones.push(milestone);
        self.confirm_cone(milestone);
        Ok(milestone)
    }

    fn confirm_cone(&mut self, from: Digest) {
        let mut stack = vec![from];
        while let Some(h) = stack.pop() {
            if h.is_zero() || !self.confirmed.insert(h) {
                continue;
            }
            if let Some(tx) = self.transactions.get(&h) {
                stack.push(tx.trunk);
                stack.push(tx.branch);
            }
        }
    }

    /// True iff `tx` is the genesis, a milestone, or in some
    /// milestone's past cone.
    pub fn is_confirmed(&self, tx: &Digest) -> Result<bool, TangleError> {
        if !self.transactions.contains_key(tx) {
            return Err(TangleError::UnknownTransaction(*tx));
        }
        Ok(self.confirmed.contains(tx))
    }

    /// All bundles carrying `address`, in first-insertion order, each
    /// internally ordered by index.
    pub fn get_bundle(&self, address: &Digest) -> Vec<Bundle> {
        let mut groups: Vec<(Digest, Vec<Transaction>)> = Vec::new();
        for hash in &self.order {
            let tx = &self.transactions[hash];
            if tx.address != *address {
                continue;
            }
            match groups.iter_mut().find(|(bh, _)| *bh == tx.bundle_hash) {
                Some((_, txs)) => txs.push(tx.clone()),
                None => groups.push((tx.bundle_hash, vec![tx.clone()])),
            }
        }
        groups
            .into_iter()
            .map(|(_, mut txs)| {
                txs.sort_by_key(|t| t.index);
                Bundle { transactions: txs }
            })
            .collect()
    }

    /// Re-verify every stored transaction: proof-of-work at the ledger
    /// difficulty and resolvable trunk/branch references.
    pub fn verify_all(&self) -> Result<(), TangleError> {
        for tx in self.transactions.values() {
            if !tx.verify_pow(self.difficulty) {
                return Err(TangleError::PowInvalid {
                    hash: tx.hash,
                    difficulty: self.difficulty,
                });
            }
            if !tx.is_genesis() {
                for reference in [tx.trunk, tx.branch] {
                    if !self.transactions.contains_key(&reference) {
                        return Err(TangleError::DanglingReference {
                            hash: tx.hash,
                            reference,
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

impl Bundle {
    fn hash_of_single(&self) -> Digest {
        debug_assert_eq!(self.transactions.len(), 1);
        self.transactions[0].hash
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn tag(s: &str) -> TryteString {
        TryteString::from_trytes(s).unwrap()
    }

    fn payloads(n: usize) -> Vec<TryteString> {
        (0..n).map(|i| tag(&"AB".repeat(i + 1))).collect()
    }

    fn addr(n: u8) -> Digest {
        sha256(&[b"addr", &[n]])
    }

    #[test]
    fn pow_difficulty_zero_accepts_first_nonce() {
        let essence = sha256(&[b"essence"]);
        let (nonce, hash) = pow(&essence, 0);
        assert_eq!(nonce, 0);
        assert_eq!(hash, pow_hash(&essence, 0));
    }

    #[test]
    fn pow_difficulty_eight_verifies() {
        let essence = sha256(&[b"work"]);
        let (nonce, hash) = pow(&essence, 8);
        assert!(hash.leading_zero_bits() >= 8);
        assert_eq!(pow_hash(&essence, nonce), hash);
        // the next nonce does not also clear the bar for this essence
        assert!(pow_hash(&essence, nonce + 1).leading_zero_bits() < 8);
    }

    #[test]
    fn fresh_ledger_selects_genesis_twice() {
        let ledger = Ledger::new(2);
        assert_eq!(ledger.tips(), &[ledger.genesis()]);
        let (t, b) = ledger.select_tips(TipStrategy::Uniform, &mut rng(0));
        assert_eq!((t, b), (ledger.genesis(), ledger.genesis()));
        let (t, b) = ledger.select_tips(TipStrategy::Weighted { alpha: 0.01 }, &mut rng(0));
        assert_eq!((t, b), (ledger.genesis(), ledger.genesis()));
    }

    #[test]
    fn attach_single_payload() {
        let mut ledger = Ledger::new(2);
        let bundle = ledger
            .attach(
                &payloads(1),
                addr(1),
                &tag("T"),
                1,
                TipStrategy::Uniform,
                &mut rng(1),
            )
            .unwrap();
        assert_eq!(bundle.transactions.len(), 1);
        assert_eq!(bundle.transactions[0].index, 0);
        assert_eq!(bundle.transactions[0].last, 0);
        assert_eq!(bundle.transactions[0].trunk, ledger.genesis());
        assert_eq!(bundle.transactions[0].branch, ledger.genesis());
        // the approved tip is no longer a tip
        assert_eq!(ledger.tips(), &[bundle.transactions[0].hash]);
    }

    #[test]
    fn attach_five_chunks_shares_bundle_hash() {
        let mut ledger = Ledger::new(2);
        let bundle = ledger
            .attach(
                &payloads(5),
                addr(2),
                &tag("T"),
                1,
                TipStrategy::Uniform,
                &mut rng(2),
            )
            .unwrap();
        assert_eq!(bundle.transactions.len(), 5);
        for (i, tx) in bundle.transactions.iter().enumerate() {
            assert_eq!(tx.index, i as u32);
            assert_eq!(tx.last, 4);
            assert_eq!(tx.bundle_hash, bundle.bundle_hash());
            if i > 0 {
                assert_eq!(tx.trunk, bundle.transactions[i - 1].hash);
            }
        }
        // chained bundle leaves exactly one new tip: the head
        assert_eq!(ledger.tips(), &[bundle.head().hash]);
    }

    #[test]
    fn two_tips_both_orders_appear() {
        // two bundles prepared from the same snapshot, as concurrent
        // publishers would
        let mut ledger = Ledger::new(0);
        let g = ledger.genesis();
        let a = build_bundle(g, g, &payloads(1), addr(3), &tag("A"), 1, 0, 1).unwrap();
        let b = build_bundle(g, g, &payloads(1), addr(4), &tag("B"), 1, 0, 2).unwrap();
        let (a_hash, b_hash) = (a[0].hash, b[0].hash);
        ledger.insert_bundle(a).unwrap();
        ledger.insert_bundle(b).unwrap();
        let mut expect = [a_hash, b_hash];
        expect.sort();
        assert_eq!(ledger.tips(), &expect[..]);

        let mut orders = HashSet::new();
        for seed in 0..64 {
            let pair = ledger.select_tips(TipStrategy::Uniform, &mut rng(seed));
            assert_ne!(pair.0, pair.1);
            orders.insert(pair);
        }
        assert_eq!(orders.len(), 2, "both orders of the two tips appear");
    }

    #[test]
    fn milestone_on_fresh_ledger_approves_genesis_twice() {
        let mut ledger = Ledger::new(2);
        let before = ledger.milestones().len();
        let m = ledger
            .issue_milestone(1, TipStrategy::Uniform, &mut rng(3))
            .unwrap();
        assert_eq!(ledger.milestones().len(), before + 1);
        let tx = ledger.transaction(&m).unwrap();
        assert_eq!(tx.trunk, ledger.genesis());
        assert_eq!(tx.branch, ledger.genesis());
        assert!(tx.payload.is_empty());
        assert!(ledger.is_confirmed(&m).unwrap());
        assert!(ledger.is_confirmed(&ledger.genesis()).unwrap());
    }

    #[test]
    fn linear_chain_fully_confirmed_by_one_milestone() {
        let mut ledger = Ledger::new(0);
        let mut r = rng(4);
        let mut hashes = vec![ledger.genesis()];
        for i in 0..10 {
            let b = ledger
                .attach(
                    &payloads(1),
                    addr(5),
                    &tag("T"),
                    i,
                    TipStrategy::Uniform,
                    &mut r,
                )
                .unwrap();
            hashes.push(b.head().hash);
            assert!(!ledger.is_confirmed(&b.head().hash).unwrap());
        }
        ledger
            .issue_milestone(11, TipStrategy::Uniform, &mut r)
            .unwrap();

        // brute-force reachability oracle from the milestone
        let milestone = *ledger.milestones().last().unwrap();
        let mut reach = HashSet::new();
        let mut stack = vec![milestone];
        while let Some(h) = stack.pop() {
            if h.is_zero() || !reach.insert(h) {
                continue;
            }
            let tx = ledger.transaction(&h).unwrap();
            stack.push(tx.trunk);
            stack.push(tx.branch);
        }
        for h in &hashes {
            assert_eq!(ledger.is_confirmed(h).unwrap(), reach.contains(h));
            assert!(
                ledger.is_confirmed(h).unwrap(),
                "linear chain is fully covered"
            );
        }
    }

    #[test]
    fn unknown_hash_is_not_found() {
        let ledger = Ledger::new(0);
        let missing = sha256(&[b"missing"]);
        assert!(matches!(
            ledger.is_confirmed(&missing),
            Err(TangleError::UnknownTransaction(_))
        ));
        assert!(matches!(
            ledger.cumulative_weight(&missing),
            Err(TangleError::UnknownTransaction(_))
        ));
    }

    #[test]
    fn cumulative_weight_counts_closure() {
        let mut ledger = Ledger::new(0);
        let mut r = rng(5);
        let mut heads = Vec::new();
        for i in 0..6 {
            let b = ledger
                .attach(
                    &payloads(1),
                    addr(6),
                    &tag("T"),
                    i,
                    TipStrategy::Uniform,
                    &mut r,
                )
                .unwrap();
            heads.push(b.head().hash);
        }
        // linear DAG: tip weight 1, genesis weight = ledger size
        assert_eq!(ledger.cumulative_weight(heads.last().unwrap()).unwrap(), 1);
        assert_eq!(
            ledger.cumulative_weight(&ledger.genesis()).unwrap(),
            ledger.len() as u64
        );
        // monotone under further attaches
        let before = ledger.cumulative_weight(&heads[2]).unwrap();
        ledger
            .attach(
                &payloads(1),
                addr(6),
                &tag("T"),
                9,
                TipStrategy::Uniform,
                &mut r,
            )
            .unwrap();
        assert!(ledger.cumulative_weight(&heads[2]).unwrap() >= before);
    }

    #[test]
    fn get_bundle_roundtrip_and_ordering() {
        let mut ledger = Ledger::new(0);
        let mut r = rng(6);
        assert!(ledger.get_bundle(&addr(9)).is_empty());

        let msg: Vec<TryteString> = payloads(3);
        let first = ledger
            .attach(&msg, addr(9), &tag("T"), 10, TipStrategy::Uniform, &mut r)
            .unwrap();
        let second = ledger
            .attach(
                &payloads(1),
                addr(9),
                &tag("T"),
                20,
                TipStrategy::Uniform,
                &mut r,
            )
            .unwrap();
        // a bundle at a different address does not leak in
        ledger
            .attach(
                &payloads(1),
                addr(10),
                &tag("T"),
                30,
                TipStrategy::Uniform,
                &mut r,
            )
            .unwrap();

        let got = ledger.get_bundle(&addr(9));
        assert_eq!(got.len(), 2);
        assert_eq!(got[0].bundle_hash(), first.bundle_hash());
        assert_eq!(got[1].bundle_hash(), second.bundle_hash());
        assert!(got[0].timestamp() < got[1].timestamp());
        let mut whole = TryteString::default();
        for p in &msg {
            whole.push(p);
        }
        assert_eq!(got[0].payload(), whole);
    }

    #[test]
    fn oversized_payload_rejected() {
        let mut ledger = Ledger::new(0);
        let big = TryteString::from_values(std::iter::repeat_n(1, 2188));
        let err = ledger
            .attach(
                &[big],
                addr(7),
                &tag("T"),
                1,
                TipStrategy::Uniform,
                &mut rng(7),
            )
            .unwrap_err();
        assert!(matches!(err, TangleError::PayloadTooLarge { len: 2188 }));

        let exact = TryteString::from_values(std::iter::repeat_n(1, 2187));
        assert!(ledger
            .attach(
                &[exact],
                addr(7),
                &tag("T"),
                1,
                TipStrategy::Uniform,
                &mut rng(7)
            )
            .is_ok());

        assert!(matches!(
            ledger.attach(
                &[],
                addr(7),
                &tag("T"),
                1,
                TipStrategy::Uniform,
                &mut rng(7)
            ),
            Err(TangleError::EmptyBundle)
        ));
    }

    #[test]
    fn insert_revalidates() {
        let mut ledger = Ledger::new(4);
        let g = ledger.genesis();
        let good = build_bundle(g, g, &payloads(1), addr(8), &tag("T"), 1, 4, 1).unwrap();

        let mut wrong_pow = good.clone();
        wrong_pow[0].nonce += 1;
        assert!(matches!(
            ledger.insert_bundle(wrong_pow),
            Err(TangleError::PowInvalid { .. })
        ));

        let dangling = build_bundle(
            sha256(&[b"nowhere"]),
            g,
            &payloads(1),
            addr(8),
            &tag("T"),
            1,
            4,
            1,
        )
        .unwrap();
        assert!(matches!(
            ledger.insert_bundle(dangling),
            Err(TangleError::DanglingReference { .. })
        ));

        ledger.insert_bundle(good.clone()).unwrap();
        assert!(matches!(
            ledger.insert_bundle(good),
            Err(TangleError::DuplicateTransaction(_))
        ));
        ledger.verify_all().unwrap();
    }

    #[test]
    fn weighted_walk_reaches_a_tip() {
        let mut ledger = Ledger::new(0);
        let mut r = rng(9);
        for i in 0..8 {
            ledger
                .attach(
                    &payloads(1),
                    addr(11),
                    &tag("T"),
                    i,
                    TipStrategy::Weighted { alpha: 0.01 },
                    &mut r,
                )
                .unwrap();
            if i == 3 {
                ledger
                    .issue_milestone(100, TipStrategy::Weighted { alpha: 0.01 }, &mut r)
                    .unwrap();
            }
        }
        let (t, b) = ledger.select_tips(TipStrategy::Weighted { alpha: 0.01 }, &mut r);
        assert!(ledger.tips().contains(&t));
        assert!(ledger.tips().contains(&b));
        if ledger.tips().len() > 1 {
            assert_ne!(t, b);
        }
        ledger.verify_all().unwrap();
    }

    #[test]
    fn confirmation_is_monotone() {
        let mut ledger = Ledger::new(0);
        let mut r = rng(10);
        let mut confirmed_so_far: HashSet<Digest> = HashSet::new();
        for round in 0..10 {
            for i in 0..5 {
                ledger
                    .attach(
                        &payloads(1),
                        addr(12),
                        &tag("T"),
                        round * 10 + i,
                        TipStrategy::Uniform,
                        &mut r,
                    )
                    .unwrap();
            }
            ledger
                .issue_milestone(round * 10 + 9, TipStrategy::Uniform, &mut r)
                .unwrap();
            for h in &confirmed_so_far {
                assert!(ledger.is_confirmed(h).unwrap(), "confirmation regressed");
            }
            for h in ledger.order() {
                if ledger.is_confirmed(h).unwrap() {
                    confirmed_so_far.insert(*h);
                }
            }
        }
    }
}
