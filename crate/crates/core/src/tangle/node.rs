//! Single-process node: the ledger behind a lock, plus the clock, the
//! randomness, and the simulated coordinator.
//!
//! Attach runs in three phases so proof-of-work never blocks anyone:
//! snapshot (read lock: tip selection), work (no lock: bundle build
//! and PoW), insertion (write lock: re-validation and linearization).
//! Lock order is rng before ledger, everywhere.

use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::hashing::{sha256, Digest};
use crate::trinary::TryteString;

use super::{build_bundle, Bundle, Ledger, TangleError, TipStrategy};

/// Timestamp source. Logical time makes every ledger artifact a pure
/// function of (inputs, seed), which is what the tests pin down.
pub enum Clock {
    System,
    Logical(AtomicU64),
}

impl Clock {
    pub fn logical(start: u64) -> Self {
        Clock::Logical(AtomicU64::new(start))
    }

    pub fn now_ms(&self) -> u64 {
        match self {
            Clock::System => SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .expect("clock before 1970")
                .as_millis() as u64,
            Clock::Logical(counter) => counter.fetch_add(1, Ordering::SeqCst),
        }
    }
}

#[derive(Debug, Clone)]
pub struct NodeConfig {
    /// Proof-of-work leading zero bits.
    pub difficulty: u32,
    /// Coordinator cadence: a milestone after every k attaches.
    /// 0 disables the coordinator (milestones become manual).
    pub milestone_interval: u64,
    pub strategy: TipStrategy,
    /// Seed for tip selection and bundle salts.
    pub seed: u64,
}

impl Default for NodeConfig {
    fn default() -> Self {
        NodeConfig {
            difficulty: 8,
            milestone_interval: 5,
            strategy: TipStrategy::Uniform,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NodeStats {
    pub transactions: usize,
    pub tips: usize,
    pub milestones: usize,
    pub confirmed: usize,
    pub difficulty: u32,
}

pub struct Node {
    ledger: RwLock<Ledger>,
    clock: Clock,
    rng: Mutex<ChaCha8Rng>,
    strategy: TipStrategy,
    milestone_interval: u64,
    attach_count: AtomicU64,
    network_count: AtomicU64,
}

impl Node {
    pub fn new(config: NodeConfig, clock: Clock) -> Self {
        Self::from_ledger(Ledger::new(config.difficulty), config, clock)
    }

    pub fn from_ledger(ledger: Ledger, config: NodeConfig, clock: Clock) -> Self {
        Node {
            ledger: RwLock::new(ledger),
            clock,
            rng: Mutex::new(ChaCha8Rng::seed_from_u64(config.seed)),
            strategy: config.strategy,
            milestone_interval: config.milestone_interval,
            attach_count: AtomicU64::new(0),
            network_count: AtomicU64::new(0),
        }
    }

    pub fn load(path: &Path, config: NodeConfig, clock: Clock) -> Result<Self, TangleError> {
        Ok(Self::from_ledger(Ledger::load(path)?, config, clock))
    }

    pub fn save(&self, path: &Path) -> Result<(), TangleError> {
        self.ledger.read().unwrap().save(path)
    }

    pub fn with_ledger<R>(&self, f: impl FnOnce(&Ledger) -> R) -> R {
        f(&self.ledger.read().unwrap())
    }

    pub fn clock(&self) -> &Clock {
        &self.clock
    }

    pub fn stats(&self) -> NodeStats {
        let ledger = self.ledger.read().unwrap();
        NodeStats {
            transactions: ledger.len(),
            tips: ledger.tips().len(),
            milestones: ledger.milestones().len(),
            confirmed: ledger.confirmed_count(),
            difficulty: ledger.difficulty(),
        }
    }

    /// Attach one bundle. Counts toward the coordinator cadence.
    pub fn attach(
        &self,
        payloads: &[TryteString],
        address: Digest,
        tag: &TryteString,
    ) -> Result<Bundle, TangleError> {
        let timestamp = self.clock.now_ms();
        let (trunk, branch, difficulty, salt) = {
            let mut rng = self.rng.lock().unwrap();
            let ledger = self.ledger.read().unwrap();
            let (trunk, branch) = ledger.select_tips(self.strategy, &mut *rng);
            (trunk, branch, ledger.difficulty(), rng.random::<u64>())
        };
        let transactions = build_bundle(
            trunk, branch, payloads, address, tag, timestamp, difficulty, salt,
        )?;
        let bundle = self.ledger.write().unwrap().insert_bundle(transactions)?;

        let count = self.attach_count.fetch_add(1, Ordering::SeqCst) + 1;
        if self.milestone_interval > 0 && count.is_multiple_of(self.milestone_interval) {
            self.issue_milestone()?;
        }
        Ok(bundle)
    }

    /// Force a coordinator milestone now.
    pub fn issue_milestone(&self) -> Result<Digest, TangleError> {
        let timestamp = self.clock.now_ms();
        let mut rng = self.rng.lock().unwrap();
        let mut ledger = self.ledger.write().unwrap();
        ledger.issue_milestone(timestamp, self.strategy, &mut *rng)
    }

    /// One quantum of simulated background traffic: a small foreign
    /// attach, honoring the coordinator cadence like any other.
    pub fn step_network(&self) -> Result<(), TangleError> {
        let n = self.network_count.fetch_add(1, Ordering::SeqCst);
        let address = sha256(&[b"deam.network", &n.to_le_bytes()]);
        let tag = TryteString::from_trytes("NETWORK").expect("constant tag");
        self.attach(&[TryteString::default()], address, &tag)?;
        Ok(())
    }

    pub fn is_bundle_confirmed(&self, bundle: &Bundle) -> Result<bool, TangleError> {
        let ledger = self.ledger.read().unwrap();
        for tx in &bundle.transactions {
            if !ledger.is_confirmed(&tx.hash)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Drive background traffic until the bundle is confirmed.
    /// Returns the number of steps taken. With the coordinator
    /// disabled this can only stall; the step cap turns that into an
    /// error rather than a hang.
    pub fn await_confirmation(&self, bundle: &Bundle, max_steps: u64) -> Result<u64, TangleError> {
        for step in 0..=max_steps {
            if self.is_bundle_confirmed(bundle)? {
                return Ok(step);
            }
            self.step_network()?;
        }
        Err(TangleError::ConfirmationStalled(bundle.bundle_hash()))
    }
}
