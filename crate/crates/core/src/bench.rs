//! Publish benchmark: repeat the pipeline and characterize the three
//! phases (processing, attaching, confirming) per input file.
//!
//! Absolute numbers depend entirely on the machine and the simulated
//! difficulty; the interesting outputs are the trends, chiefly that
//! processing scales with payload size while attaching does not (only
//! the fixed-size announcement ever reaches the ledger).

use serde::Serialize;

use crate::gopprr::DeaRecord;
use crate::hashing::sha256;
use crate::mam::ChannelMode;
use crate::market::{MarketError, Publisher, Timings};
use crate::store::ContentStore;
use crate::tangle::node::{Clock, Node, NodeConfig};

/// sample statistics in milliseconds
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseStats {
    pub mean_ms: f64,
    pub sd_ms: f64,
    pub min_ms: f64,
    pub max_ms: f64,
}

impl PhaseStats {
    /// Mean, sample standard deviation (0 for a single sample), min,
    /// max.
    pub fn from_samples(samples: &[f64]) -> PhaseStats {
        assert!(!samples.is_empty(), "phase stats need at least one sample");
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let sd = if samples.len() > 1 {
            (samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let min = samples.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        PhaseStats {
            mean_ms: mean,
            sd_ms: sd,
            min_ms: min,
            max_ms: max,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub file: String,
    pub size_bytes: usize,
    pub iterations: usize,
    pub processing: PhaseStats,
    pub attaching: PhaseStats,
    pub confirming: PhaseStats,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub iterations: usize,
    /// One node for the whole run instead of a fresh node per
    /// iteration.
    pub shared_node: bool,
    pub node_config: NodeConfig,
    pub tree_depth: u32,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            iterations: 10,
            shared_node: false,
            node_config: NodeConfig::default(),
            tree_depth: 4,
        }
    }
}

impl BenchReport {
    /// Fixed-width human-readable table.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<24} {:>12} {:>5}  {:>30}  {:>30}  {:>30}\n",
            "file", "bytes", "iter", "processing ms", "attaching ms", "confirming ms"
        ));
        let cell = |p: &PhaseStats| {
            format!(
                "{:>8.2} ±{:>7.2} [{:>5.1},{:>6.1}]",
                p.mean_ms, p.sd_ms, p.min_ms, p.max_ms
            )
        };
        for row in &self.rows {
            out.push_str(&format!(
                "{:<24} {:>12} {:>5}  {}  {}  {}\n",
                row.file,
                row.size_bytes,
                row.iterations,
                cell(&row.processing),
                cell(&row.attaching),
                cell(&row.confirming),
            ));
        }
        out
    }
}

/// Publish every record `iterations` times and report phase
/// statistics. Inputs are (label, record) pairs; the size column is
/// the serialized document size.
pub fn run_bench(
    inputs: &[(String, DeaRecord)],
    store: &ContentStore,
    options: &BenchOptions,
) -> Result<BenchReport, MarketError> {
    assert!(options.iterations >= 1, "iterations must be at least 1");
    let shared = options
        .shared_node
        .then(|| Node::new(options.node_config.clone(), Clock::System));

    let mut rows = Vec::with_capacity(inputs.len());
    for (file_index, (label, record)) in inputs.iter().enumerate() {
        let size_bytes = crate::gopprr::DeaDocument::from_record(record)?
            .to_bytes()
            .len();
        let mut processing = Vec::with_capacity(options.iterations);
        let mut attaching = Vec::with_capacity(options.iterations);
        let mut confirming = Vec::with_capacity(options.iterations);

        for iteration in 0..options.iterations {
            let fresh;
            let node = match &shared {
                Some(node) => node,
                None => {
                    let mut config = options.node_config.clone();
                    // decorrelate tip selection across iterations while
                    // keeping the run reproducible
                    config.seed = config
                        .seed
                        .wrapping_add((file_index as u64) << 32)
                        .wrapping_add(iteration as u64);
                    fresh = Node::new(config, Clock::System);
                    &fresh
                }
            };
            let channel_seed = sha256(&[
                b"deam.bench",
                label.as_bytes(),
                &(iteration as u64).to_le_bytes(),
            ]);
            let mut publisher = Publisher::new(
                channel_seed,
                ChannelMode::Public,
                None,
                options.tree_depth,
                "bench",
            )?;
            let Timings {
                processing_ms,
                attaching_ms,
                confirming_ms,
            } = publisher.publish(record, node, store)?.timings;
            processing.push(processing_ms);
            attaching.push(attaching_ms);
            confirming.push(confirming_ms);
        }

        rows.push(BenchRow {
            file: label.clone(),
            size_bytes,
            iterations: options.iterations,
            processing: PhaseStats::from_samples(&processing),
            attaching: PhaseStats::from_samples(&attaching),
            confirming: PhaseStats::from_samples(&confirming),
        });
    }
    Ok(BenchReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gopprr::synth::synth_record;
    use crate::tangle::TipStrategy;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use tempfile::TempDir;

    #[test]
    fn phase_stats_shape() {
        let stats = PhaseStats::from_samples(&[2.0, 4.0, 9.0]);
        assert_eq!(stats.min_ms, 2.0);
        assert_eq!(stats.max_ms, 9.0);
        assert!((stats.mean_ms - 5.0).abs() < 1e-12);
        // sample SD of {2,4,9}: sqrt(((2-5)^2+(4-5)^2+(9-5)^2)/2)
        assert!((stats.sd_ms - (13.0f64).sqrt()).abs() < 1e-12);
        assert!(stats.min_ms <= stats.mean_ms && stats.mean_ms <= stats.max_ms);

        let single = PhaseStats::from_samples(&[7.5]);
        assert_eq!(single.sd_ms, 0.0);
        assert_eq!(single.min_ms, single.max_ms);
    }

    #[test]
    fn bench_rows_cover_inputs() {
        let dir = TempDir::new().unwrap();
        let store = ContentStore::open(dir.path()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let inputs = vec![
            ("small".to_string(), synth_record(&mut rng, "sys", 0, 1_000)),
            (
                "large".to_string(),
                synth_record(&mut rng, "sys", 1, 20_000),
            ),
        ];
        let options = BenchOptions {
            iterations: 3,
            shared_node: false,
            node_config: NodeConfig {
                difficulty: 2,
                milestone_interval: 3,
                strategy: TipStrategy::Uniform,
                seed: 1,
            },
            tree_depth: 2,
        };
        let report = run_bench(&inputs, &store, &options).unwrap();
        assert_eq!(report.rows.len(), 2);
        for row in &report.rows {
            assert_eq!(row.iterations, 3);
            for phase in [&row.processing, &row.attaching, &row.confirming] {
                assert!(phase.min_ms <= phase.mean_ms && phase.mean_ms <= phase.max_ms);
                assert!(phase.min_ms >= 0.0);
            }
        }
        assert!(report.rows[1].size_bytes > report.rows[0].size_bytes);
        let table = report.to_table();
        assert!(table.contains("small") && table.contains("large"));

        // a shared node accumulates all bundles
        let shared = BenchOptions {
            shared_node: true,
            ..options
        };
        run_bench(&inputs, &store, &shared).unwrap();
    }
}
