//! `deam`: drive the marketplace from the shell.
//!
//! Every run is one step of the workflow: generate documents, run a
//! node, publish, fetch, benchmark, search a registry. State lives in
//! three places the flags point at: the node state file (the ledger),
//! the store root (blobs), and the registry file (announcements).
//!
//! Exit codes: 0 success, 1 I/O, 2 usage, 3 authentication, 4
//! not-found, 5 integrity.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use deam_core::bench::{run_bench, BenchOptions, BenchReport, BenchRow, PhaseStats};
use deam_core::gopprr::synth::synth_record;
use deam_core::gopprr::{DeaDocument, DeaError, DeaRecord, Dikw, GopprrGraph, ProcessTime};
use deam_core::hashing::{sha256, Digest};
use deam_core::mam::ChannelMode;
use deam_core::market::{fetch, MarketEntry, MarketError, Publisher, Registry, SIMULATED_POLL_MS};
use deam_core::store::{ContentStore, StoreError, STORE_ROOT_ENV};
use deam_core::tangle::node::{Clock, Node, NodeConfig};
use deam_core::tangle::{TangleError, TipStrategy};

/// What one confirmation-wait step stands for when reading confirming
/// times as live-network estimates: steps x this = simulated latency.
#[derive(Parser)]
#[command(
    name = "deam",
    version,
    about = "Digital engineering asset marketplace on a simulated tangle"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Publish a DEA document: mask it, store the blob, announce on the ledger
    Publish(PublishArgs),
    /// Resolve an announcement address back into the document
    Fetch(FetchArgs),
    /// Publish files repeatedly and report per-phase timings
    Bench(BenchArgs),
    /// Manage the persistent simulated node
    Node(NodeCmd),
    /// Write synthetic DEA documents for demos and benchmarks
    Gen(GenArgs),
    /// Query a registry file by tags and coordinates
    Search(SearchArgs),
}

/// Flags shared by everything that runs a node off a state file.
#[derive(Args)]
struct NodeOpts {
    /// Ledger state file
    #[arg(long, value_name = "PATH")]
    node_state: PathBuf,
    /// Proof-of-work difficulty, leading zero bits
    #[arg(long, default_value_t = 8)]
    difficulty: u32,
    /// Coordinator cadence: a milestone every N attaches; 0 = manual
    #[arg(long, default_value_t = 5)]
    milestone_interval: u64,
    /// Tip selection: uniform or weighted
    #[arg(long, default_value = "uniform")]
    tip_strategy: TipStrategy,
    /// Seed for tip selection, bundle salts and channel derivation;
    /// drawn from entropy when absent
    #[arg(long)]
    seed: Option<u64>,
    /// Deterministic logical timestamps instead of wall clock
    #[arg(long)]
    fixed_clock: bool,
}

impl NodeOpts {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or_else(rand::random)
    }

    fn config(&self, seed: u64) -> NodeConfig {
        NodeConfig {
            difficulty: self.difficulty,
            milestone_interval: self.milestone_interval,
            strategy: self.tip_strategy,
            seed,
        }
    }

    fn clock(&self) -> Clock {
        if self.fixed_clock {
            Clock::logical(1_000)
        } else {
            Clock::System
        }
    }

    fn load(&self, seed: u64) -> Result<Node, CliError> {
        Ok(Node::load(
            &self.node_state,
            self.config(seed),
            self.clock(),
        )?)
    }
}

#[derive(Args)]
struct PublishArgs {
    /// DEA document (JSON) to publish
    file: PathBuf,
    #[arg(long, default_value = "public")]
    mode: ChannelMode,
    /// Decryption key; required in restricted mode, rejected in public
    #[arg(long)]
    side_key: Option<String>,
    /// Blob store directory
    #[arg(long, env = STORE_ROOT_ENV, value_name = "DIR")]
    store_root: PathBuf,
    /// Extra tags for the registry entry, comma separated
    #[arg(long, value_delimiter = ',')]
    tags: Vec<String>,
    /// Registry description override
    #[arg(long)]
    description: Option<String>,
    /// Registry file to announce into
    #[arg(long, value_name = "PATH")]
    registry: Option<PathBuf>,
    /// Channel tree depth: 2^depth leaves, a publish consumes two
    #[arg(long, default_value_t = 4)]
    tree_depth: u32,
    /// Publisher identity recorded in registry entries
    #[arg(long, default_value = "deam")]
    publisher: String,
    /// Treat the file as an opaque blob wrapped in a generated document
    #[arg(long)]
    raw: bool,
    #[command(flatten)]
    node: NodeOpts,
}

#[derive(Args)]
struct FetchArgs {
    /// Announcement address, 64 hex characters
    address: String,
    #[arg(long, default_value = "public")]
    mode: ChannelMode,
    /// Channel root, 64 hex characters; required in restricted mode
    #[arg(long)]
    root: Option<String>,
    #[arg(long)]
    side_key: Option<String>,
    #[arg(long, env = STORE_ROOT_ENV, value_name = "DIR")]
    store_root: PathBuf,
    /// Output file; stdout when absent
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[command(flatten)]
    node: NodeOpts,
}

#[derive(Args)]
struct BenchArgs {
    /// DEA document files to publish repeatedly
    #[arg(required = true)]
    files: Vec<PathBuf>,
    #[arg(long, default_value_t = 10)]
    iterations: usize,
    #[arg(long, env = STORE_ROOT_ENV, value_name = "DIR")]
    store_root: PathBuf,
    /// One node for the whole run instead of a fresh node per iteration
    #[arg(long)]
    shared_node: bool,
    /// Run each file's iterations on parallel threads (implies a
    /// shared node)
    #[arg(long)]
    concurrent: bool,
    /// Channel tree depth per iteration
    #[arg(long, default_value_t = 4)]
    tree_depth: u32,
    /// Also write the rows as JSON here
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    difficulty: u32,
    #[arg(long, default_value_t = 5)]
    milestone_interval: u64,
    #[arg(long, default_value = "uniform")]
    tip_strategy: TipStrategy,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct NodeCmd {
    #[command(subcommand)]
    action: NodeAction,
}

#[derive(Subcommand)]
enum NodeAction {
    /// Create a fresh ledger holding only the genesis transaction
    Init(NodeOpts),
    /// Force a coordinator milestone now
    Milestone(NodeOpts),
    /// Print transaction, tip, milestone and confirmation counts
    Stats(NodeOpts),
    /// Print the ledger in its persistence format
    Dump(NodeOpts),
}

#[derive(Args)]
struct GenArgs {
    /// Directory the documents are written into
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
    /// Target document sizes in bytes, comma separated
    #[arg(long, value_delimiter = ',', default_value = "2900000,4600000,5600000")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "demo")]
    system_id: String,
}

#[derive(Args)]
struct SearchArgs {
    /// Registry file
    #[arg(long, value_name = "PATH")]
    registry: PathBuf,
    /// Tags every hit must carry, comma separated
    #[arg(long, value_delimiter = ',')]
    tags: Vec<String>,
    /// Require this view coordinate
    #[arg(long)]
    view: Option<String>,
    /// Require this DIKW coordinate
    #[arg(long)]
    alpha: Option<Dikw>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Market(MarketError),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Market(err) => write!(f, "{err}"),
        }
    }
}

impl From<MarketError> for CliError {
    fn from(err: MarketError) -> Self {
        CliError::Market(err)
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Market(MarketError::Io(err))
    }
}

impl From<TangleError> for CliError {
    fn from(err: TangleError) -> Self {
        CliError::Market(MarketError::Ledger(err))
    }
}

impl From<StoreError> for CliError {
    fn from(err: StoreError) -> Self {
        CliError::Market(MarketError::Store(err))
    }
}

impl From<DeaError> for CliError {
    fn from(err: DeaError) -> Self {
        CliError::Market(MarketError::Record(err))
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Market(err) => match err {
                MarketError::SideKeyRequired
                | MarketError::SideKeyUnexpected
                | MarketError::ChannelRootRequired => 2,
                MarketError::Authentication => 3,
                MarketError::NotFound(_) | MarketError::Store(StoreError::NotFound(_)) => 4,
                MarketError::Integrity(_)
                | MarketError::Store(StoreError::Integrity { .. })
                | MarketError::Store(StoreError::BadCid(_))
                | MarketError::Record(_) => 5,
                MarketError::Io(_)
                | MarketError::Store(StoreError::Io(_))
                | MarketError::Ledger(_) => 1,
            },
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Publish(args) => cmd_publish(args),
        Command::Fetch(args) => cmd_fetch(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Node(cmd) => cmd_node(cmd.action),
        Command::Gen(args) => cmd_gen(args),
        Command::Search(args) => cmd_search(args),
    }
}

fn cmd_publish(args: PublishArgs) -> Result<(), CliError> {
    let bytes = std::fs::read(&args.file)?;
    let record = if args.raw {
        wrap_raw(&args.file, &bytes)
    } else {
        DeaDocument::from_bytes(&bytes)?.into_record()
    };
    let seed = args.node.seed();
    let node = args.node.load(seed)?;
    let store = ContentStore::open(&args.store_root)?;

    // A fresh channel per run; the seed makes it reproducible.
    let channel_seed = sha256(&[
        b"deam.channel",
        args.publisher.as_bytes(),
        &seed.to_le_bytes(),
    ]);
    let mut publisher = Publisher::new(
        channel_seed,
        args.mode,
        args.side_key.as_deref(),
        args.tree_depth,
        args.publisher.clone(),
    )?;
    let receipt = publisher.publish(&record, &node, &store)?;
    node.save(&args.node.node_state)?;

    if let Some(path) = &args.registry {
        let mut registry = if path.exists() {
            Registry::load(path)?
        } else {
            Registry::new()
        };
        let mut entry_record = record.clone();
        for tag in &args.tags {
            if !entry_record.tags.contains(tag) {
                entry_record.tags.push(tag.clone());
            }
        }
        if let Some(description) = &args.description {
            entry_record.description = description.clone();
        }
        registry.announce(MarketEntry::from_publish(
            &receipt,
            &entry_record,
            &args.publisher,
            node.clock().now_ms(),
        ));
        registry.save(path)?;
    }

    println!(
        "{}",
        serde_json::to_string_pretty(&receipt).expect("receipt serializes")
    );
    Ok(())
}

fn cmd_fetch(args: FetchArgs) -> Result<(), CliError> {
    let address = parse_digest("address", &args.address)?;
    let root = args
        .root
        .as_deref()
        .map(|r| parse_digest("--root", r))
        .transpose()?;
    let node = args.node.load(args.node.seed.unwrap_or(0))?;
    let store = ContentStore::open(&args.store_root)?;

    let record = fetch(
        &node,
        &store,
        &address,
        args.mode,
        root.as_ref(),
        args.side_key.as_deref(),
    )?;
    let bytes = DeaDocument::from_record(&record)?.to_bytes();
    match &args.out {
        Some(path) => std::fs::write(path, &bytes)?,
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(&bytes)?;
            stdout.write_all(b"\n")?;
        }
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    if args.iterations == 0 {
        return Err(CliError::Usage("--iterations must be at least 1".into()));
    }
    let mut inputs = Vec::new();
    for path in &args.files {
        let bytes = std::fs::read(path)?;
        let record = DeaDocument::from_bytes(&bytes)?.into_record();
        inputs.push((file_label(path), record));
    }
    let store = ContentStore::open(&args.store_root)?;
    let options = BenchOptions {
        iterations: args.iterations,
        shared_node: args.shared_node || args.concurrent,
        node_config: NodeConfig {
            difficulty: args.difficulty,
            milestone_interval: args.milestone_interval,
            strategy: args.tip_strategy,
            seed: args.seed.unwrap_or_else(rand::random),
        },
        tree_depth: args.tree_depth,
    };

    let report = if args.concurrent {
        bench_concurrent(&inputs, &store, &options)?
    } else {
        run_bench(&inputs, &store, &options)?
    };

    print!("{}", report.to_table());
    println!("(confirming counts coordinator polls of {SIMULATED_POLL_MS} ms simulated each)");

    if let Some(path) = &args.report {
        let doc = serde_json::json!({
            "simulated_poll_ms": SIMULATED_POLL_MS,
            "rows": report.rows,
        });
        std::fs::write(
            path,
            serde_json::to_string_pretty(&doc).expect("report serializes"),
        )?;
    }
    Ok(())
}

/// Iterations of one file race each other on a shared node, which is
/// exactly the situation the ledger's interior locking is for.
fn bench_concurrent(
    inputs: &[(String, DeaRecord)],
    store: &ContentStore,
    options: &BenchOptions,
) -> Result<BenchReport, CliError> {
    let node = Node::new(options.node_config.clone(), Clock::System);
    let mut rows = Vec::new();
    for (file_index, (label, record)) in inputs.iter().enumerate() {
        let size_bytes = DeaDocument::from_record(record)?.to_bytes().len();
        let timings = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..options.iterations)
                .map(|iteration| {
                    let node = &node;
                    scope.spawn(move || -> Result<_, MarketError> {
                        let channel_seed = sha256(&[
                            b"deam.bench.concurrent",
                            label.as_bytes(),
                            &(file_index as u64).to_le_bytes(),
                            &(iteration as u64).to_le_bytes(),
                        ]);
                        let mut publisher = Publisher::new(
                            channel_seed,
                            ChannelMode::Public,
                            None,
                            options.tree_depth,
                            "bench",
                        )?;
                        Ok(publisher.publish(record, node, store)?.timings)
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("bench thread panicked"))
                .collect::<Result<Vec<_>, _>>()
        })?;
        let phase = |extract: fn(&deam_core::market::Timings) -> f64| {
            PhaseStats::from_samples(&timings.iter().map(extract).collect::<Vec<_>>())
        };
        rows.push(BenchRow {
            file: label.clone(),
            size_bytes,
            iterations: options.iterations,
            processing: phase(|t| t.processing_ms),
            attaching: phase(|t| t.attaching_ms),
            confirming: phase(|t| t.confirming_ms),
        });
    }
    Ok(BenchReport { rows })
}

fn cmd_node(action: NodeAction) -> Result<(), CliError> {
    match action {
        NodeAction::Init(opts) => {
            if opts.node_state.exists() {
                return Err(std::io::Error::new(
                    std::io::ErrorKind::AlreadyExists,
                    format!("node state {} already exists", opts.node_state.display()),
                )
                .into());
            }
            let node = Node::new(opts.config(opts.seed()), opts.clock());
            node.save(&opts.node_state)?;
            print_stats(&node);
        }
        NodeAction::Milestone(opts) => {
            let node = opts.load(opts.seed())?;
            let hash = node.issue_milestone()?;
            node.save(&opts.node_state)?;
            println!("{hash}");
        }
        NodeAction::Stats(opts) => {
            let node = opts.load(opts.seed.unwrap_or(0))?;
            print_stats(&node);
        }
        NodeAction::Dump(opts) => {
            let node = opts.load(opts.seed.unwrap_or(0))?;
            print!(
                "{}",
                node.with_ledger(|ledger| ledger.serialize_to_string())
            );
        }
    }
    Ok(())
}

fn print_stats(node: &Node) {
    let stats = node.stats();
    let fraction = if stats.transactions == 0 {
        1.0
    } else {
        stats.confirmed as f64 / stats.transactions as f64
    };
    let doc = serde_json::json!({
        "transactions": stats.transactions,
        "tips": stats.tips,
        "milestones": stats.milestones,
        "confirmed": stats.confirmed,
        "confirmed_fraction": fraction,
        "difficulty": stats.difficulty,
    });
    println!(
        "{}",
        serde_json::to_string_pretty(&doc).expect("stats serialize")
    );
}

fn cmd_gen(args: GenArgs) -> Result<(), CliError> {
    std::fs::create_dir_all(&args.out_dir)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    for (index, size) in args.sizes.iter().enumerate() {
        let record = synth_record(&mut rng, &args.system_id, index, *size);
        let bytes = DeaDocument::from_record(&record)?.to_bytes();
        let path = args.out_dir.join(format!("{}.json", record.asset_id));
        std::fs::write(&path, &bytes)?;
        println!("{} {} bytes", path.display(), bytes.len());
    }
    Ok(())
}

fn cmd_search(args: SearchArgs) -> Result<(), CliError> {
    let registry = Registry::load(&args.registry)?;
    for entry in registry.search(&args.tags, args.view.as_deref(), args.alpha) {
        println!(
            "{}",
            serde_json::to_string(entry).expect("entry serializes")
        );
    }
    Ok(())
}

fn parse_digest(what: &str, hex: &str) -> Result<Digest, CliError> {
    Digest::from_hex(hex).map_err(|_| CliError::Usage(format!("{what} must be 64 hex characters")))
}

fn file_label(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Opaque bytes as a minimal single-graph document, so non-model files
/// can ride the same pipeline.
fn wrap_raw(path: &Path, bytes: &[u8]) -> DeaRecord {
    let mut graph = GopprrGraph::empty("g0", "RawBlob");
    graph
        .graphs
        .get_mut("g0")
        .expect("root body exists")
        .properties
        .insert("data".into(), hex::encode(bytes));
    DeaDocument {
        system_id: "raw".into(),
        asset_id: file_label(path),
        t: ProcessTime::at(0),
        view: "raw".into(),
        alpha: Dikw::Data,
        description: String::new(),
        tags: vec!["raw".into()],
        graph,
    }
    .into_record()
}
