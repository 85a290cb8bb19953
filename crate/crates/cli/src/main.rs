//! Command-line front end: ingest an edge stream once, then extract a cut
//! sparsifier (`sparsify`), report sizes and costs (`stats`), or check the
//! output against exact cuts on small graphs (`verify`).
//!
//! Exit codes: 0 success, 1 usage/IO errors, 2 invalid stream (syntax or
//! discipline), 3 extraction failure, 4 verification failure.

mod report;
mod stream;

use std::collections::BTreeMap;
use std::io::{BufRead, BufWriter, Write};

use anyhow::anyhow;
use clap::{Args, Parser, Subcommand};
use cutsketch::oracle::MAX_VERTICES;
use cutsketch::{
    parse_rat, FailurePolicy, PipelineError, Profile, Rat, RunConfig, ShadowGraph, SketchBank,
    Sparsifier, StreamViolation, WeightedBank,
};
use report::{SparsifierStats, StatsReport, TouchReport, STATS_SCHEMA};
use stream::{Header, StreamReader, Update};

const EXIT_STREAM: i32 = 2;
const EXIT_PIPELINE: i32 = 3;
const EXIT_VERIFY: i32 = 4;

#[derive(Parser)]
#[command(
    name = "cutsketch",
    version,
    about = "Single-pass cut sparsification of dynamic graph streams"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the sparsifier as sorted `u v num den` lines (weight = num/den).
    Sparsify(CommandArgs),
    /// Print a JSON report: stream size, sparsifier size, update costs.
    Stats(CommandArgs),
    /// Check every cut of the sparsifier against the exact graph (small n).
    Verify(CommandArgs),
}

#[derive(Args)]
struct CommandArgs {
    /// Stream file; `-` reads standard input.
    stream: String,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args)]
struct Opts {
    /// Cut accuracy epsilon in (0, 1]; accepts 1/2, 0.25, ...
    #[arg(long, env = "CUTSKETCH_EPSILON", default_value = "1/2", value_parser = rat_arg)]
    epsilon: Rat,
    /// Master seed; fixes every random choice of the run.
    #[arg(long, env = "CUTSKETCH_SEED", default_value_t = 0)]
    seed: u64,
    /// Constant profile: `paper` (analysis-grade) or `desk` (small-n).
    #[arg(long, env = "CUTSKETCH_PROFILE", default_value = "desk", value_parser = profile_arg)]
    profile: Profile,
    /// Validate stream discipline (no duplicate inserts, deletes match).
    #[arg(long, env = "CUTSKETCH_CHECKED")]
    checked: bool,
    /// Override the emission oversampling factor.
    #[arg(long, env = "CUTSKETCH_GAMMA", value_parser = rat_arg)]
    gamma: Option<Rat>,
    /// Override the peel-threshold slack factor.
    #[arg(long, env = "CUTSKETCH_ALPHA", value_parser = rat_arg)]
    alpha: Option<Rat>,
    /// Override the recovery budget factor.
    #[arg(long, env = "CUTSKETCH_KAPPA", value_parser = rat_arg)]
    kappa: Option<Rat>,
    /// Override the number of connectivity/recovery sketch copies.
    #[arg(long, env = "CUTSKETCH_COPIES")]
    copies: Option<u32>,
    /// Force the weighted pipeline with this many weight bits (1-63).
    #[arg(long, env = "CUTSKETCH_WEIGHTED_BITS", value_parser = clap::value_parser!(u32).range(1..=63))]
    weighted_bits: Option<u32>,
    /// Downgrade extraction failures to warnings with exact fallbacks.
    #[arg(long, env = "CUTSKETCH_BEST_EFFORT")]
    best_effort: bool,
}

fn rat_arg(s: &str) -> Result<Rat, String> {
    parse_rat(s)
}

fn profile_arg(s: &str) -> Result<Profile, String> {
    Profile::parse(s)
}

/// An error carrying the process exit code.
struct Failure {
    code: i32,
    error: anyhow::Error,
}

impl Failure {
    fn other(error: anyhow::Error) -> Failure {
        Failure { code: 1, error }
    }

    fn bad_stream(error: anyhow::Error) -> Failure {
        Failure {
            code: EXIT_STREAM,
            error,
        }
    }

    fn violation(line: usize, violation: StreamViolation) -> Failure {
        Failure {
            code: EXIT_STREAM,
            error: anyhow!("line {line}: {violation}"),
        }
    }

    fn pipeline(error: PipelineError) -> Failure {
        Failure {
            code: EXIT_PIPELINE,
            error: anyhow!("extraction failed: {error}"),
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            std::process::exit(f.code);
        }
    }
}

fn run(cli: Cli) -> Result<i32, Failure> {
    match cli.command {
        Command::Sparsify(args) => cmd_sparsify(&args),
        Command::Stats(args) => cmd_stats(&args),
        Command::Verify(args) => cmd_verify(&args),
    }
}

fn config(opts: &Opts) -> RunConfig {
    let mut cfg = RunConfig::new(opts.profile, opts.epsilon, opts.seed);
    cfg.gamma = opts.gamma;
    cfg.alpha = opts.alpha;
    cfg.kappa = opts.kappa;
    cfg.copies_connectivity = opts.copies;
    cfg.copies_recovery = opts.copies;
    cfg.checked = opts.checked;
    cfg.failure_policy = if opts.best_effort {
        FailurePolicy::BestEffort
    } else {
        FailurePolicy::Strict
    };
    cfg.cache_hash_evals = true;
    cfg
}

/// Either pipeline, behind one ingest/extract interface.
enum Bank {
    Plain(SketchBank),
    Weighted(WeightedBank),
}

impl Bank {
    fn new(header: Header, opts: &Opts) -> Bank {
        let cfg = config(opts);
        match (header.max_weight, opts.weighted_bits) {
            (None, None) => Bank::Plain(SketchBank::new(header.n, &cfg)),
            (declared, forced) => {
                let bits = forced.unwrap_or_else(|| bit_length(declared.unwrap_or(1)));
                Bank::Weighted(WeightedBank::new(header.n, &cfg, bits))
            }
        }
    }

    fn apply(&mut self, up: &Update) -> Result<(), StreamViolation> {
        match self {
            Bank::Plain(bank) => bank.apply(up.u, up.v, up.sign),
            Bank::Weighted(bank) => bank.apply(up.u, up.v, up.sign, up.weight),
        }
    }

    fn sparsify(&self) -> Result<Sparsifier, PipelineError> {
        match self {
            Bank::Plain(bank) => cutsketch::sparsify(bank),
            Bank::Weighted(bank) => bank.sparsify(),
        }
    }

    fn touched_cells(&self) -> u64 {
        match self {
            Bank::Plain(bank) => bank.stats().touched_cells,
            Bank::Weighted(bank) => bank.stats().touched_cells,
        }
    }

    fn touch_histogram(&self) -> BTreeMap<u64, u64> {
        match self {
            Bank::Plain(bank) => bank.touch_histogram().clone(),
            Bank::Weighted(bank) => bank.touch_histogram(),
        }
    }

    fn memory_words(&self) -> u64 {
        match self {
            Bank::Plain(bank) => bank.memory_words(),
            Bank::Weighted(bank) => bank.memory_words(),
        }
    }
}

/// Smallest number of bits that can hold `w`.
fn bit_length(w: u64) -> u32 {
    64 - w.leading_zeros()
}

/// An opened stream with the header parsed and the bank built, but no
/// updates consumed yet. Splitting here lets commands inspect the header
/// (and reject, e.g., oversized graphs) while keeping one forward pass.
struct Ingest {
    header: Header,
    reader: StreamReader<Box<dyn BufRead>>,
    bank: Bank,
}

fn start(args: &CommandArgs) -> Result<Ingest, Failure> {
    let raw = stream::open(&args.stream).map_err(Failure::other)?;
    let reader = StreamReader::new(raw).map_err(Failure::bad_stream)?;
    let header = reader.header();
    let bank = Bank::new(header, &args.opts);
    Ok(Ingest {
        header,
        reader,
        bank,
    })
}

impl Ingest {
    /// Consumes the rest of the stream. `on_update` runs after each update
    /// is applied to the bank. Returns the bank and the update count.
    fn drive(
        mut self,
        mut on_update: impl FnMut(&Update) -> Result<(), Failure>,
    ) -> Result<(Bank, u64), Failure> {
        let mut updates = 0u64;
        for item in &mut self.reader {
            let up = item.map_err(Failure::bad_stream)?;
            self.bank.apply(&up).map_err(|v| Failure::violation(up.line, v))?;
            on_update(&up)?;
            updates += 1;
        }
        Ok((self.bank, updates))
    }
}

fn cmd_sparsify(args: &CommandArgs) -> Result<i32, Failure> {
    let (bank, _) = start(args)?.drive(|_| Ok(()))?;
    let sp = bank.sparsify().map_err(Failure::pipeline)?;
    let stdout = std::io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    for edge in &sp.edges {
        writeln!(out, "{} {} {} {}", edge.u, edge.v, edge.weight.numer(), edge.weight.denom())
            .map_err(|e| Failure::other(e.into()))?;
    }
    out.flush().map_err(|e| Failure::other(e.into()))?;
    Ok(0)
}

fn cmd_stats(args: &CommandArgs) -> Result<i32, Failure> {
    let ingest = start(args)?;
    let header = ingest.header;
    // signed net multiplicity per vertex pair; m counts nonzero entries
    let mut net: BTreeMap<(u32, u32), i64> = BTreeMap::new();
    let (bank, updates) = ingest.drive(|up| {
        let key = (up.u.min(up.v), up.u.max(up.v));
        let slot = net.entry(key).or_insert(0);
        *slot += up.sign as i64;
        if *slot == 0 {
            net.remove(&key);
        }
        Ok(())
    })?;
    let sp = bank.sparsify().map_err(Failure::pipeline)?;
    let report = StatsReport {
        schema: STATS_SCHEMA,
        n: header.n,
        weighted: matches!(bank, Bank::Weighted(_)),
        max_weight: header.max_weight,
        updates,
        m: net.len() as u64,
        sparsifier: SparsifierStats {
            size: sp.len(),
            per_level: sp.per_level.clone(),
            duplicates: sp.duplicates,
            warnings: sp.warnings.len(),
        },
        touch: TouchReport {
            cells_total: bank.touched_cells(),
            mean_per_update: if updates == 0 {
                0.0
            } else {
                bank.touched_cells() as f64 / updates as f64
            },
            histogram: bank.touch_histogram().into_iter().collect(),
        },
        memory_words: bank.memory_words(),
    };
    let json = serde_json::to_string_pretty(&report).map_err(|e| Failure::other(e.into()))?;
    println!("{json}");
    Ok(0)
}

fn cmd_verify(args: &CommandArgs) -> Result<i32, Failure> {
    let ingest = start(args)?;
    let n = ingest.header.n;
    if n > MAX_VERTICES {
        return Err(Failure::other(anyhow!(
            "verify needs n <= {MAX_VERTICES} for exact cuts, stream has n = {n}"
        )));
    }
    // verification mirrors the exact graph, so the stream must be
    // disciplined regardless of --checked
    let mut shadow = ShadowGraph::new(n);
    let (bank, _) = ingest.drive(|up| {
        let applied = if up.sign > 0 {
            shadow.insert(up.u, up.v, up.weight)
        } else {
            shadow.delete(up.u, up.v, up.weight)
        };
        applied.map_err(|v| Failure::violation(up.line, v))
    })?;
    let sp = bank.sparsify().map_err(Failure::pipeline)?;
    let edges: Vec<(u32, u32, Rat)> = sp.weighted_edges();
    let report = shadow.cut_report(&edges, args.opts.seed);
    let pass = report.within(args.opts.epsilon);
    println!("cuts checked: {} ({} nonzero)", report.cuts_checked, report.nonzero_cuts);
    println!(
        "max relative error: {}/{} ({:.6})",
        report.max_rel_error.numer(),
        report.max_rel_error.denom(),
        report.max_rel_error_f64()
    );
    println!("mean relative error: {:.6}", report.mean_rel_error());
    println!(
        "epsilon: {}/{}",
        args.opts.epsilon.numer(),
        args.opts.epsilon.denom()
    );
    if report.zero_cut_mismatch {
        println!("zero-weight cut received sparsifier weight: yes");
    }
    if !report.worst_side.is_empty() && !pass {
        println!("worst cut side: {:?}", report.worst_side);
    }
    println!("result: {}", if pass { "PASS" } else { "FAIL" });
    Ok(if pass { 0 } else { EXIT_VERIFY })
}
