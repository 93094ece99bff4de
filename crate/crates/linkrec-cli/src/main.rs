//! linkrec — buy-from-seller recommendations over C2C transaction logs.
//!
//! Every subcommand is a pure function of its inputs, the effective config,
//! and the seed: re-running a command reproduces its outputs byte for byte.
//! The effective config is assembled from defaults, then an optional
//! `--config` key-value file, then individual flags (later sources win),
//! and is echoed into every report.
//!
//! Exit codes: 0 ok, 1 I/O, 2 schema, 3 lookup (unknown user / no sales),
//! 4 config.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use linkrec::config::RunConfig;
use linkrec::data::{self, RatingScale, Transaction};
use linkrec::error::Error;
use linkrec::eval;
use linkrec::graph::CommercialGraph;
use linkrec::items::{self, ItemMethod, RecommendationEntry};
use linkrec::num::round6;
use linkrec::scoring;
use linkrec::seeds::{label, mix};
use linkrec::simrank;
use linkrec::synth::{self, GeneratorSpec};

#[derive(Parser)]
#[command(
    name = "linkrec",
    version,
    about = "Link recommendation for C2C commercial networks: predicts which seller a \
             user will buy from next and which item to offer."
)]
struct Cli {
    #[command(flatten)]
    overrides: ConfigOverrides,
    #[command(subcommand)]
    command: Command,
}

/// Config surface: every key of the run configuration as a flag. Flags
/// override `--config` file entries, which override the defaults.
#[derive(Args)]
struct ConfigOverrides {
    /// Key-value config file (`key = value` lines, `#` comments).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Master seed; all randomized steps derive from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// SimRank damping factor, in (0,1).
    #[arg(long, global = true, value_name = "C")]
    simrank_c: Option<f64>,
    /// SimRank iteration cap.
    #[arg(long, global = true)]
    simrank_max_iters: Option<usize>,
    /// SimRank convergence tolerance.
    #[arg(long, global = true)]
    simrank_tol: Option<f64>,
    /// Most-similar users feeding the candidate pool.
    #[arg(long, global = true, value_name = "N")]
    candidates_n: Option<usize>,
    /// Category-score coefficient (with --beta and --gamma, sums to 1).
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Rating-score coefficient.
    #[arg(long, global = true)]
    beta: Option<f64>,
    /// Reputation-score coefficient.
    #[arg(long, global = true)]
    gamma: Option<f64>,
    /// Item selection: best_selling, random, or rules.
    #[arg(long, global = true, value_name = "METHOD")]
    item_method: Option<String>,
    /// Minimum rule support, in (0,1].
    #[arg(long, global = true)]
    min_support: Option<f64>,
    /// Minimum rule confidence, in [0,1].
    #[arg(long, global = true)]
    min_confidence: Option<f64>,
    /// Cross-validation fold count.
    #[arg(long, global = true, value_name = "K")]
    eval_k: Option<usize>,
    /// Target users sampled per fold.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Comma-separated prediction-list sizes, e.g. 1,5,10.
    #[arg(long, global = true, value_name = "SIZES")]
    list_sizes: Option<String>,
    /// Evaluation series: both, m1, or m2.
    #[arg(long, global = true, value_name = "MODE")]
    eval_mode: Option<String>,
    /// Lower bound of the raw rating scale.
    #[arg(long, global = true)]
    rating_min: Option<f64>,
    /// Upper bound of the raw rating scale.
    #[arg(long, global = true)]
    rating_max: Option<f64>,
}

impl ConfigOverrides {
    fn build(&self) -> linkrec::Result<RunConfig> {
        let mut config = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        let entries = [
            ("seed", self.seed.map(|v| v.to_string())),
            ("simrank.c", self.simrank_c.map(|v| v.to_string())),
            ("simrank.max_iters", self.simrank_max_iters.map(|v| v.to_string())),
            ("simrank.tol", self.simrank_tol.map(|v| v.to_string())),
            ("candidates.n", self.candidates_n.map(|v| v.to_string())),
            ("fusion.alpha", self.alpha.map(|v| v.to_string())),
            ("fusion.beta", self.beta.map(|v| v.to_string())),
            ("fusion.gamma", self.gamma.map(|v| v.to_string())),
            ("items.method", self.item_method.clone()),
            ("items.min_support", self.min_support.map(|v| v.to_string())),
            ("items.min_confidence", self.min_confidence.map(|v| v.to_string())),
            ("eval.k", self.eval_k.map(|v| v.to_string())),
            ("eval.samples", self.samples.map(|v| v.to_string())),
            ("eval.list_sizes", self.list_sizes.clone()),
            ("eval.mode", self.eval_mode.clone()),
            ("rating_scale.min", self.rating_min.map(|v| v.to_string())),
            ("rating_scale.max", self.rating_max.map(|v| v.to_string())),
        ];
        for (key, value) in entries {
            if let Some(value) = value {
                config.apply_entry(key, &value)?;
            }
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse a transaction CSV and write a reusable graph cache.
    Ingest {
        /// Transaction CSV file.
        input: PathBuf,
        /// Graph cache to write (JSON).
        #[arg(long, short = 'o')]
        output: PathBuf,
    },
    /// Print graph statistics as JSON.
    Stats {
        /// Graph cache (.json) or transaction CSV.
        input: PathBuf,
    },
    /// Recommend (seller, item) pairs for one user.
    Recommend {
        /// Graph cache (.json) or transaction CSV.
        graph: PathBuf,
        /// Target user id.
        user: String,
        /// Maximum entries in the final list.
        #[arg(long, default_value_t = 10)]
        top: usize,
        /// Similarity cache file: reused when present, written otherwise.
        #[arg(long, value_name = "FILE")]
        sim_cache: Option<PathBuf>,
        /// Write the JSON here instead of standard output.
        #[arg(long, short = 'o')]
        output: Option<PathBuf>,
    },
    /// Mine association rules from buyer baskets (one JSON rule per line).
    MineRules {
        /// Graph cache (.json) or transaction CSV.
        input: PathBuf,
        /// Write rules here instead of standard output.
        #[arg(long, short = 'o')]
        output: Option<PathBuf>,
    },
    /// Generate a seeded synthetic transaction log.
    Synth {
        /// CSV file to write.
        #[arg(long, short = 'o')]
        output: PathBuf,
        /// Starting point: "default" (dense) or "reference" (sparse,
        /// real-world benchmark shape).
        #[arg(long, default_value = "default")]
        preset: String,
        /// Number of buyer accounts.
        #[arg(long)]
        buyers: Option<usize>,
        /// Number of seller accounts.
        #[arg(long)]
        sellers: Option<usize>,
        /// Number of product categories.
        #[arg(long)]
        categories: Option<usize>,
        /// Number of transactions to draw.
        #[arg(long)]
        transactions: Option<usize>,
        /// Catalog size of each seller.
        #[arg(long)]
        items_per_seller: Option<usize>,
        /// Probability a purchase stays in the buyer's home category.
        #[arg(long)]
        affinity: Option<f64>,
        /// Zipf exponent of seller prominence within a category.
        #[arg(long)]
        seller_skew: Option<f64>,
        /// Zipf exponent of item popularity within a seller.
        #[arg(long)]
        popularity_skew: Option<f64>,
        /// Jitter around a seller's latent quality, in raw rating units.
        #[arg(long)]
        rating_noise: Option<f64>,
    },
    /// Run the k-fold cross-validated experiment and write its report.
    Evaluate {
        /// Graph cache (.json) or transaction CSV.
        input: PathBuf,
        /// Report JSON to write.
        #[arg(long, short = 'o')]
        report: PathBuf,
        /// Also export the aggregate curves as CSV.
        #[arg(long, value_name = "FILE")]
        csv: Option<PathBuf>,
        /// Worker threads (0 = all cores); the report is identical at any
        /// count.
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
}

/// Cached parse of a transaction CSV; lets downstream commands skip
/// re-ingestion and pins the rating scale used at ingest time.
#[derive(Serialize, Deserialize)]
struct GraphCache {
    rating_scale: RatingScale,
    transactions: Vec<Transaction>,
}

fn open(path: &Path) -> linkrec::Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path.display().to_string(), e))
}

fn create(path: &Path) -> linkrec::Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path.display().to_string(), e))
}

fn write_io(path: &Path, r: io::Result<()>) -> linkrec::Result<()> {
    r.map_err(|e| Error::io(path.display().to_string(), e))
}

/// Loads transactions from a graph cache when the path ends in `.json`,
/// otherwise ingests the file as CSV under the configured rating scale.
fn load_transactions(path: &Path, config: &RunConfig) -> linkrec::Result<Vec<Transaction>> {
    if path.extension().is_some_and(|e| e == "json") {
        let cache: GraphCache = serde_json::from_reader(open(path)?)
            .map_err(|e| Error::Schema(format!("graph cache {}: {e}", path.display())))?;
        Ok(cache.transactions)
    } else {
        let ingest = data::ingest_csv(path, config.rating_scale)?;
        if !ingest.rejected.is_empty() {
            eprintln!("{} rows rejected", ingest.rejected.len());
        }
        Ok(ingest.transactions)
    }
}

fn emit(output: Option<&Path>, text: &str) -> linkrec::Result<()> {
    match output {
        Some(path) => write_io(path, create(path)?.write_all(text.as_bytes())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Io { .. } => 1,
                Error::Schema(_) => 2,
                Error::UnknownUser(_) | Error::NoSales(_) => 3,
                Error::Config(_) => 4,
            })
        }
    }
}

fn run(cli: Cli) -> linkrec::Result<()> {
    let config = cli.overrides.build()?;
    match cli.command {
        Command::Ingest { input, output } => cmd_ingest(&input, &output, &config),
        Command::Stats { input } => cmd_stats(&input, &config),
        Command::Recommend { graph, user, top, sim_cache, output } => {
            cmd_recommend(&graph, &user, top, sim_cache.as_deref(), output.as_deref(), &config)
        }
        Command::MineRules { input, output } => cmd_mine_rules(&input, output.as_deref(), &config),
        Command::Synth {
            output,
            preset,
            buyers,
            sellers,
            categories,
            transactions,
            items_per_seller,
            affinity,
            seller_skew,
            popularity_skew,
            rating_noise,
        } => {
            let mut spec = match preset.as_str() {
                "default" => GeneratorSpec::default(),
                "reference" => GeneratorSpec::reference_scale(),
                other => {
                    return Err(Error::Config(format!(
                        "unknown preset {other:?}; expected default or reference"
                    )))
                }
            };
            spec.rating_scale = config.rating_scale;
            if let Some(v) = buyers {
                spec.buyers = v;
            }
            if let Some(v) = sellers {
                spec.sellers = v;
            }
            if let Some(v) = categories {
                spec.categories = v;
            }
            if let Some(v) = transactions {
                spec.transactions = v;
            }
            if let Some(v) = items_per_seller {
                spec.items_per_seller = v;
            }
            if let Some(v) = affinity {
                spec.affinity = v;
            }
            if let Some(v) = seller_skew {
                spec.seller_skew = v;
            }
            if let Some(v) = popularity_skew {
                spec.popularity_skew = v;
            }
            if let Some(v) = rating_noise {
                spec.rating_noise = v;
            }
            cmd_synth(&spec, &output, &config)
        }
        Command::Evaluate { input, report, csv, threads } => {
            cmd_evaluate(&input, &report, csv.as_deref(), threads, &config)
        }
    }
}

fn cmd_ingest(input: &Path, output: &Path, config: &RunConfig) -> linkrec::Result<()> {
    let ingest = data::ingest_csv::<f64>(input, config.rating_scale)?;
    for r in &ingest.rejected {
        let column = r.column.as_deref().map(|c| format!(" ({c})")).unwrap_or_default();
        eprintln!("line {}{column}: {}", r.line, r.reason);
    }
    let g: CommercialGraph = CommercialGraph::build(&ingest.transactions);
    let cache =
        GraphCache { rating_scale: config.rating_scale, transactions: ingest.transactions };
    let mut w = create(output)?;
    write_io(output, serde_json::to_writer(&mut w, &cache).map_err(io::Error::other))?;
    write_io(output, writeln!(w))?;
    println!(
        "{} transactions ingested, {} rows rejected",
        cache.transactions.len(),
        ingest.rejected.len()
    );
    println!("{}", stats_json(&g));
    Ok(())
}

fn stats_json(g: &CommercialGraph) -> String {
    serde_json::to_string_pretty(&g.stats()).expect("stats always serialize")
}

fn cmd_stats(input: &Path, config: &RunConfig) -> linkrec::Result<()> {
    let transactions = load_transactions(input, config)?;
    let g: CommercialGraph = CommercialGraph::build(&transactions);
    println!("{}", stats_json(&g));
    Ok(())
}

/// The ranked candidates with their stage-2/3/4 evidence, plus the final
/// per-seller item choices. Scores are rounded to 6 decimals.
#[derive(Serialize)]
struct RecommendOutput {
    target: String,
    coefficients: Coefficients,
    candidates: Vec<RankedCandidate>,
    entries: Vec<RecommendationEntry>,
    skipped_sellers: usize,
    cold_start: bool,
}

#[derive(Serialize)]
struct Coefficients {
    alpha: f64,
    beta: f64,
    gamma: f64,
}

#[derive(Serialize)]
struct RankedCandidate {
    seller: String,
    /// Raw category score (stage 2).
    cat: f64,
    /// Raw reputation score (stage 3).
    rep: f64,
    /// Raw rating score (stage 4).
    rat: f64,
    /// Fused total of the normalized scores (stage 5).
    total: f64,
}

fn cmd_recommend(
    graph: &Path,
    user: &str,
    top: usize,
    sim_cache: Option<&Path>,
    output: Option<&Path>,
    config: &RunConfig,
) -> linkrec::Result<()> {
    let transactions = load_transactions(graph, config)?;
    let g: CommercialGraph = CommercialGraph::build(&transactions);
    let target = g.user_idx(user).ok_or_else(|| Error::UnknownUser(user.to_string()))?;

    let table = match sim_cache {
        Some(path) if path.exists() => simrank::read_pairs(&g, config.simrank.c, open(path)?)?,
        _ => {
            let table = simrank::compute(&g, &config.simrank_params());
            if let Some(path) = sim_cache {
                write_io(path, simrank::write_pairs(&table, &g, create(path)?))?;
            }
            table
        }
    };

    let weights = config.fusion_weights()?;
    let ranked = scoring::rank_candidates(&g, &table, target, config.candidates.n, &weights, top);
    let rules = match config.items.method {
        ItemMethod::Rules => items::mine_rules(&g, &config.mining_params()),
        _ => Vec::new(),
    };
    let item_seed = mix(config.seed, &[label("item"), label(user)]);

    let recommendation = if ranked.is_empty() {
        let sellers = scoring::cold_start_candidates(&g, Some(target), top);
        items::build_cold_recommendations(&g, &sellers, user, config.items.method, &rules, item_seed)
    } else {
        items::build_recommendations(&g, &ranked, target, config.items.method, &rules, item_seed)
    };

    let out = RecommendOutput {
        target: user.to_string(),
        coefficients: Coefficients {
            alpha: config.fusion.alpha,
            beta: config.fusion.beta,
            gamma: config.fusion.gamma,
        },
        candidates: ranked
            .iter()
            .map(|c| RankedCandidate {
                seller: g.user_name(c.seller).to_string(),
                cat: round6(c.category_score),
                rep: round6(c.reputation_score),
                rat: round6(c.rating_score),
                total: round6(c.total),
            })
            .collect(),
        entries: recommendation.entries,
        skipped_sellers: recommendation.skipped_sellers,
        cold_start: recommendation.cold_start,
    };
    let json = serde_json::to_string_pretty(&out).expect("recommendation serializes");
    emit(output, &format!("{json}\n"))
}

fn cmd_mine_rules(input: &Path, output: Option<&Path>, config: &RunConfig) -> linkrec::Result<()> {
    let transactions = load_transactions(input, config)?;
    let g: CommercialGraph = CommercialGraph::build(&transactions);
    let rules = items::mine_rules(&g, &config.mining_params());
    let mut text = String::new();
    for rule in &rules {
        text.push_str(&serde_json::to_string(rule).expect("rules serialize"));
        text.push('\n');
    }
    emit(output, &text)?;
    eprintln!("{} rules mined from {} baskets", rules.len(), g.stats().users);
    Ok(())
}

fn cmd_synth(spec: &GeneratorSpec, output: &Path, config: &RunConfig) -> linkrec::Result<()> {
    let transactions = synth::generate(spec, config.seed)?;
    write_io(output, data::write_csv(&transactions, spec.rating_scale, create(output)?))?;
    let g: CommercialGraph = CommercialGraph::build(&transactions);
    println!("{}", stats_json(&g));
    Ok(())
}

fn cmd_evaluate(
    input: &Path,
    report_path: &Path,
    csv: Option<&Path>,
    threads: usize,
    config: &RunConfig,
) -> linkrec::Result<()> {
    let transactions = load_transactions(input, config)?;
    let report = eval::run_experiment(&transactions, config, threads)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    emit(Some(report_path), &format!("{json}\n"))?;
    if let Some(path) = csv {
        write_io(path, eval::write_metrics_csv(&report, create(path)?))?;
    }

    println!("{:<22} {:>5} {:>10} {:>10} {:>10}", "series", "size", "precision", "recall", "f");
    for series in &report.series {
        for p in &series.aggregate {
            println!(
                "{:<22} {:>5} {:>10.5} {:>10.5} {:>10.5}",
                series.name, p.predictions_per_user, p.precision, p.recall, p.f_measure
            );
        }
    }
    Ok(())
}
