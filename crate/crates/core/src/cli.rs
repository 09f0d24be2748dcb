//! Command-line front end.
//!
//! Data goes to stdout or to the requested files; diagnostics go to stderr.
//! Every file written is paired with `<file>.manifest.json`, which records
//! the exact arguments so `replay` can regenerate the same bytes.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::attack::{
    balance_attack_with_budget, budget_for, random_attack_with_budget, verify_perturbation,
    AttackMode, AttackTrace, TerminalStatus,
};
use crate::balance::count_signed_triangles;
use crate::eval::{attack_eval_pipeline, write_pipeline_csv, PipelineConfig, PipelineRow};
use crate::graph::SignedGraph;
use crate::io::{load_edge_list, load_rating_csv, write_edge_list, write_node_labels, ConflictPolicy, LoadOptions};

#[derive(Debug, Parser)]
#[command(name = "balance-attack", version, about = "Balance degree and sign-flip attacks on signed graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print node/edge counts, triangle counts and the balance degree.
    Stats(StatsArgs),
    /// Poison a graph and write the attacked graph and the flip trace.
    Attack(AttackArgs),
    /// Attack the training split and score link sign prediction.
    Eval(EvalArgs),
    /// Re-run the command recorded in a manifest.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum InputFormat {
    RatingCsv,
    EdgeList,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum ConflictArg {
    Sum,
    NegativeWins,
    Drop,
}

impl From<ConflictArg> for ConflictPolicy {
    fn from(c: ConflictArg) -> Self {
        match c {
            ConflictArg::Sum => ConflictPolicy::SumRatings,
            ConflictArg::NegativeWins => ConflictPolicy::NegativeWins,
            ConflictArg::Drop => ConflictPolicy::DropConflicts,
        }
    }
}

#[derive(Debug, Args)]
pub struct InputArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "edge-list")]
    pub format: InputFormat,
    /// How opposite ratings on one pair are merged (rating-csv only).
    #[arg(long, value_enum, default_value = "sum")]
    pub conflict: ConflictArg,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Also write the report as a one-record CSV.
    #[arg(long)]
    pub out_csv: Option<PathBuf>,
    /// Print JSON instead of key=value lines.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value = "balance", value_parser = parse_mode)]
    pub mode: AttackMode,
    /// Budget as a fraction of edges; a comma-separated list writes one
    /// output pair per budget.
    #[arg(long, value_delimiter = ',', required = true, value_parser = parse_attack_budget)]
    pub budget: Vec<f64>,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub batch_size: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_graph: PathBuf,
    #[arg(long)]
    pub out_trace: PathBuf,
    /// Write the internal-id to external-id table.
    #[arg(long)]
    pub out_nodes: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long = "mode", alias = "modes", value_delimiter = ',', default_value = "balance,random", value_parser = parse_mode)]
    pub modes: Vec<AttackMode>,
    #[arg(long = "budget", alias = "budgets", value_delimiter = ',', default_value = "0,0.05,0.1,0.15,0.2", value_parser = parse_eval_budget)]
    pub budgets: Vec<f64>,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub batch_size: u64,
    /// Attack seeds (random mode runs once per seed).
    #[arg(long = "seed", alias = "seeds", value_delimiter = ',', default_value = "0")]
    pub seeds: Vec<u64>,
    #[arg(long = "split-seed", value_delimiter = ',', default_value = "0")]
    pub split_seeds: Vec<u64>,
    #[arg(long, default_value_t = 0.8, value_parser = parse_train_frac)]
    pub train_frac: f64,
    /// Dataset name for the CSV; defaults to the input file stem.
    #[arg(long)]
    pub dataset: Option<String>,
    #[arg(long)]
    pub out_csv: Option<PathBuf>,
    /// Per-budget balance-degree curve (random mode averaged over seeds).
    #[arg(long)]
    pub out_curve: Option<PathBuf>,
}

fn parse_mode(s: &str) -> Result<AttackMode, String> {
    s.parse().map_err(|e: crate::Error| e.to_string())
}

fn parse_fraction(s: &str) -> Result<f64, String> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| format!("`{s}` is not a number"))
}

fn parse_attack_budget(s: &str) -> Result<f64, String> {
    let x = parse_fraction(s)?;
    if x > 0.0 && x <= 1.0 {
        Ok(x)
    } else {
        Err(format!("budget {x} must be in (0, 1]"))
    }
}

fn parse_eval_budget(s: &str) -> Result<f64, String> {
    let x = parse_fraction(s)?;
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(format!("budget {x} must be in [0, 1]"))
    }
}

fn parse_train_frac(s: &str) -> Result<f64, String> {
    let x = parse_fraction(s)?;
    if x > 0.0 && x < 1.0 {
        Ok(x)
    } else {
        Err(format!("train fraction {x} must be in (0, 1)"))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments after the program name; `replay` parses these again.
    pub args: Vec<String>,
    pub input: PathBuf,
    pub format: InputFormat,
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub tool_version: String,
    pub wall_clock_secs: f64,
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// `out.csv` with budget 0.05 becomes `out.b0.05.csv`.
pub fn budget_path(path: &Path, budget: f64) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.b{budget}.{}", ext.to_string_lossy()),
        None => format!("{stem}.b{budget}"),
    };
    path.with_file_name(name)
}

struct RunContext {
    args: Vec<String>,
    started: Instant,
}

impl RunContext {
    fn write_manifest(
        &self,
        output: &Path,
        command: &str,
        input: &InputArgs,
        config: serde_json::Value,
        seeds: Vec<u64>,
    ) -> anyhow::Result<()> {
        let manifest = RunManifest {
            command: command.into(),
            args: self.args.clone(),
            input: input.input.clone(),
            format: input.format,
            config,
            seeds,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            wall_clock_secs: self.started.elapsed().as_secs_f64(),
        };
        let path = manifest_path(output);
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        serde_json::to_writer_pretty(BufWriter::new(file), &manifest)?;
        Ok(())
    }
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

pub fn load_graph(input: &InputArgs) -> anyhow::Result<SignedGraph> {
    let file = File::open(&input.input).with_context(|| format!("opening {}", input.input.display()))?;
    let reader = BufReader::new(file);
    let graph = match input.format {
        InputFormat::EdgeList => load_edge_list(reader),
        InputFormat::RatingCsv => {
            let options = LoadOptions {
                conflict_policy: input.conflict.into(),
            };
            load_rating_csv(reader, &options).map(|(g, stats)| {
                log::info!(
                    "read {} rows: {} zero-rated, {} self-loops, {} merged, {} conflicting pairs, {} pairs dropped",
                    stats.rows_read,
                    stats.zero_rating_rows,
                    stats.self_loop_rows,
                    stats.merged_rows,
                    stats.conflicting_pairs,
                    stats.dropped_pairs
                );
                g
            })
        }
    };
    graph.with_context(|| format!("reading {}", input.input.display()))
}

fn cmd_stats(args: &StatsArgs, ctx: &RunContext) -> anyhow::Result<()> {
    let graph = load_graph(&args.input)?;
    let report = count_signed_triangles(&graph);
    let stdout = io::stdout();
    let mut out = stdout.lock();
    if args.json {
        serde_json::to_writer(&mut out, &report)?;
        writeln!(out)?;
    } else {
        writeln!(out, "n={}", report.n)?;
        writeln!(out, "m={}", report.m)?;
        writeln!(out, "pos_edges={}", report.pos_edges)?;
        writeln!(out, "neg_edges={}", report.neg_edges)?;
        writeln!(out, "balanced={}", report.balanced)?;
        writeln!(out, "unbalanced={}", report.unbalanced)?;
        writeln!(out, "d3={}", report.d3)?;
    }
    if let Some(path) = &args.out_csv {
        let mut w = create(path)?;
        writeln!(w, "# balance-attack stats v1")?;
        writeln!(w, "{}", crate::balance::BalanceReport::CSV_HEADER)?;
        writeln!(w, "{}", report.csv_record())?;
        w.flush()?;
        ctx.write_manifest(path, "stats", &args.input, serde_json::json!({}), vec![])?;
    }
    Ok(())
}

/// The first `k` flips of a run made with `trace_every = 1`.
fn trace_prefix(trace: &AttackTrace, k: usize, budget: usize) -> AttackTrace {
    let taken = k.min(trace.flips());
    let status = if taken == budget {
        TerminalStatus::BudgetExhausted
    } else {
        trace.status
    };
    AttackTrace {
        mode: trace.mode,
        budget,
        initial_d3: trace.initial_d3,
        records: trace.records[..taken].to_vec(),
        status,
    }
}

fn cmd_attack(args: &AttackArgs, ctx: &RunContext) -> anyhow::Result<()> {
    let graph = load_graph(&args.input)?;
    if graph.edge_count() == 0 {
        bail!("graph has no edges");
    }
    let m = graph.edge_count();
    let batch = args.batch_size as usize;
    let budgets: Vec<(f64, usize)> = args.budget.iter().map(|&f| (f, budget_for(f, m))).collect();
    let multi = budgets.len() > 1;

    // Balance modes: one run at the largest budget, prefixes for the rest.
    let shared = if args.mode.is_balance() {
        let max = budgets.iter().map(|b| b.1).max().unwrap_or(1);
        Some(balance_attack_with_budget(&graph, args.mode, max, batch, 1)?.1)
    } else {
        None
    };

    for &(frac, budget) in &budgets {
        let (attacked, trace) = match &shared {
            Some(full) => {
                let trace = trace_prefix(full, budget, budget);
                (full.replay_prefix(&graph, trace.flips())?, trace)
            }
            None => random_attack_with_budget(&graph, budget, args.seed, 1)?,
        };
        let check = verify_perturbation(&graph, &attacked, budget)?;
        if !check.passed() {
            bail!("attack output violates the perturbation constraints:\n{check}");
        }

        let (graph_path, trace_path) = if multi {
            (budget_path(&args.out_graph, frac), budget_path(&args.out_trace, frac))
        } else {
            (args.out_graph.clone(), args.out_trace.clone())
        };
        write_edge_list(&attacked, create(&graph_path)?)?;
        trace.write_csv(create(&trace_path)?)?;

        let config = serde_json::json!({
            "mode": args.mode,
            "budget_fraction": frac,
            "budget": budget,
            "batch_size": batch,
            "conflict": args.input.conflict,
        });
        for path in [&graph_path, &trace_path] {
            ctx.write_manifest(path, "attack", &args.input, config.clone(), vec![args.seed])?;
        }
        println!(
            "budget={frac} flips={} status={} d3_before={} d3_after={}",
            trace.flips(),
            trace.status,
            trace.initial_d3,
            trace.final_d3()
        );
    }

    if let Some(path) = &args.out_nodes {
        write_node_labels(&graph, create(path)?)?;
        ctx.write_manifest(path, "attack", &args.input, serde_json::json!({}), vec![args.seed])?;
    }
    Ok(())
}

fn write_curve<W: Write>(rows: &[PipelineRow], mut out: W) -> anyhow::Result<()> {
    writeln!(out, "# balance-attack curve v1")?;
    writeln!(out, "mode,budget_frac,split_seed,d3_mean,runs")?;
    let mut keys: Vec<(AttackMode, f64, u64)> = Vec::new();
    for r in rows {
        let key = (r.mode, r.budget_frac, r.split_seed);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    for (mode, frac, split) in keys {
        let values: Vec<f64> = rows
            .iter()
            .filter(|r| r.mode == mode && r.budget_frac == frac && r.split_seed == split)
            .filter_map(|r| r.d3.to_f64())
            .collect();
        let mean = if values.is_empty() {
            "undefined".to_string()
        } else {
            format!("{:?}", values.iter().sum::<f64>() / values.len() as f64)
        };
        writeln!(out, "{mode},{frac},{split},{mean},{}", values.len())?;
    }
    out.flush()?;
    Ok(())
}

fn cmd_eval(args: &EvalArgs, ctx: &RunContext) -> anyhow::Result<()> {
    let graph = load_graph(&args.input)?;
    let dataset = args.dataset.clone().unwrap_or_else(|| {
        args.input
            .input
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".into())
    });
    let mut rows = Vec::new();
    for &split_seed in &args.split_seeds {
        let cfg = PipelineConfig {
            dataset: dataset.clone(),
            modes: args.modes.clone(),
            budgets: args.budgets.clone(),
            batch_size: args.batch_size as usize,
            train_fraction: args.train_frac,
            split_seed,
            attack_seeds: args.seeds.clone(),
        };
        rows.extend(attack_eval_pipeline(&graph, &cfg)?);
    }

    let config = serde_json::json!({
        "dataset": dataset,
        "modes": args.modes,
        "budgets": args.budgets,
        "batch_size": args.batch_size,
        "train_frac": args.train_frac,
        "split_seeds": args.split_seeds,
        "conflict": args.input.conflict,
    });
    match &args.out_csv {
        Some(path) => {
            write_pipeline_csv(&rows, create(path)?)?;
            ctx.write_manifest(path, "eval", &args.input, config.clone(), args.seeds.clone())?;
        }
        None => write_pipeline_csv(&rows, io::stdout().lock())?,
    }
    if let Some(path) = &args.out_curve {
        write_curve(&rows, create(path)?)?;
        ctx.write_manifest(path, "eval", &args.input, config, args.seeds.clone())?;
    }
    Ok(())
}

pub fn run(cli: Cli, args: Vec<String>) -> anyhow::Result<()> {
    let ctx = RunContext {
        args,
        started: Instant::now(),
    };
    match &cli.command {
        Command::Stats(a) => cmd_stats(a, &ctx),
        Command::Attack(a) => cmd_attack(a, &ctx),
        Command::Eval(a) => cmd_eval(a, &ctx),
        Command::Replay { manifest } => {
            let file = File::open(manifest).with_context(|| format!("opening {}", manifest.display()))?;
            let recorded: RunManifest = serde_json::from_reader(BufReader::new(file))
                .with_context(|| format!("parsing {}", manifest.display()))?;
            let argv = std::iter::once("balance-attack".to_string()).chain(recorded.args.iter().cloned());
            let cli = Cli::try_parse_from(argv).context("manifest arguments no longer parse")?;
            if matches!(cli.command, Command::Replay { .. }) {
                bail!("manifest records a replay");
            }
            run(cli, recorded.args)
        }
    }
}

pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    match run(cli, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
