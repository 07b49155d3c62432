//! Experiment CLI. Subcommands: `mse`, `memory`, `edisj`, `gen`,
//! `exhaustive`. Any pass/fail experiment exits nonzero on fail; a
//! `--config` TOML file overrides flags.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};

use f2harness::config::{parse_label, ConfigFile, ExperimentConfig};
use f2harness::csvout;
use f2harness::experiments::{
    check_exhaustive, run_edisj_experiment, run_memory_experiment, run_mse_experiment,
    workload_stream,
};
use f2harness::formats;
use f2harness::Workload;
use f2sketch::hashing::derive_seed;
use f2sketch::streamgen::{multilevel_planted_stream, multilevel_stream};

#[derive(Parser)]
#[command(
    name = "f2harness",
    about = "F2 sketch experiments: error, memory, and distinguishing power",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Empirical mean squared relative error vs the eps^2 bound.
    Mse(RunArgs),
    /// Encoded sketch size vs the bit budget and the 64P baseline.
    Memory(RunArgs),
    /// Distinguishing YES from NO gap instances with a sketch.
    Edisj(EdisjArgs),
    /// Generate a stream file (plus layout sidecar for multilevel).
    Gen(GenArgs),
    /// Exhaustive tiny-instance oracle check of the exact identities.
    Exhaustive(ExhaustiveArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Target relative error of the sketch.
    #[arg(long, default_value_t = 0.25)]
    epsilon: f64,
    /// Stream length (workload-dependent).
    #[arg(long, default_value_t = 100_000)]
    n: u64,
    /// Independent-seed trials.
    #[arg(long, default_value_t = 100)]
    trials: u32,
    /// Master seed; streams and per-trial hash seeds derive from it.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// uniform | zipf | edisj | multilevel | file
    #[arg(long, default_value = "uniform")]
    workload: String,
    /// CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also run the tug-of-war baseline.
    #[arg(long)]
    baseline: bool,
    /// Gap-instance player count.
    #[arg(long, default_value_t = 8)]
    t: u64,
    /// Gap-instance super-element width (default: floor(eps^2 n/t^2)).
    #[arg(long)]
    d: Option<u64>,
    /// Gap-instance label: yes | no-disjoint | no-wrong-exam
    #[arg(long, default_value = "yes")]
    label: String,
    /// Multilevel plant level (0 = unplanted).
    #[arg(long, default_value_t = 0)]
    level: u32,
    /// Universe size override.
    #[arg(long)]
    universe: Option<u64>,
    /// Zipf exponent.
    #[arg(long, default_value_t = 1.0)]
    zipf_exponent: f64,
    /// Stream file for the file workload.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Drop the wall-time column for byte-identical CSV replays.
    #[arg(long)]
    no_walltime: bool,
    /// TOML config; present keys override the flags above.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct EdisjArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Sketch error for classification (default: epsilon/8).
    #[arg(long)]
    sketch_epsilon: Option<f64>,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Write the text format (one id per line) instead of binary.
    #[arg(long)]
    text: bool,
    /// Sidecar path for multilevel layouts (default: <out>.layout.json).
    #[arg(long)]
    sidecar: Option<PathBuf>,
}

#[derive(Args)]
struct ExhaustiveArgs {
    /// Comma-separated frequency vector, e.g. 2,1,1. Default: the
    /// built-in grid of six vectors.
    #[arg(long)]
    freqs: Option<String>,
    /// Bucket counts to check, comma-separated. Default: 1,2,3.
    #[arg(long, default_value = "1,2,3")]
    buckets: String,
}

fn build_config(args: &RunArgs) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig {
        workload: args.workload.parse()?,
        n: args.n,
        epsilon: args.epsilon,
        trials: args.trials,
        seed: args.seed,
        out: args.out.clone(),
        baseline: args.baseline,
        t: args.t,
        d: args.d,
        label: parse_label(&args.label)?,
        level: args.level,
        universe: args.universe,
        zipf_exponent: args.zipf_exponent,
        input: args.input.clone(),
        include_walltime: !args.no_walltime,
        sketch_epsilon: None,
    };
    if let Some(path) = &args.config {
        ConfigFile::load(path)?.apply(&mut cfg)?;
    }
    Ok(cfg)
}

fn cmd_mse(args: &RunArgs) -> Result<bool> {
    let cfg = build_config(args)?;
    let summary = run_mse_experiment(&cfg)?;
    println!(
        "mse: workload={} n={} eps={} P={} trials={} exact_f2={}",
        cfg.workload.as_str(),
        summary.stream_len,
        summary.epsilon,
        summary.bucket_count,
        summary.trials,
        summary.exact_f2
    );
    println!(
        "mse: empirical={:.6} bound={:.6} slack={:.4} threshold={:.6} -> {}",
        summary.empirical_mse,
        summary.bound,
        summary.slack,
        summary.threshold,
        verdict(summary.pass)
    );
    if let Some(b) = summary.baseline_mse {
        println!("mse: tug-of-war baseline empirical={b:.6}");
    }
    if let Some(path) = &cfg.out {
        csvout::emit_csv(path, &summary.rows, cfg.include_walltime)?;
        println!("mse: wrote {} rows to {}", summary.rows.len(), path.display());
    }
    Ok(summary.pass)
}

fn cmd_memory(args: &RunArgs) -> Result<bool> {
    let cfg = build_config(args)?;
    let summary = run_memory_experiment(&cfg)?;
    println!(
        "memory: n={} P={} trials={}",
        summary.stream_len, summary.bucket_count, summary.trials
    );
    println!(
        "memory: counter max={}b budget={}b | file mean={:.1}b max={}b budget={}b | fixed-width {}b -> {}",
        summary.max_counter_bits,
        summary.counter_budget,
        summary.mean_encoded_bits,
        summary.max_encoded_bits,
        summary.total_budget,
        summary.fixed_width_bits,
        verdict(summary.pass)
    );
    if let Some(path) = &cfg.out {
        csvout::emit_csv(path, &summary.rows, cfg.include_walltime)?;
        println!(
            "memory: wrote {} rows to {}",
            summary.rows.len(),
            path.display()
        );
    }
    Ok(summary.pass)
}

fn cmd_edisj(args: &EdisjArgs) -> Result<bool> {
    let mut cfg = build_config(&args.run)?;
    if cfg.sketch_epsilon.is_none() {
        cfg.sketch_epsilon = args.sketch_epsilon;
    }
    let summary = run_edisj_experiment(&cfg)?;
    println!(
        "edisj: n={} t={} d={} stream_len={} yes_f2={} max_no_f2={} threshold={} gap={}",
        cfg.n,
        summary.t,
        summary.d,
        summary.stream_len,
        summary.yes_f2,
        summary.max_no_f2,
        summary.threshold,
        summary.gap
    );
    println!(
        "edisj: sketch eps={} (P={}) correct {}/{} accuracy={:.4} oracle={:.4} -> {}",
        summary.sketch_epsilon,
        summary.bucket_count,
        summary.correct,
        summary.total,
        summary.accuracy,
        summary.oracle_accuracy,
        verdict(summary.pass)
    );
    Ok(summary.pass)
}

fn cmd_gen(args: &GenArgs) -> Result<bool> {
    let cfg = build_config(&args.run)?;
    let Some(out) = cfg.out.clone() else {
        bail!("gen needs --out");
    };
    let stream = workload_stream(&cfg)?;
    if args.text {
        formats::write_stream_text(&out, &stream)?;
    } else {
        formats::write_stream_binary(&out, &stream)?;
    }
    println!(
        "gen: wrote {} elements ({}) to {}",
        stream.len(),
        if args.text { "text" } else { "binary" },
        out.display()
    );
    if cfg.workload == Workload::Multilevel {
        let stream_seed = derive_seed(cfg.seed, 0);
        let sidecar = if cfg.level == 0 {
            let (_, layout) = multilevel_stream(cfg.n, cfg.epsilon, stream_seed)?;
            formats::sidecar_for(&layout, None)
        } else {
            let (_, layout, inst) =
                multilevel_planted_stream(cfg.n, cfg.epsilon, stream_seed, cfg.level, cfg.label)?;
            formats::sidecar_for(&layout, Some((cfg.level, &inst)))
        };
        let sidecar_path = args.sidecar.clone().unwrap_or_else(|| {
            let mut p = out.as_os_str().to_owned();
            p.push(".layout.json");
            PathBuf::from(p)
        });
        formats::write_sidecar(&sidecar_path, &sidecar)?;
        println!("gen: wrote layout sidecar to {}", sidecar_path.display());
    }
    Ok(true)
}

fn cmd_exhaustive(args: &ExhaustiveArgs) -> Result<bool> {
    let buckets: Vec<u64> = args
        .buckets
        .split(',')
        .map(|s| s.trim().parse::<u64>())
        .collect::<Result<_, _>>()?;
    let vectors: Vec<Vec<u64>> = match &args.freqs {
        Some(s) => vec![s
            .split(',')
            .map(|f| f.trim().parse::<u64>())
            .collect::<Result<_, _>>()?],
        None => [
            &[1u64][..],
            &[2],
            &[1, 1],
            &[2, 1],
            &[2, 1, 1],
            &[3, 2, 1],
        ]
        .iter()
        .map(|v| v.to_vec())
        .collect(),
    };
    let mut all_ok = true;
    for freqs in &vectors {
        for &p in &buckets {
            let (mean, variance, ok) = check_exhaustive(freqs, p)?;
            all_ok &= ok;
            println!(
                "exhaustive: freqs={freqs:?} P={p} mean={mean} variance={variance} -> {}",
                verdict(ok)
            );
        }
    }
    Ok(all_ok)
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Mse(args) => cmd_mse(args),
        Command::Memory(args) => cmd_memory(args),
        Command::Edisj(args) => cmd_edisj(args),
        Command::Gen(args) => cmd_gen(args),
        Command::Exhaustive(args) => cmd_exhaustive(args),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
