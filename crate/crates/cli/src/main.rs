use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use amrseq::smatch::SmatchOptions;
use amrseq_cli::config::PipelineConfig;
use amrseq_cli::pipeline::{
    cmd_decode, cmd_eval, cmd_preprocess, cmd_sweep, cmd_train, per_sentence_table, read_graphs, score_line,
    sweep_table, write_graphs, DecodeInput,
};
use amrseq_cli::toy;
use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

/// Sequence-to-sequence AMR parser.
#[derive(Parser)]
#[command(name = "amrseq", version)]
struct Cli {
    /// Experiment configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the model seed from the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the category model and categorized training data.
    Preprocess,
    /// Train the attention model on preprocessed data.
    Train,
    /// Parse raw sentences, one whitespace-tokenized sentence per line.
    Decode {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        ne: Option<PathBuf>,
        #[arg(long)]
        pos: Option<PathBuf>,
        #[arg(long)]
        lemma: Option<PathBuf>,
        /// Defaults to standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Smatch of predicted against gold graphs.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        /// Writes a per-sentence score table here.
        #[arg(long)]
        per_sentence: Option<PathBuf>,
        #[arg(long)]
        restarts: Option<usize>,
        /// Leave the TOP triple out of the counts.
        #[arg(long)]
        no_top: bool,
    },
    /// Preprocess, train and score once per frequency threshold.
    Sweep {
        /// Comma-separated thresholds; defaults to the configured list.
        #[arg(long, value_delimiter = ',')]
        thresholds: Option<Vec<usize>>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write the synthetic toy corpus.
    Toy {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = toy::TOY_TRAIN)]
        train: usize,
        #[arg(long, default_value_t = toy::TOY_DEV)]
        dev: usize,
    },
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let path = cli.config.as_deref().context("--config is required for this command")?;
    let mut cfg = PipelineConfig::load(path)?;
    if let Some(s) = cli.seed {
        cfg.model.seed = s;
    }
    Ok(cfg)
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Preprocess => {
            let r = cmd_preprocess(&load_config(&cli)?)?;
            print!("{}", r.summary());
        }
        Command::Train => {
            let s = cmd_train(&load_config(&cli)?)?;
            print!("{}", s.report.log_text());
            println!("checkpoint: {}", s.checkpoint.display());
        }
        Command::Decode {
            input,
            ne,
            pos,
            lemma,
            output,
        } => {
            let cfg = load_config(&cli)?;
            let input = DecodeInput::from_files(input, ne.as_deref(), pos.as_deref(), lemma.as_deref())?;
            let graphs = cmd_decode(&cfg, &input)?;
            emit(output.as_deref(), &write_graphs(&graphs))?;
        }
        Command::Eval {
            pred,
            gold,
            per_sentence,
            restarts,
            no_top,
        } => {
            let mut opts = match &cli.config {
                Some(_) => load_config(&cli)?.smatch,
                None => SmatchOptions::default(),
            };
            if let Some(r) = restarts {
                opts.restarts = *r;
            }
            if *no_top {
                opts.include_top = false;
            }
            let (total, each) = cmd_eval(&read_graphs(pred)?, &read_graphs(gold)?, &opts)?;
            println!("P\tR\tF1");
            println!("{}", score_line(&total));
            if let Some(p) = per_sentence {
                emit(Some(p), &per_sentence_table(&each))?;
            }
        }
        Command::Sweep { thresholds, output } => {
            let cfg = load_config(&cli)?;
            let ns = thresholds.clone().unwrap_or_else(|| cfg.sweep_thresholds.clone());
            let rows = cmd_sweep(&cfg, &ns)?;
            emit(output.as_deref(), &sweep_table(&rows))?;
        }
        Command::Toy { out, train, dev } => {
            let seed = cli.seed.unwrap_or(toy::DEFAULT_TOY_SEED);
            toy::write_toy(out, &toy::generate(seed, *train, *dev))?;
            println!("wrote {train} train and {dev} dev pairs to {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
