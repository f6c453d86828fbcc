//! `fkcap`: caption construction and recovery, auxiliary data generation,
//! ingestion, extraction and evaluation from the command line.
//!
//! Exit codes: 0 success, 1 data error, 2 usage error.

mod commands;
mod config;
mod manifest;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

/// An error in how the tool was invoked rather than in the data.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

#[derive(Debug, Parser)]
#[command(
    name = "fkcap",
    version,
    about = "Fashion knowledge extraction as captioning",
    arg_required_else_help = true
)]
pub struct Cli {
    /// TOML or JSON file with vocab, max_persons, weights, endpoint, timeout_ms, parallel, corruption.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// JSON list of item types; overrides the config file.
    #[arg(long, global = true)]
    pub vocab: Option<PathBuf>,
    /// Most persons a knowledge set may hold; overrides the config file.
    #[arg(long, global = true)]
    pub max_persons: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TaskArg {
    Src,
    Itm,
    Vqa,
    All,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Breakdown {
    Counts,
    Frequency,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render gold knowledge of each post as a caption ({post_id, caption} JSONL).
    Construct {
        /// Caption rule: ours, rule1, rule2 or rule3.
        #[arg(long, default_value = "ours")]
        rule: String,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Parse captions back into tuples.
    Recover {
        /// Captions JSONL ({post_id, caption}).
        #[arg(long, required_unless_present = "caption", conflicts_with = "caption")]
        input: Option<PathBuf>,
        /// A single caption to parse.
        #[arg(long)]
        caption: Option<String>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check construct/recover round trips on random knowledge sets.
    Roundtrip {
        #[arg(long, default_value_t = 1000)]
        fuzz: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Persons per random set, at most.
        #[arg(long, default_value_t = 4)]
        persons: usize,
        /// Items per random person, at most.
        #[arg(long, default_value_t = 4)]
        items: usize,
    },
    /// Generate auxiliary-task instances from gold posts.
    Augment {
        #[arg(long, value_enum, default_value = "all")]
        task: TaskArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Recompute clean_text for every post.
    Clean {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Seeded 80/10/10 split into train.jsonl, val.jsonl and test.jsonl.
    Split {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Write a synthetic gold corpus.
    Synth {
        #[arg(long)]
        posts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Generate captions with a backend and recover tuples (predictions JSONL).
    Extract {
        #[arg(long)]
        input: PathBuf,
        /// Backend name: echo, corrupt or http.
        #[arg(long, default_value = "echo")]
        backend: String,
        #[arg(long)]
        endpoint: Option<String>,
        /// Most backend calls in flight.
        #[arg(long)]
        parallel: Option<usize>,
        #[arg(long)]
        timeout_ms: Option<u64>,
        /// Seed for the corrupt backend.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        drop_rate: Option<f64>,
        #[arg(long)]
        swap_rate: Option<f64>,
        #[arg(long)]
        scramble_rate: Option<f64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Score predictions against gold posts.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        /// Training posts; enables the frequency breakdown.
        #[arg(long)]
        train: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Turn an eval report into CSV.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        breakdown: Breakdown,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                eprintln!("run 'fkcap --help' for usage");
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
