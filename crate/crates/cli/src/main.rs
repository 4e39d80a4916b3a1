// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! `attnet`: run the retweet-attention pipeline stage by stage.
//!
//! Exit codes: 0 ok, 1 config error, 2 missing prerequisite stage,
//! 3 runtime error.

mod config;
mod manifest;
mod stages;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{RunConfig, WindowConfig};
use stages::{Runner, Stage};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("`{stage}` needs outputs that are not there yet; run `attnet {run}` first")]
    Missing { stage: &'static str, run: &'static str },
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Missing { .. } => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "attnet", version, about = "Retweet-network communities and attention dynamics")]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker thread cap for parallel sections.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Replace every seed in the config with this value.
    #[arg(long, global = true)]
    seed_override: Option<u64>,
    /// Log stage progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    /// Output directory; overrides `paths.out`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse, window and deduplicate events; resolve user countries.
    Ingest(IngestArgs),
    /// Build the retweet graph and extract its giant component.
    Graph,
    /// Consensus Louvain communities on the giant component.
    Communities,
    /// Community profiles, Ward clustering and super-community naming.
    Profile,
    /// Mixing matrices and attention shares per time window.
    Dynamics,
    /// Top-user cohort, h-index and rank trajectories.
    Attention,
    /// Power-law fit of retweets received per user.
    Stats,
    /// Generate a synthetic event stream from the `[synth]` section.
    Synth,
    /// Every stage in dependency order.
    All,
}

#[derive(Debug, Args)]
struct IngestArgs {
    /// Event JSONL files; override `paths.events`.
    #[arg(long, num_args = 1..)]
    events: Vec<PathBuf>,
    /// Window start (ISO-8601 or epoch seconds).
    #[arg(long, requires = "to")]
    from: Option<String>,
    /// Window end, exclusive.
    #[arg(long, requires = "from")]
    to: Option<String>,
    #[arg(long)]
    gazetteer: Option<PathBuf>,
    #[arg(long)]
    categories: Option<PathBuf>,
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match (&cli.config, &cli.out) {
        (Some(path), _) => RunConfig::load(path)?,
        (None, Some(out)) => RunConfig::with_out(out.clone()),
        (None, None) => return Err(CliError::Config("give --config or --out".into())),
    };
    if let Some(out) = &cli.out {
        cfg.paths.out = out.clone();
    }
    if let Command::Ingest(a) = &cli.command {
        if !a.events.is_empty() {
            cfg.paths.events = a.events.clone();
        }
        if let (Some(from), Some(to)) = (&a.from, &a.to) {
            cfg.window = Some(WindowConfig { from: from.clone(), to: to.clone() });
        }
        if a.gazetteer.is_some() {
            cfg.paths.gazetteer = a.gazetteer.clone();
        }
        if a.categories.is_some() {
            cfg.paths.categories = a.categories.clone();
        }
    }
    if let Some(seed) = cli.seed_override {
        cfg.override_seed(seed);
    }
    let needs_source = matches!(cli.command, Command::Ingest(_) | Command::All);
    cfg.validate(needs_source)?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = load_config(cli)?;
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    let mut runner = Runner::new(cfg)?;
    let stages = match cli.command {
        Command::Ingest(_) => vec![Stage::Ingest],
        Command::Graph => vec![Stage::Graph],
        Command::Communities => vec![Stage::Communities],
        Command::Profile => vec![Stage::Profile],
        Command::Dynamics => vec![Stage::Dynamics],
        Command::Attention => vec![Stage::Attention],
        Command::Stats => vec![Stage::Stats],
        Command::Synth => vec![Stage::Synth],
        Command::All => runner.pipeline(),
    };
    for stage in stages {
        let report = runner.run(stage)?;
        let line = serde_json::json!({
            "stage": stage.name(),
            "cache_hit": report["cache_hit"],
            "report": format!("{}/report.json", stage.name()),
        });
        println!("{line}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("attnet: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
