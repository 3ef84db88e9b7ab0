//! `evcoref` command-line interface.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 numeric failure during training.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use evcoref::pipeline::{Pipeline, PipelineConfig, SCOPES};
use evcoref::{Error, Scope};

#[derive(Parser, Debug)]
#[command(name = "evcoref", version, about = "Event coreference: train, cluster and score")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse the corpus into canonical JSONL and write split statistics.
    Ingest(Common),
    /// Train pair classifiers.
    Train(Common),
    /// Pairwise evaluation and score histograms on the test split.
    EvalPairwise(Common),
    /// Build WD and CD clusterings of the test split.
    Cluster(Common),
    /// Score clusterings against the gold chains.
    Score(Common),
    /// Every stage in order, then a manifest.
    RunAll(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Restrict to one scope; both when omitted.
    #[arg(long, value_enum)]
    scope: Option<ScopeArg>,
    /// Decision threshold overriding the configured one.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ScopeArg {
    Wd,
    Cd,
}

impl Common {
    fn scopes(&self) -> Vec<Scope> {
        match self.scope {
            Some(ScopeArg::Wd) => vec![Scope::Wd],
            Some(ScopeArg::Cd) => vec![Scope::Cd],
            None => SCOPES.to_vec(),
        }
    }

    fn pipeline(&self) -> evcoref::Result<Pipeline> {
        let mut config = PipelineConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(out) = &self.out {
            config.out = out.clone();
        }
        if let Some(jobs) = self.jobs {
            config.jobs = jobs;
        }
        if let Some(t) = self.threshold {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::Config(format!("--threshold must lie in [0, 1], got {t}")));
            }
        }
        Pipeline::new(config)
    }
}

fn run(command: &Command) -> evcoref::Result<()> {
    let (Command::Ingest(c)
    | Command::Train(c)
    | Command::EvalPairwise(c)
    | Command::Cluster(c)
    | Command::Score(c)
    | Command::RunAll(c)) = command;
    let pipeline = c.pipeline()?;
    let scopes = c.scopes();
    pipeline.in_pool(|| -> evcoref::Result<()> {
        match command {
            Command::Ingest(_) => {
                let report = pipeline.ingest()?;
                println!(
                    "ingested {} documents, {} mentions",
                    report.stats.documents, report.stats.mentions
                );
            }
            Command::Train(_) => pipeline.train(&scopes)?,
            Command::EvalPairwise(_) => pipeline.eval_pairwise(&scopes, c.threshold)?,
            Command::Cluster(_) => pipeline.cluster(&scopes, c.threshold)?,
            Command::Score(_) => {
                for (name, scores) in pipeline.score(&scopes)? {
                    println!("{name}: CoNLL F1 {:.2}", 100.0 * scores.conll());
                }
            }
            Command::RunAll(_) => {
                let manifest = pipeline.run_all()?;
                println!("wrote {} artifacts to {}", manifest.artifacts.len(), pipeline.config().out.display());
            }
        }
        Ok(())
    })?
}

fn exit_code(err: &Error) -> u8 {
    if err.is_numeric() {
        3
    } else if err.is_config() {
        1
    } else {
        2
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
