use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use repolink::pipeline::{merge_reviews, report_stats, run_batch, RunConfig};

/// Recover canonical source-code repositories from package registry
/// metadata.
#[derive(Debug, Parser)]
#[command(name = "repolink", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Resolve a metadata dump into per-package results, a review
    /// queue, and a stats summary
    Resolve(ResolveArgs),
    /// Summarize an existing results file
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
struct ResolveArgs {
    /// Metadata dump: JSONL file or directory of per-package documents
    #[arg(long)]
    input: PathBuf,

    /// Results file to write (JSONL, one record per package)
    #[arg(long)]
    output: PathBuf,

    /// Review queue to write (JSONL, one pending item per line)
    #[arg(long = "review-out")]
    review_out: PathBuf,

    /// Review decisions to apply to an existing results file instead
    /// of resolving
    #[arg(long = "review-in")]
    review_in: Option<PathBuf>,

    /// Response cache directory (also the offline fixture store)
    #[arg(long)]
    cache: PathBuf,

    /// Answer everything from the cache; a miss aborts the run
    #[arg(long)]
    offline: bool,

    /// Denylist file: one generic host per line, '#' comments allowed
    #[arg(long)]
    denylist: Option<PathBuf>,

    /// Packages resolved in parallel
    #[arg(long, default_value_t = 1)]
    concurrency: usize,

    /// Request budget per hour (defaults to the host's published limit)
    #[arg(long = "rate-limit")]
    rate_limit: Option<u32>,
}

#[derive(Debug, Args)]
struct StatsArgs {
    /// Results file produced by `resolve`
    #[arg(long)]
    results: PathBuf,

    /// Emit the machine-readable summary instead of text
    #[arg(long)]
    json: bool,
}

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_UNPROCESSED: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::from(EXIT_OK);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_ERROR);
        }
    };

    match cli.command {
        Command::Resolve(args) => resolve(args),
        Command::Stats(args) => stats(args),
    }
}

fn resolve(args: ResolveArgs) -> ExitCode {
    let mut config = RunConfig::new(args.input, args.output, args.review_out, args.cache);
    config.review_in = args.review_in;
    config.offline = args.offline;
    config.denylist = args.denylist;
    config.concurrency = args.concurrency;
    config.rate_budget = args.rate_limit;
    config.token = std::env::var("GITHUB_TOKEN").ok().filter(|t| !t.is_empty());

    if config.concurrency < 1 {
        eprintln!("repolink: --concurrency must be at least 1");
        return ExitCode::from(EXIT_ERROR);
    }

    if config.review_in.is_some() {
        match merge_reviews(&config) {
            Ok(summary) => {
                for warning in &summary.warnings {
                    eprintln!("repolink: warning: {warning}");
                }
                eprintln!("repolink: applied {} review decision(s)", summary.applied);
                print!("{}", summary.stats.render_text());
                ExitCode::from(EXIT_OK)
            }
            Err(e) => {
                eprintln!("repolink: {e}");
                ExitCode::from(EXIT_ERROR)
            }
        }
    } else {
        match run_batch(&config) {
            Ok(summary) => {
                print!("{}", summary.stats.render_text());
                if summary.unprocessed > 0 {
                    eprintln!(
                        "repolink: {} package(s) unprocessed; rerun with the same cache to retry",
                        summary.unprocessed
                    );
                    ExitCode::from(EXIT_UNPROCESSED)
                } else {
                    ExitCode::from(EXIT_OK)
                }
            }
            Err(e) => {
                eprintln!("repolink: {e}");
                ExitCode::from(EXIT_ERROR)
            }
        }
    }
}

fn stats(args: StatsArgs) -> ExitCode {
    match report_stats(&args.results) {
        Ok(stats) => {
            if args.json {
                println!("{}", serde_json::to_string_pretty(&stats).expect("stats serialize"));
            } else {
                print!("{}", stats.render_text());
            }
            ExitCode::from(EXIT_OK)
        }
        Err(e) => {
            eprintln!("repolink: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
