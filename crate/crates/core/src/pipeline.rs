//! Batch orchestration: metadata dump in, dataset out.
//!
//! Results are one JSONL line per package, in input order regardless
//! of worker scheduling, with no timestamps or run identifiers inside
//! the records; rerunning against an unchanged cache reproduces the
//! dataset byte for byte. Run metadata lives in a separate manifest
//! file next to the output.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{mpsc, Mutex};
use std::thread;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::candidates::CandidateSource;
use crate::classify::{DenyList, LinkCategory};
use crate::gateway::{Gateway, GatewayConfig, GatewayError};
use crate::ingest::{parse_package_record, MalformedRecord, PackageMetadata};
use crate::review::ReviewDecision;
use crate::validate::{
    apply_review_decision, resolve_package, ResolutionResult, ResolutionStatus, ResolveConfig,
    ReviewError,
};

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: PathBuf,
    pub output: PathBuf,
    pub review_out: PathBuf,
    pub review_in: Option<PathBuf>,
    pub cache_dir: PathBuf,
    pub offline: bool,
    pub denylist: Option<PathBuf>,
    pub concurrency: usize,
    pub rate_budget: Option<u32>,
    pub token: Option<String>,
}

impl RunConfig {
    pub fn new(
        input: impl Into<PathBuf>,
        output: impl Into<PathBuf>,
        review_out: impl Into<PathBuf>,
        cache_dir: impl Into<PathBuf>,
    ) -> RunConfig {
        RunConfig {
            input: input.into(),
            output: output.into(),
            review_out: review_out.into(),
            review_in: None,
            cache_dir: cache_dir.into(),
            offline: false,
            denylist: None,
            concurrency: 1,
            rate_budget: None,
            token: None,
        }
    }

    /// Stats summary path derived from the output path.
    pub fn stats_path(&self) -> PathBuf {
        self.output.with_extension("stats.json")
    }

    /// Run manifest path; the one file that may carry timestamps.
    pub fn manifest_path(&self) -> PathBuf {
        self.output.with_extension("manifest.json")
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{context}: {source}")]
    MalformedInput {
        context: String,
        #[source]
        source: MalformedRecord,
    },
    #[error("results line {line}: {message}")]
    MalformedResults { line: usize, message: String },
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

fn io_err(path: &Path, source: io::Error) -> PipelineError {
    PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Counts over one results file plus the explicit-link fraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub total: usize,
    pub status_counts: BTreeMap<String, usize>,
    pub category_counts: BTreeMap<String, usize>,
    pub explicit_valid_fraction: f64,
}

impl RunStats {
    pub fn from_results<'a>(results: impl IntoIterator<Item = &'a ResolutionResult>) -> RunStats {
        let mut status_counts: BTreeMap<String, usize> =
            ["resolved", "discarded", "needs_review", "unprocessed"]
                .into_iter()
                .map(|s| (s.to_string(), 0))
                .collect();
        let mut category_counts: BTreeMap<String, usize> = LinkCategory::ALL_TAGS
            .into_iter()
            .map(|t| (t.to_string(), 0))
            .collect();
        let mut total = 0usize;
        let mut explicit_valid = 0usize;
        for result in results {
            total += 1;
            let status = match result.status {
                ResolutionStatus::Resolved => "resolved",
                ResolutionStatus::Discarded => "discarded",
                ResolutionStatus::NeedsReview => "needs_review",
                ResolutionStatus::Unprocessed => "unprocessed",
            };
            *status_counts.get_mut(status).expect("known status") += 1;
            for link in &result.links {
                *category_counts.entry(link.category.clone()).or_insert(0) += 1;
            }
            if result.status == ResolutionStatus::Resolved
                && result.method == Some(CandidateSource::Explicit)
            {
                explicit_valid += 1;
            }
        }
        let explicit_valid_fraction = if total == 0 {
            0.0
        } else {
            explicit_valid as f64 / total as f64
        };
        RunStats {
            total,
            status_counts,
            category_counts,
            explicit_valid_fraction,
        }
    }

    pub fn render_text(&self) -> String {
        let mut out = format!("packages: {}\nstatus:\n", self.total);
        for (status, count) in &self.status_counts {
            out.push_str(&format!("  {status}: {count}\n"));
        }
        out.push_str("link categories:\n");
        for (category, count) in &self.category_counts {
            if *count > 0 {
                out.push_str(&format!("  {category}: {count}\n"));
            }
        }
        out.push_str(&format!(
            "explicit-valid fraction: {:.4}\n",
            self.explicit_valid_fraction
        ));
        out
    }
}

#[derive(Debug)]
pub struct BatchSummary {
    pub stats: RunStats,
    pub unprocessed: usize,
}

/// Resolves every package in the input and writes the dataset.
///
/// Output files are written whole-then-renamed, so a failed run never
/// leaves a truncated dataset behind. In offline mode a missing
/// fixture aborts the run with its request key.
pub fn run_batch(config: &RunConfig) -> Result<BatchSummary, PipelineError> {
    validate_config(config)?;
    let packages = read_packages(&config.input)?;
    let resolve_config = load_resolve_config(config)?;

    let mut gateway_config = GatewayConfig::new(&config.cache_dir);
    gateway_config.offline = config.offline;
    gateway_config.token = config.token.clone();
    gateway_config.rate_budget = config.rate_budget;
    let gateway = Gateway::open(gateway_config)?;

    run_batch_with_gateway(config, &packages, &resolve_config, &gateway)
}

fn validate_config(config: &RunConfig) -> Result<(), PipelineError> {
    if config.concurrency < 1 {
        return Err(PipelineError::Config("concurrency must be at least 1".into()));
    }
    if !config.input.exists() {
        return Err(PipelineError::Config(format!(
            "input {} does not exist",
            config.input.display()
        )));
    }
    Ok(())
}

fn load_resolve_config(config: &RunConfig) -> Result<ResolveConfig, PipelineError> {
    let denylist = match &config.denylist {
        Some(path) => DenyList::from_file(path).map_err(|e| io_err(path, e))?,
        None => DenyList::default(),
    };
    Ok(ResolveConfig { denylist })
}

fn run_batch_with_gateway(
    config: &RunConfig,
    packages: &[PackageMetadata],
    resolve_config: &ResolveConfig,
    gateway: &Gateway,
) -> Result<BatchSummary, PipelineError> {
    let results = resolve_all(packages, resolve_config, gateway, config.concurrency)?;
    write_outputs(config, &results)?;
    write_manifest(config, packages.len())?;
    let stats = RunStats::from_results(&results);
    let unprocessed = stats.status_counts["unprocessed"];
    Ok(BatchSummary { stats, unprocessed })
}

/// Worker pool over packages with a single ordering writer: workers
/// claim indices, the collector releases results in input order.
fn resolve_all(
    packages: &[PackageMetadata],
    resolve_config: &ResolveConfig,
    gateway: &Gateway,
    concurrency: usize,
) -> Result<Vec<ResolutionResult>, PipelineError> {
    let width = concurrency.clamp(1, packages.len().max(1));
    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let first_error: Mutex<Option<GatewayError>> = Mutex::new(None);
    let (tx, rx) = mpsc::channel::<(usize, ResolutionResult)>();

    let ordered = thread::scope(|scope| {
        for _ in 0..width {
            let tx = tx.clone();
            scope.spawn(|| {
                let tx = tx;
                loop {
                    if abort.load(Ordering::SeqCst) {
                        break;
                    }
                    let index = next.fetch_add(1, Ordering::SeqCst);
                    let Some(pkg) = packages.get(index) else { break };
                    match resolve_package(pkg, resolve_config, gateway) {
                        Ok(result) => {
                            if tx.send((index, result)).is_err() {
                                break;
                            }
                        }
                        Err(e) => {
                            let mut slot = first_error.lock().expect("error slot");
                            slot.get_or_insert(e);
                            abort.store(true, Ordering::SeqCst);
                            break;
                        }
                    }
                }
            });
        }
        drop(tx);

        // reorder buffer: release contiguous prefixes as they complete
        let mut buffer: BTreeMap<usize, ResolutionResult> = BTreeMap::new();
        let mut ordered: Vec<ResolutionResult> = Vec::with_capacity(packages.len());
        for (index, result) in rx {
            buffer.insert(index, result);
            while let Some(result) = buffer.remove(&ordered.len()) {
                ordered.push(result);
            }
        }
        ordered
    });

    if let Some(e) = first_error.into_inner().expect("error slot") {
        return Err(e.into());
    }
    Ok(ordered)
}

fn write_outputs(config: &RunConfig, results: &[ResolutionResult]) -> Result<(), PipelineError> {
    let mut lines = String::new();
    for result in results {
        lines.push_str(&serde_json::to_string(result).expect("result serializes"));
        lines.push('\n');
    }
    write_atomic(&config.output, lines.as_bytes())?;

    let mut review_lines = String::new();
    for item in results.iter().flat_map(|r| r.pending_items()) {
        review_lines.push_str(&serde_json::to_string(item).expect("item serializes"));
        review_lines.push('\n');
    }
    write_atomic(&config.review_out, review_lines.as_bytes())?;

    let stats = RunStats::from_results(results);
    let mut stats_json = serde_json::to_string_pretty(&stats).expect("stats serialize");
    stats_json.push('\n');
    write_atomic(&config.stats_path(), stats_json.as_bytes())?;
    Ok(())
}

fn write_manifest(config: &RunConfig, package_count: usize) -> Result<(), PipelineError> {
    let manifest = serde_json::json!({
        "generated_at": chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        "input": config.input.display().to_string(),
        "packages": package_count,
        "offline": config.offline,
        "concurrency": config.concurrency,
    });
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    write_atomic(&config.manifest_path(), text.as_bytes())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
    let mut file = fs::File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
    file.write_all(bytes).map_err(|e| io_err(&tmp, e))?;
    file.flush().map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

/// Reads a metadata dump: a JSONL file, or a directory of per-package
/// documents taken in file-name order.
pub fn read_packages(input: &Path) -> Result<Vec<PackageMetadata>, PipelineError> {
    if input.is_dir() {
        let mut paths: Vec<PathBuf> = fs::read_dir(input)
            .map_err(|e| io_err(input, e))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        paths.sort();
        paths
            .iter()
            .map(|path| {
                let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
                parse_package_record(&text).map_err(|source| PipelineError::MalformedInput {
                    context: path.display().to_string(),
                    source,
                })
            })
            .collect()
    } else {
        let text = fs::read_to_string(input).map_err(|e| io_err(input, e))?;
        text.lines()
            .enumerate()
            .filter(|(_, line)| !line.trim().is_empty())
            .map(|(i, line)| {
                parse_package_record(line).map_err(|source| PipelineError::MalformedInput {
                    context: format!("{} line {}", input.display(), i + 1),
                    source,
                })
            })
            .collect()
    }
}

/// Reads a results file back, one record per line.
pub fn read_results(path: &Path) -> Result<Vec<ResolutionResult>, PipelineError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| {
            serde_json::from_str(line).map_err(|e| PipelineError::MalformedResults {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

#[derive(Debug)]
pub struct MergeSummary {
    pub applied: usize,
    pub warnings: Vec<String>,
    pub stats: RunStats,
}

/// Applies recorded review decisions to an existing results file.
///
/// Untouched results are copied verbatim; decisions that reference an
/// unknown package or item produce warnings, not failures. The review
/// queue is rewritten with whatever is still pending.
pub fn merge_reviews(config: &RunConfig) -> Result<MergeSummary, PipelineError> {
    let decisions_path = config.review_in.as_ref().ok_or_else(|| {
        PipelineError::Config("merge requires a review-in decisions file".into())
    })?;
    let mut results = read_results(&config.output)?;
    let text = fs::read_to_string(decisions_path).map_err(|e| io_err(decisions_path, e))?;

    let mut warnings = Vec::new();
    let mut applied = 0usize;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let decision: ReviewDecision = match serde_json::from_str(line) {
            Ok(d) => d,
            Err(e) => {
                warnings.push(format!("decision line {}: unparseable: {e}", i + 1));
                continue;
            }
        };
        let Some(result) = results.iter_mut().find(|r| r.package == decision.package) else {
            warnings.push(format!(
                "decision line {}: unknown package {:?}",
                i + 1,
                decision.package
            ));
            continue;
        };
        match apply_review_decision(result, &decision) {
            Ok(updated) => {
                applied += 1;
                *result = updated;
            }
            Err(ReviewError::UnknownReviewItem { package, item_id }) => warnings.push(format!(
                "decision line {}: package {package:?} has no review item {item_id:?}",
                i + 1
            )),
        }
    }

    write_outputs(config, &results)?;
    let stats = RunStats::from_results(&results);
    Ok(MergeSummary {
        applied,
        warnings,
        stats,
    })
}

/// Recomputes stats from a results file on disk.
pub fn report_stats(results_path: &Path) -> Result<RunStats, PipelineError> {
    let results = read_results(results_path)?;
    Ok(RunStats::from_results(&results))
}
