//! Experiment runs: instance generation, prompting, backend calls, scoring
//! and log persistence.

mod backend;
mod probe;
mod summary;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use futures::stream::{self, StreamExt};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{classify, extract_answer, ErrorCategory, ExtractedAnswer, Scored};
use crate::prompting::{build_prompt, PromptBundle, PromptError, PromptStyle};
use crate::taskgen::{
    batch_file_name, default_grid, derive_seed, generate_batch, Answer, GenParams, PairedInstance, Rendering,
    TaskFamily, TaskGenError,
};

pub use backend::{
    approx_tokens, parse_chat_response, Backend, BackendError, BackendSpec, Capabilities, Fixture, FixtureEntry,
    Reply, Request, RetryPolicy,
};
pub use probe::{memorisation_min_k, probe, verbatim_recovery, ProbeRecord};
pub use summary::{score, summaries_to_csv, token_table, Correlation, RunSummary, Scoreboard};

pub const LOG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("fixture missing: {0}")]
    FixtureMissing(String),
    #[error("{0}: {1}")]
    Io(PathBuf, #[source] std::io::Error),
    #[error("{path}: schema version {found}, expected {expected}")]
    SchemaVersionMismatch { path: PathBuf, found: u32, expected: u32 },
    #[error("{0}: {1}")]
    Parse(PathBuf, String),
    #[error(transparent)]
    Generation(#[from] TaskGenError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("no records to score")]
    EmptyInput,
    #[error("backend does not report token log-likelihoods")]
    CapabilityMissing,
}

fn d_repeats() -> usize {
    3
}
fn d_batch_size() -> usize {
    30
}
fn d_styles() -> Vec<PromptStyle> {
    vec![PromptStyle::Cot]
}
fn d_renderings() -> Vec<Rendering> {
    Rendering::BOTH.to_vec()
}
fn d_in_flight() -> usize {
    8
}
fn d_output_dir() -> PathBuf {
    PathBuf::from(".")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub backend: BackendSpec,
    /// Grid points; each carries its family and parameters.
    pub grid: Vec<GenParams>,
    #[serde(default = "d_styles")]
    pub styles: Vec<PromptStyle>,
    #[serde(default = "d_renderings")]
    pub renderings: Vec<Rendering>,
    #[serde(default = "d_repeats")]
    pub repeats: usize,
    #[serde(default = "d_batch_size")]
    pub batch_size: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "d_in_flight")]
    pub max_in_flight: usize,
    /// Logs go to `<output_dir>/logs/<family>/`.
    #[serde(default = "d_output_dir")]
    pub output_dir: PathBuf,
}

impl RunConfig {
    /// Default grids of `families`, three repeats of thirty instances.
    pub fn protocol(backend: BackendSpec, families: &[TaskFamily], output_dir: impl Into<PathBuf>) -> Self {
        RunConfig {
            backend,
            grid: families.iter().flat_map(|f| default_grid(*f)).collect(),
            styles: d_styles(),
            renderings: d_renderings(),
            repeats: d_repeats(),
            batch_size: d_batch_size(),
            seed: 0,
            max_in_flight: d_in_flight(),
            output_dir: output_dir.into(),
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::Config(m.into()));
        if self.repeats == 0 {
            return bad("repeats must be at least 1");
        }
        if self.batch_size == 0 {
            return bad("batch size must be at least 1");
        }
        if self.max_in_flight == 0 {
            return bad("at least one request must be allowed in flight");
        }
        if self.grid.is_empty() || self.styles.is_empty() || self.renderings.is_empty() {
            return bad("grid, styles and renderings must be nonempty");
        }
        if self.styles.contains(&PromptStyle::MemorisationProbe) {
            return bad("memorisation probes run on corpus entries, not task grids");
        }
        let names: BTreeSet<String> = self.grid.iter().map(|p| format!("{}/{}", p.family, p.stem())).collect();
        if names.len() != self.grid.len() {
            return bad("grid points must be distinct");
        }
        Ok(())
    }

    pub fn log_dir(&self) -> PathBuf {
        self.output_dir.join("logs")
    }

    /// Path of the log for `params` and 1-based `batch`.
    pub fn log_path(&self, params: &GenParams, batch: usize) -> PathBuf {
        self.log_dir().join(params.family.slug()).join(batch_file_name(params, self.batch_size, batch))
    }

    /// Seed of the instances in `batch` (1-based) at `params`.
    pub fn batch_seed(&self, params: &GenParams, batch: usize) -> u64 {
        let key = format!("{}/{}", params.family, params.stem());
        derive_seed(self.seed, &[fnv1a(key.as_bytes()), batch as u64])
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ *b as u64).wrapping_mul(0x0100_0000_01b3))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance_id: String,
    pub family: TaskFamily,
    pub control_value: usize,
    /// 1-based batch, one per repeat.
    pub batch: usize,
    pub rendering: Rendering,
    pub style: PromptStyle,
    pub prompt: String,
    pub response: String,
    pub input_tokens: Option<u64>,
    pub output_tokens: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token_logprobs: Option<Vec<f64>>,
    pub latency_ms: u64,
    pub ground_truth: Answer,
    pub extracted: Option<ExtractedAnswer>,
    pub correct: bool,
    pub error: Option<ErrorCategory>,
}

impl Scored for RunRecord {
    fn truth(&self) -> &Answer {
        &self.ground_truth
    }
    fn predicted(&self) -> Option<&Answer> {
        self.extracted.as_ref().map(|e| &e.value)
    }
}

impl RunRecord {
    fn sort_key(&self) -> (&str, &'static str, &'static str) {
        (&self.instance_id, rendering_name(self.rendering), self.style.name())
    }
}

fn rendering_name(r: Rendering) -> &'static str {
    match r {
        Rendering::Synthetic => "synthetic",
        Rendering::Naturalistic => "naturalistic",
    }
}

/// Builds a record from a reply (or a failed request).
pub fn score_reply(
    instance: &PairedInstance,
    bundle: &PromptBundle,
    rendering: Rendering,
    reply: Result<Reply, BackendError>,
    latency_ms: u64,
) -> RunRecord {
    let truth = instance.truth(rendering).expect("bundle built for an existing rendering").clone();
    let (reply, failed) = match reply {
        Ok(r) => (r, false),
        Err(e) => {
            tracing::warn!(instance = %instance.id, "backend error: {e}");
            (Reply::default(), true)
        }
    };
    let extracted = if failed {
        None
    } else {
        bundle.answer_format.and_then(|k| extract_answer(&reply.text, k))
    };
    let predicted = extracted.as_ref().map(|e| &e.value);
    let error = if failed { Some(ErrorCategory::BackendError) } else { classify(predicted, &truth) };
    RunRecord {
        instance_id: instance.id.clone(),
        family: instance.family,
        control_value: instance.params.control_value(),
        batch: 0,
        rendering,
        style: bundle.style,
        prompt: bundle.user_text.clone(),
        response: reply.text,
        input_tokens: reply.input_tokens,
        output_tokens: reply.output_tokens,
        token_logprobs: reply.token_logprobs,
        latency_ms,
        correct: error.is_none(),
        ground_truth: truth,
        extracted,
        error,
    }
}

/// One persisted batch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogFile {
    pub schema_version: u32,
    pub config: RunConfig,
    pub params: GenParams,
    pub batch: usize,
    pub records: Vec<RunRecord>,
}

/// Writes a batch log atomically (temporary file, then rename).
pub fn persist(config: &RunConfig, params: &GenParams, batch: usize, records: &[RunRecord]) -> Result<PathBuf, HarnessError> {
    let path = config.log_path(params, batch);
    let log = LogFile {
        schema_version: LOG_SCHEMA_VERSION,
        config: config.clone(),
        params: params.clone(),
        batch,
        records: records.to_vec(),
    };
    write_atomic(&path, &serde_json::to_string_pretty(&log).expect("log serialises"))?;
    Ok(path)
}

pub(crate) fn write_atomic(path: &Path, text: &str) -> Result<(), HarnessError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::Io(dir.to_path_buf(), e))?;
    let tmp = path.with_extension("json.tmp");
    std::fs::write(&tmp, text).map_err(|e| HarnessError::Io(tmp.clone(), e))?;
    std::fs::rename(&tmp, path).map_err(|e| HarnessError::Io(path.to_path_buf(), e))
}

pub fn load(path: &Path) -> Result<LogFile, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io(path.to_path_buf(), e))?;
    let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| HarnessError::Parse(path.to_path_buf(), e.to_string()))?;
    let found = v["schema_version"].as_u64().unwrap_or(0) as u32;
    if found != LOG_SCHEMA_VERSION {
        return Err(HarnessError::SchemaVersionMismatch { path: path.to_path_buf(), found, expected: LOG_SCHEMA_VERSION });
    }
    serde_json::from_value(v).map_err(|e| HarnessError::Parse(path.to_path_buf(), e.to_string()))
}

/// Every log file under `dir`, in path order.
pub fn load_dir(dir: &Path) -> Result<Vec<LogFile>, HarnessError> {
    fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), HarnessError> {
        let entries = std::fs::read_dir(dir).map_err(|e| HarnessError::Io(dir.to_path_buf(), e))?;
        for entry in entries {
            let path = entry.map_err(|e| HarnessError::Io(dir.to_path_buf(), e))?.path();
            if path.is_dir() {
                walk(&path, out)?;
            } else if path.extension().is_some_and(|e| e == "json") {
                out.push(path);
            }
        }
        Ok(())
    }
    let mut paths = Vec::new();
    walk(dir, &mut paths)?;
    paths.sort();
    paths.iter().map(|p| load(p)).collect()
}

#[derive(Debug, Default)]
pub struct RunOutcome {
    /// All records, sorted by instance id, rendering and style.
    pub records: Vec<RunRecord>,
    pub written: Vec<PathBuf>,
    /// Batches whose complete log already existed and was reused.
    pub resumed: Vec<PathBuf>,
    /// Largest number of requests observed in flight.
    pub peak_in_flight: usize,
}

fn failed_marker(path: &Path) -> PathBuf {
    path.with_extension("failed")
}

/// Runs every grid point, repeat, rendering and applicable style. Batches
/// whose log already exists under the same configuration are loaded instead
/// of re-run.
pub async fn run(config: &RunConfig) -> Result<RunOutcome, HarnessError> {
    config.validate()?;
    let backend = Backend::from_spec(&config.backend)?;
    run_with(config, &backend).await
}

pub async fn run_with(config: &RunConfig, backend: &Backend) -> Result<RunOutcome, HarnessError> {
    config.validate()?;
    let mut outcome = RunOutcome::default();
    for params in &config.grid {
        for batch in 1..=config.repeats {
            let path = config.log_path(params, batch);
            if path.exists() {
                let log = load(&path)?;
                if !same_setup(&log.config, config) {
                    return Err(HarnessError::Config(format!(
                        "{} was written by a different configuration",
                        path.display()
                    )));
                }
                outcome.records.extend(log.records);
                outcome.resumed.push(path);
                continue;
            }
            match run_batch(config, backend, params, batch, &mut outcome.peak_in_flight).await {
                Ok(records) => {
                    let written = persist(config, params, batch, &records)?;
                    let _ = std::fs::remove_file(failed_marker(&written));
                    outcome.records.extend(records);
                    outcome.written.push(written);
                }
                Err(e) => {
                    let marker = failed_marker(&path);
                    if let Some(dir) = marker.parent() {
                        let _ = std::fs::create_dir_all(dir);
                    }
                    let _ = std::fs::write(&marker, e.to_string());
                    return Err(e);
                }
            }
        }
    }
    outcome.records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    Ok(outcome)
}

/// Settings that change what a batch log contains.
fn same_setup(a: &RunConfig, b: &RunConfig) -> bool {
    a.backend == b.backend
        && a.styles == b.styles
        && a.renderings == b.renderings
        && a.batch_size == b.batch_size
        && a.seed == b.seed
}

struct Job {
    instance: PairedInstance,
    rendering: Rendering,
    bundle: PromptBundle,
}

/// Prompts for one batch: every instance, rendering and applicable style.
pub fn batch_prompts(config: &RunConfig, params: &GenParams, batch: usize) -> Result<Vec<(PairedInstance, Rendering, PromptBundle)>, HarnessError> {
    let instances = generate_batch(params, config.batch_size, config.batch_seed(params, batch))?;
    let mut out = Vec::new();
    for inst in instances {
        for &rendering in &config.renderings {
            for &style in &config.styles {
                if style.applies_to(&inst, rendering) {
                    let bundle = build_prompt(&inst, rendering, style)?;
                    out.push((inst.clone(), rendering, bundle));
                }
            }
        }
    }
    Ok(out)
}

async fn run_batch(
    config: &RunConfig,
    backend: &Backend,
    params: &GenParams,
    batch: usize,
    peak: &mut usize,
) -> Result<Vec<RunRecord>, HarnessError> {
    let jobs: Vec<Job> = batch_prompts(config, params, batch)?
        .into_iter()
        .map(|(instance, rendering, bundle)| Job { instance, rendering, bundle })
        .collect();
    let in_flight = AtomicUsize::new(0);
    let max_seen = AtomicUsize::new(0);
    let results: Vec<Result<RunRecord, HarnessError>> = stream::iter(jobs.iter())
        .map(|job| {
            let (in_flight, max_seen) = (&in_flight, &max_seen);
            async move {
                let now = in_flight.fetch_add(1, Ordering::SeqCst) + 1;
                max_seen.fetch_max(now, Ordering::SeqCst);
                let truth = job.instance.truth(job.rendering).expect("rendering exists");
                let req = Request {
                    instance_id: &job.instance.id,
                    rendering: job.rendering,
                    style: job.bundle.style,
                    prompt: &job.bundle.user_text,
                    truth,
                };
                let start = Instant::now();
                let reply = backend.complete(&req).await;
                let latency = start.elapsed().as_millis() as u64;
                in_flight.fetch_sub(1, Ordering::SeqCst);
                if let Err(BackendError::FixtureMissing(m)) = &reply {
                    return Err(HarnessError::FixtureMissing(m.clone()));
                }
                let mut rec = score_reply(&job.instance, &job.bundle, job.rendering, reply, latency);
                rec.batch = batch;
                Ok(rec)
            }
        })
        .buffer_unordered(config.max_in_flight)
        .collect()
        .await;
    *peak = (*peak).max(max_seen.load(Ordering::SeqCst));
    let mut records = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    Ok(records)
}
