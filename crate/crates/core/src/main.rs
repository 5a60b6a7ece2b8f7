use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use tracing::info;

use codesim::algolib::{classic_corpus, corpus, AlgorithmEntry};
use codesim::harness::{
    self, load_dir, score, summaries_to_csv, token_table, BackendSpec, HarnessError, RunConfig, RunRecord, Scoreboard,
};
use codesim::prompting::PromptStyle;
use codesim::taskgen::{
    batch_file_name, default_grid, generate_batch, GenParams, InstanceBatch, Rendering, TaskFamily, BATCH_SCHEMA_VERSION,
};

#[derive(Parser)]
#[command(name = "codesim", version, about = "Generate paired reasoning tasks and evaluate language models on them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write instance batches as JSON.
    Generate(Overrides),
    /// Query a backend over the grid and persist per-batch logs.
    Run(Overrides),
    /// Recompute summaries from a log directory.
    Score {
        logs: PathBuf,
        /// Write the scoreboard here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit plot-ready CSV from a log directory.
    Report {
        logs: PathBuf,
        /// Directory for accuracy.csv, tokens.csv and correlations.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the algorithm inventory as JSON.
    Corpus {
        /// Include each entry's source text.
        #[arg(long)]
        source: bool,
    },
}

#[derive(Args, Clone, Debug, Default)]
struct Overrides {
    /// TOML file mirroring the run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Restrict the grid to one family (its default grid unless --grid is given).
    #[arg(long)]
    family: Option<TaskFamily>,
    /// Control values: `a..b` (inclusive), `a..b:step` or `a,b,c`.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// `perfect-oracle` or `scripted:<fixture.json>`.
    #[arg(long)]
    backend: Option<String>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Instances per batch.
    #[arg(long)]
    instances: Option<usize>,
    /// Batches per grid point (repeats).
    #[arg(long)]
    batches: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    styles: Option<Vec<PromptStyle>>,
    #[arg(long, value_delimiter = ',')]
    renderings: Option<Vec<Rendering>>,
    #[arg(long)]
    max_in_flight: Option<usize>,
}

/// On-disk configuration. Every field is optional; `families` expands to
/// default grids when `grid` is absent.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    backend: Option<BackendSpec>,
    grid: Option<Vec<GenParams>>,
    families: Option<Vec<TaskFamily>>,
    styles: Option<Vec<PromptStyle>>,
    renderings: Option<Vec<Rendering>>,
    repeats: Option<usize>,
    batch_size: Option<usize>,
    seed: Option<u64>,
    max_in_flight: Option<usize>,
    output_dir: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error("{0}: {1}")]
    Io(PathBuf, std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Parses `10..50`, `10..50:5` or `10,20,30`. A bare range steps by the
/// spacing of the family's default grid.
fn parse_grid(spec: &str, family: TaskFamily) -> Result<Vec<usize>, CliError> {
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| usage(format!("bad grid value `{s}`")));
    let values = if let Some((lo, rest)) = spec.split_once("..") {
        let (hi, step) = match rest.split_once(':') {
            Some((hi, step)) => (num(hi)?, num(step)?),
            None => (num(rest)?, default_step(family)),
        };
        let lo = num(lo)?;
        if step == 0 || lo > hi {
            return Err(usage(format!("empty grid `{spec}`")));
        }
        (lo..=hi).step_by(step).collect()
    } else {
        spec.split(',').map(num).collect::<Result<Vec<_>, _>>()?
    };
    if values.is_empty() {
        return Err(usage(format!("empty grid `{spec}`")));
    }
    Ok(values)
}

fn default_step(family: TaskFamily) -> usize {
    let distinct: Vec<usize> =
        default_grid(family).iter().map(GenParams::control_value).collect::<BTreeSet<_>>().into_iter().collect();
    distinct.windows(2).map(|w| w[1] - w[0]).min().unwrap_or(1).max(1)
}

fn parse_backend(s: &str) -> Result<BackendSpec, CliError> {
    match s {
        "perfect-oracle" | "perfect_oracle" | "oracle" => Ok(BackendSpec::PerfectOracle),
        _ => match s.split_once(':') {
            Some(("scripted", path)) if !path.is_empty() => Ok(BackendSpec::Scripted { fixture: path.into() }),
            _ => Err(usage(format!(
                "unknown backend `{s}` (use perfect-oracle, scripted:<file>, or an http_chat backend in the config file)"
            ))),
        },
    }
}

fn read_file_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Defaults, then the config file, then command-line flags.
fn resolve(o: &Overrides, generating: bool) -> Result<RunConfig, CliError> {
    let file = match &o.config {
        Some(p) => read_file_config(p)?,
        None => FileConfig::default(),
    };
    // relative paths in a config file are relative to the file
    let base = o.config.as_deref().and_then(Path::parent).unwrap_or(Path::new(""));
    let backend = match (&o.backend, file.backend) {
        (Some(s), _) => parse_backend(s)?,
        (None, Some(BackendSpec::Scripted { fixture })) => BackendSpec::Scripted { fixture: base.join(fixture) },
        (None, Some(b)) => b,
        (None, None) if generating => BackendSpec::PerfectOracle,
        (None, None) => return Err(usage("no backend given (--backend or [backend] in the config file)")),
    };
    let mut grid = match (file.grid, file.families) {
        (Some(g), _) => g,
        (None, Some(fs)) => fs.iter().flat_map(|f| default_grid(*f)).collect(),
        (None, None) => Vec::new(),
    };
    if let Some(family) = o.family {
        let own: Vec<GenParams> = grid.iter().filter(|p| p.family == family).cloned().collect();
        grid = if own.is_empty() { default_grid(family) } else { own };
    }
    if let Some(spec) = &o.grid {
        let family = match o.family {
            Some(f) => f,
            None => {
                let fams: BTreeSet<&str> = grid.iter().map(|p| p.family.slug()).collect();
                match grid.first() {
                    Some(p) if fams.len() == 1 => p.family,
                    _ => return Err(usage("--grid needs --family unless the config has exactly one family")),
                }
            }
        };
        let template = grid.first().cloned().unwrap_or_else(|| GenParams::new(family));
        grid = parse_grid(spec, family)?
            .into_iter()
            .map(|v| {
                let mut p = template.clone();
                p.set_control_value(v);
                p
            })
            .collect();
    }
    if grid.is_empty() {
        return Err(usage("empty grid (give --family or a grid in the config file)"));
    }
    let has_file = o.config.is_some();
    let mut config = RunConfig::protocol(backend, &[], PathBuf::from("."));
    config.grid = grid;
    // a one-off `generate` writes a single batch per point unless told otherwise
    if generating && !has_file {
        config.repeats = 1;
    }
    macro_rules! layer {
        ($field:ident, $file:expr, $flag:expr) => {
            if let Some(v) = $file {
                config.$field = v;
            }
            if let Some(v) = $flag.clone() {
                config.$field = v;
            }
        };
    }
    layer!(styles, file.styles, o.styles);
    layer!(renderings, file.renderings, o.renderings);
    layer!(repeats, file.repeats, o.batches);
    layer!(batch_size, file.batch_size, o.instances);
    layer!(seed, file.seed, o.seed);
    layer!(max_in_flight, file.max_in_flight, o.max_in_flight);
    layer!(output_dir, file.output_dir.map(|d| base.join(d)), o.output_dir);
    config.validate().map_err(|e| match e {
        HarnessError::Config(m) => usage(m),
        other => other.into(),
    })?;
    Ok(config)
}

fn generate(o: &Overrides) -> Result<(), CliError> {
    let config = resolve(o, true)?;
    let mut written = 0;
    for params in &config.grid {
        for batch in 1..=config.repeats {
            let instances = generate_batch(params, config.batch_size, config.batch_seed(params, batch))
                .map_err(|e| usage(format!("{}: {e}", params.stem())))?;
            let doc = InstanceBatch {
                schema_version: BATCH_SCHEMA_VERSION,
                family: params.family,
                params: params.clone(),
                batch,
                instances,
            };
            let path = config
                .output_dir
                .join("instances")
                .join(params.family.slug())
                .join(batch_file_name(params, config.batch_size, batch));
            write(&path, &serde_json::to_string_pretty(&doc).expect("batch serialises"))?;
            info!(path = %path.display(), "wrote batch");
            written += 1;
        }
    }
    println!("wrote {written} batch files under {}", config.output_dir.join("instances").display());
    Ok(())
}

async fn run(o: &Overrides) -> Result<(), CliError> {
    let config = resolve(o, false)?;
    let outcome = harness::run(&config).await?;
    let correct = outcome.records.iter().filter(|r| r.correct).count();
    println!(
        "{} records ({} correct), {} batch logs written, {} resumed, under {}",
        outcome.records.len(),
        correct,
        outcome.written.len(),
        outcome.resumed.len(),
        config.log_dir().display()
    );
    Ok(())
}

fn records(logs: &Path) -> Result<Vec<RunRecord>, CliError> {
    if !logs.is_dir() {
        return Err(usage(format!("{} is not a directory", logs.display())));
    }
    let files = load_dir(logs)?;
    Ok(files.into_iter().flat_map(|f| f.records).collect())
}

fn scoreboard(logs: &Path) -> Result<(Vec<RunRecord>, Scoreboard), CliError> {
    let records = records(logs)?;
    let board = score(&records).map_err(|e| match e {
        HarnessError::EmptyInput => usage(format!("no log records under {}", logs.display())),
        other => other.into(),
    })?;
    Ok((records, board))
}

/// Prints to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}").and_then(|_| out.flush());
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.to_path_buf(), e))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn score_cmd(logs: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let (_, board) = scoreboard(logs)?;
    let json = serde_json::to_string_pretty(&board).expect("scoreboard serialises");
    match out {
        Some(p) => write(p, &json),
        None => {
            emit(&json);
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct CorrelationRow<'a> {
    family: &'a str,
    style: &'a str,
    points: usize,
    pearson: Option<f64>,
}

fn report(logs: &Path, out: &Path) -> Result<(), CliError> {
    let (records, board) = scoreboard(logs)?;
    write(&out.join("accuracy.csv"), &summaries_to_csv(&board.summaries)?)?;
    write(&out.join("tokens.csv"), &token_table(&records)?)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for c in &board.correlations {
        w.serialize(CorrelationRow { family: c.family.slug(), style: c.style.name(), points: c.control_values.len(), pearson: c.pearson })
            .map_err(|e| CliError::Io(out.join("correlations.csv"), e.into()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(out.join("correlations.csv"), e.into_error()))?;
    write(&out.join("correlations.csv"), &String::from_utf8(bytes).expect("csv is utf-8"))?;
    println!("wrote accuracy.csv, tokens.csv and correlations.csv to {}", out.display());
    Ok(())
}

#[derive(Serialize)]
struct InventoryItem<'a> {
    group: &'static str,
    #[serde(flatten)]
    entry: &'a AlgorithmEntry,
    lines: usize,
}

fn corpus_cmd(with_source: bool) {
    let items: Vec<serde_json::Value> = corpus()
        .iter()
        .map(|e| ("sorting", e))
        .chain(classic_corpus().iter().map(|e| ("classic", e)))
        .map(|(group, entry)| {
            let mut v = serde_json::to_value(InventoryItem { group, entry, lines: entry.line_count() }).expect("entry serialises");
            if !with_source {
                v.as_object_mut().expect("entry is an object").remove("source_text");
            }
            v
        })
        .collect();
    emit(&serde_json::to_string_pretty(&items).expect("inventory serialises"));
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "warn".into()))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate(o) => generate(o),
        Command::Run(o) => match tokio::runtime::Runtime::new() {
            Ok(rt) => rt.block_on(run(o)),
            Err(e) => Err(CliError::Io(PathBuf::from("tokio runtime"), e)),
        },
        Command::Score { logs, out } => score_cmd(logs, out.as_deref()),
        Command::Report { logs, out } => report(logs, out),
        Command::Corpus { source } => {
            corpus_cmd(*source);
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
