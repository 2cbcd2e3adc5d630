//! `g2l` command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data validation error, 3 some
//! items failed (primary output written, failures in a sidecar).

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use g2l::analysis::{count_table_from_sweep, export_heatmap, sweep, HeatmapFormat};
use g2l::features::{
    aggregate_kmeans, aggregate_mean, dataset_divergence, load_vectors, write_vectors, Dataset,
    VectorFormat, DEFAULT_EPSILON,
};
use g2l::labeling::{count_policies, count_policies_by_length, label_dataset, parse_policy};
use g2l::synth::{generate, outlier_scenario, ClusterSpec};
use g2l::{AnchorSet, Metric};
use serde::Serialize;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_PARTIAL: i32 = 3;

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "g2l",
    version,
    about = "Geometric pseudo-labels from simplex content"
)]
pub struct Cli {
    /// Worker threads for parallel stages.
    #[arg(long, global = true, env = "G2L_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "lowercase")]
pub enum Command {
    /// Build an anchor set from named source vector files.
    Aggregate(AggregateArgs),
    /// Pseudo-label target vectors under a policy.
    Label(LabelArgs),
    /// Label under every policy of a dimension and export entropy heatmaps.
    Sweep(SweepArgs),
    /// KL divergence between the normalized mean vectors of two datasets.
    Divergence(DivergenceArgs),
    /// Generate seeded Gaussian cluster data.
    Synth(SynthArgs),
    /// Print policy counts per label length.
    Count(CountArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatArg {
    Csv,
    Jsonl,
}

impl From<FormatArg> for VectorFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => VectorFormat::Csv,
            FormatArg::Jsonl => VectorFormat::Jsonl,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Mean,
    Kmeans,
}

#[derive(Debug, Args, Serialize)]
pub struct AggregateArgs {
    /// Source as NAME=PATH; repeat for each source.
    #[arg(long = "source", required = true)]
    pub sources: Vec<String>,
    #[arg(long, value_enum, default_value = "mean")]
    pub method: MethodArg,
    /// Clusters per source for k-means.
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Fraction of each source sampled for the mean.
    #[arg(long, default_value_t = 1.0)]
    pub fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub max_iters: usize,
    #[arg(long, default_value = "euclidean")]
    pub metric: String,
    /// Input format; inferred from each file extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct LabelArgs {
    #[arg(long)]
    pub anchors: PathBuf,
    #[arg(long)]
    pub targets: PathBuf,
    #[arg(long)]
    pub policy: String,
    /// Overrides the metric stored in the anchor file.
    #[arg(long)]
    pub metric: Option<String>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long)]
    pub anchors: PathBuf,
    #[arg(long)]
    pub targets: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub d: usize,
    #[arg(long)]
    pub metric: Option<String>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Output prefix; writes PREFIX.csv, PREFIX.policies.csv, PREFIX.pgm and
    /// PREFIX.counts.csv.
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitArg {
    Bits,
    Nats,
}

#[derive(Debug, Args, Serialize)]
pub struct DivergenceArgs {
    pub target: PathBuf,
    pub reference: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Additive smoothing applied to both distributions before renormalizing.
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,
    #[arg(long, value_enum, default_value = "bits")]
    pub unit: UnitArg,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Report file; printed to stdout when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    /// Cluster spec JSON (a list of {name, center, sigma, count}); the
    /// built-in outlier scenario is used when omitted.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long, default_value_t = g2l::synth::DEFAULT_DIM)]
    pub dim: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Samples per cluster in the built-in scenario.
    #[arg(long, default_value_t = 50)]
    pub count: usize,
    /// Outlier offset in sigmas for the built-in scenario.
    #[arg(long, default_value_t = 50.0)]
    pub outlier_distance: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct CountArgs {
    /// Largest dimension listed.
    #[arg(long, default_value_t = 4)]
    pub dmax: u32,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

/// Why a run stopped.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Data(_) => EXIT_DATA,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Data(e) => write!(f, "error: {e:#}"),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn data(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Data(e.into())
}

/// Whether every item made it into the primary output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Completion {
    Full,
    Partial,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(Completion::Full) => EXIT_OK,
        Ok(Completion::Partial) => EXIT_PARTIAL,
        Err(f) => {
            eprintln!("{f}");
            f.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<Completion, Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(data)?;
    pool.install(|| match &cli.command {
        Command::Aggregate(a) => cmd_aggregate(cli, a),
        Command::Label(a) => cmd_label(cli, a),
        Command::Sweep(a) => cmd_sweep(cli, a),
        Command::Divergence(a) => cmd_divergence(cli, a),
        Command::Synth(a) => cmd_synth(cli, a),
        Command::Count(a) => cmd_count(cli, a),
    })
}

fn parse_metric(s: &str) -> Result<Metric, Failure> {
    s.parse()
        .map_err(|e: g2l::features::FeatureError| usage(e.to_string()))
}

fn check_fraction(f: f64) -> Result<(), Failure> {
    if f > 0.0 && f <= 1.0 {
        Ok(())
    } else {
        Err(usage(format!("--fraction must lie in (0, 1], got {f}")))
    }
}

fn load(path: &Path, format: Option<FormatArg>) -> Result<Dataset, Failure> {
    let format = format.map_or_else(|| VectorFormat::from_path(path), Into::into);
    load_vectors(path, format)
        .with_context(|| format!("loading {}", path.display()))
        .map_err(data)
}

fn load_anchors(path: &Path, metric: Option<&str>) -> Result<AnchorSet, Failure> {
    let set = AnchorSet::load(path)
        .context("loading anchors")
        .map_err(data)?;
    Ok(match metric {
        Some(m) => set.with_metric(parse_metric(m)?),
        None => set,
    })
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), Failure> {
    fs::write(path, contents)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(data)
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Writes the resolved configuration next to a primary output.
fn echo_config(cli: &Cli, path: &Path) -> Result<(), Failure> {
    let config = serde_json::json!({
        "program": "g2l",
        "version": env!("CARGO_PKG_VERSION"),
        "threads": cli.threads,
        "command": cli.command,
    });
    write(
        path,
        serde_json::to_string_pretty(&config).map_err(data)? + "\n",
    )
}

fn cmd_aggregate(cli: &Cli, a: &AggregateArgs) -> Result<Completion, Failure> {
    let metric = parse_metric(&a.metric)?;
    check_fraction(a.fraction)?;
    if matches!(a.method, MethodArg::Kmeans) && a.k == 0 {
        return Err(usage("--k must be at least 1"));
    }
    let mut sources: Vec<(String, PathBuf)> = Vec::new();
    for s in &a.sources {
        let (name, path) = s
            .split_once('=')
            .filter(|(n, p)| !n.is_empty() && !p.is_empty())
            .ok_or_else(|| usage(format!("--source expects NAME=PATH, got {s:?}")))?;
        if sources.iter().any(|(n, _)| n == name) {
            return Err(usage(format!("duplicate source name {name:?}")));
        }
        sources.push((name.to_string(), PathBuf::from(path)));
    }

    let mut reps = Vec::new();
    for (name, path) in &sources {
        let ds = load(path, a.format)?.with_name(name.clone());
        match a.method {
            MethodArg::Mean => reps.push(aggregate_mean(&ds, a.fraction, a.seed).map_err(data)?),
            MethodArg::Kmeans => reps.extend(
                aggregate_kmeans(&ds, a.k, a.seed, a.max_iters)
                    .with_context(|| format!("clustering source {name}"))
                    .map_err(data)?,
            ),
        }
    }
    let set = AnchorSet::new(reps, metric).map_err(data)?;
    write(&a.output, set.to_json().map_err(data)? + "\n")?;
    echo_config(cli, &with_suffix(&a.output, ".config.json"))?;
    Ok(Completion::Full)
}

#[derive(Serialize)]
struct LabelRecord<'a> {
    id: &'a str,
    policy: &'a str,
    names: &'a [String],
    chosen: &'a [g2l::labeling::RepKey],
    contents: &'a [f64],
}

fn cmd_label(cli: &Cli, a: &LabelArgs) -> Result<Completion, Failure> {
    let policy = parse_policy(&a.policy).map_err(|e| usage(e.to_string()))?;
    if let Some(m) = &a.metric {
        parse_metric(m)?;
    }
    let anchors = load_anchors(&a.anchors, a.metric.as_deref())?;
    let targets = load(&a.targets, a.format)?;
    let results = label_dataset(targets.vectors(), &anchors, &policy).map_err(data)?;

    let policy_text = policy.to_string();
    let mut body = String::new();
    let mut errors = String::new();
    for (target, result) in targets.vectors().iter().zip(&results) {
        match result {
            Ok(label) => {
                let rec = LabelRecord {
                    id: &target.id,
                    policy: &policy_text,
                    names: &label.names,
                    chosen: &label.chosen,
                    contents: &label.contents,
                };
                body.push_str(&serde_json::to_string(&rec).map_err(data)?);
                body.push('\n');
            }
            Err(e) => {
                let rec = serde_json::json!({
                    "index": e.index,
                    "id": e.id,
                    "error": e.error.to_string(),
                });
                errors.push_str(&rec.to_string());
                errors.push('\n');
            }
        }
    }
    write(&a.output, body)?;
    echo_config(cli, &with_suffix(&a.output, ".config.json"))?;
    if errors.is_empty() {
        Ok(Completion::Full)
    } else {
        write(&with_suffix(&a.output, ".errors.jsonl"), errors)?;
        Ok(Completion::Partial)
    }
}

fn cmd_sweep(cli: &Cli, a: &SweepArgs) -> Result<Completion, Failure> {
    if !(1..=g2l::analysis::MAX_SWEEP_DIMENSION).contains(&a.d) {
        return Err(usage(format!(
            "--d must lie in 1..={}",
            g2l::analysis::MAX_SWEEP_DIMENSION
        )));
    }
    if let Some(m) = &a.metric {
        parse_metric(m)?;
    }
    let anchors = load_anchors(&a.anchors, a.metric.as_deref())?;
    let targets = load(&a.targets, a.format)?;
    let result = sweep(targets.vectors(), &anchors, a.d).map_err(data)?;

    export_heatmap(&result, &with_suffix(&a.output, ".csv"), HeatmapFormat::Csv).map_err(data)?;
    export_heatmap(&result, &with_suffix(&a.output, ".pgm"), HeatmapFormat::Pgm).map_err(data)?;
    write(
        &with_suffix(&a.output, ".counts.csv"),
        count_table_from_sweep(&result).to_csv(),
    )?;
    echo_config(cli, &with_suffix(&a.output, ".config.json"))?;
    if result.missing.is_empty() && result.item_failures.is_empty() {
        Ok(Completion::Full)
    } else {
        Ok(Completion::Partial)
    }
}

fn cmd_divergence(cli: &Cli, a: &DivergenceArgs) -> Result<Completion, Failure> {
    check_fraction(a.fraction)?;
    if !a.epsilon.is_finite() || a.epsilon <= 0.0 {
        return Err(usage("--epsilon must be positive"));
    }
    let target = load(&a.target, a.format)?;
    let reference = load(&a.reference, a.format)?;
    let report =
        dataset_divergence(&target, &reference, a.fraction, a.seed, a.epsilon).map_err(data)?;
    let json = serde_json::json!({
        "target": a.target,
        "reference": a.reference,
        "divergence": match a.unit {
            UnitArg::Bits => report.divergence,
            UnitArg::Nats => report.divergence * std::f64::consts::LN_2,
        },
        "unit": a.unit,
        "warnings": report.warnings,
        "config": cli,
    });
    let text = serde_json::to_string_pretty(&json).map_err(data)? + "\n";
    match &a.output {
        Some(path) => {
            write(path, text)?;
            echo_config(cli, &with_suffix(path, ".config.json"))?;
        }
        None => print!("{text}"),
    }
    Ok(Completion::Full)
}

fn cmd_synth(cli: &Cli, a: &SynthArgs) -> Result<Completion, Failure> {
    if a.dim == 0 {
        return Err(usage("--dim must be at least 1"));
    }
    let specs: Vec<ClusterSpec> = match &a.spec {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))
                .map_err(data)?;
            serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", path.display()))
                .map_err(data)?
        }
        None => {
            if a.dim < 2 || !a.sigma.is_finite() || a.sigma <= 0.0 || a.count == 0 {
                return Err(usage(
                    "outlier scenario needs --dim >= 2, --sigma > 0 and --count >= 1",
                ));
            }
            outlier_scenario(a.dim, a.sigma, a.count, a.outlier_distance, a.seed)
        }
    };
    let out = generate(&specs, a.dim, a.seed).map_err(data)?;
    fs::create_dir_all(&a.out_dir)
        .with_context(|| format!("creating {}", a.out_dir.display()))
        .map_err(data)?;
    let format: VectorFormat = a.format.into();
    for ds in out.clusters.iter().chain(std::iter::once(&out.combined)) {
        let path = a
            .out_dir
            .join(format!("{}.{}", ds.name(), format.extension()));
        write_vectors(&path, ds.vectors(), format).map_err(data)?;
    }
    write(
        &a.out_dir.join("clusters.json"),
        serde_json::to_string_pretty(&specs).map_err(data)? + "\n",
    )?;
    echo_config(cli, &a.out_dir.join("synth.config.json"))?;
    Ok(Completion::Full)
}

/// `d,length,count` rows, then a `d,total,4^d` row per dimension.
pub fn count_table(dmax: u32) -> Result<String, Failure> {
    let mut s = String::from("d,length,count\n");
    for d in 1..=dmax {
        for l in d..=2 * d {
            let n = count_policies_by_length(d, l).map_err(data)?;
            s.push_str(&format!("{d},{l},{n}\n"));
        }
        s.push_str(&format!("{d},total,{}\n", count_policies(d).map_err(data)?));
    }
    Ok(s)
}

fn cmd_count(cli: &Cli, a: &CountArgs) -> Result<Completion, Failure> {
    if a.dmax == 0 || a.dmax > 63 {
        return Err(usage("--dmax must lie in 1..=63"));
    }
    let table = count_table(a.dmax)?;
    match &a.output {
        Some(path) => {
            write(path, table)?;
            echo_config(cli, &with_suffix(path, ".config.json"))?;
        }
        None => print!("{table}"),
    }
    Ok(Completion::Full)
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}
