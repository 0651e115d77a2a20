//! The `ahop` command-line driver.
//!
//! Every subcommand reads its parameters from flags, optionally merged with a
//! JSON object given by `--config` (explicit flags win). Outputs are written
//! atomically: to a temporary file in the target directory, then renamed.

mod verify;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::{Path, PathBuf};

use ahop_bench::{
    error_sweep, phase_sweep, runtime_scaling, summarize, write_records_csv, ErrorSweepConfig, ExperimentRecord,
    PhaseSweepConfig, ScalingConfig, DEFAULT_DENSE_CAP_SECS,
};
use ahop_core::capacity::{run_capacity_experiment, write_capacity_csv, CapacityExperiment};
use ahop_core::hopfield::retrieve;
use ahop_core::poly_approx::{degree_bound, fit_exp_poly, DEFAULT_MAX_DEGREE};
use ahop_core::reduction::{
    build_ahop_instance, even_dimension, query_truths, run_reduction_trial, solve_gap_anns_via_ahop, summarize as
    summarize_reduction, AConvention, AnnsInstance, AnnsMeta, Plant, ReductionExperiment, ReductionParams,
    DEFAULT_DELTA,
};
use ahop_core::{Normalization, PatternMatrix, RetrievalConfig, RetrievalMode, Role};
use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub use verify::{run_verify, VerifyCheck, VerifyReport};

pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (rev ", env!("AHOP_REVISION"), ")");

#[derive(Debug, Parser)]
#[command(name = "ahop", version = VERSION, about = "Exact and almost-linear modern Hopfield retrieval experiments")]
pub struct Cli {
    /// JSON object of flag values; explicit flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Worker threads for parallel sections (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a polynomial to exp on [-bound, bound] with relative error delta-a.
    ApproxExp(ApproxExpArgs),
    /// One retrieval step of queries against stored memories.
    Retrieve(RetrieveArgs),
    /// Dense vs low-rank wall time over growing tau = M = L.
    BenchScaling(ScalingArgs),
    /// Measured low-rank error against 2 M B delta_a for several delta_a.
    BenchError(ErrorArgs),
    /// Degree and rank growth as the entry bound B increases.
    BenchPhase(PhaseArgs),
    /// Store-then-retrieve success rates on random sphere patterns.
    Capacity(CapacityArgs),
    /// Decide gap nearest-neighbour instances through Hopfield retrieval.
    Reduction(ReductionArgs),
    /// Run the property suite and write verify.json / verify.csv.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Dense,
    Lowrank,
}

impl From<ModeArg> for RetrievalMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Dense => RetrievalMode::Dense,
            ModeArg::Lowrank => RetrievalMode::LowRank,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NormalizationArg {
    Query,
    Memory,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PlantArg {
    Case1,
    Case2,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ConventionArg {
    AsWritten,
    Literal,
}

impl From<ConventionArg> for AConvention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::AsWritten => AConvention::AsWritten,
            ConventionArg::Literal => AConvention::Literal,
        }
    }
}

#[derive(Debug, Args)]
struct ApproxExpArgs {
    /// Interval half-width B'.
    #[arg(long, value_parser = positive)]
    bound: f64,
    #[arg(long, value_parser = relative_error, default_value_t = 1e-3)]
    delta_a: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_DEGREE)]
    max_degree: usize,
    /// JSON output (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RetrieveArgs {
    /// Memory patterns, CSV (`dim=<d>` header) or AHOP binary.
    #[arg(long)]
    memory: PathBuf,
    /// Query patterns, same formats.
    #[arg(long)]
    queries: PathBuf,
    /// Inverse temperature [default: 1/d].
    #[arg(long, value_parser = positive)]
    beta: Option<f64>,
    #[arg(long, value_parser = relative_error, default_value_t = 1e-3)]
    delta_a: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Lowrank)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = NormalizationArg::Query)]
    normalization: NormalizationArg,
    #[arg(long, default_value_t = DEFAULT_MAX_DEGREE)]
    max_degree: usize,
    /// Output patterns (CSV); a JSON sidecar is written to `<out>.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ScalingArgs {
    /// Comma-separated tau values.
    #[arg(long, value_delimiter = ',', default_values_t = [1024usize, 2048, 4096, 8192, 16384])]
    tau: Vec<usize>,
    #[arg(long, default_value_t = 4)]
    d: usize,
    /// Inverse temperature [default: 1/d].
    #[arg(long, value_parser = positive)]
    beta: Option<f64>,
    /// Entry bound B.
    #[arg(long, value_parser = positive, default_value_t = 1.0)]
    bound: f64,
    #[arg(long, value_parser = relative_error, default_value_t = 1e-3)]
    delta_a: f64,
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Skip dense runs predicted to take longer than this (seconds).
    #[arg(long, value_parser = positive, default_value_t = DEFAULT_DENSE_CAP_SECS)]
    dense_cap: f64,
    /// Record CSV.
    #[arg(long)]
    out: PathBuf,
    /// JSON summary with slopes and machine metadata.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ErrorArgs {
    #[arg(long, value_delimiter = ',', value_parser = relative_error, default_values_t = [1e-2, 5e-3, 1e-3, 5e-4, 1e-4])]
    delta_a: Vec<f64>,
    #[arg(long, default_value_t = 4)]
    d: usize,
    #[arg(long, default_value_t = 256)]
    memories: usize,
    #[arg(long, default_value_t = 256)]
    queries: usize,
    #[arg(long, value_parser = positive, default_value_t = 1.0)]
    bound: f64,
    /// Inverse temperature [default: 1/d].
    #[arg(long, value_parser = positive)]
    beta: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PhaseArgs {
    /// Comma-separated entry bounds B.
    #[arg(long, value_delimiter = ',', value_parser = positive, default_values_t = [0.5, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0])]
    bounds: Vec<f64>,
    #[arg(long, default_value_t = 1024)]
    tau: usize,
    #[arg(long, default_value_t = 4)]
    d: usize,
    /// Inverse temperature [default: 1/d].
    #[arg(long, value_parser = positive)]
    beta: Option<f64>,
    #[arg(long, value_parser = relative_error, default_value_t = 1e-3)]
    delta_a: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_DEGREE)]
    degree_cap: usize,
    #[arg(long, default_value_t = 1_000_000)]
    rank_cap: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CapacityArgs {
    #[arg(long)]
    d: usize,
    /// Sphere radius [default: sqrt(d)].
    #[arg(long, value_parser = positive)]
    m: Option<f64>,
    /// Inverse temperature [default: 1/d].
    #[arg(long, value_parser = positive)]
    beta: Option<f64>,
    /// Comma-separated memory counts M.
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 4, 8, 16, 32, 64, 128])]
    memories: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    /// Query offset as a fraction of R.
    #[arg(long, value_parser = fraction, default_value_t = 0.1)]
    perturbation: f64,
    /// Success radius [default: R/2, plus 2 M B delta_a for low-rank].
    #[arg(long, value_parser = positive)]
    eps: Option<f64>,
    #[arg(long, value_parser = relative_error, default_value_t = 1e-3)]
    delta_a: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Lowrank)]
    mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ReductionArgs {
    #[arg(long, default_value_t = 16)]
    n: usize,
    /// Dimension [default: smallest even d >= 8 ln n].
    #[arg(long)]
    d: Option<usize>,
    /// Distance threshold t.
    #[arg(long, value_parser = positive, default_value_t = 4.0)]
    t: f64,
    /// Gap delta.
    #[arg(long, value_parser = relative_error, default_value_t = DEFAULT_DELTA)]
    delta: f64,
    /// Instances per planted case.
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, value_enum, default_value_t = PlantArg::Both)]
    plant: PlantArg,
    #[arg(long, value_enum, default_value_t = ConventionArg::AsWritten)]
    convention: ConventionArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Decide the instance stored in this directory (A.csv, B.csv, meta.json)
    /// instead of generating one.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// JSON report (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for verify.json and verify.csv.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.parse::<f64>().map_err(|e| e.to_string())
}

fn relative_error(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v < 0.1 {
        Ok(v)
    } else {
        Err(format!("{v} is not in (0, 0.1)"))
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} is not positive"))
    }
}

fn fraction(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is not in (0, 1)"))
    }
}

/// Appends `--key value` pairs from the `--config` JSON object for every key
/// not already given on the command line.
fn merge_config(argv: Vec<OsString>) -> anyhow::Result<Vec<OsString>> {
    let Some(pos) = argv.iter().position(|a| a == "--config" || a.to_string_lossy().starts_with("--config=")) else {
        return Ok(argv);
    };
    let path = match argv[pos].to_string_lossy().strip_prefix("--config=") {
        Some(p) => PathBuf::from(p),
        None => PathBuf::from(argv.get(pos + 1).context("--config needs a file")?),
    };
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading config {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
    let serde_json::Value::Object(map) = value else {
        bail!("config {} must hold a JSON object", path.display());
    };
    let mut merged = argv.clone();
    for (key, value) in map {
        let flag = format!("--{}", key.replace('_', "-"));
        let present = argv.iter().any(|a| {
            let a = a.to_string_lossy();
            a == flag || a.starts_with(&format!("{flag}="))
        });
        if present {
            continue;
        }
        let scalar = |v: &serde_json::Value| match v {
            serde_json::Value::String(s) => Ok(s.clone()),
            serde_json::Value::Number(n) => Ok(n.to_string()),
            other => bail!("config key {key}: unsupported value {other}"),
        };
        match &value {
            serde_json::Value::Bool(true) => merged.push(flag.into()),
            serde_json::Value::Bool(false) | serde_json::Value::Null => {}
            serde_json::Value::Array(items) => {
                let parts = items.iter().map(scalar).collect::<anyhow::Result<Vec<_>>>()?;
                merged.push(format!("{flag}={}", parts.join(",")).into());
            }
            other => merged.push(format!("{flag}={}", scalar(other)?).into()),
        }
    }
    Ok(merged)
}

/// Writes through a temporary file in the destination directory, then
/// renames it into place.
pub fn write_atomic(path: &Path, write: impl FnOnce(&mut File) -> anyhow::Result<()>) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    write(tmp.as_file_mut())?;
    tmp.as_file_mut().flush()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match path {
        Some(p) => write_atomic(p, |f| Ok(f.write_all(text.as_bytes())?)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_patterns(path: &Path, role: Role) -> anyhow::Result<PatternMatrix> {
    let mut file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut magic = [0u8; 4];
    let n = file.read(&mut magic)?;
    let file = File::open(path)?;
    let patterns = if n == 4 && &magic == ahop_core::pattern::BINARY_MAGIC {
        PatternMatrix::read_binary(BufReader::new(file), role)?
    } else {
        PatternMatrix::read_csv(BufReader::new(file), role)?
    };
    Ok(patterns)
}

fn beta_or_default(beta: Option<f64>, d: usize) -> f64 {
    beta.unwrap_or(1.0 / d as f64)
}

fn approx_exp(args: ApproxExpArgs) -> anyhow::Result<()> {
    #[derive(Serialize)]
    struct Out {
        #[serde(flatten)]
        poly: ahop_core::ExpPolynomial,
        reference_degree: usize,
        reference_first_term_only: bool,
    }
    let poly = fit_exp_poly(args.bound, args.delta_a, args.max_degree)?;
    let reference = degree_bound(args.bound, args.delta_a)?;
    write_json(
        args.out.as_deref(),
        &Out {
            poly,
            reference_degree: reference.degree,
            reference_first_term_only: reference.first_term_only,
        },
    )
}

fn retrieve_cmd(args: RetrieveArgs) -> anyhow::Result<()> {
    #[derive(Serialize)]
    struct Sidecar {
        mode: RetrievalMode,
        normalization: Normalization,
        beta: f64,
        delta_a: f64,
        g: usize,
        r: usize,
        delta_h: f64,
        wall_time: f64,
    }
    let memory = read_patterns(&args.memory, Role::Memory)?;
    let queries = read_patterns(&args.queries, Role::Query)?;
    let normalization = match args.normalization {
        NormalizationArg::Query => Normalization::QueryNormalized,
        NormalizationArg::Memory => Normalization::MemoryNormalized,
    };
    let cfg = RetrievalConfig::new(beta_or_default(args.beta, memory.dim()), args.delta_a)?
        .with_normalization(normalization)
        .with_max_degree(args.max_degree);
    let result = retrieve(&memory, &queries, &cfg, args.mode.into())?;
    let out = result.patterns()?;
    write_atomic(&args.out, |f| Ok(out.write_csv(f)?))?;
    let mut sidecar = args.out.clone().into_os_string();
    sidecar.push(".json");
    write_json(
        Some(Path::new(&sidecar)),
        &Sidecar {
            mode: args.mode.into(),
            normalization,
            beta: cfg.beta,
            delta_a: cfg.delta_a,
            g: result.degree_used,
            r: result.rank_used,
            delta_h: result.error_bound,
            wall_time: result.wall_time,
        },
    )
}

fn write_records(out: &Path, summary: Option<&Path>, records: &[ExperimentRecord]) -> anyhow::Result<()> {
    write_atomic(out, |f| Ok(write_records_csv(records, f)?))?;
    if let Some(path) = summary {
        write_json(Some(path), &summarize(records))?;
    }
    Ok(())
}

fn bench_scaling(args: ScalingArgs) -> anyhow::Result<()> {
    let cfg = ScalingConfig {
        tau_list: args.tau,
        d: args.d,
        beta: beta_or_default(args.beta, args.d),
        norm_bound: args.bound,
        delta_a: args.delta_a,
        repeats: args.repeats,
        seed: args.seed,
        dense_cap_secs: args.dense_cap,
    };
    let report = runtime_scaling(&cfg)?;
    for r in &report.records {
        eprintln!(
            "tau={:>6} dense={:>10} lowrank={:>10} {}",
            r.tau,
            r.wall_time_dense.map_or("-".into(), |t| format!("{t:.4}s")),
            r.wall_time_lowrank.map_or("-".into(), |t| format!("{t:.4}s")),
            r.note
        );
    }
    write_records(&args.out, args.summary.as_deref(), &report.records)
}

fn bench_error(args: ErrorArgs) -> anyhow::Result<()> {
    let cfg = ErrorSweepConfig {
        delta_a_list: args.delta_a,
        d: args.d,
        memories: args.memories,
        queries: args.queries,
        norm_bound: args.bound,
        beta: beta_or_default(args.beta, args.d),
        seed: args.seed,
    };
    write_records(&args.out, args.summary.as_deref(), &error_sweep(&cfg)?)
}

fn bench_phase(args: PhaseArgs) -> anyhow::Result<()> {
    let cfg = PhaseSweepConfig {
        b_list: args.bounds,
        tau: args.tau,
        d: args.d,
        beta: beta_or_default(args.beta, args.d),
        delta_a: args.delta_a,
        degree_cap: args.degree_cap,
        rank_cap: args.rank_cap,
        seed: args.seed,
    };
    write_records(&args.out, args.summary.as_deref(), &phase_sweep(&cfg)?)
}

fn capacity(args: CapacityArgs) -> anyhow::Result<()> {
    let exp = CapacityExperiment {
        d: args.d,
        m: args.m.unwrap_or((args.d as f64).sqrt()),
        beta: beta_or_default(args.beta, args.d),
        trials: args.trials,
        perturbation: args.perturbation,
        eps: args.eps,
        delta_a: args.delta_a,
        mode: args.mode.into(),
        seed: args.seed,
    };
    let rows = run_capacity_experiment(&exp, &args.memories)?;
    write_atomic(&args.out, |f| Ok(write_capacity_csv(&rows, f)?))
}

fn reduction(args: ReductionArgs) -> anyhow::Result<()> {
    let convention: AConvention = args.convention.into();
    if let Some(dir) = &args.instance {
        let meta: AnnsMeta = serde_json::from_reader(File::open(dir.join("meta.json")).context("opening meta.json")?)?;
        let read = |name: &str| -> anyhow::Result<_> {
            let file = File::open(dir.join(name)).with_context(|| format!("opening {name}"))?;
            Ok(AnnsInstance::read_set_csv(BufReader::new(file), meta.d)?)
        };
        let inst = AnnsInstance::from_parts(read("A.csv")?, read("B.csv")?, meta)?;
        return decide_instance(&inst, convention, args.out.as_deref());
    }
    let d = args.d.unwrap_or_else(|| even_dimension(args.n, 8.0));
    let exp = ReductionExperiment {
        n: args.n,
        d,
        t: args.t,
        delta: args.delta,
        trials: args.trials,
        seed: args.seed,
        convention,
    };
    let plants: &[Plant] = match args.plant {
        PlantArg::Case1 => &[Plant::Case1],
        PlantArg::Case2 => &[Plant::Case2],
        PlantArg::Both => &[Plant::Case1, Plant::Case2],
    };
    let mut trials = Vec::new();
    for trial in 0..args.trials {
        for &plant in plants {
            trials.push(run_reduction_trial(&exp, trial, plant)?);
        }
    }
    let report = summarize_reduction(exp, trials);
    if let Some(agreement) = report.agreement {
        eprintln!(
            "agreement {}/{} = {agreement}",
            report.agreeing_queries, report.promised_queries
        );
    }
    write_json(args.out.as_deref(), &report)
}

fn decide_instance(inst: &AnnsInstance, convention: AConvention, out: Option<&Path>) -> anyhow::Result<()> {
    #[derive(Serialize)]
    struct Report<'a> {
        meta: AnnsMeta,
        params: ReductionParams,
        decision: &'a ahop_core::CaseDecision,
        truths: Vec<ahop_core::reduction::QueryTruth>,
    }
    let (c_beta, c_alpha) = ReductionParams::default_constants(inst);
    let ahop = build_ahop_instance(inst, c_beta, c_alpha)?;
    let cfg = RetrievalConfig::new(ahop.params.beta, 1e-3)?;
    let decision = solve_gap_anns_via_ahop(&ahop, RetrievalMode::Dense, convention, &cfg)?;
    write_json(
        out,
        &Report {
            meta: inst.meta(),
            params: ahop.params,
            decision: &decision,
            truths: query_truths(inst),
        },
    )
}

fn verify_cmd(args: VerifyArgs) -> anyhow::Result<bool> {
    let report = run_verify(args.seed)?;
    for check in &report.checks {
        println!("{} {}: {}", if check.passed { "PASS" } else { "FAIL" }, check.name, check.detail);
    }
    write_json(Some(&args.out_dir.join("verify.json")), &report)?;
    write_atomic(&args.out_dir.join("verify.csv"), |f| {
        let mut writer = csv::Writer::from_writer(f);
        for check in &report.checks {
            writer.serialize(check)?;
        }
        writer.flush()?;
        Ok(())
    })?;
    println!("{}/{} checks passed", report.checks.iter().filter(|c| c.passed).count(), report.checks.len());
    Ok(report.passed)
}

fn dispatch(cli: Cli) -> anyhow::Result<bool> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::ApproxExp(a) => approx_exp(a)?,
        Command::Retrieve(a) => retrieve_cmd(a)?,
        Command::BenchScaling(a) => bench_scaling(a)?,
        Command::BenchError(a) => bench_error(a)?,
        Command::BenchPhase(a) => bench_phase(a)?,
        Command::Capacity(a) => capacity(a)?,
        Command::Reduction(a) => reduction(a)?,
        Command::Verify(a) => return verify_cmd(a),
    }
    Ok(true)
}

fn report_error(err: &anyhow::Error) {
    let name = err
        .chain()
        .find_map(|e| e.downcast_ref::<ahop_core::Error>())
        .map_or("Error", ahop_core::Error::name);
    eprintln!("error: {name}: {err:#}");
}

/// Parses `argv` (program name first) and runs the subcommand. Returns the
/// process exit code: 0 on success, 1 on a runtime error, 2 on a usage error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match merge_config(argv) {
        Ok(a) => a,
        Err(err) => {
            eprintln!("error: {err:#}");
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 2 } else { 0 };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(err) => {
            report_error(&err);
            1
        }
    }
}
