//! Command-line front end for the `pspca` binary.
//!
//! Exit codes: 0 success, 1 computational or I/O failure, 2 usage or
//! validation error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::bench::{run_bench, write_bench_table, BenchConfig};
use crate::datagen::{simulate_spiked, SpikedTruth, WeightProfile};
use crate::eigen::PowerConfig;
use crate::error::{Error, Result};
use crate::io::{default_names, load_csv, write_csv};
use crate::matrix::center;
use crate::pca::fit_pca;
use crate::report::{DatasetInfo, Metadata, Report};
use crate::selection::{SelectionMethod, SelectionPolicy};
use crate::spca::{fit_spca, DeflationMode, SpcaOptions};

#[derive(Debug, Parser)]
#[command(name = "pspca", version, about = "Projection sparse principal component analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Full-cardinality principal components.
    Pca(PcaArgs),
    /// Sparse components by projection onto selected variables.
    Spca(SpcaArgs),
    /// Draw data from a spiked covariance model.
    Simulate(SimulateArgs),
    /// Compare selection methods at matched cardinality.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct PowerArgs {
    /// Power iteration tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    /// Seed for every randomized step.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl PowerArgs {
    fn config(&self) -> PowerConfig {
        PowerConfig {
            tol: self.tol,
            max_iter: self.max_iter,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct PcaArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Number of components; all non-negligible ones when omitted.
    #[arg(long)]
    pub k: Option<usize>,
    /// Standardize columns to unit variance.
    #[arg(long)]
    pub scale: bool,
    /// Report path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub power: PowerArgs,
}

#[derive(Debug, Args)]
pub struct SpcaArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Target share of each parent PC's variance.
    #[arg(long, default_value_t = 0.95)]
    pub alpha: f64,
    #[arg(long, default_value = "forward")]
    pub method: SelectionMethod,
    #[arg(long)]
    pub max_card: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub min_card: usize,
    #[arg(long, default_value = "projection")]
    pub deflation: DeflationMode,
    #[arg(long)]
    pub scale: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub power: PowerArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: usize,
    /// Spike variances, strictly decreasing.
    #[arg(long, value_delimiter = ',', required = true)]
    pub spikes: Vec<f64>,
    #[arg(long)]
    pub support_size: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value = "equal")]
    pub weights: WeightProfile,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Data CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Ground-truth JSON.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, conflicts_with = "simulate", required_unless_present = "simulate")]
    pub input: Option<PathBuf>,
    /// Ground truth for `--input` data, as written by `simulate --truth`.
    #[arg(long, requires = "input")]
    pub truth: Option<PathBuf>,
    /// Simulation settings JSON (fields n, p, spikes, support_size, sigma, weights, seed).
    #[arg(long)]
    pub simulate: Option<PathBuf>,
    /// Comma-separated subset of forward,backward,threshold,exhaustive.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub methods: Vec<SelectionMethod>,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = 0.95)]
    pub alpha: f64,
    #[arg(long)]
    pub scale: bool,
    #[arg(long)]
    pub out: PathBuf,
    /// CSV summary; defaults to the report path with a `.csv` extension.
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    /// Seed for power iteration; also overrides the simulation seed when given.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Contents of a `bench --simulate` file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSpec {
    pub n: usize,
    pub p: usize,
    pub spikes: Vec<f64>,
    pub support_size: usize,
    pub sigma: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub weights: WeightProfile,
}

impl SimulationSpec {
    pub fn truth(&self) -> Result<SpikedTruth> {
        SpikedTruth::planted(
            self.p,
            self.spikes.clone(),
            self.support_size,
            self.weights,
            self.sigma,
            self.seed,
        )
    }
}

impl clap::builder::ValueParserFactory for SelectionMethod {
    type Parser = clap::builder::ValueParser;
    fn value_parser() -> Self::Parser {
        clap::builder::ValueParser::new(|s: &str| s.parse::<SelectionMethod>().map_err(|e| e.to_string()))
    }
}

impl clap::builder::ValueParserFactory for DeflationMode {
    type Parser = clap::builder::ValueParser;
    fn value_parser() -> Self::Parser {
        clap::builder::ValueParser::new(|s: &str| s.parse::<DeflationMode>().map_err(|e| e.to_string()))
    }
}

impl clap::builder::ValueParserFactory for WeightProfile {
    type Parser = clap::builder::ValueParser;
    fn value_parser() -> Self::Parser {
        clap::builder::ValueParser::new(|s: &str| s.parse::<WeightProfile>().map_err(|e| e.to_string()))
    }
}

/// Parses arguments, runs the command, and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e.root() {
        Error::InvalidArgument(_) => 2,
        _ => 1,
    }
}

pub fn execute(command: Command) -> Result<()> {
    match command {
        Command::Pca(args) => pca(args),
        Command::Spca(args) => spca(args),
        Command::Simulate(args) => simulate(args),
        Command::Bench(args) => bench(args),
    }
}

fn emit(report: &Report, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => crate::report::write_report(report, path),
        None => report.to_writer(std::io::stdout().lock()),
    }
}

fn path_string(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

fn pca(args: PcaArgs) -> Result<()> {
    let power = args.power.config();
    power.validate()?;
    let data = load_csv(&args.input)?;
    let cd = center(&data.matrix, args.scale)?;
    let model = fit_pca(&cd, args.k, &power)?;
    let config = json!({
        "input": path_string(&args.input),
        "k": args.k,
        "scale": args.scale,
        "power": power,
    });
    let report = Report::from_pca(&model, data.names, Metadata::new("pca", config));
    emit(&report, args.out.as_deref())
}

fn spca(args: SpcaArgs) -> Result<()> {
    let options = SpcaOptions {
        deflation: args.deflation,
        power: args.power.config(),
    };
    let policy = SelectionPolicy {
        method: args.method,
        alpha: args.alpha,
        max_cardinality: args.max_card,
        min_cardinality: args.min_card,
    };
    policy.validate()?;
    options.power.validate()?;
    if args.k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let data = load_csv(&args.input)?;
    let cd = center(&data.matrix, args.scale)?;
    let fit = fit_spca(&cd, args.k, &policy, &options)?;
    let config = json!({
        "input": path_string(&args.input),
        "k": args.k,
        "scale": args.scale,
        "policy": policy,
        "options": options,
    });
    let report = Report::from_spca(&fit, data.names, Metadata::new("spca", config));
    emit(&report, args.out.as_deref())
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let truth = SpikedTruth::planted(
        args.p,
        args.spikes.clone(),
        args.support_size,
        args.weights,
        args.sigma,
        args.seed,
    )
    .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let (x, truth) = simulate_spiked(args.n, args.p, &truth).map_err(|e| match e {
        e @ (Error::BadSupport(_) | Error::InvalidArgument(_)) => Error::InvalidArgument(e.to_string()),
        e => e,
    })?;
    write_csv(&args.out, &x, &default_names(args.p))?;
    if let Some(path) = &args.truth {
        let text = serde_json::to_string_pretty(&truth)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

fn bench(args: BenchArgs) -> Result<()> {
    let config = BenchConfig {
        methods: args.methods.clone(),
        k: args.k,
        alpha: args.alpha,
        power: PowerConfig {
            tol: args.tol,
            max_iter: args.max_iter,
            seed: args.seed.unwrap_or(0),
        },
    };
    config.validate()?;

    let (matrix, truth, source, spec) = if let Some(path) = &args.input {
        let data = load_csv(path)?;
        let truth = match &args.truth {
            Some(tp) => {
                let text = std::fs::read_to_string(tp).map_err(|e| Error::io(tp, e))?;
                Some(serde_json::from_str::<SpikedTruth>(&text)?)
            }
            None => None,
        };
        (data.matrix, truth, path_string(path), None)
    } else {
        let path = args.simulate.as_ref().expect("clap enforces input or simulate");
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut spec: SimulationSpec =
            serde_json::from_str(&text).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
        if let Some(seed) = args.seed {
            spec.seed = seed;
        }
        let truth = spec.truth().map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let (x, truth) = simulate_spiked(spec.n, spec.p, &truth)?;
        (x, Some(truth), path_string(path), Some(spec))
    };

    let cd = center(&matrix, args.scale)?;
    let outcome = run_bench(&cd, truth.as_ref(), &config)?;
    let table = args.table.clone().unwrap_or_else(|| args.out.with_extension("csv"));
    write_bench_table(&outcome.rows, &table)?;

    let meta = Metadata::new(
        "bench",
        json!({
            "methods": args.methods.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
            "k": args.k,
            "alpha": args.alpha,
            "scale": args.scale,
            "power": config.power,
            "simulation": spec,
        }),
    );
    let dataset = DatasetInfo {
        source,
        n: cd.n(),
        p: cd.p(),
        has_truth: truth.is_some(),
    };
    let report = Report::Bench(outcome.into_report(meta, dataset, &config));
    crate::report::write_report(&report, &args.out)
}
