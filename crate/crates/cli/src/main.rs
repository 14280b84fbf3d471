use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use sqzmetro_core::sweep::{db_convert, run_sweep, DbDirection, Metric, OutputFormat, SweepSpec};
use sqzmetro_core::verify::{run_verification, VerifyOptions};
use sqzmetro_core::{Family, MetroError};

/// Default directory for relative `--output` paths.
const OUTPUT_DIR_ENV: &str = "SQZMETRO_OUTPUT_DIR";

const EXIT_VALIDATION: u8 = 1;
const EXIT_VERIFY: u8 = 2;

#[derive(Parser)]
#[command(name = "sqzmetro", version, about = "Phase-estimation figures of merit for squeezed-light interferometry")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a metric on a parameter grid.
    Sweep(SweepArgs),
    /// Crossover amplitudes between the squeezed families.
    Threshold(ThresholdArgs),
    /// Run the acceptance checks.
    Verify(VerifyArgs),
    /// Convert squeezing between decibels and the squeezing parameter.
    ConvertDb(ConvertArgs),
}

#[derive(Args, Default)]
struct GridArgs {
    /// JSON sweep specification; flags given alongside override its fields.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    r_min: Option<f64>,
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long)]
    r_step: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    eta: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long)]
    oracle: bool,
    #[arg(long)]
    dims: Option<usize>,
    /// Output file; relative paths resolve against $SQZMETRO_OUTPUT_DIR when set.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    metric: Option<MetricArg>,
    #[arg(long, value_delimiter = ',')]
    families: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    gamma: Option<Vec<f64>>,
    /// Fixed total photon numbers, used instead of --gamma.
    #[arg(long, value_delimiter = ',')]
    n_tot: Option<Vec<f64>>,
    #[arg(long)]
    phi: Option<f64>,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args)]
struct ThresholdArgs {
    #[arg(long, value_enum, default_value = "sens")]
    kind: ThresholdKindArg,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Force this basis size on the truncated-Fock checks.
    #[arg(long)]
    dims: Option<usize>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ConvertArgs {
    #[arg(long, value_enum, default_value = "r-to-db")]
    direction: DirectionArg,
    value: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Qfi,
    Sensitivity,
    Fisher,
    ThresholdQfi,
    ThresholdSens,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Qfi => Metric::Qfi,
            MetricArg::Sensitivity => Metric::Sensitivity,
            MetricArg::Fisher => Metric::Fisher,
            MetricArg::ThresholdQfi => Metric::ThresholdQfi,
            MetricArg::ThresholdSens => Metric::ThresholdSens,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ThresholdKindArg {
    Qfi,
    Sens,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    DbToR,
    RToDb,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Validation(anyhow::Error),
    Verification,
    Other(anyhow::Error),
}

impl From<MetroError> for Failure {
    fn from(e: MetroError) -> Self {
        match e {
            MetroError::InvalidSpec(_)
            | MetroError::ParameterRange { .. }
            | MetroError::InvalidEfficiency(_)
            | MetroError::InfeasibleEnergy { .. } => Failure::Validation(e.into()),
            other => Failure::Other(other.into()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

fn resolve_output(path: &Path) -> PathBuf {
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn emit(bytes: &[u8], output: Option<&Path>) -> anyhow::Result<()> {
    match output {
        Some(path) => {
            let path = resolve_output(path);
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
            }
            fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))
        }
        None => io::stdout().write_all(bytes).context("writing to stdout"),
    }
}

/// Spec from `--spec` (if any) with the grid flags layered on top.
fn base_spec(grid: &GridArgs, metric: Option<Metric>) -> Result<SweepSpec, Failure> {
    let mut spec = match &grid.spec {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))
                .map_err(Failure::Validation)?;
            SweepSpec::from_json(&text)?
        }
        None => {
            let metric = metric.ok_or_else(|| Failure::Validation(anyhow!("--metric or --spec is required")))?;
            let need = |v: Option<f64>, flag: &str| {
                v.ok_or_else(|| Failure::Validation(anyhow!("{flag} or --spec is required")))
            };
            SweepSpec {
                metric,
                families: Family::ALL.to_vec(),
                r_min: need(grid.r_min, "--r-min")?,
                r_max: need(grid.r_max, "--r-max")?,
                r_step: need(grid.r_step, "--r-step")?,
                gamma: Vec::new(),
                n_tot: None,
                eta: vec![1.0],
                phi: std::f64::consts::FRAC_PI_2,
                format: OutputFormat::Csv,
                oracle: false,
                dims: None,
            }
        }
    };
    if let Some(m) = metric {
        spec.metric = m;
    }
    if let Some(v) = grid.r_min {
        spec.r_min = v;
    }
    if let Some(v) = grid.r_max {
        spec.r_max = v;
    }
    if let Some(v) = grid.r_step {
        spec.r_step = v;
    }
    if let Some(v) = &grid.eta {
        spec.eta = v.clone();
    }
    if let Some(f) = grid.format {
        spec.format = f.into();
    }
    spec.oracle |= grid.oracle;
    if grid.dims.is_some() {
        spec.dims = grid.dims;
    }
    Ok(spec)
}

fn write_dataset(spec: &SweepSpec, output: Option<&Path>) -> Result<(), Failure> {
    let data = run_sweep(spec)?;
    let bytes = data.to_bytes(spec.format)?;
    emit(&bytes, output)?;
    let errors = data.error_count();
    if errors > 0 {
        eprintln!("{errors} of {} rows carry an error", data.len());
    }
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<(), Failure> {
    let mut spec = base_spec(&args.grid, args.metric.map(Metric::from))?;
    if let Some(names) = &args.families {
        spec.families = names
            .iter()
            .map(|n| n.parse::<Family>())
            .collect::<Result<_, _>>()?;
    }
    if let Some(g) = args.gamma {
        spec.gamma = g;
    }
    if args.n_tot.is_some() {
        spec.n_tot = args.n_tot;
    }
    if let Some(phi) = args.phi {
        spec.phi = phi;
    }
    write_dataset(&spec, args.grid.output.as_deref())
}

fn threshold(args: ThresholdArgs) -> Result<(), Failure> {
    let metric = match args.kind {
        ThresholdKindArg::Qfi => Metric::ThresholdQfi,
        ThresholdKindArg::Sens => Metric::ThresholdSens,
    };
    let spec = base_spec(&args.grid, Some(metric))?;
    write_dataset(&spec, args.grid.output.as_deref())
}

fn verify(args: VerifyArgs) -> Result<(), Failure> {
    if args.dims == Some(0) {
        return Err(Failure::Validation(anyhow!("--dims must be at least 1")));
    }
    let report = run_verification(&VerifyOptions { dims: args.dims });
    for check in &report.checks {
        eprintln!("{}", check.line());
    }
    let mut json = serde_json::to_vec_pretty(&report).context("serializing report")?;
    json.push(b'\n');
    emit(&json, args.output.as_deref())?;
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn convert(args: ConvertArgs) -> Result<(), Failure> {
    let (direction, unit) = match args.direction {
        DirectionArg::DbToR => (DbDirection::DbToR, "r"),
        DirectionArg::RToDb => (DbDirection::RToDb, "dB"),
    };
    let value = db_convert(args.value, direction)?;
    println!("{value:.4} {unit}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Sweep(args) => sweep(args),
        Command::Threshold(args) => threshold(args),
        Command::Verify(args) => verify(args),
        Command::ConvertDb(args) => convert(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_VALIDATION)
        }
        Err(Failure::Verification) => {
            eprintln!("verification failed");
            ExitCode::from(EXIT_VERIFY)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
