use std::error::Error;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use outerfn::experiments::{self, emit_report, ExperimentConfig, Report, ReportFormat, WeightFile};

#[derive(Parser, Debug)]
#[command(name = "outerfn", version, about = "Matrix outer-function experiments on the unit circle")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// TOML file with experiment settings.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Write the report into this directory instead of stdout.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, global = true, value_name = "M")]
    truncation: Option<usize>,
    #[arg(long, global = true, value_name = "G")]
    grid: Option<usize>,
    #[arg(long, global = true, value_name = "S")]
    seed: Option<u64>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Factor a weight read from a JSON file.
    Factor { weight: PathBuf },
    /// Distortion norm between the spaces interpolated from two weights.
    Distortion { first: PathBuf, second: PathBuf },
    /// Coupled weight against its conjugate rearrangement.
    ConjugationSweep,
    /// Three-arc energy difference and ε sweep.
    ThreeArc,
    /// Quadrant series and the W^{α,ε} family.
    Quadrant,
    /// Composition with inner functions.
    InnerInvariance,
    /// Two-valued weights against the closed form.
    TwoValued,
}

fn load_config(common: &Common) -> Result<ExperimentConfig, Box<dyn Error>> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(m) = common.truncation {
        cfg.truncation = m;
    }
    if let Some(g) = common.grid {
        cfg.grid = g;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn load_weight(path: &Path) -> Result<outerfn::MatrixCircleFunction, Box<dyn Error>> {
    WeightFile::load(path).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn run(cli: &Cli) -> Result<Report, Box<dyn Error>> {
    let cfg = load_config(&cli.common)?;
    let report = match &cli.command {
        Command::Factor { weight } => {
            experiments::factor_report(&load_weight(weight)?, &cfg, &weight.display().to_string())?
        }
        Command::Distortion { first, second } => {
            experiments::distortion_report(&load_weight(first)?, &load_weight(second)?, &cfg)?
        }
        Command::ConjugationSweep => experiments::run_conjugation_sweep(&cfg)?,
        Command::ThreeArc => experiments::run_three_arc(&cfg)?,
        Command::Quadrant => experiments::run_quadrant(&cfg)?,
        Command::InnerInvariance => experiments::run_inner_invariance(&cfg)?,
        Command::TwoValued => experiments::run_two_valued(&cfg)?,
    };
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let format = match cli.common.format {
        Format::Json => ReportFormat::Json,
        Format::Csv => ReportFormat::Csv,
    };
    match &cli.common.out {
        Some(dir) => match emit_report(&report, format, dir) {
            Ok(path) => eprintln!("wrote {}", path.display()),
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        None => match format {
            ReportFormat::Json => match report.to_json() {
                Ok(s) => print!("{s}"),
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            },
            ReportFormat::Csv => print!("{}", report.to_csv()),
        },
    }
    let failed: Vec<_> = report.failures().collect();
    eprintln!("{}: {} checks, {} failed", report.experiment, report.checks.len(), failed.len());
    for c in &failed {
        eprintln!("  FAIL {} [{}={}] value {:e} tolerance {:e}", c.metric, c.param_name, c.param_value, c.value, c.tolerance);
    }
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
