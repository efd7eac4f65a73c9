//! `growthcap` — growth-optimal portfolios, ergodic capacity, stochastic
//! orders, and side-information analysis from the command line.
//!
//! Exit codes: 0 success (order holds / SI useful), 1 order fails or SI not
//! useful, 2 invalid input or flags, 3 solver or numeric failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use growthcap::error::Error;
use growthcap::orders::{BGridSpec, RhoGridSpec};
use growthcap::sitest::{FitMode, TestVariant};
use growthcap_cli::config::{
    parse_reals, parse_rho_grid, parse_si_mode, Command, GeneratorSpec, MarketInput,
    OptimizeVariant, OrderKind, OrderVariant, OutputFormat, RunConfig, SampleInput, SiMode,
    SolverConfig,
};
use growthcap_cli::exec;

#[derive(Parser)]
#[command(
    name = "growthcap",
    about = "Growth-optimal (Kelly) portfolios, fading-channel capacity, \
             stochastic orders, and the value of side information",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Subcommand)]
enum CliCommand {
    /// Solve for the growth-optimal portfolio of a market.
    Optimize(OptimizeArgs),
    /// Ergodic capacity and optimal power allocation, single rho or a sweep.
    Capacity(CapacityArgs),
    /// Closed-form water-filling over fixed gains.
    Waterfill(WaterfillArgs),
    /// Check a stochastic order between two markets.
    Order(OrderArgs),
    /// Financial value of side information with its bounds.
    Fvsi(FvsiArgs),
    /// KKT-based test for the usefulness of side information.
    Sitest(SitestArgs),
    /// Generate a synthetic sample path.
    Generate(GenerateArgs),
    /// Re-run the config embedded in a previous report.
    Rerun(RerunArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Solver tolerance (KKT gap).
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Solver iteration budget.
    #[arg(long, default_value_t = 100_000)]
    max_iter: u64,
    /// Log-spaced rho grid as MIN:MAX:COUNT.
    #[arg(long, default_value = "1e-3:1e3:61")]
    rho_grid: String,
    /// Simplex lattice mesh denominator for fixed-b grids.
    #[arg(long, default_value_t = 20)]
    b_mesh: usize,
    /// Interior points used when the dimension exceeds the lattice range.
    #[arg(long, default_value_t = 512)]
    low_discrepancy: usize,
    /// Generator seed (always recorded in the report).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, default_value = "json")]
    format: String,
}

#[derive(Args)]
struct InputArgs {
    /// Input path: `.json` market documents, anything else is CSV samples.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Name of the SI column in CSV input.
    #[arg(long)]
    si_column: Option<String>,
    /// Synthetic generator family: horse-race or rayleigh.
    #[arg(long)]
    gen: Option<String>,
    /// Horse-race win probabilities (comma separated).
    #[arg(long)]
    win_probs: Option<String>,
    /// Horse-race payoffs (comma separated).
    #[arg(long)]
    payoffs: Option<String>,
    /// Rayleigh per-branch mean gains (comma separated).
    #[arg(long)]
    mean_gains: Option<String>,
    /// SI attachment for generator inputs: none, winner, independent:K.
    #[arg(long)]
    si: Option<String>,
}

impl InputArgs {
    fn generator(&self) -> Result<Option<GeneratorSpec>, Error> {
        match self.gen.as_deref() {
            None => Ok(None),
            Some("horse-race") => {
                let win_probs = parse_reals(self.win_probs.as_deref().ok_or_else(|| {
                    Error::InvalidInput("horse-race generator needs --win-probs".into())
                })?)?;
                let payoffs = match &self.payoffs {
                    Some(text) => parse_reals(text)?,
                    None => vec![win_probs.len() as f64; win_probs.len()],
                };
                Ok(Some(GeneratorSpec::HorseRace { win_probs, payoffs }))
            }
            Some("rayleigh") => {
                let mean_gains = parse_reals(self.mean_gains.as_deref().ok_or_else(|| {
                    Error::InvalidInput("rayleigh generator needs --mean-gains".into())
                })?)?;
                Ok(Some(GeneratorSpec::Rayleigh { mean_gains }))
            }
            Some(other) => Err(Error::InvalidInput(format!(
                "unknown generator '{other}' (horse-race or rayleigh)"
            ))),
        }
    }

    fn si_mode(&self) -> Result<SiMode, Error> {
        match &self.si {
            None => Ok(SiMode::None),
            Some(text) => parse_si_mode(text),
        }
    }

    fn market_input(&self) -> Result<MarketInput, Error> {
        if let Some(generator) = self.generator()? {
            return Ok(MarketInput::Generator {
                generator,
                si: self.si_mode()?,
            });
        }
        let path = self
            .input
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("need --input or a --gen generator".into()))?;
        Ok(path_market_input(path, self.si_column.clone()))
    }

    fn sample_input(&self, n: usize) -> Result<SampleInput, Error> {
        if let Some(generator) = self.generator()? {
            return Ok(SampleInput::Generator {
                generator,
                n,
                si: self.si_mode()?,
            });
        }
        let path = self
            .input
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("need --input or a --gen generator".into()))?;
        Ok(SampleInput::Csv {
            path: path.display().to_string(),
            si_column: self.si_column.clone(),
        })
    }
}

fn path_market_input(path: &Path, si_column: Option<String>) -> MarketInput {
    if path.extension().is_some_and(|e| e == "json") {
        MarketInput::MarketJson {
            path: path.display().to_string(),
        }
    } else {
        MarketInput::Csv {
            path: path.display().to_string(),
            si_column,
        }
    }
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Solver variant: log, short, or utility.
    #[arg(long, default_value = "log")]
    variant: String,
    /// Power-utility exponent in (0, 1] for the utility variant.
    #[arg(long)]
    alpha: Option<f64>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct CapacityArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Total SNR; omit together with --lambda to sweep the rho grid.
    #[arg(long)]
    rho: Option<f64>,
    /// Cash fraction; rho = (1 - lambda) / lambda.
    #[arg(long)]
    lambda: Option<f64>,
    /// Fixed power fractions (comma separated) instead of optimizing.
    #[arg(long)]
    alloc: Option<String>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct WaterfillArgs {
    /// Branch gains (comma separated).
    #[arg(long)]
    gains: String,
    #[arg(long)]
    rho: f64,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct OrderArgs {
    /// First market (X side): `.json` market or CSV samples.
    #[arg(long)]
    input: PathBuf,
    /// Second market (Y side).
    #[arg(long)]
    input2: PathBuf,
    #[arg(long)]
    si_column: Option<String>,
    /// growth, capacity, or laplace.
    #[arg(long)]
    criterion: String,
    /// fixed-b, fixed-b-permutations, or optimized.
    #[arg(long, default_value = "fixed-b")]
    variant: String,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct FvsiArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SitestArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Sample count for generator inputs.
    #[arg(short = 'n', long, default_value_t = 1000)]
    n: usize,
    /// Target false-alarm probability in (0, 1).
    #[arg(long, default_value_t = 0.05)]
    target_fa: f64,
    /// Test variant: log, short, or general.
    #[arg(long, default_value = "log")]
    variant: String,
    /// Power-utility exponent for the general variant.
    #[arg(long)]
    alpha: Option<f64>,
    /// Fit the reference portfolio on the first half only.
    #[arg(long)]
    split_sample: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Number of periods.
    #[arg(short = 'n', long)]
    n: usize,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct RerunArgs {
    /// A previous report (or bare config) JSON file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn build_common(
    common: &CommonArgs,
) -> Result<(SolverConfig, RhoGridSpec, BGridSpec, u64, OutputFormat), Error> {
    let solver = SolverConfig {
        tol: common.tol,
        max_iter: common.max_iter,
    };
    let rho_grid = parse_rho_grid(&common.rho_grid)?;
    let b_grid = BGridSpec {
        mesh: common.b_mesh,
        low_discrepancy: common.low_discrepancy,
    };
    let format = match common.format.as_str() {
        "json" => OutputFormat::Json,
        "csv" => OutputFormat::Csv,
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown format '{other}' (json or csv)"
            )))
        }
    };
    Ok((solver, rho_grid, b_grid, common.seed, format))
}

fn build_config(cli: CliCommand) -> Result<(RunConfig, Option<PathBuf>), Error> {
    let (command, common) = match cli {
        CliCommand::Optimize(args) => {
            let variant = match args.variant.as_str() {
                "log" => OptimizeVariant::Log,
                "short" => OptimizeVariant::Short,
                "utility" => OptimizeVariant::Utility,
                other => {
                    return Err(Error::InvalidInput(format!(
                        "unknown optimize variant '{other}'"
                    )))
                }
            };
            (
                Command::Optimize {
                    input: args.input.market_input()?,
                    variant,
                    alpha: args.alpha,
                },
                args.common,
            )
        }
        CliCommand::Capacity(args) => (
            Command::Capacity {
                input: args.input.market_input()?,
                rho: args.rho,
                lambda: args.lambda,
                alloc: args.alloc.as_deref().map(parse_reals).transpose()?,
            },
            args.common,
        ),
        CliCommand::Waterfill(args) => (
            Command::Waterfill {
                gains: parse_reals(&args.gains)?,
                rho: args.rho,
            },
            args.common,
        ),
        CliCommand::Order(args) => {
            let criterion = match args.criterion.as_str() {
                "growth" => OrderKind::Growth,
                "capacity" => OrderKind::Capacity,
                "laplace" => OrderKind::Laplace,
                other => {
                    return Err(Error::InvalidInput(format!(
                        "unknown criterion '{other}' (growth, capacity, laplace)"
                    )))
                }
            };
            let variant = match args.variant.as_str() {
                "fixed-b" => OrderVariant::FixedB,
                "fixed-b-permutations" => OrderVariant::FixedBPermutations,
                "optimized" => OrderVariant::Optimized,
                other => {
                    return Err(Error::InvalidInput(format!(
                        "unknown order variant '{other}'"
                    )))
                }
            };
            (
                Command::Order {
                    input: path_market_input(&args.input, args.si_column.clone()),
                    input2: path_market_input(&args.input2, args.si_column.clone()),
                    criterion,
                    variant,
                },
                args.common,
            )
        }
        CliCommand::Fvsi(args) => (
            Command::Fvsi {
                input: args.input.market_input()?,
            },
            args.common,
        ),
        CliCommand::Sitest(args) => {
            let variant = match args.variant.as_str() {
                "log" => TestVariant::Log,
                "short" => TestVariant::Short,
                "general" => TestVariant::General {
                    alpha: args.alpha.ok_or_else(|| {
                        Error::InvalidInput("the general variant needs --alpha".into())
                    })?,
                },
                other => {
                    return Err(Error::InvalidInput(format!(
                        "unknown test variant '{other}' (log, short, general)"
                    )))
                }
            };
            (
                Command::Sitest {
                    input: args.input.sample_input(args.n)?,
                    target_fa: args.target_fa,
                    variant,
                    fit_mode: if args.split_sample {
                        FitMode::SplitHalf
                    } else {
                        FitMode::InSample
                    },
                },
                args.common,
            )
        }
        CliCommand::Generate(args) => {
            let generator = args
                .input
                .generator()?
                .ok_or_else(|| Error::InvalidInput("generate needs a --gen generator".into()))?;
            (
                Command::Generate {
                    generator,
                    n: args.n,
                    si: args.input.si_mode()?,
                },
                args.common,
            )
        }
        CliCommand::Rerun(_) => unreachable!("rerun handled before config building"),
    };
    let (solver, rho_grid, b_grid, seed, format) = build_common(&common)?;
    Ok((
        RunConfig {
            command,
            solver,
            rho_grid,
            b_grid,
            seed,
            format,
        },
        common.out,
    ))
}

fn load_rerun_config(path: &PathBuf) -> Result<RunConfig, Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read '{}': {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidInput(format!("bad JSON in '{}': {e}", path.display())))?;
    let config_value = if value.get("config").is_some() {
        value["config"].clone()
    } else {
        value
    };
    serde_json::from_value(config_value)
        .map_err(|e| Error::InvalidInput(format!("no usable config in report: {e}")))
}

fn run() -> Result<ExitCode, (Error, i32)> {
    let cli = Cli::parse();
    let (config, out) = match cli.command {
        CliCommand::Rerun(args) => {
            let config = load_rerun_config(&args.input).map_err(|e| (e, 2))?;
            (config, args.out)
        }
        other => build_config(other).map_err(|e| (e, 2))?,
    };
    let report = exec::execute(&config).map_err(|e| {
        let code = exec::error_exit_code(&e);
        (e, code)
    })?;
    let rendered = exec::render(&report).map_err(|e| (e, 2))?;
    match &out {
        Some(path) => {
            fs::write(path, &rendered)
                .map_err(|e| (Error::InvalidInput(format!("cannot write output: {e}")), 2))?;
        }
        None => print!("{rendered}"),
    }
    eprintln!("{}", exec::summary(&report));
    Ok(ExitCode::from(exec::exit_code(&report) as u8))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run() {
        Ok(code) => code,
        Err((err, code)) => {
            eprintln!("error: {err}");
            ExitCode::from(code as u8)
        }
    }
}
