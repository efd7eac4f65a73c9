//! Run configuration: every report embeds one of these, and re-running a
//! config reproduces the report byte for byte.

// `!(x > 0.0)` is the NaN-rejecting form of the domain checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use serde::{Deserialize, Serialize};

use growthcap::error::{Error, Result};
use growthcap::orders::{BGridSpec, RhoGridSpec};
use growthcap::sitest::{FitMode, TestVariant};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Synthetic market generators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GeneratorSpec {
    HorseRace {
        win_probs: Vec<f64>,
        payoffs: Vec<f64>,
    },
    Rayleigh {
        mean_gains: Vec<f64>,
    },
}

/// How SI labels are attached to generated samples or markets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SiMode {
    None,
    /// Label each period with the index of its best stock (perfect SI for
    /// horse races).
    Winner,
    /// Labels independent of the stocks, uniform over `{1..k}`.
    Independent {
        k: u32,
    },
}

/// Where a market (a distribution) comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MarketInput {
    /// CSV sample path, reduced to its empirical distribution.
    Csv {
        path: String,
        si_column: Option<String>,
    },
    /// Market JSON document (atoms with probabilities, optional SI states).
    MarketJson { path: String },
    /// Exact generator distribution (not sampled).
    Generator {
        generator: GeneratorSpec,
        si: SiMode,
    },
}

/// Where a sample path comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SampleInput {
    Csv {
        path: String,
        si_column: Option<String>,
    },
    Generator {
        generator: GeneratorSpec,
        n: usize,
        si: SiMode,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizeVariant {
    Log,
    Short,
    Utility,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderKind {
    Growth,
    Capacity,
    Laplace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderVariant {
    FixedB,
    FixedBPermutations,
    Optimized,
}

/// The subcommand with its inputs and parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Command {
    Optimize {
        input: MarketInput,
        variant: OptimizeVariant,
        /// Power-utility exponent, used by the `utility` variant.
        alpha: Option<f64>,
    },
    Capacity {
        input: MarketInput,
        /// Fixed total SNR; mutually exclusive with `lambda`. When neither
        /// is given the rho grid is swept.
        rho: Option<f64>,
        lambda: Option<f64>,
        /// Fixed allocation; when absent the optimum is solved per rho.
        alloc: Option<Vec<f64>>,
    },
    Waterfill {
        gains: Vec<f64>,
        rho: f64,
    },
    Order {
        input: MarketInput,
        input2: MarketInput,
        criterion: OrderKind,
        variant: OrderVariant,
    },
    Fvsi {
        input: MarketInput,
    },
    Sitest {
        input: SampleInput,
        target_fa: f64,
        variant: TestVariant,
        fit_mode: FitMode,
    },
    Generate {
        generator: GeneratorSpec,
        n: usize,
        si: SiMode,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Optimize { .. } => "optimize",
            Command::Capacity { .. } => "capacity",
            Command::Waterfill { .. } => "waterfill",
            Command::Order { .. } => "order",
            Command::Fvsi { .. } => "fvsi",
            Command::Sitest { .. } => "sitest",
            Command::Generate { .. } => "generate",
        }
    }
}

/// Complete description of one run. Reports embed this verbatim so any run
/// can be reproduced from its own output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub solver: SolverConfig,
    pub rho_grid: RhoGridSpec,
    pub b_grid: BGridSpec,
    pub seed: u64,
    pub format: OutputFormat,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.solver.tol > 0.0) {
            return Err(invalid("tolerance must be positive"));
        }
        if self.solver.max_iter == 0 {
            return Err(invalid("max_iter must be positive"));
        }
        Ok(())
    }
}

/// Parse `--rho-grid MIN:MAX:COUNT` (log-spaced, values not exponents).
pub fn parse_rho_grid(text: &str) -> Result<RhoGridSpec> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(invalid(format!("rho grid '{text}' must be MIN:MAX:COUNT")));
    }
    let min: f64 = parts[0]
        .parse()
        .map_err(|_| invalid(format!("bad rho grid min '{}'", parts[0])))?;
    let max: f64 = parts[1]
        .parse()
        .map_err(|_| invalid(format!("bad rho grid max '{}'", parts[1])))?;
    let count: usize = parts[2]
        .parse()
        .map_err(|_| invalid(format!("bad rho grid count '{}'", parts[2])))?;
    if !(min > 0.0) || !(max >= min) || count == 0 {
        return Err(invalid(format!("bad rho grid '{text}'")));
    }
    Ok(RhoGridSpec {
        log10_min: min.log10(),
        log10_max: max.log10(),
        count,
        include_endpoints: true,
    })
}

/// Parse a comma-separated list of reals.
pub fn parse_reals(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| invalid(format!("'{s}' is not a number")))
        })
        .collect()
}

/// Parse an SI attachment flag: `none`, `winner`, or `independent:K`.
pub fn parse_si_mode(text: &str) -> Result<SiMode> {
    match text {
        "none" => Ok(SiMode::None),
        "winner" => Ok(SiMode::Winner),
        other => {
            if let Some(k) = other.strip_prefix("independent:") {
                let k: u32 = k
                    .parse()
                    .map_err(|_| invalid(format!("bad SI state count '{k}'")))?;
                if k == 0 {
                    return Err(invalid("SI state count must be positive"));
                }
                Ok(SiMode::Independent { k })
            } else {
                Err(invalid(format!(
                    "SI mode '{other}' is not none, winner, or independent:K"
                )))
            }
        }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
