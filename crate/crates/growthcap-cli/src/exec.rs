//! Deterministic execution of a [`RunConfig`] into a report.
//!
//! Reports embed the config; running the same config again (same files,
//! same seed) renders byte-identical output.

use std::fs;

use serde::Serialize;

use growthcap::channel::{self, PowerAllocation};
use growthcap::error::{Error, Result};
use growthcap::growth::{self, SolveReport};
use growthcap::market::{self, empirical_market, DiscreteMarket, GainDistribution, SampleSet};
use growthcap::orders::{self, OrderCriterion, OrderVerdict, RhoPoint, SolverParams};
use growthcap::serial;
use growthcap::sideinfo::{self, FvsiReport, JointMarket};
use growthcap::sitest::{self, SiTestReport};

use crate::config::{
    Command, GeneratorSpec, MarketInput, OptimizeVariant, OrderKind, OrderVariant, OutputFormat,
    RunConfig, SampleInput, SiMode,
};

const LN_2: f64 = std::f64::consts::LN_2;

#[derive(Debug, Clone, Serialize)]
pub struct CapacityRow {
    pub rho: f64,
    pub capacity_nats: f64,
    pub capacity_bits: f64,
    #[serde(with = "serial::dec_vec")]
    pub allocation: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderSweepRow {
    pub rho: f64,
    /// Left-hand side of the ordering inequality at this rho.
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ReportBody {
    Optimize {
        solve: SolveReport,
        growth_rate_nats: f64,
        growth_rate_bits: f64,
    },
    Capacity {
        rows: Vec<CapacityRow>,
    },
    Waterfill {
        #[serde(with = "serial::dec_vec")]
        allocation: Vec<f64>,
        water_level: f64,
        capacity_nats: f64,
        capacity_bits: f64,
    },
    Order {
        verdict: OrderVerdict,
        sweep: Option<Vec<OrderSweepRow>>,
    },
    Fvsi {
        report: FvsiReport,
        v_nats: f64,
        v_bits: f64,
    },
    Sitest {
        report: SiTestReport,
    },
    Generate {
        samples: serde_json::Value,
    },
}

/// A run's full output: the embedded config plus the result.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub config: RunConfig,
    pub result: ReportBody,
}

pub fn execute(config: &RunConfig) -> Result<Report> {
    config.validate()?;
    let result = match &config.command {
        Command::Optimize {
            input,
            variant,
            alpha,
        } => run_optimize(config, input, *variant, *alpha)?,
        Command::Capacity {
            input,
            rho,
            lambda,
            alloc,
        } => run_capacity(config, input, *rho, *lambda, alloc.as_deref())?,
        Command::Waterfill { gains, rho } => run_waterfill(gains, *rho)?,
        Command::Order {
            input,
            input2,
            criterion,
            variant,
        } => run_order(config, input, input2, *criterion, *variant)?,
        Command::Fvsi { input } => run_fvsi(config, input)?,
        Command::Sitest {
            input,
            target_fa,
            variant,
            fit_mode,
        } => {
            let samples = load_samples(input, config.seed)?;
            let report = sitest::run_si_test(
                &samples,
                *target_fa,
                config.solver.tol,
                config.solver.max_iter,
                *variant,
                *fit_mode,
            )?;
            ReportBody::Sitest { report }
        }
        Command::Generate { generator, n, si } => {
            let samples = generate_samples(generator, *n, si, config.seed)?;
            ReportBody::Generate {
                samples: serde_json::from_str(&samples.to_json_string())
                    .expect("sample JSON parses"),
            }
        }
    };
    Ok(Report {
        config: config.clone(),
        result,
    })
}

fn generate_samples(
    generator: &GeneratorSpec,
    n: usize,
    si: &SiMode,
    seed: u64,
) -> Result<SampleSet> {
    let samples = match generator {
        GeneratorSpec::HorseRace { win_probs, payoffs } => {
            market::gen_horse_race(win_probs.len(), win_probs, payoffs, n, seed)?
        }
        GeneratorSpec::Rayleigh { mean_gains } => {
            market::gen_rayleigh_simo(mean_gains.len(), mean_gains, n, seed)?
        }
    };
    match si {
        SiMode::None => Ok(samples),
        SiMode::Winner => samples.with_winner_si(),
        // labels drawn from a stream decoupled from the price stream
        SiMode::Independent { k } => samples.with_independent_si(*k, seed.wrapping_add(1)),
    }
}

fn load_samples(input: &SampleInput, seed: u64) -> Result<SampleSet> {
    match input {
        SampleInput::Csv { path, si_column } => {
            let file = fs::File::open(path)
                .map_err(|e| Error::InvalidInput(format!("cannot open '{path}': {e}")))?;
            market::load_csv(file, si_column.as_deref())
        }
        SampleInput::Generator { generator, n, si } => generate_samples(generator, *n, si, seed),
    }
}

/// A market distribution, SI dropped.
fn load_market(input: &MarketInput, seed: u64) -> Result<DiscreteMarket> {
    match input {
        MarketInput::Csv { path, si_column } => {
            let file = fs::File::open(path)
                .map_err(|e| Error::InvalidInput(format!("cannot open '{path}': {e}")))?;
            let samples = market::load_csv(file, si_column.as_deref())?;
            Ok(empirical_market(&samples)?.without_si())
        }
        MarketInput::MarketJson { path } => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::InvalidInput(format!("cannot read '{path}': {e}")))?;
            Ok(DiscreteMarket::from_json_str(&text)?.without_si())
        }
        MarketInput::Generator { generator, si: _ } => match generator {
            GeneratorSpec::HorseRace { win_probs, payoffs } => {
                DiscreteMarket::horse_race(win_probs, payoffs)
            }
            GeneratorSpec::Rayleigh { mean_gains } => {
                let _ = seed;
                GainDistribution::exponential(mean_gains.clone())?.to_discrete(None)
            }
        },
    }
}

/// A gain distribution for capacity work (keeps Rayleigh parametric).
fn load_gains(input: &MarketInput) -> Result<GainDistribution> {
    match input {
        MarketInput::Generator {
            generator: GeneratorSpec::Rayleigh { mean_gains },
            ..
        } => GainDistribution::exponential(mean_gains.clone()),
        other => Ok(GainDistribution::discrete(load_market(other, 0)?)),
    }
}

/// A joint market (stocks with SI states).
fn load_joint(input: &MarketInput, seed: u64) -> Result<JointMarket> {
    match input {
        MarketInput::Csv { path, si_column } => {
            if si_column.is_none() {
                return Err(Error::InvalidInput(
                    "side information needs an SI column (--si-column)".into(),
                ));
            }
            let file = fs::File::open(path)
                .map_err(|e| Error::InvalidInput(format!("cannot open '{path}': {e}")))?;
            let samples = market::load_csv(file, si_column.as_deref())?;
            JointMarket::new(empirical_market(&samples)?)
        }
        MarketInput::MarketJson { path } => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::InvalidInput(format!("cannot read '{path}': {e}")))?;
            JointMarket::new(DiscreteMarket::from_json_str(&text)?)
        }
        MarketInput::Generator { generator, si } => {
            let market = match generator {
                GeneratorSpec::HorseRace { win_probs, payoffs } => {
                    DiscreteMarket::horse_race(win_probs, payoffs)?
                }
                GeneratorSpec::Rayleigh { .. } => {
                    return Err(Error::InvalidInput(
                        "joint SI markets need a finite-support generator; \
                         sample a Rayleigh path and use a CSV input instead"
                            .into(),
                    ))
                }
            };
            let _ = seed;
            match si {
                SiMode::Winner => {
                    let states: Vec<u32> = (1..=market.dim() as u32).collect();
                    JointMarket::from_market_and_states(&market, &states)
                }
                SiMode::Independent { k } => {
                    let uniform = vec![1.0 / *k as f64; *k as usize];
                    JointMarket::independent(&market, &uniform)
                }
                SiMode::None => Err(Error::InvalidInput(
                    "side information needs an SI mode (winner or independent:K)".into(),
                )),
            }
        }
    }
}

fn run_optimize(
    config: &RunConfig,
    input: &MarketInput,
    variant: OptimizeVariant,
    alpha: Option<f64>,
) -> Result<ReportBody> {
    let market = load_market(input, config.seed)?;
    let solve = match variant {
        OptimizeVariant::Log => {
            growth::solve_log_optimal(&market, config.solver.tol, config.solver.max_iter)?
        }
        OptimizeVariant::Short => {
            growth::solve_log_optimal_short(&market, config.solver.tol, config.solver.max_iter)?
        }
        OptimizeVariant::Utility => {
            let alpha = alpha
                .ok_or_else(|| Error::InvalidInput("the utility variant needs --alpha".into()))?;
            growth::solve_utility_optimal(
                &market,
                alpha,
                config.solver.tol,
                config.solver.max_iter,
            )?
        }
    };
    Ok(ReportBody::Optimize {
        growth_rate_nats: solve.growth_rate,
        growth_rate_bits: solve.growth_rate / LN_2,
        solve,
    })
}

fn run_capacity(
    config: &RunConfig,
    input: &MarketInput,
    rho: Option<f64>,
    lambda: Option<f64>,
    alloc: Option<&[f64]>,
) -> Result<ReportBody> {
    let gains = load_gains(input)?;
    let rhos: Vec<f64> = match (rho, lambda) {
        (Some(_), Some(_)) => {
            return Err(Error::InvalidInput(
                "--rho and --lambda are mutually exclusive".into(),
            ))
        }
        (Some(r), None) => vec![r],
        (None, Some(l)) => vec![channel::FractionalKellySpec::from_lambda(l)?.rho()],
        (None, None) => config
            .rho_grid
            .points()
            .into_iter()
            .filter_map(|p| match p {
                RhoPoint::Finite(r) => Some(r),
                _ => None,
            })
            .collect(),
    };
    let fixed_alloc = match alloc {
        Some(fractions) => Some(PowerAllocation::new(fractions.to_vec())?),
        None => None,
    };
    let mut rows = Vec::with_capacity(rhos.len());
    for r in rhos {
        let (allocation, capacity) = match &fixed_alloc {
            Some(a) => (a.clone(), channel::ergodic_capacity(&gains, a, r)?),
            None => {
                if r == 0.0 {
                    let a = PowerAllocation::uniform(gains.branches());
                    (a, 0.0)
                } else {
                    let solved = channel::solve_power_allocation(
                        &gains,
                        r,
                        config.solver.tol,
                        config.solver.max_iter,
                    )?;
                    // evaluate at the solved allocation on the original
                    // gains: for parametric branches the quadrature beats
                    // the discretized surrogate's value
                    let capacity = channel::ergodic_capacity(&gains, &solved.allocation, r)?;
                    (solved.allocation, capacity)
                }
            }
        };
        rows.push(CapacityRow {
            rho: r,
            capacity_nats: capacity,
            capacity_bits: capacity / LN_2,
            allocation: allocation.fractions().to_vec(),
        });
    }
    Ok(ReportBody::Capacity { rows })
}

fn run_waterfill(gains: &[f64], rho: f64) -> Result<ReportBody> {
    let wf = channel::water_fill(gains, rho)?;
    // capacity of the implied equiprobable single-winner gain market
    let m = gains.len();
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|j| {
            let mut row = vec![0.0; m];
            row[j] = gains[j];
            row
        })
        .collect();
    let market = DiscreteMarket::from_rows(&rows, &vec![1.0 / m as f64; m])?;
    let capacity =
        channel::ergodic_capacity(&GainDistribution::discrete(market), &wf.allocation, rho)?;
    Ok(ReportBody::Waterfill {
        allocation: wf.allocation.fractions().to_vec(),
        water_level: wf.water_level,
        capacity_nats: capacity,
        capacity_bits: capacity / LN_2,
    })
}

fn run_order(
    config: &RunConfig,
    input: &MarketInput,
    input2: &MarketInput,
    criterion: OrderKind,
    variant: OrderVariant,
) -> Result<ReportBody> {
    let x = load_market(input, config.seed)?;
    let y = load_market(input2, config.seed.wrapping_add(1))?;
    let crit = match criterion {
        OrderKind::Growth => OrderCriterion::Growth,
        OrderKind::Capacity => OrderCriterion::Capacity,
        OrderKind::Laplace => OrderCriterion::Laplace,
    };
    let solver = SolverParams {
        tol: config.solver.tol,
        max_iter: config.solver.max_iter,
    };
    let verdict = match variant {
        OrderVariant::FixedB => {
            if x.dim() == 1 && y.dim() == 1 {
                match criterion {
                    OrderKind::Laplace => orders::lt_order(&x, &y, &config.rho_grid)?,
                    OrderKind::Capacity => orders::capacity_order(&x, &y, &config.rho_grid)?,
                    OrderKind::Growth => orders::vector_order_fixed_b(
                        &x,
                        &y,
                        &crit,
                        &config.b_grid,
                        &config.rho_grid,
                    )?,
                }
            } else {
                orders::vector_order_fixed_b(&x, &y, &crit, &config.b_grid, &config.rho_grid)?
            }
        }
        OrderVariant::FixedBPermutations => orders::vector_order_fixed_b_permutations(
            &x,
            &y,
            &crit,
            &config.b_grid,
            &config.rho_grid,
        )?,
        OrderVariant::Optimized => {
            orders::vector_order_optimized(&x, &y, &crit, &config.rho_grid, &solver)?
        }
    };
    let sweep = order_sweep(&x, &y, criterion, variant, config, &solver)?;
    Ok(ReportBody::Order { verdict, sweep })
}

/// Per-rho (lhs, rhs) rows for plotting, for the transform criteria under
/// the optimized variant.
fn order_sweep(
    x: &DiscreteMarket,
    y: &DiscreteMarket,
    criterion: OrderKind,
    variant: OrderVariant,
    config: &RunConfig,
    solver: &SolverParams,
) -> Result<Option<Vec<OrderSweepRow>>> {
    if variant != OrderVariant::Optimized || criterion == OrderKind::Growth {
        return Ok(None);
    }
    let mut rows = Vec::new();
    for point in config.rho_grid.points() {
        let rho = match point {
            RhoPoint::Finite(r) => r,
            _ => continue,
        };
        let (lhs, rhs) = match criterion {
            OrderKind::Capacity => {
                let cx = channel::solve_power_allocation(
                    &GainDistribution::discrete(x.clone()),
                    rho,
                    solver.tol,
                    solver.max_iter,
                )?
                .capacity;
                let cy = channel::solve_power_allocation(
                    &GainDistribution::discrete(y.clone()),
                    rho,
                    solver.tol,
                    solver.max_iter,
                )?
                .capacity;
                (cx, cy)
            }
            OrderKind::Laplace => {
                let max_exp = |m: &DiscreteMarket| -> f64 {
                    (0..m.dim())
                        .map(|c| {
                            m.atoms()
                                .iter()
                                .map(|a| a.probability * (-rho * a.values.values()[c]).exp())
                                .sum::<f64>()
                        })
                        .fold(f64::NEG_INFINITY, f64::max)
                };
                (max_exp(y), max_exp(x))
            }
            OrderKind::Growth => unreachable!(),
        };
        rows.push(OrderSweepRow { rho, lhs, rhs });
    }
    Ok(Some(rows))
}

fn run_fvsi(config: &RunConfig, input: &MarketInput) -> Result<ReportBody> {
    let jm = load_joint(input, config.seed)?;
    let report = sideinfo::fvsi_report(&jm, config.solver.tol, config.solver.max_iter)?;
    Ok(ReportBody::Fvsi {
        v_nats: report.v_clamped,
        v_bits: report.v_clamped / LN_2,
        report,
    })
}

/// Render the report per the configured format.
pub fn render(report: &Report) -> Result<String> {
    match report.config.format {
        OutputFormat::Json => {
            let mut text = serde_json::to_string_pretty(report).expect("report serializes");
            text.push('\n');
            Ok(text)
        }
        OutputFormat::Csv => render_csv(report),
    }
}

fn render_csv(report: &Report) -> Result<String> {
    match &report.result {
        ReportBody::Capacity { rows } => {
            let mut out = String::from("rho,capacity_nats,capacity_bits");
            let branches = rows.first().map_or(0, |r| r.allocation.len());
            for m in 0..branches {
                out.push_str(&format!(",alloc_{m}"));
            }
            out.push('\n');
            for row in rows {
                out.push_str(&serial::to_dec17(row.rho));
                out.push(',');
                out.push_str(&serial::to_dec17(row.capacity_nats));
                out.push(',');
                out.push_str(&serial::to_dec17(row.capacity_bits));
                for &a in &row.allocation {
                    out.push(',');
                    out.push_str(&serial::to_dec17(a));
                }
                out.push('\n');
            }
            Ok(out)
        }
        ReportBody::Order {
            sweep: Some(rows), ..
        } => {
            let mut out = String::from("rho,lhs,rhs\n");
            for row in rows {
                out.push_str(&format!(
                    "{},{},{}\n",
                    serial::to_dec17(row.rho),
                    serial::to_dec17(row.lhs),
                    serial::to_dec17(row.rhs)
                ));
            }
            Ok(out)
        }
        ReportBody::Order { sweep: None, .. } => Err(Error::InvalidInput(
            "CSV output for `order` needs the optimized variant with a transform criterion".into(),
        )),
        ReportBody::Generate { .. } => {
            let Command::Generate { generator, n, si } = &report.config.command else {
                unreachable!("generate body from generate command");
            };
            let samples = generate_samples(generator, *n, si, report.config.seed)?;
            let si_col = match si {
                SiMode::None => None,
                _ => Some("si"),
            };
            Ok(market::write_csv(&samples, si_col))
        }
        _ => Err(Error::InvalidInput(format!(
            "CSV output is not defined for `{}`",
            report.config.command.name()
        ))),
    }
}

/// One-line human summary, printed to stderr by the binary.
pub fn summary(report: &Report) -> String {
    match &report.result {
        ReportBody::Optimize {
            growth_rate_nats,
            growth_rate_bits,
            solve,
        } => format!(
            "growth rate {growth_rate_nats:.9} nats ({growth_rate_bits:.9} bits), \
             kkt gap {:.3e}, {} iterations{}",
            solve.kkt_gap,
            solve.iterations,
            if solve.converged {
                ""
            } else {
                " (NOT converged)"
            }
        ),
        ReportBody::Capacity { rows } => match rows.len() {
            1 => format!(
                "capacity {:.9} nats ({:.9} bits) at rho {}",
                rows[0].capacity_nats, rows[0].capacity_bits, rows[0].rho
            ),
            n => format!("capacity sweep over {n} rho values"),
        },
        ReportBody::Waterfill {
            water_level,
            capacity_nats,
            ..
        } => format!("water level {water_level:.9}, capacity {capacity_nats:.9} nats"),
        ReportBody::Order { verdict, .. } => format!(
            "order {} (worst margin {:.3e})",
            if verdict.holds { "holds" } else { "fails" },
            verdict.worst_margin
        ),
        ReportBody::Fvsi { report, .. } => format!(
            "FVSI {:.9} nats ({:.9} bits); bounds: mi {:.9}, best-stock entropy {:.9}",
            report.v_clamped,
            report.v_clamped / LN_2,
            report.mi_bound,
            report.entropy_bound
        ),
        ReportBody::Sitest { report } => format!(
            "T = {:.6e}, threshold = {:.6e}, decision: {}",
            report.statistic.t,
            report.threshold,
            match report.decision {
                sitest::Decision::SiUseful => "si_useful",
                sitest::Decision::SiNotUseful => "si_not_useful",
            }
        ),
        ReportBody::Generate { samples } => {
            let n = samples["samples"].as_array().map_or(0, |a| a.len());
            format!("generated {n} samples")
        }
    }
}

/// Exit code per the documented table: 0 success/holds/useful, 1 order
/// fails or SI not useful.
pub fn exit_code(report: &Report) -> i32 {
    match &report.result {
        ReportBody::Order { verdict, .. } => {
            if verdict.holds {
                0
            } else {
                1
            }
        }
        ReportBody::Sitest { report } => match report.decision {
            sitest::Decision::SiUseful => 0,
            sitest::Decision::SiNotUseful => 1,
        },
        _ => 0,
    }
}

/// Exit code for failures: 2 invalid input, 3 solver/numeric failure.
pub fn error_exit_code(err: &Error) -> i32 {
    match err {
        Error::DimensionMismatch { .. }
        | Error::InvalidInput(_)
        | Error::BadRow { .. }
        | Error::ProbabilityMass { .. }
        | Error::EmptySampleSet
        | Error::NonStochasticKernel { .. }
        | Error::MarginalMismatch { .. } => 2,
        Error::Infeasible
        | Error::Unbounded { .. }
        | Error::ZeroPortfolioValue { .. }
        | Error::QuadratureNonConvergence { .. }
        | Error::InfeasibleState { .. }
        | Error::EmptyActiveSet
        | Error::InnerSolve { .. } => 3,
    }
}
