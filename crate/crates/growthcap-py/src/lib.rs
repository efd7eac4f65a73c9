//! Python bindings: markets, sample paths, the portfolio solvers,
//! capacity/water-filling, stochastic orders, FVSI, and the SI test.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use growthcap::channel;
use growthcap::error::Error;
use growthcap::growth;
use growthcap::market::{self, DiscreteMarket, GainDistribution, SampleSet};
use growthcap::orders::{self, BGridSpec, OrderCriterion, RhoGridSpec, SolverParams};
use growthcap::sideinfo::{self, JointMarket};
use growthcap::sitest::{self, FitMode, TestVariant};

fn to_py_err(err: Error) -> PyErr {
    match err {
        Error::DimensionMismatch { .. }
        | Error::InvalidInput(_)
        | Error::BadRow { .. }
        | Error::ProbabilityMass { .. }
        | Error::EmptySampleSet
        | Error::NonStochasticKernel { .. }
        | Error::MarginalMismatch { .. } => PyValueError::new_err(err.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn parse_criterion(name: &str) -> PyResult<OrderCriterion> {
    match name {
        "growth" => Ok(OrderCriterion::Growth),
        "capacity" => Ok(OrderCriterion::Capacity),
        "laplace" => Ok(OrderCriterion::Laplace),
        other => Err(PyValueError::new_err(format!(
            "unknown criterion '{other}' (growth, capacity, laplace)"
        ))),
    }
}

fn portfolio_from_weights(weights: Vec<f64>, allow_short: bool) -> PyResult<growth::Portfolio> {
    if allow_short {
        growth::Portfolio::new_short(weights).map_err(to_py_err)
    } else {
        growth::Portfolio::new(weights).map_err(to_py_err)
    }
}

fn solve_report_dict<'py>(
    py: Python<'py>,
    report: &growth::SolveReport,
) -> PyResult<Bound<'py, PyDict>> {
    let dict = PyDict::new(py);
    dict.set_item("weights", report.portfolio.weights().to_vec())?;
    dict.set_item("growth_rate", report.growth_rate)?;
    dict.set_item("iterations", report.iterations)?;
    dict.set_item("kkt_gap", report.kkt_gap)?;
    dict.set_item("active_set", report.active_set.clone())?;
    dict.set_item("converged", report.converged)?;
    Ok(dict)
}

fn verdict_dict<'py>(
    py: Python<'py>,
    verdict: &orders::OrderVerdict,
) -> PyResult<Bound<'py, PyDict>> {
    let dict = PyDict::new(py);
    dict.set_item("holds", verdict.holds)?;
    dict.set_item("worst_margin", verdict.worst_margin)?;
    dict.set_item("witness_rho", verdict.witness.rho.clone())?;
    dict.set_item("witness_b", verdict.witness.b.clone())?;
    dict.set_item("criterion", verdict.grid_spec.criterion.clone())?;
    dict.set_item("skipped", verdict.skipped.len())?;
    Ok(dict)
}

/// Finite-support market: a distribution over price-relative vectors,
/// optionally tagged with side-information states.
#[pyclass(frozen, name = "Market")]
struct PyMarket {
    inner: DiscreteMarket,
}

#[pymethods]
impl PyMarket {
    /// Build from value rows and probabilities.
    #[staticmethod]
    #[pyo3(signature = (rows, probs, si_states=None))]
    fn from_rows(
        rows: Vec<Vec<f64>>,
        probs: Vec<f64>,
        si_states: Option<Vec<u32>>,
    ) -> PyResult<Self> {
        let market = DiscreteMarket::from_rows(&rows, &probs).map_err(to_py_err)?;
        let market = match si_states {
            Some(states) => JointMarket::from_market_and_states(&market, &states)
                .map_err(to_py_err)?
                .base()
                .clone(),
            None => market,
        };
        Ok(PyMarket { inner: market })
    }

    /// Horse race: atom `e_m * payoffs[m]` with probability `win_probs[m]`.
    #[staticmethod]
    fn horse_race(win_probs: Vec<f64>, payoffs: Vec<f64>) -> PyResult<Self> {
        Ok(PyMarket {
            inner: DiscreteMarket::horse_race(&win_probs, &payoffs).map_err(to_py_err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyMarket {
            inner: DiscreteMarket::from_json_str(text).map_err(to_py_err)?,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json_string()
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn means(&self) -> Vec<f64> {
        self.inner.means()
    }

    fn atoms(&self) -> Vec<(Vec<f64>, Option<u32>, f64)> {
        self.inner
            .atoms()
            .iter()
            .map(|a| (a.values.values().to_vec(), a.si_state, a.probability))
            .collect()
    }

    fn scaled(&self, c: f64) -> PyResult<Self> {
        Ok(PyMarket {
            inner: self.inner.scaled(c).map_err(to_py_err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "Market(dim={}, atoms={})",
            self.inner.dim(),
            self.inner.atoms().len()
        )
    }
}

/// Time series of price-relative vectors with optional SI labels.
#[pyclass(frozen, name = "Samples")]
struct PySamples {
    inner: SampleSet,
}

#[pymethods]
impl PySamples {
    /// Seeded horse-race path.
    #[staticmethod]
    fn horse_race(win_probs: Vec<f64>, payoffs: Vec<f64>, n: usize, seed: u64) -> PyResult<Self> {
        Ok(PySamples {
            inner: market::gen_horse_race(win_probs.len(), &win_probs, &payoffs, n, seed)
                .map_err(to_py_err)?,
        })
    }

    /// Seeded Rayleigh-fading gain path (independent exponential branches).
    #[staticmethod]
    fn rayleigh(mean_gains: Vec<f64>, n: usize, seed: u64) -> PyResult<Self> {
        Ok(PySamples {
            inner: market::gen_rayleigh_simo(mean_gains.len(), &mean_gains, n, seed)
                .map_err(to_py_err)?,
        })
    }

    /// Parse CSV text (header row; optional SI column by name).
    #[staticmethod]
    #[pyo3(signature = (text, si_column=None))]
    fn from_csv(text: &str, si_column: Option<&str>) -> PyResult<Self> {
        Ok(PySamples {
            inner: market::load_csv(text.as_bytes(), si_column).map_err(to_py_err)?,
        })
    }

    fn with_winner_si(&self) -> PyResult<Self> {
        Ok(PySamples {
            inner: self.inner.clone().with_winner_si().map_err(to_py_err)?,
        })
    }

    fn with_independent_si(&self, k: u32, seed: u64) -> PyResult<Self> {
        Ok(PySamples {
            inner: self
                .inner
                .clone()
                .with_independent_si(k, seed)
                .map_err(to_py_err)?,
        })
    }

    fn with_si_labels(&self, labels: Vec<u32>, k: u32) -> PyResult<Self> {
        Ok(PySamples {
            inner: self
                .inner
                .clone()
                .with_si_labels(labels, k)
                .map_err(to_py_err)?,
        })
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        self.inner
            .samples()
            .iter()
            .map(|s| s.values().to_vec())
            .collect()
    }

    fn si_labels(&self) -> Option<Vec<u32>> {
        self.inner.si_labels().map(|l| l.to_vec())
    }

    fn to_json(&self) -> String {
        self.inner.to_json_string()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Samples(n={}, dim={}, si_states={})",
            self.inner.len(),
            self.inner.dim(),
            self.inner.si_state_count()
        )
    }
}

/// Empirical distribution of a sample path (exact count ratios).
#[pyfunction]
fn empirical_market(samples: &PySamples) -> PyResult<PyMarket> {
    Ok(PyMarket {
        inner: market::empirical_market(&samples.inner).map_err(to_py_err)?,
    })
}

/// Equal-population quantile labels in {1..k}, ties toward the lower bin.
#[pyfunction]
fn discretize_si(values: Vec<f64>, k: u32) -> PyResult<Vec<u32>> {
    market::discretize_si(&values, k).map_err(to_py_err)
}

/// Expected log growth E[log(b^T X)] in nats (-inf if wealth is wiped out).
#[pyfunction]
#[pyo3(signature = (market, weights, allow_short=false))]
fn growth_rate(market: &PyMarket, weights: Vec<f64>, allow_short: bool) -> PyResult<f64> {
    let b = portfolio_from_weights(weights, allow_short)?;
    growth::growth_rate(&market.inner, &b).map_err(to_py_err)
}

/// Wealth trajectory S_n of a fixed portfolio along a sample path.
#[pyfunction]
#[pyo3(signature = (samples, weights, allow_short=false))]
fn wealth_trajectory(
    samples: &PySamples,
    weights: Vec<f64>,
    allow_short: bool,
) -> PyResult<Vec<f64>> {
    let b = portfolio_from_weights(weights, allow_short)?;
    growth::wealth_trajectory(&samples.inner, &b).map_err(to_py_err)
}

/// KKT residuals E[X_m / (b^T X)]; all ones at the optimum's active set.
#[pyfunction]
#[pyo3(signature = (market, weights, allow_short=false))]
fn kkt_residuals(market: &PyMarket, weights: Vec<f64>, allow_short: bool) -> PyResult<Vec<f64>> {
    let b = portfolio_from_weights(weights, allow_short)?;
    growth::kkt_residuals(&market.inner, &b).map_err(to_py_err)
}

/// Growth-optimal portfolio over the simplex (multiplicative update).
#[pyfunction]
#[pyo3(signature = (market, tol=1e-9, max_iter=100_000))]
fn solve_log_optimal<'py>(
    py: Python<'py>,
    market: &PyMarket,
    tol: f64,
    max_iter: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let report = growth::solve_log_optimal(&market.inner, tol, max_iter).map_err(to_py_err)?;
    solve_report_dict(py, &report)
}

/// Growth-optimal portfolio with short selling (hyperplane ascent).
#[pyfunction]
#[pyo3(signature = (market, tol=1e-9, max_iter=100_000))]
fn solve_log_optimal_short<'py>(
    py: Python<'py>,
    market: &PyMarket,
    tol: f64,
    max_iter: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let report =
        growth::solve_log_optimal_short(&market.inner, tol, max_iter).map_err(to_py_err)?;
    solve_report_dict(py, &report)
}

/// Power-utility optimal portfolio, u(x) = (x^alpha - 1)/alpha.
#[pyfunction]
#[pyo3(signature = (market, alpha, tol=1e-9, max_iter=100_000))]
fn solve_utility_optimal<'py>(
    py: Python<'py>,
    market: &PyMarket,
    alpha: f64,
    tol: f64,
    max_iter: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let report =
        growth::solve_utility_optimal(&market.inner, alpha, tol, max_iter).map_err(to_py_err)?;
    solve_report_dict(py, &report)
}

/// Fractional-Kelly growth at a fixed cash fraction: returns
/// (objective, per_period_growth) where the objective is
/// E[log(1 + rho * b~^T X~)] and the growth adds log(lambda).
#[pyfunction]
fn fractional_kelly_growth(
    risky: &PyMarket,
    lambda: f64,
    btilde: Vec<f64>,
) -> PyResult<(f64, f64)> {
    let spec = channel::FractionalKellySpec::from_lambda(lambda).map_err(to_py_err)?;
    let alloc = channel::PowerAllocation::new(btilde).map_err(to_py_err)?;
    let g = channel::fractional_kelly_growth(&risky.inner, spec, &alloc).map_err(to_py_err)?;
    Ok((g.objective, g.growth_rate))
}

/// Ergodic capacity E[log(1 + rho * alloc . g)] for finite-support gains.
#[pyfunction]
fn ergodic_capacity(gains: &PyMarket, alloc: Vec<f64>, rho: f64) -> PyResult<f64> {
    let alloc = channel::PowerAllocation::new(alloc).map_err(to_py_err)?;
    channel::ergodic_capacity(
        &GainDistribution::discrete(gains.inner.clone()),
        &alloc,
        rho,
    )
    .map_err(to_py_err)
}

/// Ergodic capacity for independent exponential branches (quadrature).
#[pyfunction]
fn ergodic_capacity_exponential(means: Vec<f64>, alloc: Vec<f64>, rho: f64) -> PyResult<f64> {
    let gains = GainDistribution::exponential(means).map_err(to_py_err)?;
    let alloc = channel::PowerAllocation::new(alloc).map_err(to_py_err)?;
    channel::ergodic_capacity(&gains, &alloc, rho).map_err(to_py_err)
}

/// Capacity-optimal power allocation at total SNR rho.
#[pyfunction]
#[pyo3(signature = (gains, rho, tol=1e-9, max_iter=100_000))]
fn solve_power_allocation<'py>(
    py: Python<'py>,
    gains: &PyMarket,
    rho: f64,
    tol: f64,
    max_iter: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let report = channel::solve_power_allocation(
        &GainDistribution::discrete(gains.inner.clone()),
        rho,
        tol,
        max_iter,
    )
    .map_err(to_py_err)?;
    let dict = PyDict::new(py);
    dict.set_item("allocation", report.allocation.fractions().to_vec())?;
    dict.set_item("capacity", report.capacity)?;
    dict.set_item("iterations", report.solve.iterations)?;
    dict.set_item("kkt_gap", report.solve.kkt_gap)?;
    dict.set_item("converged", report.solve.converged)?;
    Ok(dict)
}

/// Closed-form water-filling over fixed positive gains; returns
/// (fractions, water_level).
#[pyfunction]
fn water_fill(gains: Vec<f64>, rho: f64) -> PyResult<(Vec<f64>, f64)> {
    let wf = channel::water_fill(&gains, rho).map_err(to_py_err)?;
    Ok((wf.allocation.fractions().to_vec(), wf.water_level))
}

/// Laplace-transform order X <=_LT Y between scalar markets.
#[pyfunction]
fn lt_order<'py>(py: Python<'py>, x: &PyMarket, y: &PyMarket) -> PyResult<Bound<'py, PyDict>> {
    let verdict =
        orders::lt_order(&x.inner, &y.inner, &RhoGridSpec::default()).map_err(to_py_err)?;
    verdict_dict(py, &verdict)
}

/// Ergodic-capacity (Shannon-transform) order between scalar markets.
#[pyfunction]
fn capacity_order<'py>(
    py: Python<'py>,
    x: &PyMarket,
    y: &PyMarket,
) -> PyResult<Bound<'py, PyDict>> {
    let verdict =
        orders::capacity_order(&x.inner, &y.inner, &RhoGridSpec::default()).map_err(to_py_err)?;
    verdict_dict(py, &verdict)
}

/// Fixed-portfolio vector ordering over the declared simplex/rho grids.
#[pyfunction]
#[pyo3(signature = (x, y, criterion="growth"))]
fn vector_order_fixed_b<'py>(
    py: Python<'py>,
    x: &PyMarket,
    y: &PyMarket,
    criterion: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let crit = parse_criterion(criterion)?;
    let verdict = orders::vector_order_fixed_b(
        &x.inner,
        &y.inner,
        &crit,
        &BGridSpec::default(),
        &RhoGridSpec::default(),
    )
    .map_err(to_py_err)?;
    verdict_dict(py, &verdict)
}

/// Optimized vector ordering (both sides maximized before comparison).
#[pyfunction]
#[pyo3(signature = (x, y, criterion="growth", tol=1e-9, max_iter=100_000))]
fn vector_order_optimized<'py>(
    py: Python<'py>,
    x: &PyMarket,
    y: &PyMarket,
    criterion: &str,
    tol: f64,
    max_iter: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let crit = parse_criterion(criterion)?;
    let verdict = orders::vector_order_optimized(
        &x.inner,
        &y.inner,
        &crit,
        &RhoGridSpec::default(),
        &SolverParams { tol, max_iter },
    )
    .map_err(to_py_err)?;
    verdict_dict(py, &verdict)
}

fn joint(market: &PyMarket) -> PyResult<JointMarket> {
    JointMarket::new(market.inner.clone()).map_err(to_py_err)
}

/// FVSI report: value, both bounds, and the per-state solves. The market's
/// atoms must carry SI states.
#[pyfunction]
#[pyo3(signature = (market, tol=1e-9, max_iter=100_000))]
fn fvsi_report<'py>(
    py: Python<'py>,
    market: &PyMarket,
    tol: f64,
    max_iter: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let report = sideinfo::fvsi_report(&joint(market)?, tol, max_iter).map_err(to_py_err)?;
    let dict = PyDict::new(py);
    dict.set_item("v_raw", report.v_raw)?;
    dict.set_item("v_clamped", report.v_clamped)?;
    dict.set_item("mi_bound", report.mi_bound)?;
    dict.set_item("entropy_bound", report.entropy_bound)?;
    dict.set_item("tighter_bound", report.tighter_bound)?;
    dict.set_item("base_growth", report.base_growth)?;
    dict.set_item("aided_growth", report.aided_growth)?;
    let per_state = PyList::empty(py);
    for s in &report.per_state {
        let row = PyDict::new(py);
        row.set_item("state", s.state)?;
        row.set_item("probability", s.probability)?;
        row.set_item("weights", s.weights.clone())?;
        row.set_item("growth_rate", s.growth_rate)?;
        per_state.append(row)?;
    }
    dict.set_item("per_state", per_state)?;
    Ok(dict)
}

/// Plug-in mutual information I(X; S) in nats.
#[pyfunction]
fn mutual_information(market: &PyMarket) -> PyResult<f64> {
    Ok(sideinfo::mutual_information(&joint(market)?))
}

/// Entropy of the best-stock index in nats (ties to the lowest index).
#[pyfunction]
fn best_stock_entropy(market: &PyMarket) -> f64 {
    sideinfo::best_stock_entropy(&market.inner)
}

/// Pass the SI through a stochastic kernel (X - S - Z by construction).
#[pyfunction]
#[pyo3(signature = (market, kernel, seed=0))]
fn garble_si(market: &PyMarket, kernel: Vec<Vec<f64>>, seed: u64) -> PyResult<PyMarket> {
    let garbled = sideinfo::garble_si(&joint(market)?, &kernel, seed).map_err(to_py_err)?;
    Ok(PyMarket {
        inner: garbled.base().clone(),
    })
}

/// Certify convexity of the SI-aided growth along the kernel segment
/// between two joints sharing both marginals.
#[pyfunction]
#[pyo3(signature = (jm1, jm2, t_grid, tol=1e-9, max_iter=100_000))]
fn convexity_probe<'py>(
    py: Python<'py>,
    jm1: &PyMarket,
    jm2: &PyMarket,
    t_grid: Vec<f64>,
    tol: f64,
    max_iter: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let report = sideinfo::convexity_probe(&joint(jm1)?, &joint(jm2)?, &t_grid, tol, max_iter)
        .map_err(to_py_err)?;
    let dict = PyDict::new(py);
    dict.set_item("convex", report.convex)?;
    dict.set_item("max_excess", report.max_excess)?;
    let rows: Vec<(f64, f64, f64)> = report
        .rows
        .iter()
        .map(|r| (r.t, r.mixture_growth, r.chord))
        .collect();
    dict.set_item("rows", rows)?;
    Ok(dict)
}

/// The product of a joint market's own marginals (SI made independent).
#[pyfunction]
fn independent_coupling(market: &PyMarket) -> PyResult<PyMarket> {
    Ok(PyMarket {
        inner: joint(market)?.independent_coupling().base().clone(),
    })
}

/// The raw test statistic T for a given reference portfolio and active set;
/// with `alpha` set, the general-utility variant is used.
#[pyfunction]
#[pyo3(signature = (samples, bstar, active, alpha=None, allow_short=false))]
fn si_test_statistic<'py>(
    py: Python<'py>,
    samples: &PySamples,
    bstar: Vec<f64>,
    active: Vec<usize>,
    alpha: Option<f64>,
    allow_short: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let b = portfolio_from_weights(bstar, allow_short)?;
    let stat = match alpha {
        Some(a) => sitest::si_test_statistic_gen(&samples.inner, &b, &active, a),
        None => sitest::si_test_statistic(&samples.inner, &b, &active),
    }
    .map_err(to_py_err)?;
    let dict = PyDict::new(py);
    dict.set_item("t", stat.t)?;
    dict.set_item("components", stat.components.clone())?;
    dict.set_item("active", stat.active.clone())?;
    dict.set_item("states", stat.states.clone())?;
    dict.set_item("per_state_counts", stat.per_state_counts.clone())?;
    dict.set_item("dropped_states", stat.dropped_states.clone())?;
    Ok(dict)
}

/// Variance proxy theta for the SI-test false-alarm bound.
#[pyfunction]
fn theta_bound(
    n: usize,
    si_marginal: Vec<f64>,
    bstar: Vec<f64>,
    active: Vec<usize>,
) -> PyResult<f64> {
    let b = portfolio_from_weights(bstar, true)?;
    sitest::theta_bound(n, &si_marginal, &b, &active).map_err(to_py_err)
}

/// Incomplete-gamma false-alarm bound P[T > tau | H0].
#[pyfunction]
fn false_alarm_bound(tau: f64, theta: f64, num_assets: usize, num_states: usize) -> PyResult<f64> {
    sitest::false_alarm_bound(tau, theta, num_assets, num_states).map_err(to_py_err)
}

/// Smallest threshold whose false-alarm bound meets the target.
#[pyfunction]
fn choose_threshold(
    target_fa: f64,
    theta: f64,
    num_assets: usize,
    num_states: usize,
) -> PyResult<f64> {
    sitest::choose_threshold(target_fa, theta, num_assets, num_states).map_err(to_py_err)
}

/// End-to-end KKT test for the usefulness of side information.
#[pyfunction]
#[pyo3(signature = (samples, target_fa=0.05, variant="log", alpha=None, split_sample=false, tol=1e-9, max_iter=100_000))]
#[allow(clippy::too_many_arguments)]
fn run_si_test<'py>(
    py: Python<'py>,
    samples: &PySamples,
    target_fa: f64,
    variant: &str,
    alpha: Option<f64>,
    split_sample: bool,
    tol: f64,
    max_iter: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let variant = match variant {
        "log" => TestVariant::Log,
        "short" => TestVariant::Short,
        "general" => TestVariant::General {
            alpha: alpha.ok_or_else(|| PyValueError::new_err("the general variant needs alpha"))?,
        },
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown variant '{other}' (log, short, general)"
            )))
        }
    };
    let fit_mode = if split_sample {
        FitMode::SplitHalf
    } else {
        FitMode::InSample
    };
    let report = sitest::run_si_test(&samples.inner, target_fa, tol, max_iter, variant, fit_mode)
        .map_err(to_py_err)?;
    let dict = PyDict::new(py);
    dict.set_item("t", report.statistic.t)?;
    dict.set_item("components", report.statistic.components.clone())?;
    dict.set_item("active", report.statistic.active.clone())?;
    dict.set_item("states", report.statistic.states.clone())?;
    dict.set_item(
        "per_state_counts",
        report.statistic.per_state_counts.clone(),
    )?;
    dict.set_item("theta", report.theta)?;
    dict.set_item("threshold", report.threshold)?;
    dict.set_item("false_alarm_bound", report.false_alarm_bound)?;
    dict.set_item(
        "decision",
        match report.decision {
            sitest::Decision::SiUseful => "si_useful",
            sitest::Decision::SiNotUseful => "si_not_useful",
        },
    )?;
    dict.set_item("per_cell_decisions", report.per_cell_decisions.clone())?;
    dict.set_item("bstar", report.bstar.clone())?;
    dict.set_item("n", report.n)?;
    Ok(dict)
}

#[pymodule]
fn growthcap_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMarket>()?;
    m.add_class::<PySamples>()?;
    m.add_function(wrap_pyfunction!(empirical_market, m)?)?;
    m.add_function(wrap_pyfunction!(discretize_si, m)?)?;
    m.add_function(wrap_pyfunction!(growth_rate, m)?)?;
    m.add_function(wrap_pyfunction!(wealth_trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(kkt_residuals, m)?)?;
    m.add_function(wrap_pyfunction!(solve_log_optimal, m)?)?;
    m.add_function(wrap_pyfunction!(solve_log_optimal_short, m)?)?;
    m.add_function(wrap_pyfunction!(solve_utility_optimal, m)?)?;
    m.add_function(wrap_pyfunction!(fractional_kelly_growth, m)?)?;
    m.add_function(wrap_pyfunction!(ergodic_capacity, m)?)?;
    m.add_function(wrap_pyfunction!(ergodic_capacity_exponential, m)?)?;
    m.add_function(wrap_pyfunction!(solve_power_allocation, m)?)?;
    m.add_function(wrap_pyfunction!(water_fill, m)?)?;
    m.add_function(wrap_pyfunction!(lt_order, m)?)?;
    m.add_function(wrap_pyfunction!(capacity_order, m)?)?;
    m.add_function(wrap_pyfunction!(vector_order_fixed_b, m)?)?;
    m.add_function(wrap_pyfunction!(vector_order_optimized, m)?)?;
    m.add_function(wrap_pyfunction!(fvsi_report, m)?)?;
    m.add_function(wrap_pyfunction!(mutual_information, m)?)?;
    m.add_function(wrap_pyfunction!(best_stock_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(garble_si, m)?)?;
    m.add_function(wrap_pyfunction!(convexity_probe, m)?)?;
    m.add_function(wrap_pyfunction!(independent_coupling, m)?)?;
    m.add_function(wrap_pyfunction!(si_test_statistic, m)?)?;
    m.add_function(wrap_pyfunction!(theta_bound, m)?)?;
    m.add_function(wrap_pyfunction!(false_alarm_bound, m)?)?;
    m.add_function(wrap_pyfunction!(choose_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(run_si_test, m)?)?;
    Ok(())
}
