//! KKT-based statistical test for the usefulness of side information.
//!
//! If the unconditionally optimal portfolio stays optimal given every SI
//! state, the conditional KKT residuals `E[X_m / (b*^T X) | S = k]` all equal
//! one. The test statistic accumulates the squared per-(stock, state)
//! deviations of their sample means from one; under the independence null it
//! concentrates at zero, and its tail is bounded through a chi-square-style
//! incomplete-gamma expression with a distribution-free variance proxy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::growth::{self, Portfolio, SolveReport};
use crate::market::{empirical_market, SampleSet};
use crate::serial;
use crate::simplex;
use crate::special;

/// Statistic fields of the SI test: the total `T`, its per-(stock, state)
/// components, and the state bookkeeping.
#[derive(Debug, Clone, Serialize)]
pub struct SiStatistic {
    /// `T = sum over active m and retained k of components[m][k]`.
    pub t: f64,
    /// Row per active stock, column per retained state.
    pub components: Vec<Vec<f64>>,
    /// Stock indices the rows refer to.
    pub active: Vec<usize>,
    /// Retained SI states (ascending); states with no samples are dropped.
    pub states: Vec<u32>,
    /// Sample count per retained state; sums to the sample count.
    pub per_state_counts: Vec<usize>,
    pub dropped_states: Vec<u32>,
}

// retained states, their sample indices, and the dropped states
type StateGroups = (Vec<u32>, Vec<Vec<usize>>, Vec<u32>);

fn group_by_state(samples: &SampleSet) -> Result<StateGroups> {
    let labels = samples
        .si_labels()
        .ok_or_else(|| Error::invalid("samples carry no SI labels"))?;
    let k = samples.si_state_count() as usize;
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (n, &label) in labels.iter().enumerate() {
        groups[(label - 1) as usize].push(n);
    }
    let mut states = Vec::new();
    let mut retained = Vec::new();
    let mut dropped = Vec::new();
    for (i, group) in groups.into_iter().enumerate() {
        let state = i as u32 + 1;
        if group.is_empty() {
            log::warn!("SI state {state} has no samples; dropped from the statistic");
            dropped.push(state);
        } else {
            states.push(state);
            retained.push(group);
        }
    }
    if states.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    Ok((states, retained, dropped))
}

/// Test statistic for the log-utility KKT conditions:
/// `T_{m,k} = | mean_{n in I_k} X_m^(n) / (b*^T X^(n)) - 1 |^2`,
/// summed over the active stocks and retained states.
pub fn si_test_statistic(
    samples: &SampleSet,
    bstar: &Portfolio,
    active: &[usize],
) -> Result<SiStatistic> {
    if active.is_empty() {
        return Err(Error::EmptyActiveSet);
    }
    if samples.dim() != bstar.dim() {
        return Err(Error::DimensionMismatch {
            expected: samples.dim(),
            got: bstar.dim(),
        });
    }
    let (states, groups, dropped) = group_by_state(samples)?;
    let rows = samples.samples();
    let mut components = vec![vec![0.0; states.len()]; active.len()];
    let mut per_state_counts = Vec::with_capacity(states.len());
    for (col, group) in groups.iter().enumerate() {
        per_state_counts.push(group.len());
        let inv_count = 1.0 / group.len() as f64;
        let mut sums = vec![0.0; active.len()];
        for &n in group {
            let x = rows[n].values();
            let v = simplex::dot(bstar.weights(), x);
            if v <= 0.0 {
                return Err(Error::ZeroPortfolioValue { atom: n });
            }
            for (row, &m) in active.iter().enumerate() {
                sums[row] += x[m] / v;
            }
        }
        for (row, &s) in sums.iter().enumerate() {
            let dev = s * inv_count - 1.0;
            components[row][col] = dev * dev;
        }
    }
    let t = components.iter().flatten().sum();
    Ok(SiStatistic {
        t,
        components,
        active: active.to_vec(),
        states,
        per_state_counts,
        dropped_states: dropped,
    })
}

/// General-utility variant: with `u'(x) = x^(alpha - 1)` the cell statistic
/// is `| mean_{n in I_k} u'(b*^T X^(n)) (X_m^(n) - b*^T X^(n)) |^2`. As
/// `alpha -> 0` this approaches the log statistic.
pub fn si_test_statistic_gen(
    samples: &SampleSet,
    bstar: &Portfolio,
    active: &[usize],
    alpha: f64,
) -> Result<SiStatistic> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid(format!("alpha {alpha} outside (0, 1]")));
    }
    if active.is_empty() {
        return Err(Error::EmptyActiveSet);
    }
    if samples.dim() != bstar.dim() {
        return Err(Error::DimensionMismatch {
            expected: samples.dim(),
            got: bstar.dim(),
        });
    }
    let (states, groups, dropped) = group_by_state(samples)?;
    let rows = samples.samples();
    let mut components = vec![vec![0.0; states.len()]; active.len()];
    let mut per_state_counts = Vec::with_capacity(states.len());
    for (col, group) in groups.iter().enumerate() {
        per_state_counts.push(group.len());
        let inv_count = 1.0 / group.len() as f64;
        let mut sums = vec![0.0; active.len()];
        for &n in group {
            let x = rows[n].values();
            let v = simplex::dot(bstar.weights(), x);
            let uprime = if alpha == 1.0 {
                1.0
            } else {
                if v <= 0.0 {
                    // u'(0) is singular below linear utility
                    return Err(Error::ZeroPortfolioValue { atom: n });
                }
                v.powf(alpha - 1.0)
            };
            for (row, &m) in active.iter().enumerate() {
                sums[row] += uprime * (x[m] - v);
            }
        }
        for (row, &s) in sums.iter().enumerate() {
            let dev = s * inv_count;
            components[row][col] = dev * dev;
        }
    }
    let t = components.iter().flatten().sum();
    Ok(SiStatistic {
        t,
        components,
        active: active.to_vec(),
        states,
        per_state_counts,
        dropped_states: dropped,
    })
}

/// Variance proxy for each statistic term under the independence null:
/// `theta = (1 / (N min_k P[S=k])) * (1 / min_{m in A} b_m^2 - 1)`.
pub fn theta_bound(
    n: usize,
    si_marginal: &[f64],
    bstar: &Portfolio,
    active: &[usize],
) -> Result<f64> {
    if active.is_empty() {
        return Err(Error::EmptyActiveSet);
    }
    if n == 0 {
        return Err(Error::EmptySampleSet);
    }
    let min_p = si_marginal.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min_p > 0.0) {
        return Err(Error::invalid("every SI state needs positive probability"));
    }
    let min_b_sq = active
        .iter()
        .map(|&m| {
            let w = bstar.weights()[m];
            w * w
        })
        .fold(f64::INFINITY, f64::min);
    if min_b_sq <= 0.0 {
        return Err(Error::invalid(
            "an active stock has zero weight; the variance proxy is undefined",
        ));
    }
    Ok((1.0 / (n as f64 * min_p)) * (1.0 / min_b_sq - 1.0))
}

/// Distribution-free false-alarm bound
/// `P[T > tau | H0] <= 1 - gamma(dK/2, tau/theta) / Gamma(dK/2)`
/// with `d = M + 1` the number of stocks and `K` the number of SI states.
pub fn false_alarm_bound(
    tau: f64,
    theta: f64,
    num_assets: usize,
    num_states: usize,
) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::invalid(format!("tau {tau} must be positive")));
    }
    if !(theta > 0.0) {
        return Err(Error::invalid(format!("theta {theta} must be positive")));
    }
    if num_assets == 0 || num_states == 0 {
        return Err(Error::invalid("need at least one stock and one SI state"));
    }
    let shape = (num_assets * num_states) as f64 / 2.0;
    Ok(special::reg_upper_gamma(shape, tau / theta).clamp(0.0, 1.0))
}

/// Smallest `tau` whose false-alarm bound is at most `target_fa`, found by
/// bisection to relative accuracy 1e-8 (the bound is strictly decreasing in
/// `tau`).
pub fn choose_threshold(
    target_fa: f64,
    theta: f64,
    num_assets: usize,
    num_states: usize,
) -> Result<f64> {
    if !(target_fa > 0.0 && target_fa < 1.0) {
        return Err(Error::invalid(format!(
            "target false alarm {target_fa} outside (0, 1)"
        )));
    }
    if !(theta > 0.0) {
        return Err(Error::invalid(format!("theta {theta} must be positive")));
    }
    if num_assets == 0 || num_states == 0 {
        return Err(Error::invalid("need at least one stock and one SI state"));
    }
    let shape = (num_assets * num_states) as f64 / 2.0;
    let bound = |x: f64| special::reg_upper_gamma(shape, x);
    let mut lo = 0.0;
    let mut hi = 1.0;
    while bound(hi) > target_fa {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::invalid("threshold search diverged"));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if bound(mid) > target_fa {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= 1e-8 * hi {
            break;
        }
    }
    Ok(theta * hi)
}

/// Which solver fits the reference portfolio and which statistic is used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestVariant {
    /// Log-optimal fit on the simplex; statistic over the active set.
    Log,
    /// Short selling allowed; the statistic sums over all stocks.
    Short,
    /// Power-utility fit and the general-utility statistic.
    General { alpha: f64 },
}

/// Whether the reference portfolio is fit on the full sample (matching the
/// setting where it has already been acquired) or on the first half with the
/// statistic computed on the second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMode {
    InSample,
    SplitHalf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    SiUseful,
    SiNotUseful,
}

/// Full outcome of the SI usefulness test.
#[derive(Debug, Clone, Serialize)]
pub struct SiTestReport {
    pub statistic: SiStatistic,
    pub theta: f64,
    pub threshold: f64,
    /// Bound evaluated at the chosen threshold (at most the target).
    pub false_alarm_bound: f64,
    pub target_false_alarm: f64,
    pub decision: Decision,
    /// Cell verdicts `T_{m,k} > tau / ((M+1) K)`, aligned with
    /// `statistic.components`.
    pub per_cell_decisions: Vec<Vec<bool>>,
    #[serde(with = "serial::dec_vec")]
    pub bstar: Vec<f64>,
    pub fit: SolveReport,
    /// Samples used for the statistic.
    pub n: usize,
    #[serde(with = "serial::dec_vec")]
    pub si_marginal: Vec<f64>,
    pub variant: TestVariant,
    pub fit_mode: FitMode,
}

/// End-to-end SI test: fit the reference portfolio, estimate the SI
/// marginal, derive the threshold from the false-alarm bound, and decide
/// `T > tau`.
pub fn run_si_test(
    samples: &SampleSet,
    target_fa: f64,
    tol: f64,
    max_iter: u64,
    variant: TestVariant,
    fit_mode: FitMode,
) -> Result<SiTestReport> {
    if samples.si_labels().is_none() {
        return Err(Error::invalid("SI test needs labeled samples"));
    }
    let (fit_set, test_set) = match fit_mode {
        FitMode::InSample => (samples.clone(), samples.clone()),
        FitMode::SplitHalf => {
            let half = samples.len() / 2;
            (samples.slice(0, half)?, samples.slice(half, samples.len())?)
        }
    };
    if test_set.is_empty() || fit_set.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    let market = empirical_market(&fit_set)?.without_si();
    let fit = match variant {
        TestVariant::Log => growth::solve_log_optimal(&market, tol, max_iter)?,
        TestVariant::Short => growth::solve_log_optimal_short(&market, tol, max_iter)?,
        TestVariant::General { alpha } => {
            growth::solve_utility_optimal(&market, alpha, tol, max_iter)?
        }
    };
    let active: Vec<usize> = match variant {
        // without the positivity constraint the KKT equalities hold for all
        // stocks, so the sum runs over every index
        TestVariant::Short => (0..market.dim()).collect(),
        _ => fit.active_set.clone(),
    };
    if active.is_empty() {
        return Err(Error::EmptyActiveSet);
    }
    let statistic = match variant {
        TestVariant::General { alpha } => {
            si_test_statistic_gen(&test_set, &fit.portfolio, &active, alpha)?
        }
        _ => si_test_statistic(&test_set, &fit.portfolio, &active)?,
    };
    let n = test_set.len();
    let si_marginal: Vec<f64> = statistic
        .per_state_counts
        .iter()
        .map(|&c| c as f64 / n as f64)
        .collect();
    let num_assets = market.dim();
    let num_states = statistic.states.len();
    let theta = theta_bound(n, &si_marginal, &fit.portfolio, &active)?;
    let (threshold, bound_at_threshold) = if theta == 0.0 {
        // a single fully-weighted stock makes every ratio identically one;
        // the statistic is degenerate at zero and any exceedance is real
        (0.0, 0.0)
    } else {
        let tau = choose_threshold(target_fa, theta, num_assets, num_states)?;
        let fa = false_alarm_bound(tau, theta, num_assets, num_states)?;
        (tau, fa)
    };
    let decision = if statistic.t > threshold {
        Decision::SiUseful
    } else {
        Decision::SiNotUseful
    };
    let cell_threshold = threshold / (num_assets * num_states) as f64;
    let per_cell_decisions = statistic
        .components
        .iter()
        .map(|row| row.iter().map(|&c| c > cell_threshold).collect())
        .collect();
    Ok(SiTestReport {
        statistic,
        theta,
        threshold,
        false_alarm_bound: bound_at_threshold,
        target_false_alarm: target_fa,
        decision,
        per_cell_decisions,
        bstar: fit.portfolio.weights().to_vec(),
        fit,
        n,
        si_marginal,
        variant,
        fit_mode,
    })
}

impl SiTestReport {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{gen_horse_race, PriceRelatives};

    fn riskless_samples(n: usize) -> SampleSet {
        let rows = (0..n)
            .map(|_| PriceRelatives::new(vec![1.0, 1.0]).unwrap())
            .collect();
        SampleSet::new(rows).unwrap()
    }

    fn fair_race_perfect_si(n: usize, seed: u64) -> SampleSet {
        gen_horse_race(2, &[0.5, 0.5], &[2.0, 2.0], n, seed)
            .unwrap()
            .with_winner_si()
            .unwrap()
    }

    #[test]
    fn statistic_zero_on_riskless_samples() {
        let samples = riskless_samples(40).with_independent_si(2, 3).unwrap();
        let b = Portfolio::new(vec![0.3, 0.7]).unwrap();
        let stat = si_test_statistic(&samples, &b, &[0, 1]).unwrap();
        assert_eq!(stat.t, 0.0);
        assert!(stat.components.iter().flatten().all(|&c| c == 0.0));
    }

    #[test]
    fn statistic_perfect_si_fair_race_is_four() {
        // within state k the winning ratio is exactly 2 and the losing one 0
        let samples = fair_race_perfect_si(600, 17);
        let b = Portfolio::new(vec![0.5, 0.5]).unwrap();
        let stat = si_test_statistic(&samples, &b, &[0, 1]).unwrap();
        assert!((stat.t - 4.0).abs() < 1e-12, "T = {}", stat.t);
        for row in &stat.components {
            for &c in row {
                assert!((c - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn statistic_additivity_is_exact() {
        let samples = fair_race_perfect_si(500, 5);
        let b = Portfolio::new(vec![0.55, 0.45]).unwrap();
        let stat = si_test_statistic(&samples, &b, &[0, 1]).unwrap();
        let resummed: f64 = stat.components.iter().flatten().sum();
        assert_eq!(stat.t, resummed);
        let counts: usize = stat.per_state_counts.iter().sum();
        assert_eq!(counts, 500);
    }

    #[test]
    fn statistic_small_under_independent_si() {
        let samples = gen_horse_race(2, &[0.5, 0.5], &[2.0, 2.0], 10_000, 23)
            .unwrap()
            .with_independent_si(2, 99)
            .unwrap();
        let market = empirical_market(&samples).unwrap().without_si();
        let fit = growth::solve_log_optimal(&market, 1e-11, 100_000).unwrap();
        let stat = si_test_statistic(&samples, &fit.portfolio, &fit.active_set).unwrap();
        let theta = theta_bound(10_000, &[0.5, 0.5], &fit.portfolio, &fit.active_set).unwrap();
        assert!(stat.t < 10.0 * theta, "T = {}, theta = {theta}", stat.t);
    }

    #[test]
    fn statistic_errors_on_zero_value() {
        let samples = fair_race_perfect_si(100, 2);
        let b = Portfolio::new(vec![1.0, 0.0]).unwrap();
        assert!(matches!(
            si_test_statistic(&samples, &b, &[0]),
            Err(Error::ZeroPortfolioValue { .. })
        ));
    }

    #[test]
    fn statistic_requires_active_set_and_labels() {
        let samples = fair_race_perfect_si(10, 2);
        let b = Portfolio::new(vec![0.5, 0.5]).unwrap();
        assert!(matches!(
            si_test_statistic(&samples, &b, &[]),
            Err(Error::EmptyActiveSet)
        ));
        let unlabeled = gen_horse_race(2, &[0.5, 0.5], &[2.0, 2.0], 10, 2).unwrap();
        assert!(si_test_statistic(&unlabeled, &b, &[0, 1]).is_err());
    }

    #[test]
    fn gen_statistic_zero_on_riskless_samples() {
        let samples = riskless_samples(30).with_independent_si(2, 7).unwrap();
        let b = Portfolio::new(vec![0.4, 0.6]).unwrap();
        let stat = si_test_statistic_gen(&samples, &b, &[0, 1], 0.5).unwrap();
        assert_eq!(stat.t, 0.0);
    }

    #[test]
    fn gen_statistic_linear_utility_compares_means() {
        let samples = fair_race_perfect_si(400, 9);
        let b = Portfolio::new(vec![0.5, 0.5]).unwrap();
        let stat = si_test_statistic_gen(&samples, &b, &[0, 1], 1.0).unwrap();
        // alpha = 1: cell = |mean(X_m) - mean(b^T X)|^2 within the state;
        // in state 1 stock 0 pays 2, b^T X = 1, so the cell is exactly 1
        for row in &stat.components {
            for &c in row {
                assert!((c - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gen_statistic_approaches_log_statistic_as_alpha_vanishes() {
        let samples = fair_race_perfect_si(500, 31);
        let b = Portfolio::new(vec![0.55, 0.45]).unwrap();
        let log_stat = si_test_statistic(&samples, &b, &[0, 1]).unwrap();
        let mut prev_gap = f64::INFINITY;
        for alpha in [0.5, 0.1, 0.01, 1e-4] {
            let gen_stat = si_test_statistic_gen(&samples, &b, &[0, 1], alpha).unwrap();
            let gap = (gen_stat.t - log_stat.t).abs();
            assert!(gap <= prev_gap + 1e-12);
            prev_gap = gap;
        }
        assert!(prev_gap < 1e-3 * log_stat.t.max(1.0));
    }

    #[test]
    fn statistic_scale_invariance() {
        let samples = fair_race_perfect_si(300, 13);
        let scaled = samples.scaled(3.7).unwrap();
        let b = Portfolio::new(vec![0.5, 0.5]).unwrap();
        let t0 = si_test_statistic(&samples, &b, &[0, 1]).unwrap().t;
        let t1 = si_test_statistic(&scaled, &b, &[0, 1]).unwrap().t;
        assert_eq!(t0, t1);
        // the general statistic with alpha < 1 is not scale invariant
        let g0 = si_test_statistic_gen(&samples, &b, &[0, 1], 0.5).unwrap().t;
        let g1 = si_test_statistic_gen(&scaled, &b, &[0, 1], 0.5).unwrap().t;
        assert!((g0 - g1).abs() > 1e-6 * g0.max(1e-12));
    }

    #[test]
    fn theta_bound_worked_example() {
        let b = Portfolio::new(vec![0.5, 0.5]).unwrap();
        let theta = theta_bound(1000, &[0.5, 0.5], &b, &[0, 1]).unwrap();
        assert_eq!(theta, 0.006);
    }

    #[test]
    fn theta_bound_single_stock_is_zero() {
        let b = Portfolio::new(vec![1.0, 0.0]).unwrap();
        let theta = theta_bound(1000, &[0.5, 0.5], &b, &[0]).unwrap();
        assert_eq!(theta, 0.0);
    }

    #[test]
    fn theta_bound_halving_marginal_doubles() {
        let b = Portfolio::new(vec![0.5, 0.5]).unwrap();
        let t1 = theta_bound(1000, &[0.5, 0.5], &b, &[0, 1]).unwrap();
        let t2 = theta_bound(1000, &[0.25, 0.75], &b, &[0, 1]).unwrap();
        assert!((t2 - 2.0 * t1).abs() < 1e-15);
    }

    #[test]
    fn false_alarm_bound_shape_two() {
        // Q(2, 5) = 6 e^{-5} = 0.040427681994512805
        let bound = false_alarm_bound(5.0, 1.0, 2, 2).unwrap();
        assert!((bound - 0.040_427_681_994_512_805).abs() < 1e-12);
    }

    #[test]
    fn false_alarm_bound_limits() {
        assert!(false_alarm_bound(1e-12, 1.0, 2, 2).unwrap() > 1.0 - 1e-9);
        assert!(false_alarm_bound(1e6, 1.0, 2, 2).unwrap() < 1e-12);
    }

    #[test]
    fn false_alarm_bound_monotone() {
        let mut prev = 1.0;
        for tau in [0.5, 1.0, 2.0, 4.0, 8.0] {
            let b = false_alarm_bound(tau, 0.7, 2, 3).unwrap();
            assert!(b <= prev);
            prev = b;
        }
        // nondecreasing in theta
        let lo = false_alarm_bound(2.0, 0.5, 2, 3).unwrap();
        let hi = false_alarm_bound(2.0, 1.0, 2, 3).unwrap();
        assert!(hi >= lo);
    }

    #[test]
    fn choose_threshold_inverts_bound() {
        let theta = 0.01;
        let target = 0.040_427_681_994_512_805;
        let tau = choose_threshold(target, theta, 2, 2).unwrap();
        assert!((tau / theta - 5.0).abs() < 1e-6);
        for target in [0.9, 0.5, 0.05, 1e-4] {
            let tau = choose_threshold(target, theta, 2, 2).unwrap();
            assert!(false_alarm_bound(tau, theta, 2, 2).unwrap() <= target);
        }
        let tiny = choose_threshold(0.999_999, theta, 2, 2).unwrap();
        assert!(tiny < 1e-4);
    }

    #[test]
    fn run_test_detects_perfect_si() {
        let samples = fair_race_perfect_si(2000, 41);
        let report = run_si_test(
            &samples,
            0.05,
            1e-10,
            100_000,
            TestVariant::Log,
            FitMode::InSample,
        )
        .unwrap();
        assert_eq!(report.decision, Decision::SiUseful);
        assert!(report.statistic.t > 3.5);
        assert!(report.threshold < 0.1);
        assert!(report.false_alarm_bound <= 0.05);
        // every cell fires
        assert!(report.per_cell_decisions.iter().flatten().all(|&d| d));
    }

    #[test]
    fn run_test_accepts_null_on_independent_si() {
        let samples = gen_horse_race(2, &[0.5, 0.5], &[2.0, 2.0], 10_000, 3)
            .unwrap()
            .with_independent_si(2, 4)
            .unwrap();
        let report = run_si_test(
            &samples,
            0.05,
            1e-10,
            100_000,
            TestVariant::Log,
            FitMode::InSample,
        )
        .unwrap();
        assert_eq!(report.decision, Decision::SiNotUseful);
    }

    #[test]
    fn run_test_constant_si_reduces_to_kkt_check() {
        let samples = gen_horse_race(2, &[0.6, 0.4], &[2.0, 2.0], 500, 11)
            .unwrap()
            .with_si_labels(vec![1; 500], 1)
            .unwrap();
        let report = run_si_test(
            &samples,
            0.05,
            1e-12,
            100_000,
            TestVariant::Log,
            FitMode::InSample,
        )
        .unwrap();
        // one state: T is the squared in-sample KKT gap of the fit itself
        assert!(report.statistic.t < 1e-18, "T = {}", report.statistic.t);
        assert_eq!(report.decision, Decision::SiNotUseful);
    }

    #[test]
    fn run_test_split_half_mode() {
        let samples = fair_race_perfect_si(4000, 57);
        let report = run_si_test(
            &samples,
            0.05,
            1e-10,
            100_000,
            TestVariant::Log,
            FitMode::SplitHalf,
        )
        .unwrap();
        assert_eq!(report.n, 2000);
        assert_eq!(report.decision, Decision::SiUseful);
    }

    #[test]
    fn run_test_short_variant_sums_all_stocks() {
        // horse race: the hyperplane optimum is interior (b = win probs),
        // so the printed variance proxy stays positive
        let set = gen_horse_race(3, &[0.4, 0.3, 0.3], &[3.0, 3.0, 3.0], 600, 8)
            .unwrap()
            .with_independent_si(2, 8)
            .unwrap();
        let report = run_si_test(
            &set,
            0.05,
            1e-9,
            200_000,
            TestVariant::Short,
            FitMode::InSample,
        )
        .unwrap();
        assert_eq!(report.statistic.active, vec![0, 1, 2]);
    }

    #[test]
    fn report_serializes_with_decision_tag() {
        let samples = fair_race_perfect_si(200, 3);
        let report = run_si_test(
            &samples,
            0.05,
            1e-9,
            100_000,
            TestVariant::Log,
            FitMode::InSample,
        )
        .unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&report.to_json_string()).unwrap();
        assert_eq!(parsed["decision"], "si_useful");
        assert!(parsed["bstar"][0].is_string());
    }
}
