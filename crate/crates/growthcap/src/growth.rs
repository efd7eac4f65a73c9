//! Expected-log-growth evaluation and maximization.
//!
//! The long-only solver is the classic multiplicative update
//! `b_m <- b_m * E[X_m / (b^T X)]`, started from the uniform portfolio and
//! certified through the KKT residuals: at the optimum the residual is 1 for
//! every active stock and at most 1 for the rest. Convergence is declared on
//! that certificate, not on iterate movement.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::market::{DiscreteMarket, SampleSet};
use crate::serial;
use crate::simplex;

/// Weights below this are treated as inactive (zero) for KKT purposes.
pub const ACTIVITY_THRESHOLD: f64 = 1e-8;
/// Portfolio weights must sum to one within this tolerance.
pub const WEIGHT_SUM_TOL: f64 = 1e-10;
/// Long-only weights may undershoot zero by at most this much (clamped).
pub const WEIGHT_NEG_TOL: f64 = 1e-12;
/// Short-selling ascent aborts when the l1 norm of the iterate exceeds this.
pub const SHORT_DIVERGENCE_GUARD: f64 = 1e6;

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: u64 = 100_000;

/// Portfolio weight vector summing to one; nonnegative unless short selling
/// is allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct Portfolio {
    weights: Vec<f64>,
    allow_short: bool,
}

impl Portfolio {
    /// Long-only portfolio on the probability simplex. Weights in
    /// `[-1e-12, 0)` are clamped to zero.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::invalid(format!(
                "weights sum to {sum}, expected 1 within {WEIGHT_SUM_TOL}"
            )));
        }
        let mut weights = weights;
        for w in weights.iter_mut() {
            if *w < 0.0 {
                if *w < -WEIGHT_NEG_TOL {
                    return Err(Error::invalid(format!(
                        "negative weight {w} in a long-only portfolio"
                    )));
                }
                *w = 0.0;
            }
        }
        Ok(Portfolio {
            weights,
            allow_short: false,
        })
    }

    /// Portfolio on the hyperplane `sum b_m = 1`, signs unrestricted.
    pub fn new_short(weights: Vec<f64>) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::invalid(format!(
                "weights sum to {sum}, expected 1 within {WEIGHT_SUM_TOL}"
            )));
        }
        Ok(Portfolio {
            weights,
            allow_short: true,
        })
    }

    pub fn uniform(dim: usize) -> Self {
        Portfolio {
            weights: simplex::uniform(dim),
            allow_short: false,
        }
    }

    pub fn vertex(dim: usize, m: usize) -> Self {
        Portfolio {
            weights: simplex::vertex(dim, m),
            allow_short: false,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn allow_short(&self) -> bool {
        self.allow_short
    }

    /// Indices with weight above the activity threshold.
    pub fn active_set(&self) -> Vec<usize> {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > ACTIVITY_THRESHOLD)
            .map(|(m, _)| m)
            .collect()
    }
}

/// Outcome of a portfolio solve, including the KKT certificate.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    #[serde(serialize_with = "ser_weights")]
    pub portfolio: Portfolio,
    /// Objective at the optimum: expected log growth in nats for the log
    /// solvers, expected utility for `solve_utility_optimal`.
    pub growth_rate: f64,
    pub iterations: u64,
    pub kkt_gap: f64,
    pub active_set: Vec<usize>,
    /// False when `max_iter` ran out before the KKT gap met the tolerance.
    pub converged: bool,
}

fn ser_weights<S: serde::Serializer>(p: &Portfolio, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeStruct;
    let mut st = s.serialize_struct("Portfolio", 2)?;
    st.serialize_field(
        "weights",
        &p.weights()
            .iter()
            .map(|&w| serial::to_dec(w))
            .collect::<Vec<_>>(),
    )?;
    st.serialize_field("allow_short", &p.allow_short())?;
    st.end()
}

impl SolveReport {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

fn check_dims(market: &DiscreteMarket, b: &Portfolio) -> Result<()> {
    if market.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: market.dim(),
            got: b.dim(),
        });
    }
    Ok(())
}

/// Expected log growth `E[log(b^T X)]` in nats per period.
///
/// Returns `f64::NEG_INFINITY` when some positive-probability atom has
/// `b^T x = 0` — the distinguished "wealth annihilated" value.
pub fn growth_rate(market: &DiscreteMarket, b: &Portfolio) -> Result<f64> {
    check_dims(market, b)?;
    let mut total = 0.0;
    for a in market.atoms() {
        if a.probability == 0.0 {
            continue;
        }
        let v = simplex::dot(b.weights(), a.values.values());
        if v <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        total += a.probability * v.ln();
    }
    Ok(total)
}

/// Wealth trajectory `S_n = prod_{i<=n} b^T X^(i)` for `n = 1..N`
/// (`S_0 = 1` implied).
pub fn wealth_trajectory(samples: &SampleSet, b: &Portfolio) -> Result<Vec<f64>> {
    if samples.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: samples.dim(),
            got: b.dim(),
        });
    }
    let mut wealth = 1.0;
    Ok(samples
        .samples()
        .iter()
        .map(|s| {
            wealth *= simplex::dot(b.weights(), s.values());
            wealth
        })
        .collect())
}

/// KKT residual vector `r_m = E[X_m / (b^T X)]`.
///
/// At the optimum `r_m = 1` for active stocks and `r_m <= 1` otherwise.
pub fn kkt_residuals(market: &DiscreteMarket, b: &Portfolio) -> Result<Vec<f64>> {
    check_dims(market, b)?;
    let (r, _) = residuals_and_growth(market, b.weights())?;
    Ok(r)
}

/// One pass over the atoms: residuals and expected log growth together.
fn residuals_and_growth(market: &DiscreteMarket, weights: &[f64]) -> Result<(Vec<f64>, f64)> {
    let dim = market.dim();
    let mut r = vec![0.0; dim];
    let mut growth = 0.0;
    for (i, a) in market.atoms().iter().enumerate() {
        if a.probability == 0.0 {
            continue;
        }
        let v = simplex::dot(weights, a.values.values());
        if v <= 0.0 {
            return Err(Error::ZeroPortfolioValue { atom: i });
        }
        let scale = a.probability / v;
        for (rm, &x) in r.iter_mut().zip(a.values.values()) {
            *rm += scale * x;
        }
        growth += a.probability * v.ln();
    }
    Ok((r, growth))
}

fn kkt_gap_long(r: &[f64], weights: &[f64]) -> f64 {
    r.iter()
        .zip(weights)
        .map(|(&rm, &w)| {
            if w > ACTIVITY_THRESHOLD {
                (rm - 1.0).abs()
            } else {
                (rm - 1.0).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

/// Maximize expected log growth over the simplex by the multiplicative
/// update, certified through the KKT residuals.
pub fn solve_log_optimal(market: &DiscreteMarket, tol: f64, max_iter: u64) -> Result<SolveReport> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let dim = market.dim();
    let mut b = simplex::uniform(dim);
    // the uniform start is feasible iff every positive-probability atom has a
    // positive entry, which market construction guarantees; a zero value here
    // means no portfolio has finite growth
    let (mut r, mut growth) = residuals_and_growth(market, &b).map_err(|_| Error::Infeasible)?;
    let mut gap = kkt_gap_long(&r, &b);
    let mut iterations = 0u64;
    let mut converged = gap <= tol;
    while !converged && iterations < max_iter {
        for (w, &rm) in b.iter_mut().zip(&r) {
            *w *= rm;
        }
        simplex::renormalize(&mut b);
        iterations += 1;
        let prev = growth;
        (r, growth) = residuals_and_growth(market, &b)?;
        debug_assert!(
            growth >= prev - 1e-12,
            "multiplicative update decreased the objective: {prev} -> {growth}"
        );
        gap = kkt_gap_long(&r, &b);
        converged = gap <= tol;
    }
    let portfolio = Portfolio::new(b)?;
    let active_set = portfolio.active_set();
    Ok(SolveReport {
        portfolio,
        growth_rate: growth,
        iterations,
        kkt_gap: gap,
        active_set,
        converged,
    })
}

/// Maximize expected log growth subject only to `sum b_m = 1` (short selling
/// allowed), by projected gradient ascent on the hyperplane.
///
/// At the optimum every KKT residual equals one. Errors with a certificate
/// direction when the ascent diverges (the objective is unbounded above).
pub fn solve_log_optimal_short(
    market: &DiscreteMarket,
    tol: f64,
    max_iter: u64,
) -> Result<SolveReport> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let dim = market.dim();
    let start = simplex::uniform(dim);
    let mut b = start.clone();
    let (mut r, mut growth) = residuals_and_growth(market, &b).map_err(|_| Error::Infeasible)?;
    let mut gap = max_abs_dev_from_one(&r);
    let mut iterations = 0u64;
    let mut step = 1.0;
    let mut converged = gap <= tol;
    while !converged && iterations < max_iter {
        let l1: f64 = b.iter().map(|w| w.abs()).sum();
        if l1 > SHORT_DIVERGENCE_GUARD {
            let norm: f64 = b
                .iter()
                .zip(&start)
                .map(|(w, s)| (w - s) * (w - s))
                .sum::<f64>()
                .sqrt();
            let direction = b.iter().zip(&start).map(|(w, s)| (w - s) / norm).collect();
            return Err(Error::Unbounded { direction });
        }
        // gradient of E[log b^T X] is the residual vector; project onto the
        // hyperplane sum d = 0
        let mean_r: f64 = r.iter().sum::<f64>() / dim as f64;
        let d: Vec<f64> = r.iter().map(|&rm| rm - mean_r).collect();
        let mut s = step;
        let mut accepted = false;
        while s > 1e-18 {
            let cand: Vec<f64> = b.iter().zip(&d).map(|(&w, &dm)| w + s * dm).collect();
            if let Ok((rc, gc)) = residuals_and_growth(market, &cand) {
                if gc > growth {
                    b = cand;
                    r = rc;
                    growth = gc;
                    step = s * 2.0;
                    accepted = true;
                    break;
                }
            }
            s *= 0.5;
        }
        iterations += 1;
        gap = max_abs_dev_from_one(&r);
        converged = gap <= tol;
        if !accepted {
            break;
        }
    }
    let portfolio = Portfolio::new_short(b)?;
    let active_set = portfolio.active_set();
    Ok(SolveReport {
        portfolio,
        growth_rate: growth,
        iterations,
        kkt_gap: gap,
        active_set,
        converged,
    })
}

fn max_abs_dev_from_one(r: &[f64]) -> f64 {
    r.iter().map(|&rm| (rm - 1.0).abs()).fold(0.0, f64::max)
}

/// Maximize expected power utility `E[u(b^T X)]`, `u(x) = (x^alpha - 1)/alpha`
/// for `alpha` in `(0, 1]`, over the simplex by projected gradient ascent
/// with backtracking.
///
/// The KKT certificate uses the residuals
/// `r_m = E[X_m u'(b^T X)] / E[(b^T X) u'(b^T X)]` with `u'(x) = x^(alpha-1)`.
/// For `alpha = 1` the objective is linear and the exact optimum is the
/// vertex with the largest mean (ties to the lowest index).
pub fn solve_utility_optimal(
    market: &DiscreteMarket,
    alpha: f64,
    tol: f64,
    max_iter: u64,
) -> Result<SolveReport> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid(format!("alpha {alpha} outside (0, 1]")));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let dim = market.dim();
    if alpha == 1.0 {
        let means = market.means();
        let mut best = 0;
        for (m, &mu) in means.iter().enumerate().skip(1) {
            if mu > means[best] {
                best = m;
            }
        }
        let portfolio = Portfolio::vertex(dim, best);
        let (r, obj) = utility_residuals(market, portfolio.weights(), alpha)?;
        let gap = kkt_gap_long(&r, portfolio.weights());
        let active_set = portfolio.active_set();
        return Ok(SolveReport {
            portfolio,
            growth_rate: obj,
            iterations: 0,
            kkt_gap: gap,
            active_set,
            converged: true,
        });
    }

    let mut b = simplex::uniform(dim);
    let (mut grad, mut obj) = utility_gradient(market, &b, alpha).map_err(|_| Error::Infeasible)?;
    let mut iterations = 0u64;
    let mut step = 1.0;
    let mut converged = false;
    let mut gap;
    loop {
        let denom = simplex::dot(&b, &grad); // E[(b^T X) u'(b^T X)]
        let r: Vec<f64> = grad.iter().map(|&g| g / denom).collect();
        gap = kkt_gap_long(&r, &b);
        if gap <= tol {
            converged = true;
            break;
        }
        if iterations >= max_iter {
            break;
        }
        let gmax = grad.iter().fold(0.0f64, |m, &g| m.max(g.abs())).max(1e-300);
        let mut s = step;
        let mut accepted = false;
        while s > 1e-18 {
            let cand = simplex::project(
                &b.iter()
                    .zip(&grad)
                    .map(|(&w, &g)| w + s * g / gmax)
                    .collect::<Vec<_>>(),
            );
            if let Ok((gc, oc)) = utility_gradient(market, &cand, alpha) {
                if oc > obj {
                    b = cand;
                    grad = gc;
                    obj = oc;
                    step = s * 2.0;
                    accepted = true;
                    break;
                }
            }
            s *= 0.5;
        }
        iterations += 1;
        if !accepted {
            break;
        }
    }
    let portfolio = Portfolio::new(b)?;
    let active_set = portfolio.active_set();
    Ok(SolveReport {
        portfolio,
        growth_rate: obj,
        iterations,
        kkt_gap: gap,
        active_set,
        converged,
    })
}

/// Gradient `E[X_m u'(b^T X)]` and objective `E[u(b^T X)]`.
fn utility_gradient(
    market: &DiscreteMarket,
    weights: &[f64],
    alpha: f64,
) -> Result<(Vec<f64>, f64)> {
    let dim = market.dim();
    let mut grad = vec![0.0; dim];
    let mut obj = 0.0;
    for (i, a) in market.atoms().iter().enumerate() {
        if a.probability == 0.0 {
            continue;
        }
        let v = simplex::dot(weights, a.values.values());
        if v <= 0.0 {
            // u'(0) is singular for alpha < 1
            return Err(Error::ZeroPortfolioValue { atom: i });
        }
        let uprime = v.powf(alpha - 1.0);
        for (gm, &x) in grad.iter_mut().zip(a.values.values()) {
            *gm += a.probability * x * uprime;
        }
        obj += a.probability * (v.powf(alpha) - 1.0) / alpha;
    }
    Ok((grad, obj))
}

/// Residuals and objective for the utility KKT certificate.
fn utility_residuals(
    market: &DiscreteMarket,
    weights: &[f64],
    alpha: f64,
) -> Result<(Vec<f64>, f64)> {
    let (grad, obj) = utility_gradient(market, weights, alpha)?;
    let denom = simplex::dot(weights, &grad);
    Ok((grad.iter().map(|&g| g / denom).collect(), obj))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::PriceRelatives;

    fn proportional_market() -> DiscreteMarket {
        DiscreteMarket::horse_race(&[0.6, 0.4], &[2.0, 2.0]).unwrap()
    }

    #[test]
    fn growth_rate_single_riskless_atom_is_zero() {
        let market = DiscreteMarket::from_rows(&[vec![1.0, 1.0]], &[1.0]).unwrap();
        for b in [
            Portfolio::uniform(2),
            Portfolio::new(vec![0.3, 0.7]).unwrap(),
        ] {
            assert_eq!(growth_rate(&market, &b).unwrap(), 0.0);
        }
    }

    #[test]
    fn growth_rate_hand_computed_sum() {
        // 0.6 ln 1.2 + 0.4 ln 0.8 = 0.020135513550688873
        let market = proportional_market();
        let b = Portfolio::new(vec![0.6, 0.4]).unwrap();
        let w = growth_rate(&market, &b).unwrap();
        assert!((w - 0.020_135_513_550_688_873).abs() < 1e-15);
    }

    #[test]
    fn growth_rate_vertex_on_zero_column_is_neg_infinity() {
        let market = proportional_market();
        let b = Portfolio::vertex(2, 1);
        assert_eq!(growth_rate(&market, &b).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn growth_rate_rejects_dimension_mismatch() {
        let market = proportional_market();
        let b = Portfolio::uniform(3);
        assert!(matches!(
            growth_rate(&market, &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn wealth_trajectory_examples() {
        let ones = SampleSet::new(vec![
            PriceRelatives::new(vec![1.0, 1.0]).unwrap(),
            PriceRelatives::new(vec![1.0, 1.0]).unwrap(),
        ])
        .unwrap();
        let b = Portfolio::uniform(2);
        assert_eq!(wealth_trajectory(&ones, &b).unwrap(), vec![1.0, 1.0]);

        let pumped = SampleSet::new(vec![
            PriceRelatives::new(vec![2.0, 0.0]).unwrap(),
            PriceRelatives::new(vec![0.0, 2.0]).unwrap(),
        ])
        .unwrap();
        assert_eq!(wealth_trajectory(&pumped, &b).unwrap(), vec![1.0, 1.0]);

        let compounding = SampleSet::new(vec![
            PriceRelatives::new(vec![2.0, 0.0]).unwrap(),
            PriceRelatives::new(vec![2.0, 0.0]).unwrap(),
        ])
        .unwrap();
        let all_first = Portfolio::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(
            wealth_trajectory(&compounding, &all_first).unwrap(),
            vec![2.0, 4.0]
        );
    }

    #[test]
    fn solver_matches_proportional_betting() {
        let report = solve_log_optimal(&proportional_market(), 1e-10, 10_000).unwrap();
        assert!(report.converged);
        assert!((report.portfolio.weights()[0] - 0.6).abs() < 1e-9);
        assert!((report.portfolio.weights()[1] - 0.4).abs() < 1e-9);
        assert!((report.growth_rate - 0.020_135_513_550_688_873).abs() < 1e-12);
    }

    #[test]
    fn solver_single_atom_picks_dominant_stock() {
        let market = DiscreteMarket::from_rows(&[vec![1.0, 2.0]], &[1.0]).unwrap();
        let report = solve_log_optimal(&market, 1e-10, 100_000).unwrap();
        assert!(report.portfolio.weights()[1] > 1.0 - 1e-6);
        assert!((report.growth_rate - 2.0f64.ln()).abs() < 1e-8);
        assert_eq!(report.active_set, vec![1]);
    }

    #[test]
    fn solver_always_picks_dominant_second_stock() {
        // X = (1, X_1), X_1 in {2, 3} equiprobable: the optimal portfolio
        // always picks the second stock
        let market =
            DiscreteMarket::from_rows(&[vec![1.0, 2.0], vec![1.0, 3.0]], &[0.5, 0.5]).unwrap();
        let report = solve_log_optimal(&market, 1e-10, 100_000).unwrap();
        assert!(report.portfolio.weights()[0] < 1e-7);
        assert!(report.portfolio.weights()[1] > 1.0 - 1e-7);
        let expected = 0.5 * 2.0f64.ln() + 0.5 * 3.0f64.ln();
        assert!((report.growth_rate - expected).abs() < 1e-7);
    }

    #[test]
    fn kkt_residuals_at_optimum_are_one() {
        let b = Portfolio::new(vec![0.6, 0.4]).unwrap();
        let r = kkt_residuals(&proportional_market(), &b).unwrap();
        assert!((r[0] - 1.0).abs() < 1e-12);
        assert!((r[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kkt_residuals_away_from_optimum() {
        let market = DiscreteMarket::from_rows(&[vec![1.0, 2.0]], &[1.0]).unwrap();
        let r = kkt_residuals(&market, &Portfolio::uniform(2)).unwrap();
        assert!((r[0] - 1.0 / 1.5).abs() < 1e-12);
        assert!((r[1] - 2.0 / 1.5).abs() < 1e-12);
    }

    #[test]
    fn kkt_residuals_trivial_on_riskless_atom() {
        let market = DiscreteMarket::from_rows(&[vec![1.0, 1.0]], &[1.0]).unwrap();
        let r = kkt_residuals(&market, &Portfolio::new(vec![0.25, 0.75]).unwrap()).unwrap();
        assert_eq!(r, vec![1.0, 1.0]);
    }

    #[test]
    fn kkt_residuals_error_on_zero_value() {
        let market = proportional_market();
        let b = Portfolio::vertex(2, 0);
        assert!(matches!(
            kkt_residuals(&market, &b),
            Err(Error::ZeroPortfolioValue { .. })
        ));
    }

    #[test]
    fn fair_odds_closed_form_growth() {
        // W* = log M - H(p) for payoffs equal to the number of horses
        let p = [0.5, 0.25, 0.25];
        let market = DiscreteMarket::horse_race(&p, &[3.0, 3.0, 3.0]).unwrap();
        let report = solve_log_optimal(&market, 1e-12, 10_000).unwrap();
        let entropy: f64 = -p.iter().map(|&q| q * q.ln()).sum::<f64>();
        assert!((report.growth_rate - (3.0f64.ln() - entropy)).abs() < 1e-8);
        for (w, &q) in report.portfolio.weights().iter().zip(&p) {
            assert!((w - q).abs() < 1e-9);
        }
    }

    #[test]
    fn objective_monotone_across_iteration_budgets() {
        let market = DiscreteMarket::from_rows(
            &[
                vec![1.3, 0.7, 1.0],
                vec![0.6, 1.8, 1.0],
                vec![1.0, 0.9, 1.1],
            ],
            &[0.3, 0.4, 0.3],
        )
        .unwrap();
        let mut prev = f64::NEG_INFINITY;
        for budget in [0u64, 1, 2, 4, 8, 16, 64, 256] {
            let report = solve_log_optimal(&market, 1e-15, budget).unwrap();
            assert!(report.growth_rate >= prev - 1e-12);
            prev = report.growth_rate;
        }
    }

    #[test]
    fn short_solver_matches_long_when_interior() {
        let market = proportional_market();
        let long = solve_log_optimal(&market, 1e-10, 100_000).unwrap();
        let short = solve_log_optimal_short(&market, 1e-10, 100_000).unwrap();
        for (a, b) in long
            .portfolio
            .weights()
            .iter()
            .zip(short.portfolio.weights())
        {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn short_solver_detects_unbounded_ray() {
        // single atom (1, 2): shorting stock 1 raises b^T x without bound
        let market = DiscreteMarket::from_rows(&[vec![1.0, 2.0]], &[1.0]).unwrap();
        match solve_log_optimal_short(&market, 1e-10, 1_000_000) {
            Err(Error::Unbounded { direction }) => {
                // certificate direction increases the portfolio value
                assert!(direction[1] > 0.0);
                assert!(direction[0] < 0.0);
            }
            other => panic!("expected Unbounded, got {other:?}"),
        }
    }

    #[test]
    fn short_solver_symmetric_market() {
        let market =
            DiscreteMarket::from_rows(&[vec![2.0, 0.5], vec![0.5, 2.0]], &[0.5, 0.5]).unwrap();
        let report = solve_log_optimal_short(&market, 1e-10, 100_000).unwrap();
        assert!((report.portfolio.weights()[0] - 0.5).abs() < 1e-8);
        assert!((report.portfolio.weights()[1] - 0.5).abs() < 1e-8);
        assert!(report.kkt_gap <= 1e-10);
    }

    #[test]
    fn linear_utility_picks_best_mean_with_low_index_ties() {
        let market =
            DiscreteMarket::from_rows(&[vec![1.5, 1.5, 0.5], vec![0.5, 0.5, 1.5]], &[0.5, 0.5])
                .unwrap();
        // means are (1.0, 1.0, 1.0): tie broken to stock 0
        let report = solve_utility_optimal(&market, 1.0, 1e-9, 1000).unwrap();
        assert_eq!(report.portfolio.weights(), &[1.0, 0.0, 0.0]);

        let market2 =
            DiscreteMarket::from_rows(&[vec![1.0, 2.0], vec![1.0, 0.5]], &[0.5, 0.5]).unwrap();
        let report2 = solve_utility_optimal(&market2, 1.0, 1e-9, 1000).unwrap();
        assert_eq!(report2.portfolio.weights(), &[0.0, 1.0]);
    }

    #[test]
    fn small_alpha_utility_close_to_log_optimal() {
        let market = proportional_market();
        let log_report = solve_log_optimal(&market, 1e-12, 100_000).unwrap();
        let util_report = solve_utility_optimal(&market, 0.01, 1e-11, 200_000).unwrap();
        for (a, b) in log_report
            .portfolio
            .weights()
            .iter()
            .zip(util_report.portfolio.weights())
        {
            assert!((a - b).abs() < 0.01, "weights {a} vs {b}");
        }
    }

    #[test]
    fn utility_single_atom_dominant_stock() {
        let market = DiscreteMarket::from_rows(&[vec![1.0, 2.0]], &[1.0]).unwrap();
        for alpha in [0.2, 0.5, 0.9, 1.0] {
            let report = solve_utility_optimal(&market, alpha, 1e-9, 100_000).unwrap();
            assert!(
                report.portfolio.weights()[1] > 1.0 - 1e-4,
                "alpha {alpha}: {:?}",
                report.portfolio.weights()
            );
        }
    }

    #[test]
    fn solve_report_json_shape() {
        let report = solve_log_optimal(&proportional_market(), 1e-10, 10_000).unwrap();
        let json = report.to_json_string();
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!(parsed["portfolio"]["weights"][0].is_string());
        assert!(parsed["growth_rate"].is_number());
        assert!(parsed["active_set"].is_array());
    }
}
