//! Fractional Kelly portfolios and their identification with SIMO
//! ergodic-capacity power allocation.
//!
//! With a cash fraction `lambda` fixed, maximizing the per-period growth of
//! the risky sub-portfolio `b~` is the same problem as maximizing
//! `E[log(1 + rho * b~^T X~)]` with `rho = (1 - lambda)/lambda` — the ergodic
//! capacity of a SIMO channel whose branch gains are distributed like the
//! risky price relatives. On the simplex this equals `E[log(b~^T Z)]` for the
//! shifted market `Z_m = 1 + rho * X~_m`, so the power-allocation solve
//! delegates to the log-optimal machinery and inherits its KKT certificate.
//! For equiprobable single-winner gain vectors the optimum further reduces to
//! closed-form water-filling.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::growth::{self, SolveReport};
use crate::market::{DiscreteMarket, GainDistribution};
use crate::simplex;
use crate::special;

/// Cash fraction `lambda` and the equivalent average SNR
/// `rho = (1 - lambda)/lambda`.
///
/// `lambda = 1` means all cash (`rho = 0`); `lambda = 0` is encoded as
/// infinite `rho` and excluded from the fractional ops — use the plain
/// log-optimal solver there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FractionalKellySpec {
    lambda: f64,
    rho: f64,
}

impl FractionalKellySpec {
    pub fn from_lambda(lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::invalid(format!("lambda {lambda} outside [0, 1]")));
        }
        let rho = if lambda == 0.0 {
            f64::INFINITY
        } else {
            (1.0 - lambda) / lambda
        };
        Ok(FractionalKellySpec { lambda, rho })
    }

    pub fn from_rho(rho: f64) -> Result<Self> {
        if !(rho >= 0.0) {
            return Err(Error::invalid(format!("rho {rho} must be nonnegative")));
        }
        let lambda = if rho.is_infinite() {
            0.0
        } else {
            1.0 / (1.0 + rho)
        };
        Ok(FractionalKellySpec { lambda, rho })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
}

/// Power fractions `rho_m / rho` over the branches: nonnegative, sum to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerAllocation {
    #[serde(with = "crate::serial::dec_vec")]
    fractions: Vec<f64>,
}

impl PowerAllocation {
    pub fn new(fractions: Vec<f64>) -> Result<Self> {
        let sum: f64 = fractions.iter().sum();
        if (sum - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(format!(
                "allocation sums to {sum}, expected 1 within 1e-10"
            )));
        }
        let mut fractions = fractions;
        for f in fractions.iter_mut() {
            if *f < 0.0 {
                if *f < -1e-12 {
                    return Err(Error::invalid(format!("negative power fraction {f}")));
                }
                *f = 0.0;
            }
        }
        Ok(PowerAllocation { fractions })
    }

    pub fn uniform(branches: usize) -> Self {
        PowerAllocation {
            fractions: simplex::uniform(branches),
        }
    }

    pub fn fractions(&self) -> &[f64] {
        &self.fractions
    }

    pub fn branches(&self) -> usize {
        self.fractions.len()
    }
}

/// Fractional-Kelly growth split: the risky log term and the full per-period
/// growth including the cash drag `log(lambda)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FractionalGrowth {
    /// `E[log(1 + rho * b~^T X~)]` in nats.
    pub objective: f64,
    /// `objective + log(lambda)`: the per-period growth rate in nats.
    pub growth_rate: f64,
}

/// Evaluate the fractional-Kelly objective and full growth for a fixed cash
/// fraction and risky allocation.
pub fn fractional_kelly_growth(
    risky: &DiscreteMarket,
    spec: FractionalKellySpec,
    btilde: &PowerAllocation,
) -> Result<FractionalGrowth> {
    if risky.dim() != btilde.branches() {
        return Err(Error::DimensionMismatch {
            expected: risky.dim(),
            got: btilde.branches(),
        });
    }
    if spec.lambda() == 0.0 {
        return Err(Error::invalid(
            "lambda = 0 has no cash anchor; use the log-optimal solver directly",
        ));
    }
    let rho = spec.rho();
    let mut objective = 0.0;
    for a in risky.atoms() {
        if a.probability == 0.0 {
            continue;
        }
        let v = simplex::dot(btilde.fractions(), a.values.values());
        objective += a.probability * (1.0 + rho * v).ln();
    }
    Ok(FractionalGrowth {
        objective,
        growth_rate: objective + spec.lambda().ln(),
    })
}

/// Ergodic capacity `E[log(1 + rho * sum_m alloc_m g_m)]` in nats.
///
/// Finite-support gains are an exact sum. Exponential branches integrate by
/// adaptive Gauss–Kronrod quadrature to relative error 1e-8: directly against
/// the gain density for one branch (tail truncated at the 1e-12 quantile),
/// and through the Laplace-transform identity
/// `E[log(1+Z)] = int_0^inf e^{-t} (1 - E[e^{-tZ}]) / t dt`
/// for several, which keeps the integral one-dimensional.
pub fn ergodic_capacity(
    gains: &GainDistribution,
    alloc: &PowerAllocation,
    rho: f64,
) -> Result<f64> {
    if !(rho >= 0.0) || rho.is_infinite() {
        return Err(Error::invalid(format!(
            "rho {rho} must be nonnegative and finite"
        )));
    }
    if gains.branches() != alloc.branches() {
        return Err(Error::DimensionMismatch {
            expected: gains.branches(),
            got: alloc.branches(),
        });
    }
    if rho == 0.0 {
        return Ok(0.0);
    }
    match gains {
        GainDistribution::Discrete(market) => {
            let mut total = 0.0;
            for a in market.atoms() {
                if a.probability == 0.0 {
                    continue;
                }
                let v = simplex::dot(alloc.fractions(), a.values.values());
                total += a.probability * (1.0 + rho * v).ln();
            }
            Ok(total)
        }
        GainDistribution::Exponential { means } => {
            // effective per-branch scales of the SNR sum
            let thetas: Vec<f64> = means
                .iter()
                .zip(alloc.fractions())
                .map(|(&mu, &f)| rho * f * mu)
                .filter(|&t| t > 0.0)
                .collect();
            match thetas.len() {
                0 => Ok(0.0),
                1 => {
                    let theta = thetas[0];
                    // 1e-12 quantile of the standardized exponential
                    let tail = -(1e-12f64).ln();
                    special::integrate(|u| (theta * u).ln_1p() * (-u).exp(), 0.0, tail, 1e-8)
                }
                _ => {
                    // integrand -> sum(theta) as t -> 0; expm1/ln_1p keep it stable
                    special::integrate(
                        |t| {
                            let log_lt: f64 = thetas.iter().map(|&th| (th * t).ln_1p()).sum();
                            (-t).exp() * (-(-log_lt).exp_m1()) / t
                        },
                        1e-300,
                        40.0,
                        1e-8,
                    )
                }
            }
        }
    }
}

/// Result of a power-allocation solve.
#[derive(Debug, Clone, Serialize)]
pub struct AllocationReport {
    pub allocation: PowerAllocation,
    /// Ergodic capacity at the optimum, nats.
    pub capacity: f64,
    pub solve: SolveReport,
}

/// Maximize ergodic capacity over the power simplex for a fixed total SNR
/// `rho`.
///
/// Delegates to the log-optimal solver on the shifted market
/// `Z_m = 1 + rho * g_m` (the cash unit folded into every branch), which is
/// the same objective on the simplex; the returned allocation carries that
/// market's KKT certificate. Parametric gains are discretized first.
pub fn solve_power_allocation(
    gains: &GainDistribution,
    rho: f64,
    tol: f64,
    max_iter: u64,
) -> Result<AllocationReport> {
    if !(rho > 0.0) || rho.is_infinite() {
        return Err(Error::invalid(format!(
            "rho {rho} must be positive and finite"
        )));
    }
    let market = gains.to_discrete(None)?;
    let shifted = market.map_values(|g| g.iter().map(|&x| 1.0 + rho * x).collect())?;
    let solve = growth::solve_log_optimal(&shifted, tol, max_iter)?;
    let allocation = PowerAllocation::new(solve.portfolio.weights().to_vec())?;
    let capacity = solve.growth_rate;
    Ok(AllocationReport {
        allocation,
        capacity,
        solve,
    })
}

/// Direct route to the optimal fractional-Kelly risky portfolio: projected
/// gradient ascent on `E[log(1 + rho * b~^T X~)]` over the simplex, with the
/// same residual-style certificate. Kept independent of
/// [`solve_power_allocation`] so the two can cross-check each other.
pub fn solve_fractional_kelly(
    risky: &DiscreteMarket,
    spec: FractionalKellySpec,
    tol: f64,
    max_iter: u64,
) -> Result<SolveReport> {
    if spec.lambda() == 0.0 {
        return Err(Error::invalid(
            "lambda = 0 has no cash anchor; use the log-optimal solver directly",
        ));
    }
    let rho = spec.rho();
    let dim = risky.dim();
    if rho == 0.0 {
        // all-cash: the objective is identically zero
        let portfolio = growth::Portfolio::uniform(dim);
        let active_set = portfolio.active_set();
        return Ok(SolveReport {
            portfolio,
            growth_rate: 0.0,
            iterations: 0,
            kkt_gap: 0.0,
            active_set,
            converged: true,
        });
    }
    let eval = |weights: &[f64]| -> (Vec<f64>, f64) {
        let mut grad = vec![0.0; dim];
        let mut obj = 0.0;
        for a in risky.atoms() {
            if a.probability == 0.0 {
                continue;
            }
            let v = simplex::dot(weights, a.values.values());
            let denom = 1.0 + rho * v;
            for (g, &x) in grad.iter_mut().zip(a.values.values()) {
                *g += a.probability * rho * x / denom;
            }
            obj += a.probability * denom.ln();
        }
        (grad, obj)
    };

    let mut b = simplex::uniform(dim);
    let (mut grad, mut obj) = eval(&b);
    let mut iterations = 0u64;
    let mut step = 1.0;
    let mut converged = false;
    let mut gap;
    loop {
        // multiplier estimate: sum_m b_m g_m
        let nu = simplex::dot(&b, &grad);
        gap = b
            .iter()
            .zip(&grad)
            .map(|(&w, &g)| {
                let r = g / nu;
                if w > growth::ACTIVITY_THRESHOLD {
                    (r - 1.0).abs()
                } else {
                    (r - 1.0).max(0.0)
                }
            })
            .fold(0.0, f64::max);
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
            let (gc, oc) = eval(&cand);
            if oc > obj {
                b = cand;
                grad = gc;
                obj = oc;
                step = s * 2.0;
                accepted = true;
                break;
            }
            s *= 0.5;
        }
        iterations += 1;
        if !accepted {
            break;
        }
    }
    let portfolio = growth::Portfolio::new(b)?;
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

/// Water-filling solution with its water level.
#[derive(Debug, Clone, Serialize)]
pub struct WaterFill {
    pub allocation: PowerAllocation,
    /// The common level `nu`: branches with `1/(rho * gain)` below it get
    /// the difference as power.
    pub water_level: f64,
}

/// Closed-form optimal allocation for equiprobable single-winner gains:
/// `b~_m = max(0, nu - 1/(rho * gain_m))` with `nu` set by bisection so the
/// fractions sum to one (tolerance 1e-12).
pub fn water_fill(gains: &[f64], rho: f64) -> Result<WaterFill> {
    if gains.is_empty() {
        return Err(Error::invalid("need at least one branch"));
    }
    if gains.iter().any(|&g| !(g > 0.0)) {
        return Err(Error::invalid("gains must be positive"));
    }
    if !(rho > 0.0) {
        return Err(Error::invalid(format!("rho {rho} must be positive")));
    }
    let inv: Vec<f64> = gains.iter().map(|&g| 1.0 / (rho * g)).collect();
    let filled = |nu: f64| -> f64 { inv.iter().map(|&c| (nu - c).max(0.0)).sum() };
    let mut lo = inv.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut hi = lo + 1.0;
    while filled(hi) < 1.0 {
        hi += 1.0;
    }
    let mut nu = 0.5 * (lo + hi);
    for _ in 0..200 {
        let total = filled(nu);
        if (total - 1.0).abs() <= 1e-12 {
            break;
        }
        if total < 1.0 {
            lo = nu;
        } else {
            hi = nu;
        }
        nu = 0.5 * (lo + hi);
    }
    let fractions: Vec<f64> = inv.iter().map(|&c| (nu - c).max(0.0)).collect();
    Ok(WaterFill {
        allocation: PowerAllocation::new(fractions)?,
        water_level: nu,
    })
}
