//! Financial value of side information.
//!
//! A joint market pairs every stock atom with an SI state. The value of the
//! side information is the growth-rate gain from solving one portfolio per
//! state instead of a single unconditional one. It is bounded above by the
//! mutual information between stocks and SI and by the entropy of the random
//! index of the best stock; garbling the SI through a stochastic kernel can
//! only shrink it.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::growth::{self, Portfolio, SolveReport};
use crate::market::{DiscreteMarket, MarketAtom};
use crate::serial;

/// A [`DiscreteMarket`] whose every atom carries an SI state in `{1..K}`,
/// with the SI marginal precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct JointMarket {
    base: DiscreteMarket,
    si_marginal: Vec<f64>,
    state_count: u32,
}

impl JointMarket {
    pub fn new(base: DiscreteMarket) -> Result<Self> {
        let mut state_count = 0u32;
        for (i, a) in base.atoms().iter().enumerate() {
            match a.si_state {
                Some(s) if s >= 1 => state_count = state_count.max(s),
                Some(s) => {
                    return Err(Error::BadRow {
                        row: i + 1,
                        message: format!("SI state {s} must be >= 1"),
                    })
                }
                None => {
                    return Err(Error::BadRow {
                        row: i + 1,
                        message: "atom carries no SI state".into(),
                    })
                }
            }
        }
        let mut si_marginal = vec![0.0; state_count as usize];
        for a in base.atoms() {
            si_marginal[(a.si_state.unwrap() - 1) as usize] += a.probability;
        }
        Ok(JointMarket {
            base,
            si_marginal,
            state_count,
        })
    }

    /// Attach one SI state per atom of a plain market.
    pub fn from_market_and_states(market: &DiscreteMarket, states: &[u32]) -> Result<Self> {
        if states.len() != market.atoms().len() {
            return Err(Error::invalid(format!(
                "{} states for {} atoms",
                states.len(),
                market.atoms().len()
            )));
        }
        let atoms = market
            .atoms()
            .iter()
            .zip(states)
            .map(|(a, &s)| MarketAtom {
                values: a.values.clone(),
                si_state: Some(s),
                probability: a.probability,
            })
            .collect();
        JointMarket::new(DiscreteMarket::new(atoms)?)
    }

    /// Product joint: SI independent of the stocks with the given marginal.
    pub fn independent(market: &DiscreteMarket, si_probs: &[f64]) -> Result<Self> {
        let sum: f64 = si_probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 || si_probs.iter().any(|&p| p < 0.0) {
            return Err(Error::invalid("SI marginal must lie on the simplex"));
        }
        let mut atoms = Vec::new();
        for a in market.atoms() {
            for (k, &q) in si_probs.iter().enumerate() {
                atoms.push(MarketAtom {
                    values: a.values.clone(),
                    si_state: Some(k as u32 + 1),
                    probability: a.probability * q,
                });
            }
        }
        JointMarket::new(DiscreteMarket::new(atoms)?)
    }

    /// Horse race whose SI reveals the winner exactly.
    pub fn horse_race_perfect_si(win_probs: &[f64], payoffs: &[f64]) -> Result<Self> {
        let market = DiscreteMarket::horse_race(win_probs, payoffs)?;
        let states: Vec<u32> = (1..=win_probs.len() as u32).collect();
        Self::from_market_and_states(&market, &states)
    }

    pub fn base(&self) -> &DiscreteMarket {
        &self.base
    }

    pub fn state_count(&self) -> u32 {
        self.state_count
    }

    pub fn si_marginal(&self) -> &[f64] {
        &self.si_marginal
    }

    /// Stock marginal with SI dropped.
    pub fn x_marginal(&self) -> DiscreteMarket {
        self.base.without_si()
    }

    /// Conditional market given `S = k` (renormalized, SI stripped).
    pub fn conditional(&self, k: u32) -> Result<DiscreteMarket> {
        if k == 0 || k > self.state_count {
            return Err(Error::invalid(format!(
                "state {k} outside 1..={}",
                self.state_count
            )));
        }
        let p_k = self.si_marginal[(k - 1) as usize];
        if p_k <= 0.0 {
            return Err(Error::invalid(format!("state {k} has zero probability")));
        }
        let atoms: Vec<MarketAtom> = self
            .base
            .atoms()
            .iter()
            .filter(|a| a.si_state == Some(k) && a.probability > 0.0)
            .map(|a| MarketAtom {
                values: a.values.clone(),
                si_state: None,
                probability: a.probability / p_k,
            })
            .collect();
        DiscreteMarket::new(atoms)
    }

    /// The product of this joint's own marginals: same `p_X` and `p_S`, but
    /// SI independent of the stocks. The dependence-free baseline for
    /// convexity segments.
    pub fn independent_coupling(&self) -> JointMarket {
        let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut grouped: Vec<(MarketAtom, f64)> = Vec::new();
        for a in self.base.atoms() {
            match index.entry(a.values.bits()) {
                std::collections::hash_map::Entry::Occupied(e) => {
                    grouped[*e.get()].1 += a.probability;
                }
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(grouped.len());
                    grouped.push((a.clone(), a.probability));
                }
            }
        }
        let mut atoms = Vec::new();
        for (atom, p_x) in &grouped {
            for (k, &p_s) in self.si_marginal.iter().enumerate() {
                if p_s == 0.0 {
                    continue;
                }
                atoms.push(MarketAtom {
                    values: atom.values.clone(),
                    si_state: Some(k as u32 + 1),
                    probability: p_x * p_s,
                });
            }
        }
        JointMarket::new(DiscreteMarket::new(atoms).expect("product coupling is a market"))
            .expect("product coupling keeps the states")
    }

    /// Atom-wise mixture `t * self + (1 - t) * other` (equal `(x, s)` atoms
    /// merged). With matching X-marginals this realizes the mixture of the
    /// conditional kernels `p_{S|X}`.
    pub fn mix(&self, other: &JointMarket, t: f64) -> Result<JointMarket> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::invalid(format!("mixture weight {t} outside [0, 1]")));
        }
        let mut index: HashMap<(Vec<u64>, u32), usize> = HashMap::new();
        let mut atoms: Vec<MarketAtom> = Vec::new();
        let mut add = |a: &MarketAtom, w: f64| {
            if w == 0.0 {
                return;
            }
            let key = (a.values.bits(), a.si_state.unwrap());
            match index.entry(key) {
                std::collections::hash_map::Entry::Occupied(e) => {
                    atoms[*e.get()].probability += w * a.probability;
                }
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(atoms.len());
                    atoms.push(MarketAtom {
                        values: a.values.clone(),
                        si_state: a.si_state,
                        probability: w * a.probability,
                    });
                }
            }
        };
        for a in self.base.atoms() {
            add(a, t);
        }
        for a in other.base.atoms() {
            add(a, 1.0 - t);
        }
        JointMarket::new(DiscreteMarket::new(atoms)?)
    }
}

/// One portfolio per SI state.
#[derive(Debug, Clone)]
pub struct PortfolioPolicy {
    pub per_state: BTreeMap<u32, Portfolio>,
}

/// Per-state solves and the overall SI-aided growth.
#[derive(Debug, Clone)]
pub struct ConditionalSolve {
    pub policy: PortfolioPolicy,
    pub per_state: BTreeMap<u32, SolveReport>,
    /// `sum_k p_S(k) W_k` in nats.
    pub aided_growth: f64,
}

/// Solve the log-optimal problem on every conditional market; states with
/// zero probability contribute nothing and are skipped.
pub fn solve_conditional_portfolios(
    jm: &JointMarket,
    tol: f64,
    max_iter: u64,
) -> Result<ConditionalSolve> {
    let mut per_state = BTreeMap::new();
    let mut policy = BTreeMap::new();
    let mut aided_growth = 0.0;
    for k in 1..=jm.state_count() {
        let p_k = jm.si_marginal()[(k - 1) as usize];
        if p_k <= 0.0 {
            continue;
        }
        let slice = jm.conditional(k)?;
        let report = growth::solve_log_optimal(&slice, tol, max_iter).map_err(|e| {
            Error::InfeasibleState {
                state: k,
                source: Box::new(e),
            }
        })?;
        aided_growth += p_k * report.growth_rate;
        policy.insert(k, report.portfolio.clone());
        per_state.insert(k, report);
    }
    if policy.is_empty() {
        return Err(Error::invalid("no SI state has positive probability"));
    }
    Ok(ConditionalSolve {
        policy: PortfolioPolicy { per_state: policy },
        per_state,
        aided_growth,
    })
}

/// Per-state entry of the FVSI report.
#[derive(Debug, Clone, Serialize)]
pub struct StateGrowth {
    pub state: u32,
    #[serde(with = "serial::dec")]
    pub probability: f64,
    #[serde(with = "serial::dec_vec")]
    pub weights: Vec<f64>,
    pub growth_rate: f64,
}

/// Financial value of side information with both upper bounds.
#[derive(Debug, Clone, Serialize)]
pub struct FvsiReport {
    /// `aided_growth - base_growth`, possibly a tiny negative from solver
    /// tolerance.
    pub v_raw: f64,
    /// `max(v_raw, 0)`.
    pub v_clamped: f64,
    pub mi_bound: f64,
    pub entropy_bound: f64,
    /// `"mi"` or `"entropy"` — whichever bound is smaller.
    pub tighter_bound: String,
    pub base_growth: f64,
    pub aided_growth: f64,
    pub per_state: Vec<StateGrowth>,
}

/// Full FVSI computation: conditional and unconditional solves plus bounds.
pub fn fvsi_report(jm: &JointMarket, tol: f64, max_iter: u64) -> Result<FvsiReport> {
    let conditional = solve_conditional_portfolios(jm, tol, max_iter)?;
    let base = growth::solve_log_optimal(&jm.x_marginal(), tol, max_iter)?;
    let v_raw = conditional.aided_growth - base.growth_rate;
    let (mi_bound, entropy_bound) = fvsi_bounds(jm);
    let per_state = conditional
        .per_state
        .iter()
        .map(|(&k, report)| StateGrowth {
            state: k,
            probability: jm.si_marginal()[(k - 1) as usize],
            weights: report.portfolio.weights().to_vec(),
            growth_rate: report.growth_rate,
        })
        .collect();
    Ok(FvsiReport {
        v_raw,
        v_clamped: v_raw.max(0.0),
        mi_bound,
        entropy_bound,
        tighter_bound: if entropy_bound <= mi_bound {
            "entropy".into()
        } else {
            "mi".into()
        },
        base_growth: base.growth_rate,
        aided_growth: conditional.aided_growth,
        per_state,
    })
}

/// Financial value of side information (clamped at zero).
pub fn fvsi(jm: &JointMarket, tol: f64, max_iter: u64) -> Result<f64> {
    Ok(fvsi_report(jm, tol, max_iter)?.v_clamped)
}

/// Plug-in mutual information `I(X; S)` in nats (`0 log 0 = 0`).
pub fn mutual_information(jm: &JointMarket) -> f64 {
    let mut p_x: HashMap<Vec<u64>, f64> = HashMap::new();
    let mut joint: HashMap<(Vec<u64>, u32), f64> = HashMap::new();
    for a in jm.base().atoms() {
        if a.probability == 0.0 {
            continue;
        }
        let key = a.values.bits();
        *p_x.entry(key.clone()).or_insert(0.0) += a.probability;
        *joint.entry((key, a.si_state.unwrap())).or_insert(0.0) += a.probability;
    }
    let p_s = jm.si_marginal();
    let mut info = 0.0;
    for ((xkey, s), &p_xs) in &joint {
        if p_xs > 0.0 {
            info += p_xs * (p_xs / (p_x[xkey] * p_s[(s - 1) as usize])).ln();
        }
    }
    info.max(0.0)
}

/// Entropy (nats) of the random index of the best stock, ties broken toward
/// the lowest index.
pub fn best_stock_entropy(market: &DiscreteMarket) -> f64 {
    let mut mass = vec![0.0; market.dim()];
    for a in market.atoms() {
        if a.probability == 0.0 {
            continue;
        }
        let values = a.values.values();
        let mut best = 0;
        for (m, &v) in values.iter().enumerate().skip(1) {
            if v > values[best] {
                best = m;
            }
        }
        mass[best] += a.probability;
    }
    -mass
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

/// Both upper bounds on the FVSI: the mutual information and the best-stock
/// entropy (which depends on the stock distribution alone).
pub fn fvsi_bounds(jm: &JointMarket) -> (f64, f64) {
    (mutual_information(jm), best_stock_entropy(&jm.x_marginal()))
}

/// Pass the SI through a stochastic kernel (`kernel[s-1][z-1] = p(z | s)`),
/// producing a degraded joint market; `X - S - Z` holds by construction.
///
/// The mixture is exact and deterministic; the seed parameter is part of the
/// interface for sample-path garbling and is unused here.
pub fn garble_si(jm: &JointMarket, kernel: &[Vec<f64>], _seed: u64) -> Result<JointMarket> {
    if kernel.len() != jm.state_count() as usize {
        return Err(Error::invalid(format!(
            "kernel has {} rows for {} SI states",
            kernel.len(),
            jm.state_count()
        )));
    }
    let out_states = kernel.first().map_or(0, |r| r.len());
    if out_states == 0 {
        return Err(Error::invalid("kernel has no output states"));
    }
    for (i, row) in kernel.iter().enumerate() {
        if row.len() != out_states {
            return Err(Error::NonStochasticKernel {
                row: i + 1,
                message: format!("{} entries, expected {out_states}", row.len()),
            });
        }
        if row.iter().any(|&p| p < 0.0) {
            return Err(Error::NonStochasticKernel {
                row: i + 1,
                message: "negative entry".into(),
            });
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::NonStochasticKernel {
                row: i + 1,
                message: format!("sums to {sum}"),
            });
        }
    }
    let mut index: HashMap<(Vec<u64>, u32), usize> = HashMap::new();
    let mut atoms: Vec<MarketAtom> = Vec::new();
    for a in jm.base().atoms() {
        let s = (a.si_state.unwrap() - 1) as usize;
        for (z, &w) in kernel[s].iter().enumerate() {
            let p = a.probability * w;
            if p == 0.0 {
                continue;
            }
            let key = (a.values.bits(), z as u32 + 1);
            match index.entry(key) {
                std::collections::hash_map::Entry::Occupied(e) => {
                    atoms[*e.get()].probability += p;
                }
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(atoms.len());
                    atoms.push(MarketAtom {
                        values: a.values.clone(),
                        si_state: Some(z as u32 + 1),
                        probability: p,
                    });
                }
            }
        }
    }
    JointMarket::new(DiscreteMarket::new(atoms)?)
}

/// One row of the convexity probe.
#[derive(Debug, Clone, Serialize)]
pub struct ConvexityRow {
    pub t: f64,
    pub mixture_growth: f64,
    pub chord: f64,
    /// `mixture_growth - chord`; convexity requires this <= tol.
    pub excess: f64,
}

/// Convexity certificate along one kernel segment.
#[derive(Debug, Clone, Serialize)]
pub struct ConvexityReport {
    pub rows: Vec<ConvexityRow>,
    pub max_excess: f64,
    pub convex: bool,
}

/// Certify convexity of the SI-aided growth in the conditional kernel along
/// the segment between two joints sharing both marginals: for every `t` the
/// mixture's aided growth must not exceed the chord `t G1 + (1-t) G2` by
/// more than `tol`.
pub fn convexity_probe(
    jm1: &JointMarket,
    jm2: &JointMarket,
    t_grid: &[f64],
    tol: f64,
    max_iter: u64,
) -> Result<ConvexityReport> {
    check_marginals_match(jm1, jm2)?;
    let g1 = solve_conditional_portfolios(jm1, tol, max_iter)?.aided_growth;
    let g2 = solve_conditional_portfolios(jm2, tol, max_iter)?.aided_growth;
    let mut rows = Vec::with_capacity(t_grid.len());
    let mut max_excess = f64::NEG_INFINITY;
    for &t in t_grid {
        let mixture = jm1.mix(jm2, t)?;
        let gt = solve_conditional_portfolios(&mixture, tol, max_iter)?.aided_growth;
        let chord = t * g1 + (1.0 - t) * g2;
        let excess = gt - chord;
        max_excess = max_excess.max(excess);
        rows.push(ConvexityRow {
            t,
            mixture_growth: gt,
            chord,
            excess,
        });
    }
    let slack = tol.max(1e-9);
    Ok(ConvexityReport {
        rows,
        max_excess,
        convex: max_excess <= slack,
    })
}

const MARGINAL_TOL: f64 = 1e-10;

fn check_marginals_match(jm1: &JointMarket, jm2: &JointMarket) -> Result<()> {
    if jm1.state_count() != jm2.state_count() {
        return Err(Error::invalid("SI state counts differ"));
    }
    let mut gap = 0.0f64;
    for (a, b) in jm1.si_marginal().iter().zip(jm2.si_marginal()) {
        gap = gap.max((a - b).abs());
    }
    let mut x1: HashMap<Vec<u64>, f64> = HashMap::new();
    for a in jm1.base().atoms() {
        *x1.entry(a.values.bits()).or_insert(0.0) += a.probability;
    }
    let mut x2: HashMap<Vec<u64>, f64> = HashMap::new();
    for a in jm2.base().atoms() {
        *x2.entry(a.values.bits()).or_insert(0.0) += a.probability;
    }
    for (key, &p) in &x1 {
        gap = gap.max((p - x2.get(key).copied().unwrap_or(0.0)).abs());
    }
    for (key, &p) in &x2 {
        gap = gap.max((p - x1.get(key).copied().unwrap_or(0.0)).abs());
    }
    if gap > MARGINAL_TOL {
        return Err(Error::MarginalMismatch {
            gap,
            tol: MARGINAL_TOL,
        });
    }
    Ok(())
}
