//! Integral stochastic orders between scalar variables and stock-vector
//! processes, decided over explicit parameter grids.
//!
//! A quantifier like "for all rho >= 0" is checked on a declared log-spaced
//! grid plus two asymptotic surrogates (the rho -> 0 first-order comparison
//! of means and the rho -> infinity comparison of zero mass / log moments),
//! and "for all b on the simplex" on a declared lattice or low-discrepancy
//! grid. Verdicts are therefore explicitly grid-relative: they carry the full
//! grid description and the worst signed margin with its witness point.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::growth;
use crate::market::{DiscreteMarket, GainDistribution};
use crate::serial;
use crate::simplex;

/// Absolute tolerance separating numerical noise from genuine violation on
/// expectations computed as exact finite sums.
pub const ORDER_TOL: f64 = 1e-10;

/// A generator function `u` together with its display label.
pub type GeneratorFn = (String, Arc<dyn Fn(f64) -> f64 + Send + Sync>);

/// A named family of generator functions for the generic integral order.
#[derive(Clone)]
pub struct GeneratorFamily {
    pub name: String,
    pub functions: Vec<GeneratorFn>,
}

impl std::fmt::Debug for GeneratorFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GeneratorFamily")
            .field("name", &self.name)
            .field("functions", &self.functions.len())
            .finish()
    }
}

/// Which generator family defines the order.
#[derive(Debug, Clone)]
pub enum OrderCriterion {
    /// `E[log b^T X] <= E[log b^T Y]` (growth ordering).
    Growth,
    /// Shannon-transform ordering `E[log(1 + rho .)]` for all grid rho.
    Capacity,
    /// Laplace-transform ordering `E[exp(-rho Y)] <= E[exp(-rho X)]`.
    Laplace,
    /// User-supplied family of functions `u`.
    Generic(GeneratorFamily),
}

impl OrderCriterion {
    fn tag(&self) -> String {
        match self {
            OrderCriterion::Growth => "growth".into(),
            OrderCriterion::Capacity => "capacity".into(),
            OrderCriterion::Laplace => "laplace".into(),
            OrderCriterion::Generic(f) => format!("generic({})", f.name),
        }
    }
}

/// Log-spaced grid over rho, optionally augmented with the two asymptotic
/// surrogate points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoGridSpec {
    pub log10_min: f64,
    pub log10_max: f64,
    pub count: usize,
    pub include_endpoints: bool,
}

impl Default for RhoGridSpec {
    fn default() -> Self {
        RhoGridSpec {
            log10_min: -3.0,
            log10_max: 3.0,
            count: 61,
            include_endpoints: true,
        }
    }
}

/// One point of the rho grid; `Zero` and `Infinity` are the asymptotic
/// surrogates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RhoPoint {
    Zero,
    Finite(f64),
    Infinity,
}

impl RhoPoint {
    pub fn label(&self) -> String {
        match self {
            RhoPoint::Zero => "0+".into(),
            RhoPoint::Finite(r) => serial::to_dec(*r),
            RhoPoint::Infinity => "inf".into(),
        }
    }
}

impl RhoGridSpec {
    pub fn points(&self) -> Vec<RhoPoint> {
        let mut pts = Vec::with_capacity(self.count + 2);
        if self.include_endpoints {
            pts.push(RhoPoint::Zero);
        }
        if self.count == 1 {
            pts.push(RhoPoint::Finite(10f64.powf(self.log10_min)));
        } else {
            let step = (self.log10_max - self.log10_min) / (self.count - 1) as f64;
            for i in 0..self.count {
                pts.push(RhoPoint::Finite(
                    10f64.powf(self.log10_min + step * i as f64),
                ));
            }
        }
        if self.include_endpoints {
            pts.push(RhoPoint::Infinity);
        }
        pts
    }
}

/// Portfolio grid parameters for the fixed-`b` checks: a mesh-`1/mesh`
/// lattice up to dimension 5, `low_discrepancy` interior points beyond, both
/// augmented with the vertices and the barycenter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BGridSpec {
    pub mesh: usize,
    pub low_discrepancy: usize,
}

impl Default for BGridSpec {
    fn default() -> Self {
        BGridSpec {
            mesh: 20,
            low_discrepancy: 512,
        }
    }
}

impl BGridSpec {
    pub fn points(&self, dim: usize) -> Vec<Vec<f64>> {
        simplex::order_grid(dim, self.mesh, self.low_discrepancy)
    }

    fn describe(&self, dim: usize) -> String {
        if dim <= 5 {
            format!(
                "simplex lattice mesh 1/{} plus vertices and barycenter",
                self.mesh
            )
        } else {
            format!(
                "{} low-discrepancy interior points plus vertices and barycenter",
                self.low_discrepancy
            )
        }
    }
}

/// Declared grids and tolerance, embedded in every verdict.
#[derive(Debug, Clone, Serialize)]
pub struct GridSpec {
    pub criterion: String,
    pub rho_grid: Option<RhoGridSpec>,
    pub b_grid: Option<BGridSpec>,
    pub b_grid_description: Option<String>,
    pub tolerance: f64,
}

/// Parameter point achieving the worst margin.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Witness {
    /// Decimal text, `"0+"`, or `"inf"`.
    pub rho: Option<String>,
    #[serde(with = "serial::dec_vec_opt")]
    pub b: Option<Vec<f64>>,
    pub permutation: Option<Vec<usize>>,
    pub generator: Option<String>,
}

/// Outcome of a stochastic-order check over a parameter grid.
#[derive(Debug, Clone, Serialize)]
pub struct OrderVerdict {
    pub holds: bool,
    /// Most-violated inequality gap, signed (nonnegative means the
    /// inequality held everywhere on the grid).
    pub worst_margin: f64,
    pub witness: Witness,
    pub grid_spec: GridSpec,
    /// Grid points skipped because expected log growth was -inf on either
    /// side (recorded, never silently passed).
    pub skipped: Vec<Witness>,
}

impl OrderVerdict {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("verdict serializes")
    }
}

// (value, probability) pairs of a derived scalar variable
type Pairs = Vec<(f64, f64)>;

fn scalar_pairs(market: &DiscreteMarket) -> Result<Pairs> {
    if market.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: market.dim(),
        });
    }
    Ok(market
        .atoms()
        .iter()
        .filter(|a| a.probability > 0.0)
        .map(|a| (a.values.values()[0], a.probability))
        .collect())
}

fn projected_pairs(market: &DiscreteMarket, b: &[f64]) -> Pairs {
    market
        .atoms()
        .iter()
        .filter(|a| a.probability > 0.0)
        .map(|a| (simplex::dot(b, a.values.values()), a.probability))
        .collect()
}

fn mean(pairs: &Pairs) -> f64 {
    pairs.iter().map(|&(x, p)| p * x).sum()
}

fn expect_exp(pairs: &Pairs, rho: f64) -> f64 {
    pairs.iter().map(|&(x, p)| p * (-rho * x).exp()).sum()
}

fn expect_log1p(pairs: &Pairs, rho: f64) -> f64 {
    pairs.iter().map(|&(x, p)| p * (rho * x).ln_1p()).sum()
}

/// `E[log X]`, or `None` when some positive-probability value is zero.
fn expect_log(pairs: &Pairs) -> Option<f64> {
    let mut total = 0.0;
    for &(x, p) in pairs {
        if x <= 0.0 {
            return None;
        }
        total += p * x.ln();
    }
    Some(total)
}

fn zero_mass(pairs: &Pairs) -> f64 {
    pairs
        .iter()
        .filter(|&&(x, _)| x == 0.0)
        .map(|&(_, p)| p)
        .sum()
}

/// Positive mass and `E[log X ; X > 0]`, the rho -> infinity expansion
/// coefficients of the Shannon transform.
fn log_expansion(pairs: &Pairs) -> (f64, f64) {
    let mut mass = 0.0;
    let mut logs = 0.0;
    for &(x, p) in pairs {
        if x > 0.0 {
            mass += p;
            logs += p * x.ln();
        }
    }
    (mass, logs)
}

fn expect_u(pairs: &Pairs, u: &dyn Fn(f64) -> f64) -> f64 {
    pairs.iter().map(|&(x, p)| p * u(x)).sum()
}

/// Margin of `X <=_LT Y` at one rho point: nonnegative means the inequality
/// `E[exp(-rho Y)] <= E[exp(-rho X)]` holds there.
fn laplace_margin(x: &Pairs, y: &Pairs, point: RhoPoint) -> f64 {
    match point {
        RhoPoint::Zero => mean(y) - mean(x),
        RhoPoint::Finite(rho) => expect_exp(x, rho) - expect_exp(y, rho),
        RhoPoint::Infinity => zero_mass(x) - zero_mass(y),
    }
}

/// Margin of the ergodic-capacity order `E[log(1+rho X)] <= E[log(1+rho Y)]`.
fn capacity_margin(x: &Pairs, y: &Pairs, point: RhoPoint) -> f64 {
    match point {
        RhoPoint::Zero => mean(y) - mean(x),
        RhoPoint::Finite(rho) => expect_log1p(y, rho) - expect_log1p(x, rho),
        RhoPoint::Infinity => {
            let (mx, lx) = log_expansion(x);
            let (my, ly) = log_expansion(y);
            if (my - mx).abs() > 1e-15 {
                my - mx
            } else {
                ly - lx
            }
        }
    }
}

struct MarginScan {
    worst: f64,
    witness: Witness,
}

impl MarginScan {
    fn new() -> Self {
        MarginScan {
            worst: f64::INFINITY,
            witness: Witness::default(),
        }
    }

    fn observe(&mut self, margin: f64, witness: Witness) {
        if margin < self.worst {
            self.worst = margin;
            self.witness = witness;
        }
    }

    fn into_verdict(self, grid_spec: GridSpec, skipped: Vec<Witness>) -> OrderVerdict {
        // an empty scan (everything skipped) does not certify the order
        let worst = if self.worst.is_finite() {
            self.worst
        } else {
            0.0
        };
        OrderVerdict {
            holds: self.worst >= -ORDER_TOL,
            worst_margin: worst,
            witness: self.witness,
            grid_spec,
            skipped,
        }
    }
}

/// Laplace-transform order `X <=_LT Y` between scalar markets, checked at
/// every grid rho.
pub fn lt_order(
    x: &DiscreteMarket,
    y: &DiscreteMarket,
    rho_grid: &RhoGridSpec,
) -> Result<OrderVerdict> {
    scalar_order(x, y, rho_grid, "laplace", laplace_margin)
}

/// Ergodic-capacity (Shannon-transform) order between scalar markets.
pub fn capacity_order(
    x: &DiscreteMarket,
    y: &DiscreteMarket,
    rho_grid: &RhoGridSpec,
) -> Result<OrderVerdict> {
    scalar_order(x, y, rho_grid, "capacity", capacity_margin)
}

fn scalar_order(
    x: &DiscreteMarket,
    y: &DiscreteMarket,
    rho_grid: &RhoGridSpec,
    criterion: &str,
    margin_fn: fn(&Pairs, &Pairs, RhoPoint) -> f64,
) -> Result<OrderVerdict> {
    let xp = scalar_pairs(x)?;
    let yp = scalar_pairs(y)?;
    let mut scan = MarginScan::new();
    for point in rho_grid.points() {
        scan.observe(
            margin_fn(&xp, &yp, point),
            Witness {
                rho: Some(point.label()),
                ..Witness::default()
            },
        );
    }
    Ok(scan.into_verdict(
        GridSpec {
            criterion: criterion.into(),
            rho_grid: Some(*rho_grid),
            b_grid: None,
            b_grid_description: None,
            tolerance: ORDER_TOL,
        },
        Vec::new(),
    ))
}

/// Fixed-portfolio vector ordering: the chosen criterion must hold for every
/// `b` on the simplex grid (and every grid rho, for the transform kinds).
///
/// Under the growth criterion, a grid `b` giving -inf expected log growth on
/// either side (vertex portfolios on horse races) is skipped and recorded.
pub fn vector_order_fixed_b(
    x: &DiscreteMarket,
    y: &DiscreteMarket,
    criterion: &OrderCriterion,
    b_grid: &BGridSpec,
    rho_grid: &RhoGridSpec,
) -> Result<OrderVerdict> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: y.dim(),
        });
    }
    let dim = x.dim();
    let mut scan = MarginScan::new();
    let mut skipped = Vec::new();
    for b in b_grid.points(dim) {
        let xp = projected_pairs(x, &b);
        let yp = projected_pairs(y, &b);
        match criterion {
            OrderCriterion::Growth => match (expect_log(&xp), expect_log(&yp)) {
                (Some(gx), Some(gy)) => scan.observe(
                    gy - gx,
                    Witness {
                        b: Some(b.clone()),
                        ..Witness::default()
                    },
                ),
                _ => skipped.push(Witness {
                    b: Some(b.clone()),
                    ..Witness::default()
                }),
            },
            OrderCriterion::Capacity => {
                for point in rho_grid.points() {
                    scan.observe(
                        capacity_margin(&xp, &yp, point),
                        Witness {
                            rho: Some(point.label()),
                            b: Some(b.clone()),
                            ..Witness::default()
                        },
                    );
                }
            }
            OrderCriterion::Laplace => {
                for point in rho_grid.points() {
                    scan.observe(
                        laplace_margin(&xp, &yp, point),
                        Witness {
                            rho: Some(point.label()),
                            b: Some(b.clone()),
                            ..Witness::default()
                        },
                    );
                }
            }
            OrderCriterion::Generic(family) => {
                for (label, u) in &family.functions {
                    let margin = expect_u(&yp, u.as_ref()) - expect_u(&xp, u.as_ref());
                    scan.observe(
                        margin,
                        Witness {
                            b: Some(b.clone()),
                            generator: Some(label.clone()),
                            ..Witness::default()
                        },
                    );
                }
            }
        }
    }
    let uses_rho = matches!(
        criterion,
        OrderCriterion::Capacity | OrderCriterion::Laplace
    );
    Ok(scan.into_verdict(
        GridSpec {
            criterion: criterion.tag(),
            rho_grid: uses_rho.then_some(*rho_grid),
            b_grid: Some(*b_grid),
            b_grid_description: Some(b_grid.describe(dim)),
            tolerance: ORDER_TOL,
        },
        skipped,
    ))
}

/// Permutation-invariant variant of the fixed-`b` ordering: the criterion
/// must hold with every permutation of `X`'s coordinates inserted on the
/// left-hand side. Only available for dimension <= 6 (explicit enumeration).
pub fn vector_order_fixed_b_permutations(
    x: &DiscreteMarket,
    y: &DiscreteMarket,
    criterion: &OrderCriterion,
    b_grid: &BGridSpec,
    rho_grid: &RhoGridSpec,
) -> Result<OrderVerdict> {
    if x.dim() > 6 {
        return Err(Error::invalid(
            "permutation-invariant check enumerates permutations; dimension must be <= 6",
        ));
    }
    let mut scan = MarginScan::new();
    let mut skipped = Vec::new();
    let mut grid_spec = None;
    for perm in permutations(x.dim()) {
        let permuted = x.permuted(&perm)?;
        let verdict = vector_order_fixed_b(&permuted, y, criterion, b_grid, rho_grid)?;
        let mut witness = verdict.witness;
        witness.permutation = Some(perm.clone());
        scan.observe(verdict.worst_margin, witness);
        for mut s in verdict.skipped {
            s.permutation = Some(perm.clone());
            skipped.push(s);
        }
        grid_spec = Some(verdict.grid_spec);
    }
    let mut grid_spec = grid_spec.expect("at least one permutation");
    grid_spec.criterion = format!("{} (all permutations)", grid_spec.criterion);
    Ok(scan.into_verdict(grid_spec, skipped))
}

/// Solver budget for the inner maximizations of the optimized orderings.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SolverParams {
    pub tol: f64,
    pub max_iter: u64,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            tol: growth::DEFAULT_TOL,
            max_iter: growth::DEFAULT_MAX_ITER,
        }
    }
}

/// Optimized vector ordering: both sides are maximized over the simplex
/// before comparison, which makes the orders permutation-invariant.
///
/// Growth compares the optimal growth rates (a total order); capacity
/// compares optimal fractional-Kelly values per grid rho (inner solves
/// delegated to the power-allocation machinery with its KKT certificate);
/// Laplace maximizes a convex function of `b`, so each side's maximum sits
/// at a vertex and vertex enumeration is exact.
pub fn vector_order_optimized(
    x: &DiscreteMarket,
    y: &DiscreteMarket,
    criterion: &OrderCriterion,
    rho_grid: &RhoGridSpec,
    solver: &SolverParams,
) -> Result<OrderVerdict> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: y.dim(),
        });
    }
    let mut scan = MarginScan::new();
    let grid_spec = |uses_rho: bool, tag: String| GridSpec {
        criterion: format!("{tag} (optimized)"),
        rho_grid: uses_rho.then_some(*rho_grid),
        b_grid: None,
        b_grid_description: None,
        tolerance: ORDER_TOL,
    };
    match criterion {
        OrderCriterion::Growth => {
            let wx = optimal_growth(x, solver)?;
            let wy = optimal_growth(y, solver)?;
            scan.observe(wy - wx, Witness::default());
            Ok(scan.into_verdict(grid_spec(false, criterion.tag()), Vec::new()))
        }
        OrderCriterion::Capacity => {
            for point in rho_grid.points() {
                match point {
                    RhoPoint::Zero => {
                        let mx = x.means().into_iter().fold(f64::NEG_INFINITY, f64::max);
                        let my = y.means().into_iter().fold(f64::NEG_INFINITY, f64::max);
                        scan.observe(
                            my - mx,
                            Witness {
                                rho: Some(point.label()),
                                ..Witness::default()
                            },
                        );
                    }
                    RhoPoint::Finite(rho) => {
                        let cx = optimal_capacity(x, rho, solver)?;
                        let cy = optimal_capacity(y, rho, solver)?;
                        scan.observe(
                            cy - cx,
                            Witness {
                                rho: Some(point.label()),
                                ..Witness::default()
                            },
                        );
                    }
                    RhoPoint::Infinity => {
                        let wx = optimal_growth(x, solver)?;
                        let wy = optimal_growth(y, solver)?;
                        scan.observe(
                            wy - wx,
                            Witness {
                                rho: Some(point.label()),
                                ..Witness::default()
                            },
                        );
                    }
                }
            }
            Ok(scan.into_verdict(grid_spec(true, criterion.tag()), Vec::new()))
        }
        OrderCriterion::Laplace => {
            let xm: Vec<Pairs> = coordinate_pairs(x);
            let ym: Vec<Pairs> = coordinate_pairs(y);
            for point in rho_grid.points() {
                let margin = match point {
                    RhoPoint::Zero => {
                        // exp(-rho x) ~ 1 - rho x: the vertex maximum tracks
                        // the smallest coordinate mean
                        let mx = xm.iter().map(mean).fold(f64::INFINITY, f64::min);
                        let my = ym.iter().map(mean).fold(f64::INFINITY, f64::min);
                        my - mx
                    }
                    RhoPoint::Finite(rho) => {
                        let vx = xm
                            .iter()
                            .map(|p| expect_exp(p, rho))
                            .fold(f64::NEG_INFINITY, f64::max);
                        let vy = ym
                            .iter()
                            .map(|p| expect_exp(p, rho))
                            .fold(f64::NEG_INFINITY, f64::max);
                        vx - vy
                    }
                    RhoPoint::Infinity => {
                        let vx = xm.iter().map(zero_mass).fold(f64::NEG_INFINITY, f64::max);
                        let vy = ym.iter().map(zero_mass).fold(f64::NEG_INFINITY, f64::max);
                        vx - vy
                    }
                };
                scan.observe(
                    margin,
                    Witness {
                        rho: Some(point.label()),
                        ..Witness::default()
                    },
                );
            }
            Ok(scan.into_verdict(grid_spec(true, criterion.tag()), Vec::new()))
        }
        OrderCriterion::Generic(_) => Err(Error::invalid(
            "generic generator families have no optimized variant",
        )),
    }
}

fn coordinate_pairs(market: &DiscreteMarket) -> Vec<Pairs> {
    (0..market.dim())
        .map(|m| {
            market
                .atoms()
                .iter()
                .filter(|a| a.probability > 0.0)
                .map(|a| (a.values.values()[m], a.probability))
                .collect()
        })
        .collect()
}

fn optimal_growth(market: &DiscreteMarket, solver: &SolverParams) -> Result<f64> {
    Ok(growth::solve_log_optimal(market, solver.tol, solver.max_iter)?.growth_rate)
}

fn optimal_capacity(market: &DiscreteMarket, rho: f64, solver: &SolverParams) -> Result<f64> {
    crate::channel::solve_power_allocation(
        &GainDistribution::discrete(market.clone()),
        rho,
        solver.tol,
        solver.max_iter,
    )
    .map(|r| r.capacity)
    .map_err(|e| Error::InnerSolve {
        rho,
        source: Box::new(e),
    })
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..n).collect();
    heap_permute(&mut items, n, &mut out);
    out
}

fn heap_permute(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(items.clone());
        return;
    }
    for i in 0..k {
        heap_permute(items, k - 1, out);
        if k.is_multiple_of(2) {
            items.swap(i, k - 1);
        } else {
            items.swap(0, k - 1);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_quantile_market(mean_value: f64, n: usize) -> DiscreteMarket {
        let atoms = crate::market::exponential_quantile_atoms(mean_value, n);
        let probs = vec![1.0 / n as f64; n];
        DiscreteMarket::scalar(&atoms, &probs).unwrap()
    }

    #[test]
    fn rho_grid_has_61_points_plus_endpoints() {
        let grid = RhoGridSpec::default();
        let pts = grid.points();
        assert_eq!(pts.len(), 63);
        assert_eq!(pts[0], RhoPoint::Zero);
        assert_eq!(*pts.last().unwrap(), RhoPoint::Infinity);
        if let RhoPoint::Finite(first) = pts[1] {
            assert!((first - 1e-3).abs() < 1e-15);
        }
        if let RhoPoint::Finite(last) = pts[61] {
            assert!((last - 1e3).abs() < 1e-9);
        }
    }

    #[test]
    fn lt_order_exponential_means_ordered() {
        // closed-form transforms 1/(1+rho) >= 1/(1+2 rho): X <=_LT Y
        let x = exp_quantile_market(1.0, 2000);
        let y = exp_quantile_market(2.0, 2000);
        let verdict = lt_order(&x, &y, &RhoGridSpec::default()).unwrap();
        assert!(verdict.holds, "margin {}", verdict.worst_margin);
        // and the reverse direction fails
        let reverse = lt_order(&y, &x, &RhoGridSpec::default()).unwrap();
        assert!(!reverse.holds);
    }

    #[test]
    fn lt_order_reflexive_with_zero_margin() {
        let x = exp_quantile_market(1.5, 100);
        let verdict = lt_order(&x, &x, &RhoGridSpec::default()).unwrap();
        assert!(verdict.holds);
        assert_eq!(verdict.worst_margin, 0.0);
    }

    #[test]
    fn lt_order_point_masses_fail_in_wrong_direction() {
        let x = DiscreteMarket::scalar(&[2.0], &[1.0]).unwrap();
        let y = DiscreteMarket::scalar(&[1.0], &[1.0]).unwrap();
        let verdict = lt_order(&x, &y, &RhoGridSpec::default()).unwrap();
        assert!(!verdict.holds);
        assert!(verdict.witness.rho.is_some());
    }

    #[test]
    fn capacity_order_point_masses() {
        let x = DiscreteMarket::scalar(&[1.0], &[1.0]).unwrap();
        let y = DiscreteMarket::scalar(&[2.0], &[1.0]).unwrap();
        let verdict = capacity_order(&x, &y, &RhoGridSpec::default()).unwrap();
        assert!(verdict.holds);
        let same = capacity_order(&x, &x, &RhoGridSpec::default()).unwrap();
        assert!(same.holds);
        assert_eq!(same.worst_margin, 0.0);
    }

    #[test]
    fn capacity_order_follows_lt_order_on_exponentials() {
        let x = exp_quantile_market(1.0, 500);
        let y = exp_quantile_market(2.0, 500);
        assert!(lt_order(&x, &y, &RhoGridSpec::default()).unwrap().holds);
        assert!(
            capacity_order(&x, &y, &RhoGridSpec::default())
                .unwrap()
                .holds
        );
    }

    #[test]
    fn fixed_b_growth_scaled_market() {
        let x = DiscreteMarket::from_rows(&[vec![1.2, 0.8], vec![0.7, 1.5]], &[0.5, 0.5]).unwrap();
        let y = x.scaled(2.0).unwrap();
        let verdict = vector_order_fixed_b(
            &x,
            &y,
            &OrderCriterion::Growth,
            &BGridSpec::default(),
            &RhoGridSpec::default(),
        )
        .unwrap();
        assert!(verdict.holds);
        // log(2 b^T x) = log 2 + log(b^T x): margin exactly log 2 everywhere
        assert!((verdict.worst_margin - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn fixed_b_identical_markets_hold_all_kinds() {
        let x = DiscreteMarket::from_rows(&[vec![1.2, 0.8], vec![0.7, 1.5]], &[0.5, 0.5]).unwrap();
        for crit in [
            OrderCriterion::Growth,
            OrderCriterion::Capacity,
            OrderCriterion::Laplace,
        ] {
            let verdict = vector_order_fixed_b(
                &x,
                &x,
                &crit,
                &BGridSpec::default(),
                &RhoGridSpec::default(),
            )
            .unwrap();
            assert!(verdict.holds);
            assert!(verdict.worst_margin.abs() < 1e-15);
        }
    }

    #[test]
    fn fixed_b_growth_skips_vertex_portfolios_on_horse_races() {
        let x = DiscreteMarket::horse_race(&[0.5, 0.5], &[2.0, 2.0]).unwrap();
        let y = x.scaled(1.5).unwrap();
        let verdict = vector_order_fixed_b(
            &x,
            &y,
            &OrderCriterion::Growth,
            &BGridSpec::default(),
            &RhoGridSpec::default(),
        )
        .unwrap();
        assert!(verdict.holds);
        // the two vertices hit log 0 and must be recorded
        assert_eq!(verdict.skipped.len(), 2);
    }

    #[test]
    fn implication_chain_on_product_markets() {
        // independent exponential coordinates, mean 1 vs mean 2: the LT
        // ordering holds pointwise on quantile couplings, and must imply
        // capacity and growth orderings on the same grids
        let grid_x = crate::market::exponential_quantile_atoms(1.0, 12);
        let grid_y: Vec<f64> = grid_x.iter().map(|&v| 2.0 * v).collect();
        let mut rows_x = Vec::new();
        let mut rows_y = Vec::new();
        for i in 0..12 {
            for j in 0..12 {
                rows_x.push(vec![grid_x[i], grid_x[j]]);
                rows_y.push(vec![grid_y[i], grid_y[j]]);
            }
        }
        let probs = vec![1.0 / 144.0; 144];
        let x = DiscreteMarket::from_rows(&rows_x, &probs).unwrap();
        let y = DiscreteMarket::from_rows(&rows_y, &probs).unwrap();
        let b_grid = BGridSpec {
            mesh: 10,
            low_discrepancy: 64,
        };
        let rho_grid = RhoGridSpec {
            count: 21,
            ..RhoGridSpec::default()
        };
        let laplace =
            vector_order_fixed_b(&x, &y, &OrderCriterion::Laplace, &b_grid, &rho_grid).unwrap();
        assert!(laplace.holds);
        let capacity =
            vector_order_fixed_b(&x, &y, &OrderCriterion::Capacity, &b_grid, &rho_grid).unwrap();
        assert!(capacity.holds);
        let growthv =
            vector_order_fixed_b(&x, &y, &OrderCriterion::Growth, &b_grid, &rho_grid).unwrap();
        assert!(growthv.holds);
    }

    #[test]
    fn optimized_orders_identical_markets() {
        let x = DiscreteMarket::from_rows(&[vec![1.3, 0.6], vec![0.8, 1.4]], &[0.4, 0.6]).unwrap();
        let solver = SolverParams::default();
        for crit in [
            OrderCriterion::Growth,
            OrderCriterion::Capacity,
            OrderCriterion::Laplace,
        ] {
            let verdict =
                vector_order_optimized(&x, &x, &crit, &RhoGridSpec::default(), &solver).unwrap();
            assert!(verdict.holds, "{crit:?}");
            assert!(
                verdict.worst_margin.abs() < 1e-9,
                "{crit:?}: {}",
                verdict.worst_margin
            );
        }
    }

    #[test]
    fn optimized_growth_scaled_market_margin_log2() {
        let x = DiscreteMarket::from_rows(&[vec![1.3, 0.6], vec![0.8, 1.4]], &[0.4, 0.6]).unwrap();
        let y = x.scaled(2.0).unwrap();
        let verdict = vector_order_optimized(
            &x,
            &y,
            &OrderCriterion::Growth,
            &RhoGridSpec::default(),
            &SolverParams::default(),
        )
        .unwrap();
        assert!(verdict.holds);
        assert!((verdict.worst_margin - 2f64.ln()).abs() < 1e-7);
    }

    #[test]
    fn optimized_orders_permutation_invariant() {
        let x = DiscreteMarket::from_rows(
            &[
                vec![1.3, 0.6, 1.0],
                vec![0.8, 1.4, 0.9],
                vec![1.0, 1.0, 1.2],
            ],
            &[0.4, 0.3, 0.3],
        )
        .unwrap();
        let y = x.permuted(&[2, 0, 1]).unwrap();
        let solver = SolverParams {
            tol: 1e-11,
            max_iter: 500_000,
        };
        let rho_grid = RhoGridSpec {
            count: 11,
            ..RhoGridSpec::default()
        };
        for crit in [
            OrderCriterion::Growth,
            OrderCriterion::Capacity,
            OrderCriterion::Laplace,
        ] {
            let forward = vector_order_optimized(&x, &y, &crit, &rho_grid, &solver).unwrap();
            let backward = vector_order_optimized(&y, &x, &crit, &rho_grid, &solver).unwrap();
            assert!(
                forward.holds,
                "{crit:?} forward margin {}",
                forward.worst_margin
            );
            assert!(
                backward.holds,
                "{crit:?} backward margin {}",
                backward.worst_margin
            );
            assert!(forward.worst_margin.abs() < 1e-6);
            assert!(backward.worst_margin.abs() < 1e-6);
        }
    }

    #[test]
    fn permutation_variant_requires_all_permutations_to_hold() {
        // Y dominates X coordinate-wise, but not after swapping X's coords:
        // stock 0 of X pays 3 which beats Y's stock 1 at the vertex
        let x = DiscreteMarket::from_rows(&[vec![3.0, 0.5]], &[1.0]).unwrap();
        let y = DiscreteMarket::from_rows(&[vec![3.0, 1.0]], &[1.0]).unwrap();
        let plain = vector_order_fixed_b(
            &x,
            &y,
            &OrderCriterion::Growth,
            &BGridSpec::default(),
            &RhoGridSpec::default(),
        )
        .unwrap();
        assert!(plain.holds);
        let permuted = vector_order_fixed_b_permutations(
            &x,
            &y,
            &OrderCriterion::Growth,
            &BGridSpec::default(),
            &RhoGridSpec::default(),
        )
        .unwrap();
        assert!(!permuted.holds);
        assert!(permuted.witness.permutation.is_some());
    }

    #[test]
    fn fixed_b_high_dimension_uses_low_discrepancy_grid() {
        // dimension 6 leaves the lattice range; the low-discrepancy grid
        // plus vertices must still certify the scaled ordering
        let rows = vec![
            vec![1.2, 0.8, 1.0, 0.9, 1.1, 0.7],
            vec![0.7, 1.5, 0.9, 1.2, 0.8, 1.3],
            vec![1.0, 1.0, 1.3, 0.8, 1.0, 1.0],
        ];
        let x = DiscreteMarket::from_rows(&rows, &[0.4, 0.3, 0.3]).unwrap();
        let y = x.scaled(2.0).unwrap();
        let b_grid = BGridSpec {
            mesh: 20,
            low_discrepancy: 64,
        };
        let verdict = vector_order_fixed_b(
            &x,
            &y,
            &OrderCriterion::Growth,
            &b_grid,
            &RhoGridSpec::default(),
        )
        .unwrap();
        assert!(verdict.holds);
        assert!((verdict.worst_margin - 2f64.ln()).abs() < 1e-12);
        assert!(verdict
            .grid_spec
            .b_grid_description
            .as_deref()
            .unwrap()
            .contains("low-discrepancy"));
    }

    #[test]
    fn permutation_variant_rejects_high_dimensions() {
        let rows = vec![vec![1.0; 7]];
        let x = DiscreteMarket::from_rows(&rows, &[1.0]).unwrap();
        assert!(vector_order_fixed_b_permutations(
            &x,
            &x,
            &OrderCriterion::Growth,
            &BGridSpec::default(),
            &RhoGridSpec::default(),
        )
        .is_err());
    }

    #[test]
    fn generic_family_increasing_functions() {
        let family = GeneratorFamily {
            name: "increasing-powers".into(),
            functions: vec![
                ("sqrt".into(), Arc::new(|x: f64| x.sqrt()) as Arc<_>),
                ("linear".into(), Arc::new(|x: f64| x) as Arc<_>),
            ],
        };
        let x = DiscreteMarket::from_rows(&[vec![1.0, 0.5]], &[1.0]).unwrap();
        let y = DiscreteMarket::from_rows(&[vec![2.0, 1.5]], &[1.0]).unwrap();
        let verdict = vector_order_fixed_b(
            &x,
            &y,
            &OrderCriterion::Generic(family),
            &BGridSpec::default(),
            &RhoGridSpec::default(),
        )
        .unwrap();
        assert!(verdict.holds);
    }

    #[test]
    fn verdict_serializes_with_grid_spec() {
        let x = DiscreteMarket::scalar(&[1.0], &[1.0]).unwrap();
        let verdict = lt_order(&x, &x, &RhoGridSpec::default()).unwrap();
        let json = verdict.to_json_string();
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed["grid_spec"]["criterion"], "laplace");
        assert_eq!(parsed["grid_spec"]["rho_grid"]["count"], 61);
    }
}
