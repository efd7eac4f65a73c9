//! Market and channel representations: price-relative vectors, sample paths,
//! finite-support distributions, synthetic generators, and CSV ingestion.
//!
//! Distributions are canonically finite-support ([`DiscreteMarket`]), so all
//! expectations downstream are exact finite sums. Sample paths bridge into
//! distributions through [`empirical_market`].

use std::collections::HashMap;
use std::io::Read;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::serial;

/// One period's vector of price relatives `X_0..X_M` (dimensionless ratios).
///
/// Entries are nonnegative with at least one strictly positive entry; an
/// all-zero vector annihilates wealth (log growth of -inf) and is rejected
/// at construction rather than silently accepted.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceRelatives(Vec<f64>);

impl PriceRelatives {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("price-relative vector must be nonempty"));
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::invalid(format!("entry {i} is not finite: {v}")));
            }
            if v < 0.0 {
                return Err(Error::invalid(format!(
                    "price relatives must be nonnegative, entry {i} is {v}"
                )));
            }
        }
        if values.iter().all(|&v| v == 0.0) {
            return Err(Error::invalid(
                "all price relatives are zero; wealth would be annihilated",
            ));
        }
        Ok(PriceRelatives(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Bit pattern used for exact (no epsilon) deduplication.
    pub(crate) fn bits(&self) -> Vec<u64> {
        self.0.iter().map(|v| v.to_bits()).collect()
    }
}

/// Time series of price-relative vectors, optionally labeled with a
/// side-information state per period.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    dim: usize,
    samples: Vec<PriceRelatives>,
    si_labels: Option<Vec<u32>>,
    si_state_count: u32,
}

impl SampleSet {
    /// Build from samples; errors if dimensions disagree.
    pub fn new(samples: Vec<PriceRelatives>) -> Result<Self> {
        let dim = match samples.first() {
            Some(s) => s.dim(),
            None => return Err(Error::invalid("cannot infer dimension of empty sample set")),
        };
        Self::with_dim(dim, samples)
    }

    /// Build from samples with an explicit dimension (allows N = 0).
    pub fn with_dim(dim: usize, samples: Vec<PriceRelatives>) -> Result<Self> {
        for (i, s) in samples.iter().enumerate() {
            if s.dim() != dim {
                return Err(Error::BadRow {
                    row: i + 1,
                    message: format!("dimension {} differs from {}", s.dim(), dim),
                });
            }
        }
        Ok(SampleSet {
            dim,
            samples,
            si_labels: None,
            si_state_count: 0,
        })
    }

    /// Attach SI labels in `{1..k}`, one per period.
    pub fn with_si_labels(mut self, labels: Vec<u32>, k: u32) -> Result<Self> {
        if labels.len() != self.samples.len() {
            return Err(Error::invalid(format!(
                "{} SI labels for {} samples",
                labels.len(),
                self.samples.len()
            )));
        }
        if k == 0 {
            return Err(Error::invalid("SI state count must be positive"));
        }
        for (i, &l) in labels.iter().enumerate() {
            if l == 0 || l > k {
                return Err(Error::BadRow {
                    row: i + 1,
                    message: format!("SI label {l} outside 1..={k}"),
                });
            }
        }
        self.si_labels = Some(labels);
        self.si_state_count = k;
        Ok(self)
    }

    /// Label each period by the index (1-based) of its best stock; the state
    /// count equals the dimension. For horse races this is perfect SI.
    pub fn with_winner_si(self) -> Result<Self> {
        let labels: Vec<u32> = self
            .samples
            .iter()
            .map(|s| 1 + argmax(s.values()) as u32)
            .collect();
        let k = self.dim as u32;
        self.with_si_labels(labels, k)
    }

    /// Attach labels drawn independently and uniformly from `{1..k}`.
    pub fn with_independent_si(self, k: u32, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels: Vec<u32> = (0..self.samples.len())
            .map(|_| 1 + (rng.random::<f64>() * k as f64) as u32)
            .map(|l| l.min(k))
            .collect();
        self.with_si_labels(labels, k)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn samples(&self) -> &[PriceRelatives] {
        &self.samples
    }

    pub fn si_labels(&self) -> Option<&[u32]> {
        self.si_labels.as_deref()
    }

    /// Number of SI states `K` (0 when unlabeled).
    pub fn si_state_count(&self) -> u32 {
        self.si_state_count
    }

    /// Sub-series over `[start, end)`, keeping labels.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if start > end || end > self.samples.len() {
            return Err(Error::invalid(format!(
                "slice {start}..{end} out of range for {} samples",
                self.samples.len()
            )));
        }
        Ok(SampleSet {
            dim: self.dim,
            samples: self.samples[start..end].to_vec(),
            si_labels: self.si_labels.as_ref().map(|l| l[start..end].to_vec()),
            si_state_count: self.si_state_count,
        })
    }

    /// Rescale every sample by `c > 0` (used by scale-invariance checks).
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::invalid("scale factor must be positive"));
        }
        let samples = self
            .samples
            .iter()
            .map(|s| PriceRelatives::new(s.values().iter().map(|&v| c * v).collect()))
            .collect::<Result<Vec<_>>>()?;
        Ok(SampleSet {
            dim: self.dim,
            samples,
            si_labels: self.si_labels.clone(),
            si_state_count: self.si_state_count,
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&SampleSetWire::from(self)).expect("sample set serializes")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let wire: SampleSetWire =
            serde_json::from_str(s).map_err(|e| Error::invalid(format!("bad JSON: {e}")))?;
        wire.try_into()
    }
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// A point mass of a [`DiscreteMarket`].
#[derive(Debug, Clone, PartialEq)]
pub struct MarketAtom {
    pub values: PriceRelatives,
    pub si_state: Option<u32>,
    pub probability: f64,
}

/// Finite-support joint distribution of a stock vector and an optional
/// side-information label.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMarket {
    dim: usize,
    atoms: Vec<MarketAtom>,
}

/// Probability-mass tolerance for market construction.
pub const PROB_TOL: f64 = 1e-12;

impl DiscreteMarket {
    pub fn new(atoms: Vec<MarketAtom>) -> Result<Self> {
        let dim = match atoms.first() {
            Some(a) => a.values.dim(),
            None => return Err(Error::invalid("market needs at least one atom")),
        };
        // compensated summation: the 1e-12 mass invariant must not be eaten
        // by accumulation error on large atom counts
        let mut mass = 0.0;
        let mut comp = 0.0;
        for (i, a) in atoms.iter().enumerate() {
            if a.values.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: a.values.dim(),
                });
            }
            if !(a.probability >= 0.0 && a.probability <= 1.0) {
                return Err(Error::BadRow {
                    row: i + 1,
                    message: format!("probability {} outside [0, 1]", a.probability),
                });
            }
            let y = a.probability - comp;
            let t = mass + y;
            comp = (t - mass) - y;
            mass = t;
        }
        if (mass - 1.0).abs() > PROB_TOL {
            return Err(Error::ProbabilityMass {
                sum: mass,
                tol: PROB_TOL,
            });
        }
        Ok(DiscreteMarket { dim, atoms })
    }

    /// Convenience constructor from rows and probabilities, no SI.
    pub fn from_rows(rows: &[Vec<f64>], probs: &[f64]) -> Result<Self> {
        if rows.len() != probs.len() {
            return Err(Error::invalid("rows and probabilities differ in length"));
        }
        let atoms = rows
            .iter()
            .zip(probs)
            .map(|(r, &p)| {
                Ok(MarketAtom {
                    values: PriceRelatives::new(r.clone())?,
                    si_state: None,
                    probability: p,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        DiscreteMarket::new(atoms)
    }

    /// Scalar market (dimension 1) from values and probabilities.
    pub fn scalar(values: &[f64], probs: &[f64]) -> Result<Self> {
        let rows: Vec<Vec<f64>> = values.iter().map(|&v| vec![v]).collect();
        Self::from_rows(&rows, probs)
    }

    /// Horse race over `m` assets: atom `e_j * payoff_j` with probability
    /// `win_probs[j]`.
    pub fn horse_race(win_probs: &[f64], payoffs: &[f64]) -> Result<Self> {
        validate_horse_race(win_probs, payoffs)?;
        let m = win_probs.len();
        let atoms = (0..m)
            .map(|j| {
                let mut row = vec![0.0; m];
                row[j] = payoffs[j];
                Ok(MarketAtom {
                    values: PriceRelatives::new(row)?,
                    si_state: None,
                    probability: win_probs[j],
                })
            })
            .collect::<Result<Vec<_>>>()?;
        DiscreteMarket::new(atoms)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[MarketAtom] {
        &self.atoms
    }

    pub fn has_si(&self) -> bool {
        self.atoms.iter().all(|a| a.si_state.is_some())
    }

    /// Per-coordinate means `E[X_m]`.
    pub fn means(&self) -> Vec<f64> {
        let mut mu = vec![0.0; self.dim];
        for a in &self.atoms {
            for (m, &x) in a.values.values().iter().enumerate() {
                mu[m] += a.probability * x;
            }
        }
        mu
    }

    /// Market with SI labels dropped (duplicate rows merged).
    pub fn without_si(&self) -> DiscreteMarket {
        let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut atoms: Vec<MarketAtom> = Vec::new();
        for a in &self.atoms {
            match index.entry(a.values.bits()) {
                std::collections::hash_map::Entry::Occupied(e) => {
                    atoms[*e.get()].probability += a.probability;
                }
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(atoms.len());
                    atoms.push(MarketAtom {
                        values: a.values.clone(),
                        si_state: None,
                        probability: a.probability,
                    });
                }
            }
        }
        DiscreteMarket {
            dim: self.dim,
            atoms,
        }
    }

    /// Apply `f` to every atom's value vector, keeping probabilities and SI.
    pub fn map_values(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<DiscreteMarket> {
        let atoms = self
            .atoms
            .iter()
            .map(|a| {
                Ok(MarketAtom {
                    values: PriceRelatives::new(f(a.values.values()))?,
                    si_state: a.si_state,
                    probability: a.probability,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        DiscreteMarket::new(atoms)
    }

    /// Market scaled by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<DiscreteMarket> {
        if !(c > 0.0) {
            return Err(Error::invalid("scale factor must be positive"));
        }
        self.map_values(|v| v.iter().map(|&x| c * x).collect())
    }

    /// Market with coordinates permuted: output coordinate `i` takes input
    /// coordinate `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<DiscreteMarket> {
        if perm.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: perm.len(),
            });
        }
        self.map_values(|v| perm.iter().map(|&j| v[j]).collect())
    }

    /// Unit cash coordinate adjoined in front of every atom.
    pub fn with_cash(&self) -> DiscreteMarket {
        self.map_values(|v| {
            let mut row = Vec::with_capacity(v.len() + 1);
            row.push(1.0);
            row.extend_from_slice(v);
            row
        })
        .expect("adjoining cash preserves validity")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&MarketWire::from(self)).expect("market serializes")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let wire: MarketWire =
            serde_json::from_str(s).map_err(|e| Error::invalid(format!("bad JSON: {e}")))?;
        wire.try_into()
    }
}

fn validate_horse_race(win_probs: &[f64], payoffs: &[f64]) -> Result<()> {
    if win_probs.is_empty() {
        return Err(Error::invalid("horse race needs at least one asset"));
    }
    if payoffs.len() != win_probs.len() {
        return Err(Error::DimensionMismatch {
            expected: win_probs.len(),
            got: payoffs.len(),
        });
    }
    let sum: f64 = win_probs.iter().sum();
    if win_probs.iter().any(|&p| p < 0.0) || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "win probabilities must lie on the simplex (sum = {sum})"
        )));
    }
    if payoffs.iter().any(|&o| !(o > 0.0)) {
        return Err(Error::invalid("payoffs must be positive"));
    }
    Ok(())
}

/// Distribution of nonnegative channel gains `|h_m|^2`: either an explicit
/// finite-support market over gain vectors or independent exponential
/// branches with the given means (Rayleigh-magnitude fading).
#[derive(Debug, Clone)]
pub enum GainDistribution {
    Discrete(DiscreteMarket),
    Exponential { means: Vec<f64> },
}

impl GainDistribution {
    pub fn exponential(means: Vec<f64>) -> Result<Self> {
        if means.is_empty() {
            return Err(Error::invalid("need at least one branch"));
        }
        if means.iter().any(|&m| !(m > 0.0)) {
            return Err(Error::invalid("per-branch means must be positive"));
        }
        Ok(GainDistribution::Exponential { means })
    }

    pub fn discrete(market: DiscreteMarket) -> Self {
        GainDistribution::Discrete(market)
    }

    /// Number of branches `M`.
    pub fn branches(&self) -> usize {
        match self {
            GainDistribution::Discrete(m) => m.dim(),
            GainDistribution::Exponential { means } => means.len(),
        }
    }

    /// Finite-support view. Exponential branches are discretized by midpoint
    /// quantiles (per branch), crossed into a product market; the per-branch
    /// atom count shrinks with the branch count to bound the product size.
    pub fn to_discrete(&self, per_branch: Option<usize>) -> Result<DiscreteMarket> {
        match self {
            GainDistribution::Discrete(m) => Ok(m.clone()),
            GainDistribution::Exponential { means } => {
                let m = means.len();
                let n = per_branch.unwrap_or_else(|| default_quantile_count(m));
                let grids: Vec<Vec<f64>> = means
                    .iter()
                    .map(|&mu| exponential_quantile_atoms(mu, n))
                    .collect();
                let mut rows: Vec<Vec<f64>> = vec![Vec::new()];
                for grid in &grids {
                    let mut next = Vec::with_capacity(rows.len() * grid.len());
                    for row in &rows {
                        for &g in grid {
                            let mut r = row.clone();
                            r.push(g);
                            next.push(r);
                        }
                    }
                    rows = next;
                }
                let p = 1.0 / rows.len() as f64;
                let probs = vec![p; rows.len()];
                DiscreteMarket::from_rows(&rows, &probs)
            }
        }
    }
}

fn default_quantile_count(branches: usize) -> usize {
    // keep the product market near 16k atoms
    ((16_384f64).powf(1.0 / branches as f64).round() as usize).clamp(8, 4096)
}

/// Midpoint-quantile discretization of an exponential with the given mean.
pub fn exponential_quantile_atoms(mean: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| -mean * (1.0 - (i as f64 + 0.5) / n as f64).ln())
        .collect()
}

/// Parse a CSV stream into a [`SampleSet`].
///
/// The header row names the stock columns (file order defines `m = 0..M`)
/// and, optionally, one SI column selected by name. Rejects negative price
/// relatives, ragged rows, and non-positive-integer SI labels, naming the
/// offending data row (1-based).
pub fn load_csv(stream: impl Read, si_column: Option<&str>) -> Result<SampleSet> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(stream);
    let headers = reader
        .headers()
        .map_err(|e| Error::invalid(format!("bad CSV header: {e}")))?
        .clone();
    let si_idx = match si_column {
        Some(name) => Some(
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::invalid(format!("SI column '{name}' not in header")))?,
        ),
        None => None,
    };
    let n_cols = headers.len();
    let stock_cols = n_cols - si_idx.map_or(0, |_| 1);
    if stock_cols == 0 {
        return Err(Error::invalid("no stock columns"));
    }

    let mut samples = Vec::new();
    let mut labels = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let row = row_idx + 1;
        let record = record.map_err(|e| Error::BadRow {
            row,
            message: format!("unreadable: {e}"),
        })?;
        if record.len() != n_cols {
            return Err(Error::BadRow {
                row,
                message: format!("{} fields, header has {}", record.len(), n_cols),
            });
        }
        let mut values = Vec::with_capacity(stock_cols);
        for (col, field) in record.iter().enumerate() {
            if Some(col) == si_idx {
                let label: i64 = field.parse().map_err(|_| Error::BadRow {
                    row,
                    message: format!("SI label '{field}' is not an integer"),
                })?;
                if label <= 0 {
                    return Err(Error::BadRow {
                        row,
                        message: format!("SI label {label} must be positive"),
                    });
                }
                labels.push(label as u32);
            } else {
                let v: f64 = field.parse().map_err(|_| Error::BadRow {
                    row,
                    message: format!("'{field}' is not a number"),
                })?;
                if v < 0.0 {
                    return Err(Error::BadRow {
                        row,
                        message: format!("negative price relative {v}"),
                    });
                }
                values.push(v);
            }
        }
        samples.push(PriceRelatives::new(values).map_err(|e| Error::BadRow {
            row,
            message: e.to_string(),
        })?);
    }

    let set = SampleSet::with_dim(stock_cols, samples)?;
    if si_idx.is_some() {
        let k = labels.iter().copied().max().unwrap_or(0);
        set.with_si_labels(labels, k.max(1))
    } else {
        Ok(set)
    }
}

/// Render a [`SampleSet`] as CSV with 17-significant-digit decimal text.
pub fn write_csv(set: &SampleSet, si_column: Option<&str>) -> String {
    let mut out = String::new();
    let stock_headers: Vec<String> = (0..set.dim()).map(|m| format!("x{m}")).collect();
    out.push_str(&stock_headers.join(","));
    if let Some(name) = si_column {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (i, s) in set.samples().iter().enumerate() {
        let fields: Vec<String> = s.values().iter().map(|&v| serial::to_dec17(v)).collect();
        out.push_str(&fields.join(","));
        if si_column.is_some() {
            let label = set.si_labels().map_or(0, |l| l[i]);
            out.push(',');
            out.push_str(&label.to_string());
        }
        out.push('\n');
    }
    out
}

/// Horse race sample path: each period is `e_m * payoffs[m]` with
/// probability `win_probs[m]`. Deterministic given the seed.
pub fn gen_horse_race(
    m: usize,
    win_probs: &[f64],
    payoffs: &[f64],
    n: usize,
    seed: u64,
) -> Result<SampleSet> {
    if m < 1 {
        return Err(Error::invalid("need at least one horse"));
    }
    if win_probs.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: win_probs.len(),
        });
    }
    validate_horse_race(win_probs, payoffs)?;
    let mut cumulative = Vec::with_capacity(m);
    let mut acc = 0.0;
    for &p in win_probs {
        acc += p;
        cumulative.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            let winner = cumulative.iter().position(|&c| u < c).unwrap_or(m - 1);
            let mut row = vec![0.0; m];
            row[winner] = payoffs[winner];
            PriceRelatives::new(row)
        })
        .collect::<Result<Vec<_>>>()?;
    SampleSet::with_dim(m, samples)
}

/// Rayleigh-fading SIMO gain path: each period is a vector of independent
/// exponential draws `|h_m|^2` with the given per-branch means.
pub fn gen_rayleigh_simo(m: usize, mean_gains: &[f64], n: usize, seed: u64) -> Result<SampleSet> {
    if m < 1 {
        return Err(Error::invalid("need at least one branch"));
    }
    if mean_gains.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: mean_gains.len(),
        });
    }
    if mean_gains.iter().any(|&g| !(g > 0.0)) {
        return Err(Error::invalid("mean gains must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..n)
        .map(|_| {
            let row: Vec<f64> = mean_gains
                .iter()
                .map(|&mu| {
                    let u: f64 = rng.random();
                    -mu * (1.0 - u).ln()
                })
                .collect();
            PriceRelatives::new(row)
        })
        .collect::<Result<Vec<_>>>()?;
    SampleSet::with_dim(m, samples)
}

/// Empirical distribution of a sample path: one atom per distinct
/// `(sample, SI)` pair, weighted by relative frequency. Deduplication is
/// exact (bitwise); probabilities are exact count ratios.
pub fn empirical_market(set: &SampleSet) -> Result<DiscreteMarket> {
    if set.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    let n = set.len() as f64;
    let mut index: HashMap<(Vec<u64>, Option<u32>), usize> = HashMap::new();
    let mut counts: Vec<(PriceRelatives, Option<u32>, u64)> = Vec::new();
    for (i, s) in set.samples().iter().enumerate() {
        let si = set.si_labels().map(|l| l[i]);
        match index.entry((s.bits(), si)) {
            std::collections::hash_map::Entry::Occupied(e) => counts[*e.get()].2 += 1,
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert(counts.len());
                counts.push((s.clone(), si, 1));
            }
        }
    }
    let atoms = counts
        .into_iter()
        .map(|(values, si_state, c)| MarketAtom {
            values,
            si_state,
            probability: c as f64 / n,
        })
        .collect();
    DiscreteMarket::new(atoms)
}

/// Quantize a real-valued SI sequence into `{1..k}` by empirical-quantile
/// (equal-population) bins, ties broken toward the lower bin.
pub fn discretize_si(values: &[f64], k: u32) -> Result<Vec<u32>> {
    if values.is_empty() {
        return Err(Error::invalid("cannot discretize an empty sequence"));
    }
    if k < 2 {
        return Err(Error::invalid("need at least two bins"));
    }
    let n = values.len();
    if k as usize > n {
        return Err(Error::invalid(format!("{k} bins for only {n} values")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let boundaries: Vec<f64> = (1..k)
        .map(|j| {
            let pos = (n as f64 * j as f64 / k as f64).ceil() as usize;
            sorted[pos.max(1) - 1]
        })
        .collect();
    let labels: Vec<u32> = values
        .iter()
        .map(|&v| 1 + boundaries.iter().filter(|&&b| v > b).count() as u32)
        .collect();
    if labels.iter().all(|&l| l == labels[0]) {
        log::warn!(
            "SI discretization is degenerate: every label is {}",
            labels[0]
        );
    }
    Ok(labels)
}

// --- JSON wire formats (explicit field names, decimal text for reals) ---

#[derive(Serialize, Deserialize)]
struct SampleSetWire {
    dim: usize,
    #[serde(with = "serial::dec_mat")]
    samples: Vec<Vec<f64>>,
    si_labels: Option<Vec<u32>>,
    si_state_count: u32,
}

impl From<&SampleSet> for SampleSetWire {
    fn from(s: &SampleSet) -> Self {
        SampleSetWire {
            dim: s.dim,
            samples: s.samples.iter().map(|p| p.values().to_vec()).collect(),
            si_labels: s.si_labels.clone(),
            si_state_count: s.si_state_count,
        }
    }
}

impl TryFrom<SampleSetWire> for SampleSet {
    type Error = Error;

    fn try_from(w: SampleSetWire) -> Result<Self> {
        let samples = w
            .samples
            .into_iter()
            .map(PriceRelatives::new)
            .collect::<Result<Vec<_>>>()?;
        let set = SampleSet::with_dim(w.dim, samples)?;
        match w.si_labels {
            Some(labels) => set.with_si_labels(labels, w.si_state_count),
            None => Ok(set),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct AtomWire {
    #[serde(with = "serial::dec_vec")]
    values: Vec<f64>,
    si_state: Option<u32>,
    #[serde(with = "serial::dec")]
    probability: f64,
}

#[derive(Serialize, Deserialize)]
struct MarketWire {
    dim: usize,
    atoms: Vec<AtomWire>,
}

impl From<&DiscreteMarket> for MarketWire {
    fn from(m: &DiscreteMarket) -> Self {
        MarketWire {
            dim: m.dim,
            atoms: m
                .atoms
                .iter()
                .map(|a| AtomWire {
                    values: a.values.values().to_vec(),
                    si_state: a.si_state,
                    probability: a.probability,
                })
                .collect(),
        }
    }
}

impl TryFrom<MarketWire> for DiscreteMarket {
    type Error = Error;

    fn try_from(w: MarketWire) -> Result<Self> {
        let atoms = w
            .atoms
            .into_iter()
            .map(|a| {
                Ok(MarketAtom {
                    values: PriceRelatives::new(a.values)?,
                    si_state: a.si_state,
                    probability: a.probability,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        DiscreteMarket::new(atoms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn price_relatives_reject_negative_and_all_zero() {
        assert!(PriceRelatives::new(vec![1.0, -0.5]).is_err());
        assert!(PriceRelatives::new(vec![0.0, 0.0]).is_err());
        assert!(PriceRelatives::new(vec![0.0, 2.0]).is_ok());
    }

    #[test]
    fn load_csv_basic() {
        let csv = "a,b\n1.0,2.0\n1.0,0.5\n";
        let set = load_csv(csv.as_bytes(), None).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.dim(), 2);
        assert_eq!(set.samples()[0].values(), &[1.0, 2.0]);
    }

    #[test]
    fn load_csv_rejects_negative_naming_row() {
        let csv = "a,b\n1.0,2.0\n-1.0,0.5\n";
        match load_csv(csv.as_bytes(), None) {
            Err(Error::BadRow { row, .. }) => assert_eq!(row, 2),
            other => panic!("expected BadRow, got {other:?}"),
        }
    }

    #[test]
    fn load_csv_rejects_ragged_rows() {
        let csv = "a,b\n1.0,2.0\n1.0\n";
        assert!(matches!(
            load_csv(csv.as_bytes(), None),
            Err(Error::BadRow { row: 2, .. })
        ));
    }

    #[test]
    fn load_csv_with_si_column() {
        let csv = "a,b,s\n1.0,2.0,1\n1.0,0.5,2\n2.0,1.0,1\n0.5,1.0,2\n";
        let set = load_csv(csv.as_bytes(), Some("s")).unwrap();
        assert_eq!(set.si_state_count(), 2);
        assert_eq!(set.si_labels().unwrap(), &[1, 2, 1, 2]);
        assert_eq!(set.dim(), 2);
    }

    #[test]
    fn load_csv_rejects_bad_si_labels() {
        let csv = "a,s\n1.0,0\n";
        assert!(matches!(
            load_csv(csv.as_bytes(), Some("s")),
            Err(Error::BadRow { row: 1, .. })
        ));
        let csv = "a,s\n1.0,1.5\n";
        assert!(load_csv(csv.as_bytes(), Some("s")).is_err());
    }

    #[test]
    fn horse_race_generator_is_one_hot_and_deterministic() {
        let set = gen_horse_race(2, &[0.5, 0.5], &[2.0, 2.0], 4, 7).unwrap();
        assert_eq!(set.len(), 4);
        for s in set.samples() {
            let nz: Vec<&f64> = s.values().iter().filter(|&&v| v != 0.0).collect();
            assert_eq!(nz.len(), 1);
            assert_eq!(*nz[0], 2.0);
        }
        let again = gen_horse_race(2, &[0.5, 0.5], &[2.0, 2.0], 4, 7).unwrap();
        assert_eq!(set.to_json_string(), again.to_json_string());
    }

    #[test]
    fn horse_race_degenerate_probs() {
        let set = gen_horse_race(2, &[1.0, 0.0], &[3.0, 2.0], 10, 1).unwrap();
        for s in set.samples() {
            assert_eq!(s.values(), &[3.0, 0.0]);
        }
    }

    #[test]
    fn horse_race_rejects_off_simplex() {
        assert!(gen_horse_race(2, &[0.7, 0.7], &[2.0, 2.0], 1, 0).is_err());
    }

    #[test]
    fn horse_race_empirical_frequencies() {
        let n = 30_000;
        let set = gen_horse_race(3, &[1.0 / 3.0; 3], &[3.0, 3.0, 3.0], n, 42).unwrap();
        let mut counts = [0usize; 3];
        for s in set.samples() {
            let w = s.values().iter().position(|&v| v > 0.0).unwrap();
            counts[w] += 1;
        }
        for &c in &counts {
            assert!((c as f64 / n as f64 - 1.0 / 3.0).abs() < 0.02);
        }
    }

    #[test]
    fn rayleigh_means_match() {
        let set = gen_rayleigh_simo(1, &[1.0], 100_000, 9).unwrap();
        let mean: f64 = set.samples().iter().map(|s| s.values()[0]).sum::<f64>() / set.len() as f64;
        assert!((mean - 1.0).abs() < 0.02);

        let set2 = gen_rayleigh_simo(2, &[1.0, 2.0], 100_000, 9).unwrap();
        for (m, target) in [(0usize, 1.0), (1, 2.0)] {
            let mean: f64 =
                set2.samples().iter().map(|s| s.values()[m]).sum::<f64>() / set2.len() as f64;
            assert!((mean - target).abs() < 0.02 * target.max(1.0) + 0.02);
        }
    }

    #[test]
    fn rayleigh_empty_is_fine() {
        let set = gen_rayleigh_simo(2, &[1.0, 1.0], 0, 3).unwrap();
        assert_eq!(set.len(), 0);
        assert_eq!(set.dim(), 2);
    }

    #[test]
    fn rayleigh_rejects_nonpositive_mean() {
        assert!(gen_rayleigh_simo(1, &[0.0], 5, 0).is_err());
    }

    #[test]
    fn empirical_market_counts() {
        let samples = vec![
            PriceRelatives::new(vec![2.0, 0.0]).unwrap(),
            PriceRelatives::new(vec![2.0, 0.0]).unwrap(),
            PriceRelatives::new(vec![0.0, 2.0]).unwrap(),
        ];
        let set = SampleSet::new(samples).unwrap();
        let market = empirical_market(&set).unwrap();
        assert_eq!(market.atoms().len(), 2);
        assert_eq!(market.atoms()[0].probability, 2.0 / 3.0);
        assert_eq!(market.atoms()[1].probability, 1.0 / 3.0);
    }

    #[test]
    fn empirical_market_single_sample() {
        let set = SampleSet::new(vec![PriceRelatives::new(vec![1.0, 1.5]).unwrap()]).unwrap();
        let market = empirical_market(&set).unwrap();
        assert_eq!(market.atoms().len(), 1);
        assert_eq!(market.atoms()[0].probability, 1.0);
    }

    #[test]
    fn empirical_market_with_si_keeps_joint_atoms() {
        let rows = [
            (vec![2.0, 0.0], 1),
            (vec![2.0, 0.0], 1),
            (vec![0.0, 2.0], 2),
            (vec![0.0, 2.0], 2),
            (vec![2.0, 0.0], 2),
            (vec![0.0, 2.0], 1),
        ];
        let samples = rows
            .iter()
            .map(|(v, _)| PriceRelatives::new(v.clone()).unwrap())
            .collect();
        let labels = rows.iter().map(|&(_, s)| s).collect();
        let set = SampleSet::new(samples)
            .unwrap()
            .with_si_labels(labels, 2)
            .unwrap();
        let market = empirical_market(&set).unwrap();
        assert_eq!(market.atoms().len(), 4);
        let total: f64 = market.atoms().iter().map(|a| a.probability).sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn empirical_market_rejects_empty() {
        let set = SampleSet::with_dim(2, vec![]).unwrap();
        assert!(matches!(empirical_market(&set), Err(Error::EmptySampleSet)));
    }

    #[test]
    fn discretize_median_split() {
        let values: Vec<f64> = (1..=10).map(|v| v as f64).collect();
        let labels = discretize_si(&values, 2).unwrap();
        for (v, l) in values.iter().zip(&labels) {
            assert_eq!(*l, if *v <= 5.0 { 1 } else { 2 });
        }
    }

    #[test]
    fn discretize_constant_sequence_all_lower_bin() {
        let labels = discretize_si(&[3.0; 8], 2).unwrap();
        assert!(labels.iter().all(|&l| l == 1));
    }

    #[test]
    fn discretize_equal_population() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let values: Vec<f64> = (0..4000).map(|_| rng.random::<f64>()).collect();
        let labels = discretize_si(&values, 4).unwrap();
        let mut counts = [0usize; 4];
        for &l in &labels {
            counts[(l - 1) as usize] += 1;
        }
        assert_eq!(counts, [1000, 1000, 1000, 1000]);
    }

    #[test]
    fn discretize_rejects_more_bins_than_values() {
        assert!(discretize_si(&[1.0, 2.0], 3).is_err());
    }

    #[test]
    fn market_probability_mass_checked() {
        assert!(DiscreteMarket::from_rows(&[vec![1.0], vec![2.0]], &[0.5, 0.6]).is_err());
        assert!(DiscreteMarket::from_rows(&[vec![1.0], vec![2.0]], &[0.5, 0.5]).is_ok());
    }

    #[test]
    fn sample_set_json_round_trip() {
        let set = gen_rayleigh_simo(2, &[1.0, 2.0], 17, 3)
            .unwrap()
            .with_independent_si(3, 4)
            .unwrap();
        let json = set.to_json_string();
        let back = SampleSet::from_json_str(&json).unwrap();
        assert_eq!(set, back);
        assert_eq!(json, back.to_json_string());
    }

    #[test]
    fn market_json_round_trip() {
        let market = DiscreteMarket::horse_race(&[0.6, 0.4], &[2.0, 2.0]).unwrap();
        let json = market.to_json_string();
        let back = DiscreteMarket::from_json_str(&json).unwrap();
        assert_eq!(market, back);
    }

    #[test]
    fn exponential_quantile_atoms_have_right_mean() {
        let atoms = exponential_quantile_atoms(2.0, 4000);
        let mean: f64 = atoms.iter().sum::<f64>() / atoms.len() as f64;
        assert!((mean - 2.0).abs() < 0.01);
    }

    #[test]
    fn winner_si_labels_horse_race() {
        let set = gen_horse_race(3, &[0.3, 0.3, 0.4], &[2.0, 3.0, 4.0], 50, 11)
            .unwrap()
            .with_winner_si()
            .unwrap();
        assert_eq!(set.si_state_count(), 3);
        for (s, &l) in set.samples().iter().zip(set.si_labels().unwrap()) {
            assert!(s.values()[(l - 1) as usize] > 0.0);
        }
    }
}
