//! Query-counted classical simulation of amplitude-estimation divergence
//! estimators.
//!
//! The estimators here mirror a fault-tolerant pipeline: probability masses
//! are read through an approximate-counting primitive whose outcomes are the
//! discretised values sin²(lπ/M) after M oracle queries, a bounded statistic
//! of those noisy masses is averaged index-by-index, and the average is
//! stabilised with a median of group means. Everything runs classically —
//! amplitude-estimation outcomes are drawn from their exact outcome
//! distribution (a Fejér kernel over the sin² grid), never from a circuit.
//!
//! Query accounting is symbolic. A [`QueryLedger`] reports the oracle budget
//! the quantum mean-estimation contract would consume — executions of the
//! statistic routine times M queries per oracle per execution — not the
//! number of classical Monte Carlo draws used to realise the estimate, which
//! is an implementation detail of the simulation.
//!
//! Statistics built from inverse or logarithmic masses are extremely
//! sensitive to the outcome grid: when a mass sits between grid points the
//! kernel's heavy tails inflate E[1/p̃²] by a factor growing like M², and no
//! useful variance bound survives. [`grid_aligned_masses`] and
//! [`concentrated_test_pair`] construct inputs whose masses sit on (or
//! negligibly off) the grid so the advertised bias and variance contracts
//! hold; see their documentation.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Outcomes on a grid closer than this to the target phase are treated as
/// exact hits and get all the probability mass.
const ON_GRID_TOLERANCE: f64 = 1e-14;

/// Probability vectors must sum to 1 within this.
const MASS_TOLERANCE: f64 = 1e-10;

/// Relative slack when checking ratios against a certified bound, so a pair
/// rebuilt from its own exact bound validates.
const RATIO_SLACK: f64 = 1e-12;

/// Group count for the median-of-means estimate. Odd, and large enough that
/// a per-group failure probability of 1/4 leaves the median wrong with
/// probability under 1/5.
const MEDIAN_GROUPS: usize = 13;

/// Iteration cap for the residual-reduction walk in [`grid_aligned_masses`].
const WALK_ROUNDS: usize = 500;

/// Attempt cap for [`concentrated_test_pair`].
const PAIR_ATTEMPTS: usize = 1000;

/// Largest per-run query count the simulation will table.
const MAX_QUERIES: usize = 1 << 32;

/// Outcome model for the approximate-counting primitive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmplitudeEstimator {
    /// Raw outcomes: the l = 0 outcome reports exactly 0.
    Plain,
    /// The l = 0 outcome is floored at sin²(π/2M) so inverse and logarithmic
    /// statistics of the estimate stay finite.
    Floored,
}

/// Exact outcome distribution of an M-query amplitude estimate of `a`:
/// values sin²(lπ/M) for l ∈ {0..M−1}, weighted by the phase-estimation
/// kernel sin²(MΔπ)/(M²·sin²(Δπ)) at grid distance Δ = |ω − l/M| with
/// ω = arcsin(√a)/π. Weights sum to 1; an on-grid ω is reported exactly.
#[derive(Debug, Clone)]
pub struct AmplitudeEstimateTable {
    values: Vec<f64>,
    weights: Vec<f64>,
    cdf: Vec<f64>,
}

impl AmplitudeEstimateTable {
    pub fn new(amplitude: f64, queries: usize, estimator: AmplitudeEstimator) -> Result<Self> {
        validate_amplitude(amplitude)?;
        validate_queries(queries)?;
        let m = queries as f64;
        let omega = amplitude.sqrt().asin() / PI;

        let mut weights = vec![0.0; queries];
        let on_grid = (0..queries).find(|&l| (omega - l as f64 / m).abs() < ON_GRID_TOLERANCE);
        if let Some(l) = on_grid {
            weights[l] = 1.0;
        } else {
            for (l, w) in weights.iter_mut().enumerate() {
                let delta = (omega - l as f64 / m).abs();
                let wide = (m * delta * PI).sin();
                let narrow = (delta * PI).sin();
                *w = wide * wide / (m * m * narrow * narrow);
            }
            let total: f64 = weights.iter().sum();
            for w in &mut weights {
                *w /= total;
            }
        }

        let mut values: Vec<f64> = (0..queries)
            .map(|l| {
                let s = (l as f64 * PI / m).sin();
                s * s
            })
            .collect();
        if estimator == AmplitudeEstimator::Floored {
            values[0] = floor_value(queries);
        }

        let mut cdf = Vec::with_capacity(queries);
        let mut acc = 0.0;
        for &w in &weights {
            acc += w;
            cdf.push(acc);
        }
        Ok(Self {
            values,
            weights,
            cdf,
        })
    }

    /// Outcome values sin²(lπ/M), with l = 0 floored under [`AmplitudeEstimator::Floored`].
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// One outcome drawn from the table.
    pub fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        let u = rng.gen::<f64>();
        let index = self.cdf.partition_point(|&c| c <= u);
        self.values[index.min(self.values.len() - 1)]
    }

    /// E[ã] under the outcome distribution.
    pub fn mean(&self) -> f64 {
        self.mean_of(|v| v)
    }

    /// E[f(ã)] under the outcome distribution.
    pub fn mean_of(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.values
            .iter()
            .zip(&self.weights)
            .map(|(&v, &w)| f(v) * w)
            .sum()
    }
}

/// The floor sin²(π/2M) substituted for the zero outcome by the floored
/// estimator.
pub fn zero_floor(queries: usize) -> Result<f64> {
    validate_queries(queries)?;
    Ok(floor_value(queries))
}

fn floor_value(queries: usize) -> f64 {
    let s = (PI / (2.0 * queries as f64)).sin();
    s * s
}

/// Radius 2π√(a(1−a))/M + π²/M² within which an M-query estimate of `a`
/// lands with probability at least 8/π².
pub fn error_radius(amplitude: f64, queries: usize) -> Result<f64> {
    validate_amplitude(amplitude)?;
    validate_queries(queries)?;
    let m = queries as f64;
    Ok(2.0 * PI * (amplitude * (1.0 - amplitude)).sqrt() / m + PI * PI / (m * m))
}

/// One M-query estimate of `amplitude`, for callers without a cached table.
pub fn sample_amplitude_estimate<R: Rng>(
    amplitude: f64,
    queries: usize,
    estimator: AmplitudeEstimator,
    rng: &mut R,
) -> Result<f64> {
    Ok(AmplitudeEstimateTable::new(amplitude, queries, estimator)?.draw(rng))
}

fn validate_amplitude(amplitude: f64) -> Result<()> {
    if !(amplitude.is_finite() && (0.0..=1.0).contains(&amplitude)) {
        return Err(Error::InvalidAmplitude(amplitude));
    }
    Ok(())
}

fn validate_queries(queries: usize) -> Result<()> {
    if queries < 2 || !queries.is_power_of_two() {
        return Err(Error::InvalidQueryCount(queries));
    }
    Ok(())
}

fn validate_accuracy(accuracy: f64) -> Result<()> {
    if !(accuracy > 0.0 && accuracy < 1.0) {
        return Err(Error::InvalidAccuracy(accuracy));
    }
    Ok(())
}

fn validate_masses(masses: &[f64]) -> Result<()> {
    if masses.is_empty() {
        return Err(Error::EmptySupport);
    }
    for (index, &value) in masses.iter().enumerate() {
        if !(value.is_finite() && (0.0..=1.0).contains(&value)) {
            return Err(Error::InvalidProbability { index, value });
        }
    }
    let sum: f64 = masses.iter().sum();
    if (sum - 1.0).abs() > MASS_TOLERANCE {
        return Err(Error::NotNormalised {
            sum,
            tolerance: MASS_TOLERANCE,
        });
    }
    Ok(())
}

/// Smallest power of two (at least 2) reaching `x`, or `None` past the
/// simulation's table cap.
fn pow2_at_least(x: f64) -> Option<usize> {
    let mut m: usize = 2;
    while (m as f64) < x {
        if m >= MAX_QUERIES {
            return None;
        }
        m *= 2;
    }
    Some(m)
}

/// Per-execution query counts for one run of a two-oracle statistic routine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubroutineQueries {
    pub to_q: usize,
    pub to_p: usize,
}

/// Query counts for one Pearson statistic run over support size `support`
/// with certified ratio bound `bound` ≥ q/p: 2^⌈log₂(√n·g/ε)⌉ to q and
/// 2^⌈log₂(√n·g²/ε)⌉ to p.
pub fn pearson_queries(support: usize, bound: f64, accuracy: f64) -> Result<SubroutineQueries> {
    validate_support(support)?;
    validate_bound(bound)?;
    validate_accuracy(accuracy)?;
    let root = (support as f64).sqrt();
    let to_q =
        pow2_at_least(root * bound / accuracy).ok_or(Error::InvalidAccuracy(accuracy))?;
    let to_p =
        pow2_at_least(root * bound * bound / accuracy).ok_or(Error::InvalidAccuracy(accuracy))?;
    Ok(SubroutineQueries { to_q, to_p })
}

/// Query counts for one log-ratio statistic run with certified bound
/// `bound` ≥ p/q: 2^⌈log₂(√n/ε)⌉ to p and 2^⌈log₂(√n·g/ε)⌉ to q.
pub fn kl_queries(support: usize, bound: f64, accuracy: f64) -> Result<SubroutineQueries> {
    validate_support(support)?;
    validate_bound(bound)?;
    validate_accuracy(accuracy)?;
    let root = (support as f64).sqrt();
    let to_p = pow2_at_least(root / accuracy).ok_or(Error::InvalidAccuracy(accuracy))?;
    let to_q =
        pow2_at_least(root * bound / accuracy).ok_or(Error::InvalidAccuracy(accuracy))?;
    Ok(SubroutineQueries { to_q, to_p })
}

/// Query count per oracle for one total-variation statistic run:
/// 2^⌈log₂(8√n/ε)⌉. The 8 buys enough grid resolution that the statistic's
/// near-kink bias at p ≈ q stays below ε/2.
pub fn tv_queries(support: usize, accuracy: f64) -> Result<usize> {
    validate_support(support)?;
    validate_accuracy(accuracy)?;
    let root = (support as f64).sqrt();
    pow2_at_least(8.0 * root / accuracy).ok_or(Error::InvalidAccuracy(accuracy))
}

fn validate_support(support: usize) -> Result<()> {
    if support == 0 {
        return Err(Error::EmptySupport);
    }
    Ok(())
}

fn validate_bound(bound: f64) -> Result<()> {
    if !(bound.is_finite() && bound >= 1.0) {
        return Err(Error::InvalidBound(bound));
    }
    Ok(())
}

/// Executions of the statistic routine budgeted by the quantum
/// mean-estimation contract for accuracy ε at statistic scale σ:
/// ⌈x·max(ln x, 1)^{3/2}·max(ln max(ln x, 1), 1)⌉ with x = σ/ε, and at
/// least 1.
pub fn mean_contract_executions(sigma: f64, accuracy: f64) -> Result<usize> {
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(Error::InvalidStd(sigma));
    }
    validate_accuracy(accuracy)?;
    let x = sigma / accuracy;
    if x <= 1.0 {
        return Ok(1);
    }
    let log = x.ln().max(1.0);
    let loglog = log.ln().max(1.0);
    Ok((x * log.powf(1.5) * loglog).ceil() as usize)
}

/// Symbolic oracle budget: queries to each distribution and executions of
/// the statistic routine. Counts the quantum contract, not classical draws.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryLedger {
    pub queries_to_p: usize,
    pub queries_to_q: usize,
    pub executions: usize,
}

impl QueryLedger {
    /// Records one execution of a routine spending the given per-run counts.
    pub fn charge(&mut self, queries: SubroutineQueries) {
        self.queries_to_p += queries.to_p;
        self.queries_to_q += queries.to_q;
        self.executions += 1;
    }

    /// Adds another ledger's totals, as when independent runs are combined.
    pub fn merge(&mut self, other: &QueryLedger) {
        self.queries_to_p += other.queries_to_p;
        self.queries_to_q += other.queries_to_q;
        self.executions += other.executions;
    }

    pub fn total_queries(&self) -> usize {
        self.queries_to_p + self.queries_to_q
    }
}

/// Which ratio the bound of a [`BoundedRatioPair`] certifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioOrientation {
    /// Every q_i/p_i is at most the bound.
    QOverP,
    /// Every p_i/q_i is at most the bound.
    POverQ,
}

impl RatioOrientation {
    fn description(self) -> &'static str {
        match self {
            RatioOrientation::QOverP => "q/p",
            RatioOrientation::POverQ => "p/q",
        }
    }
}

/// Two distributions with a certified pointwise ratio bound. Indices where
/// both masses vanish are outside the bound's scope; a positive numerator
/// over a zero denominator is rejected outright.
#[derive(Debug, Clone)]
pub struct BoundedRatioPair {
    p: Vec<f64>,
    q: Vec<f64>,
    bound: f64,
    orientation: RatioOrientation,
}

impl BoundedRatioPair {
    pub fn with_bound(
        p: Vec<f64>,
        q: Vec<f64>,
        orientation: RatioOrientation,
        bound: f64,
    ) -> Result<Self> {
        validate_masses(&p)?;
        validate_masses(&q)?;
        if p.len() != q.len() {
            return Err(Error::SupportMismatch {
                left: p.len(),
                right: q.len(),
            });
        }
        validate_bound(bound)?;
        for index in 0..p.len() {
            let (numerator, denominator) = match orientation {
                RatioOrientation::QOverP => (q[index], p[index]),
                RatioOrientation::POverQ => (p[index], q[index]),
            };
            if denominator == 0.0 {
                if numerator > 0.0 {
                    return Err(Error::UnboundedRatio { index, numerator });
                }
                continue;
            }
            let ratio = numerator / denominator;
            if ratio > bound * (1.0 + RATIO_SLACK) {
                return Err(Error::RatioBoundViolation {
                    index,
                    ratio,
                    bound,
                });
            }
        }
        Ok(Self {
            p,
            q,
            bound,
            orientation,
        })
    }

    /// Certifies the tightest bound the pair actually satisfies.
    pub fn with_exact_bound(
        p: Vec<f64>,
        q: Vec<f64>,
        orientation: RatioOrientation,
    ) -> Result<Self> {
        validate_masses(&p)?;
        validate_masses(&q)?;
        if p.len() != q.len() {
            return Err(Error::SupportMismatch {
                left: p.len(),
                right: q.len(),
            });
        }
        let mut bound: f64 = 1.0;
        for index in 0..p.len() {
            let (numerator, denominator) = match orientation {
                RatioOrientation::QOverP => (q[index], p[index]),
                RatioOrientation::POverQ => (p[index], q[index]),
            };
            if denominator == 0.0 {
                if numerator > 0.0 {
                    return Err(Error::UnboundedRatio { index, numerator });
                }
                continue;
            }
            bound = bound.max(numerator / denominator);
        }
        Ok(Self {
            p,
            q,
            bound,
            orientation,
        })
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn orientation(&self) -> RatioOrientation {
        self.orientation
    }

    pub fn support(&self) -> usize {
        self.p.len()
    }

    fn expect_orientation(&self, required: RatioOrientation) -> Result<()> {
        if self.orientation == required {
            Ok(())
        } else {
            Err(Error::WrongRatioOrientation {
                expected: required.description(),
            })
        }
    }
}

/// ½(q̃/p̃ − 1): averaged over i ~ q it recovers ½·Σ(p−q)²/p.
pub fn pearson_statistic(q_est: f64, p_est: f64) -> f64 {
    0.5 * (q_est / p_est - 1.0)
}

/// |p̃ − q̃|/(p̃ + q̃), zero when both estimates vanish: averaged over
/// i ~ (p+q)/2 it recovers the total variation distance.
pub fn tv_statistic(p_est: f64, q_est: f64) -> f64 {
    let total = p_est + q_est;
    if total == 0.0 {
        0.0
    } else {
        (p_est - q_est).abs() / total
    }
}

/// ln p̃ − ln q̃: averaged over i ~ p it recovers Σ p·ln(p/q).
pub fn log_ratio_statistic(p_est: f64, q_est: f64) -> f64 {
    p_est.ln() - q_est.ln()
}

fn cumulative(masses: &[f64]) -> Vec<f64> {
    let mut cdf = Vec::with_capacity(masses.len());
    let mut acc = 0.0;
    for &m in masses {
        acc += m;
        cdf.push(acc);
    }
    cdf
}

fn draw_index<R: Rng>(cdf: &[f64], rng: &mut R) -> usize {
    let u = rng.gen::<f64>();
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

fn oracle_tables(masses: &[f64], queries: usize) -> Result<Vec<AmplitudeEstimateTable>> {
    masses
        .iter()
        .map(|&a| AmplitudeEstimateTable::new(a, queries, AmplitudeEstimator::Floored))
        .collect()
}

/// One run of the Pearson statistic routine: draws i ~ q, estimates q_i with
/// the q-side query count and p_i with the p-side count (both floored), and
/// returns ½(q̃/p̃ − 1). Charges the ledger one execution plus the per-run
/// query counts derived from the pair's bound.
pub fn pearson_subroutine<R: Rng>(
    pair: &BoundedRatioPair,
    accuracy: f64,
    ledger: &mut QueryLedger,
    rng: &mut R,
) -> Result<f64> {
    pair.expect_orientation(RatioOrientation::QOverP)?;
    validate_accuracy(accuracy)?;
    let queries = pearson_queries(pair.support(), pair.bound(), accuracy)?;
    let q_tables = oracle_tables(pair.q(), queries.to_q)?;
    let p_tables = oracle_tables(pair.p(), queries.to_p)?;
    let index_cdf = cumulative(pair.q());
    let i = draw_index(&index_cdf, rng);
    let value = pearson_statistic(q_tables[i].draw(rng), p_tables[i].draw(rng));
    ledger.charge(queries);
    Ok(value)
}

/// A divergence estimate together with the symbolic oracle budget the
/// quantum mean-estimation contract would spend producing it.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FtEstimate {
    pub value: f64,
    pub ledger: QueryLedger,
}

/// g² + exp(−ε²/(2ng²)): the contract's bound on the second moment of the
/// Pearson statistic over a pair with ratio bound g on support size n.
pub fn pearson_variance_bound(support: usize, bound: f64, accuracy: f64) -> f64 {
    let n = support as f64;
    bound * bound + (-accuracy * accuracy / (2.0 * n * bound * bound)).exp()
}

/// Exhaustive mean and second moment of the Pearson statistic under the
/// outcome tables the estimator would use. The per-index factors separate
/// because the two mass estimates are independent given the index.
pub fn pearson_outcome_moments(pair: &BoundedRatioPair, accuracy: f64) -> Result<(f64, f64)> {
    pair.expect_orientation(RatioOrientation::QOverP)?;
    validate_accuracy(accuracy)?;
    let queries = pearson_queries(pair.support(), pair.bound(), accuracy)?;
    let q_tables = oracle_tables(pair.q(), queries.to_q)?;
    let p_tables = oracle_tables(pair.p(), queries.to_p)?;
    Ok(pearson_moments(pair, &q_tables, &p_tables))
}

fn pearson_moments(
    pair: &BoundedRatioPair,
    q_tables: &[AmplitudeEstimateTable],
    p_tables: &[AmplitudeEstimateTable],
) -> (f64, f64) {
    let mut mean = 0.0;
    let mut second = 0.0;
    for i in 0..pair.support() {
        let qi = pair.q()[i];
        if qi == 0.0 {
            continue;
        }
        let eq = q_tables[i].mean();
        let eq2 = q_tables[i].mean_of(|v| v * v);
        let einv = p_tables[i].mean_of(|v| 1.0 / v);
        let einv2 = p_tables[i].mean_of(|v| 1.0 / (v * v));
        mean += qi * 0.5 * (eq * einv - 1.0);
        second += qi * 0.25 * (eq2 * einv2 - 2.0 * eq * einv + 1.0);
    }
    (mean, second)
}

/// Chebyshev sizing: group means of this many draws miss by more than ε/2
/// with probability at most 1/4 when the second moment bounds the variance.
fn group_size(second_moment: f64, accuracy: f64) -> usize {
    ((16.0 * second_moment / (accuracy * accuracy)).ceil() as usize).max(1)
}

fn median_of_means<R: Rng>(
    groups: usize,
    per_group: usize,
    rng: &mut R,
    mut draw: impl FnMut(&mut R) -> f64,
) -> f64 {
    let mut means: Vec<f64> = (0..groups)
        .map(|_| {
            let mut acc = 0.0;
            for _ in 0..per_group {
                acc += draw(rng);
            }
            acc / per_group as f64
        })
        .collect();
    means.sort_unstable_by(f64::total_cmp);
    means[groups / 2]
}

/// Estimates ½·Σ(p−q)²/p to within `accuracy` (with probability over 2/3)
/// for a pair certifying q/p ≤ g. The value is a median of
/// [`MEDIAN_GROUPS`] group means with groups sized from the exhaustive
/// second moment of the statistic; the ledger reports the quantum contract's
/// budget at statistic scale σ = √(g² + exp(−ε²/(2ng²))).
pub fn estimate_pearson<R: Rng>(
    pair: &BoundedRatioPair,
    accuracy: f64,
    rng: &mut R,
) -> Result<FtEstimate> {
    pair.expect_orientation(RatioOrientation::QOverP)?;
    validate_accuracy(accuracy)?;
    let support = pair.support();
    let queries = pearson_queries(support, pair.bound(), accuracy)?;
    let q_tables = oracle_tables(pair.q(), queries.to_q)?;
    let p_tables = oracle_tables(pair.p(), queries.to_p)?;
    let index_cdf = cumulative(pair.q());

    let (_, second) = pearson_moments(pair, &q_tables, &p_tables);
    let per_group = group_size(second, accuracy);
    let value = median_of_means(MEDIAN_GROUPS, per_group, rng, |rng| {
        let i = draw_index(&index_cdf, rng);
        pearson_statistic(q_tables[i].draw(rng), p_tables[i].draw(rng))
    });

    let sigma = pearson_variance_bound(support, pair.bound(), accuracy).sqrt();
    let executions = mean_contract_executions(sigma, accuracy)?;
    let ledger = QueryLedger {
        queries_to_p: executions * queries.to_p,
        queries_to_q: executions * queries.to_q,
        executions,
    };
    Ok(FtEstimate { value, ledger })
}

/// Estimates the total variation distance ½·Σ|p−q| to within `accuracy`
/// (with probability over 2/3). Indices are drawn from the mixture
/// (p+q)/2 and both masses are read with the same floored query count; the
/// statistic lies in [0, 1], so unit scale sizes both the groups and the
/// ledger's contract budget.
pub fn estimate_tv<R: Rng>(
    p: &[f64],
    q: &[f64],
    accuracy: f64,
    rng: &mut R,
) -> Result<FtEstimate> {
    validate_masses(p)?;
    validate_masses(q)?;
    if p.len() != q.len() {
        return Err(Error::SupportMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    validate_accuracy(accuracy)?;
    let queries = tv_queries(p.len(), accuracy)?;
    let p_tables = oracle_tables(p, queries)?;
    let q_tables = oracle_tables(q, queries)?;
    let mixture: Vec<f64> = p.iter().zip(q).map(|(&a, &b)| 0.5 * (a + b)).collect();
    let index_cdf = cumulative(&mixture);

    let per_group = group_size(1.0, accuracy);
    let value = median_of_means(MEDIAN_GROUPS, per_group, rng, |rng| {
        let i = draw_index(&index_cdf, rng);
        tv_statistic(p_tables[i].draw(rng), q_tables[i].draw(rng))
    });

    let executions = mean_contract_executions(1.0, accuracy)?;
    let ledger = QueryLedger {
        queries_to_p: executions * queries,
        queries_to_q: executions * queries,
        executions,
    };
    Ok(FtEstimate { value, ledger })
}

/// Estimates Σ p·ln(p/q) to within `accuracy` (with probability over 2/3)
/// for a pair certifying p/q ≤ g. Indices are drawn from p and both masses
/// are read floored, so every logarithm is finite; groups are sized from the
/// exhaustive second moment of ln p̃ − ln q̃ and the ledger budgets at scale
/// max(1, √E[y²]).
pub fn estimate_kl<R: Rng>(
    pair: &BoundedRatioPair,
    accuracy: f64,
    rng: &mut R,
) -> Result<FtEstimate> {
    pair.expect_orientation(RatioOrientation::POverQ)?;
    validate_accuracy(accuracy)?;
    let queries = kl_queries(pair.support(), pair.bound(), accuracy)?;
    let p_tables = oracle_tables(pair.p(), queries.to_p)?;
    let q_tables = oracle_tables(pair.q(), queries.to_q)?;
    let index_cdf = cumulative(pair.p());

    let mut second = 0.0;
    for i in 0..pair.support() {
        let pi = pair.p()[i];
        if pi == 0.0 {
            continue;
        }
        let elp = p_tables[i].mean_of(f64::ln);
        let elp2 = p_tables[i].mean_of(|v| v.ln() * v.ln());
        let elq = q_tables[i].mean_of(f64::ln);
        let elq2 = q_tables[i].mean_of(|v| v.ln() * v.ln());
        second += pi * (elp2 - 2.0 * elp * elq + elq2);
    }

    let per_group = group_size(second, accuracy);
    let value = median_of_means(MEDIAN_GROUPS, per_group, rng, |rng| {
        let i = draw_index(&index_cdf, rng);
        log_ratio_statistic(p_tables[i].draw(rng), q_tables[i].draw(rng))
    });

    let sigma = second.sqrt().max(1.0);
    let executions = mean_contract_executions(sigma, accuracy)?;
    let ledger = QueryLedger {
        queries_to_p: executions * queries.to_p,
        queries_to_q: executions * queries.to_q,
        executions,
    };
    Ok(FtEstimate { value, ledger })
}

/// Normalises `weights` onto masses sitting as close as possible to the
/// M-query outcome grid: each weight is snapped to its nearest interior grid
/// value, single grid steps are applied greedily while they shrink the
/// normalisation residual, and the result is rescaled to sum to one. The
/// rescale leaves each mass relatively off-grid by roughly the final
/// residual, small enough that outcome tables stay sharply concentrated.
pub fn grid_aligned_masses(weights: &[f64], queries: usize) -> Result<Vec<f64>> {
    if weights.is_empty() {
        return Err(Error::EmptySupport);
    }
    validate_queries(queries)?;
    if queries < 4 {
        return Err(Error::InvalidQueryCount(queries));
    }
    for (index, &value) in weights.iter().enumerate() {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::InvalidProbability { index, value });
        }
    }
    let m = queries as f64;
    let top = queries / 2 - 1;
    let total: f64 = weights.iter().sum();
    let grid_value = |l: usize| {
        let s = (l as f64 * PI / m).sin();
        s * s
    };
    let mut levels: Vec<usize> = weights
        .iter()
        .map(|&w| {
            let omega = (w / total).sqrt().asin() / PI;
            (((omega * m).round() as isize).max(1) as usize).min(top)
        })
        .collect();

    for _ in 0..WALK_ROUNDS {
        let residual = 1.0 - levels.iter().map(|&l| grid_value(l)).sum::<f64>();
        let mut best: Option<(f64, usize, usize)> = None;
        for (i, &level) in levels.iter().enumerate() {
            for step in [-1isize, 1] {
                let candidate = level as isize + step;
                if candidate < 1 || candidate > top as isize {
                    continue;
                }
                let candidate = candidate as usize;
                let next = residual - (grid_value(candidate) - grid_value(level));
                if next.abs() + 1e-18 < residual.abs()
                    && best.map_or(true, |(b, _, _)| next.abs() < b)
                {
                    best = Some((next.abs(), i, candidate));
                }
            }
        }
        match best {
            Some((_, i, level)) => levels[i] = level,
            None => break,
        }
    }

    let mut masses: Vec<f64> = levels.into_iter().map(grid_value).collect();
    let sum: f64 = masses.iter().sum();
    for v in &mut masses {
        *v /= sum;
    }
    Ok(masses)
}

/// Builds a random pair suitable for exercising [`estimate_pearson`]'s bias
/// and variance contracts: the model masses are aligned to the q-side
/// outcome grid, all but one target mass sits exactly on the p-side grid,
/// and the remaining target index absorbs the normalisation residual. That
/// absorber is paired with a deliberately small model mass, so the heavy
/// outcome tails of its off-grid target estimate enter the statistic's
/// moments with negligible weight. Requires a bound strictly above 1 and at
/// least two outcomes.
pub fn concentrated_test_pair<R: Rng>(
    support: usize,
    bound: f64,
    accuracy: f64,
    rng: &mut R,
) -> Result<BoundedRatioPair> {
    if support < 2 {
        return Err(Error::EmptySupport);
    }
    if !(bound.is_finite() && bound > 1.0) {
        return Err(Error::InvalidBound(bound));
    }
    validate_accuracy(accuracy)?;
    let queries = pearson_queries(support, bound, accuracy)?;
    let n = support as f64;
    let m = queries.to_p as f64;
    let top = queries.to_p / 2 - 1;

    for _ in 0..PAIR_ATTEMPTS {
        // Dirichlet-like target weights: sums of five exponentials keep every
        // mass well away from zero.
        let mut target: Vec<f64> = (0..support)
            .map(|_| -(0..5).map(|_| (1.0 - rng.gen::<f64>()).ln()).sum::<f64>())
            .collect();
        let total: f64 = target.iter().sum();
        for v in &mut target {
            *v /= total;
        }
        if target.iter().any(|&v| v < 0.3 / n) {
            continue;
        }
        let absorber = target
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);

        let mut model: Vec<f64> = target
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let rho = if i == absorber {
                    0.08
                } else {
                    0.45 + 1.75 * rng.gen::<f64>()
                };
                v * rho
            })
            .collect();
        let total: f64 = model.iter().sum();
        for v in &mut model {
            *v /= total;
        }
        if model
            .iter()
            .enumerate()
            .any(|(i, &v)| i != absorber && v < 0.2 / n)
        {
            continue;
        }
        if model
            .iter()
            .zip(&target)
            .any(|(&qv, &pv)| qv / pv > 0.85 * bound)
        {
            continue;
        }

        let model = match grid_aligned_masses(&model, queries.to_q) {
            Ok(masses) => masses,
            Err(_) => continue,
        };

        let mut snapped = target;
        for (i, v) in snapped.iter_mut().enumerate() {
            if i == absorber {
                continue;
            }
            let omega = v.sqrt().asin() / PI;
            let level = (((omega * m).round() as isize).max(1) as usize).min(top);
            let s = (level as f64 * PI / m).sin();
            *v = s * s;
        }
        let rest: f64 = snapped
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != absorber)
            .map(|(_, &v)| v)
            .sum();
        snapped[absorber] = 1.0 - rest;
        if snapped[absorber] < 0.02 {
            continue;
        }
        if model
            .iter()
            .zip(&snapped)
            .any(|(&qv, &pv)| qv / pv > bound)
        {
            continue;
        }

        if let Ok(pair) =
            BoundedRatioPair::with_bound(snapped, model, RatioOrientation::QOverP, bound)
        {
            return Ok(pair);
        }
    }
    Err(Error::PairConstruction {
        attempts: PAIR_ATTEMPTS,
    })
}
