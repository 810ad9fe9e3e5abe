//! Gradient estimation and the Born-machine training loop.
//!
//! The parameter-shift rule turns divergence gradients into differences of
//! expectations under shifted circuits,
//!
//! ```text
//! ∂θᵢ D_f(p ‖ q_θ) = E_{q(θ + π/4·eᵢ)}[f*′(r)] − E_{q(θ − π/4·eᵢ)}[f*′(r)],
//! ```
//!
//! with the ratio r(x) = q_θ(x)/p(x) held at the unshifted parameters. The
//! ratio enters only through per-outcome tables, built either from known
//! probability tables (exact mode) or from trained classifiers (sample
//! mode), so the same machinery serves analysis and simulated experiments.
//!
//! Two cost monotonicity-preserving heuristics are layered on top:
//!
//! * generator switching: every candidate generator is scored on the same
//!   shifted-circuit data and, per parameter direction, the one with the
//!   largest gradient magnitude takes the step. Because the shifted
//!   evaluations are shared, trying eleven generators costs no more
//!   circuit runs than training with one.
//! * k-local costs: the divergence is averaged over all contiguous
//!   width-k windows of the bit string, comparing marginals instead of
//!   full distributions. Shifted evaluations are again shared across
//!   windows. A k-local minimiser only has to match the target's
//!   k-bit marginals, which trades fidelity for easier optimisation.

use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classifier::{ClassifierTrainConfig, NeuralClassifier};
use crate::dist::{DiscreteDistribution, Window};
use crate::error::{Error, Result};
use crate::fdiv::{
    conjugate_derivative, exact_divergence_definition, Divergence, RatioClampPolicy,
};
use crate::sim::{born_probabilities, sample, shifted_parameters, AnsatzSpec, Shift};

/// How expectations over the shifted circuits are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Expectation {
    /// Full probability tables from the statevector.
    Exact,
    /// Monte Carlo means over measured bit strings.
    Sampled { shots: usize },
}

/// Cost-shaping heuristic applied during training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Heuristic {
    /// One fixed generator on the full distribution.
    Single,
    /// Per-direction generator switching over the configured set.
    FSwitch,
    /// One fixed generator averaged over sliding width-k windows.
    KLocal { k: usize },
}

/// Hyper-parameters for the classifier refresh in sample-based training.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainedRatioConfig {
    /// Hidden units per input bit of each window classifier.
    pub hidden_per_bit: usize,
    pub learning_rate: f64,
    /// Passes over the refresh samples per training epoch; classifiers
    /// warm-start from the previous epoch's weights.
    pub epochs_per_refresh: usize,
    pub batch_size: usize,
    /// Samples drawn per class (model and target) at each refresh.
    pub samples_per_refresh: usize,
}

impl Default for TrainedRatioConfig {
    fn default() -> Self {
        TrainedRatioConfig {
            hidden_per_bit: 10,
            learning_rate: 0.01,
            epochs_per_refresh: 5,
            batch_size: 64,
            samples_per_refresh: 500,
        }
    }
}

/// Where the density ratios fed to the generator derivative come from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RatioMode {
    /// Ratios of known probability tables, saturated by the clamp policy.
    Exact,
    /// Ratios implied by classifiers retrained each epoch on fresh
    /// samples from the current model and the target.
    Trained(TrainedRatioConfig),
}

/// Full specification of one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Candidate generators. Exactly one unless the heuristic switches.
    pub generators: Vec<Divergence>,
    pub heuristic: Heuristic,
    pub learning_rate: f64,
    pub epochs: usize,
    pub expectation: Expectation,
    pub ratio_mode: RatioMode,
    pub clamp: RatioClampPolicy,
    pub seed: u64,
    /// Record the full parameter vector after initialisation and every
    /// update (memory scales with epochs × parameter count).
    pub record_parameters: bool,
}

impl TrainConfig {
    fn base(generators: Vec<Divergence>, heuristic: Heuristic) -> Self {
        TrainConfig {
            generators,
            heuristic,
            learning_rate: 0.05,
            epochs: 500,
            expectation: Expectation::Exact,
            ratio_mode: RatioMode::Exact,
            clamp: RatioClampPolicy::default(),
            seed: 0,
            record_parameters: false,
        }
    }

    pub fn single(generator: Divergence) -> Self {
        TrainConfig::base(vec![generator], Heuristic::Single)
    }

    pub fn f_switch(generators: Vec<Divergence>) -> Self {
        TrainConfig::base(generators, Heuristic::FSwitch)
    }

    pub fn k_local(generator: Divergence, k: usize) -> Self {
        TrainConfig::base(vec![generator], Heuristic::KLocal { k })
    }

    pub fn validate(&self, ansatz: &AnsatzSpec) -> Result<()> {
        if self.generators.is_empty() {
            return Err(Error::EmptyGeneratorSet);
        }
        match self.heuristic {
            Heuristic::FSwitch => {}
            Heuristic::Single => {
                if self.generators.len() != 1 {
                    return Err(Error::NotSingleGenerator(self.generators.len()));
                }
            }
            Heuristic::KLocal { k } => {
                if self.generators.len() != 1 {
                    return Err(Error::NotSingleGenerator(self.generators.len()));
                }
                if k == 0 || k > ansatz.n_qubits() {
                    return Err(Error::WindowWidthOutOfRange {
                        k,
                        n_bits: ansatz.n_qubits(),
                    });
                }
            }
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::InvalidLearningRate(self.learning_rate));
        }
        if let Expectation::Sampled { shots: 0 } = self.expectation {
            return Err(Error::NoShots);
        }
        Ok(())
    }
}

/// A gradient estimate for a fixed generator.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientEstimate {
    pub values: Vec<f64>,
    /// Circuit executions consumed: statevector evaluations in exact
    /// mode, shots in sampled mode.
    pub circuit_evaluations: usize,
}

/// A gradient estimate under generator switching.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchGradient {
    pub values: Vec<f64>,
    /// Winning generator per parameter direction. Ties go to the
    /// earliest entry of the candidate list.
    pub chosen: Vec<Divergence>,
    pub circuit_evaluations: usize,
}

/// Inputs shared by every gradient entry point. `ratio_tables` holds one
/// strictly positive, finite ratio per window outcome, evaluated at the
/// unshifted parameters.
#[derive(Debug, Clone, Copy)]
pub struct GradientRequest<'a> {
    pub ansatz: &'a AnsatzSpec,
    pub params: &'a [f64],
    pub generators: &'a [Divergence],
    pub windows: &'a [Window],
    pub ratio_tables: &'a [Vec<f64>],
    pub expectation: Expectation,
    pub clamp: RatioClampPolicy,
}

impl<'a> GradientRequest<'a> {
    fn validate(&self) -> Result<()> {
        self.ansatz.check_params(self.params)?;
        if self.generators.is_empty() {
            return Err(Error::EmptyGeneratorSet);
        }
        if self.windows.is_empty() {
            return Err(Error::EmptyWindow);
        }
        if self.ratio_tables.len() != self.windows.len() {
            return Err(Error::TableLength {
                expected: self.windows.len(),
                got: self.ratio_tables.len(),
            });
        }
        for (window, table) in self.windows.iter().zip(self.ratio_tables) {
            window.validate(self.ansatz.n_qubits())?;
            if table.len() != 1 << window.width {
                return Err(Error::TableLength {
                    expected: 1 << window.width,
                    got: table.len(),
                });
            }
            for &r in table {
                if !(r > 0.0) || !r.is_finite() {
                    return Err(Error::InvalidRatio(r));
                }
            }
        }
        if let Expectation::Sampled { shots: 0 } = self.expectation {
            return Err(Error::NoShots);
        }
        Ok(())
    }
}

/// Per-window outcome weights for one shifted circuit: exact marginal
/// probabilities, or empirical frequencies from a shared shot record.
fn window_weights(
    dist: &DiscreteDistribution,
    windows: &[Window],
    expectation: Expectation,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vec<f64>>> {
    match expectation {
        Expectation::Exact => windows
            .iter()
            .map(|w| Ok(dist.marginal(*w)?.probabilities().to_vec()))
            .collect(),
        Expectation::Sampled { shots } => {
            let outcomes = sample(dist, shots, rng);
            Ok(windows
                .iter()
                .map(|w| {
                    let mut counts = vec![0.0; 1 << w.width];
                    for &x in &outcomes {
                        counts[w.extract(x, dist.n_bits())] += 1.0;
                    }
                    counts.iter_mut().for_each(|c| *c /= shots as f64);
                    counts
                })
                .collect())
        }
    }
}

/// Gradient under generator switching. Shifted-circuit weights are
/// computed once per direction and scored against every candidate, so the
/// circuit budget is independent of the candidate count. With a single
/// candidate this is plain fixed-generator training.
pub fn switch_gradient(req: &GradientRequest, rng: &mut ChaCha8Rng) -> Result<SwitchGradient> {
    req.validate()?;
    let per_direction = match req.expectation {
        Expectation::Exact => 2,
        Expectation::Sampled { shots } => 2 * shots,
    };
    let mut values = Vec::with_capacity(req.params.len());
    let mut chosen = Vec::with_capacity(req.params.len());
    for index in 0..req.params.len() {
        let plus = born_probabilities(
            req.ansatz,
            &shifted_parameters(req.params, index, Shift::Plus)?,
        )?;
        let minus = born_probabilities(
            req.ansatz,
            &shifted_parameters(req.params, index, Shift::Minus)?,
        )?;
        let plus_weights = window_weights(&plus, req.windows, req.expectation, rng)?;
        let minus_weights = window_weights(&minus, req.windows, req.expectation, rng)?;
        let mut best: f64 = 0.0;
        let mut best_gen = req.generators[0];
        for &gen in req.generators {
            let mut estimate = 0.0;
            for ((wp, wm), table) in plus_weights
                .iter()
                .zip(&minus_weights)
                .zip(req.ratio_tables)
            {
                for ((&above, &below), &ratio) in wp.iter().zip(wm).zip(table) {
                    if above != below {
                        estimate += (above - below) * conjugate_derivative(gen, ratio, req.clamp)?;
                    }
                }
            }
            estimate /= req.windows.len() as f64;
            if gen == req.generators[0] || estimate.abs() > best.abs() {
                best = estimate;
                best_gen = gen;
            }
        }
        values.push(best);
        chosen.push(best_gen);
    }
    Ok(SwitchGradient {
        values,
        chosen,
        circuit_evaluations: req.params.len() * per_direction,
    })
}

/// Ratio tables q_w(x)/p_w(x) over window marginals of known tables.
/// 0/0 counts as 1; a vanishing target marginal under positive model mass
/// saturates at the clamp ceiling.
pub fn exact_ratio_tables(
    target: &DiscreteDistribution,
    model: &DiscreteDistribution,
    windows: &[Window],
    clamp: RatioClampPolicy,
) -> Result<Vec<Vec<f64>>> {
    if target.n_bits() != model.n_bits() {
        return Err(Error::WidthMismatch {
            left: target.n_bits(),
            right: model.n_bits(),
        });
    }
    windows
        .iter()
        .map(|w| {
            let p = target.marginal(*w)?;
            let q = model.marginal(*w)?;
            Ok(p.probabilities()
                .iter()
                .zip(q.probabilities())
                .map(|(&p, &q)| {
                    let raw = if p == 0.0 && q == 0.0 {
                        1.0
                    } else if p == 0.0 {
                        f64::INFINITY
                    } else {
                        q / p
                    };
                    clamp.clamp(raw)
                })
                .collect())
        })
        .collect()
}

/// Ratio tables implied by one classifier per window.
pub fn trained_ratio_tables(
    classifiers: &[NeuralClassifier],
    clamp: RatioClampPolicy,
) -> Result<Vec<Vec<f64>>> {
    classifiers
        .iter()
        .map(|c| {
            (0..1usize << c.input_bits())
                .map(|x| c.predict_ratio(x, clamp))
                .collect()
        })
        .collect()
}

/// Exact-expectation, exact-ratio gradient of D_f(p ‖ q_θ).
pub fn exact_gradient(
    ansatz: &AnsatzSpec,
    params: &[f64],
    generator: Divergence,
    target: &DiscreteDistribution,
    clamp: RatioClampPolicy,
) -> Result<GradientEstimate> {
    let windows = [Window::full(ansatz.n_qubits())];
    exact_windowed_gradient(ansatz, params, generator, target, &windows, clamp)
}

/// Exact-expectation, exact-ratio gradient of the k-local cost.
pub fn k_local_gradient(
    ansatz: &AnsatzSpec,
    params: &[f64],
    generator: Divergence,
    target: &DiscreteDistribution,
    k: usize,
    clamp: RatioClampPolicy,
) -> Result<GradientEstimate> {
    let windows = Window::sliding(ansatz.n_qubits(), k)?;
    exact_windowed_gradient(ansatz, params, generator, target, &windows, clamp)
}

fn exact_windowed_gradient(
    ansatz: &AnsatzSpec,
    params: &[f64],
    generator: Divergence,
    target: &DiscreteDistribution,
    windows: &[Window],
    clamp: RatioClampPolicy,
) -> Result<GradientEstimate> {
    let model = born_probabilities(ansatz, params)?;
    let tables = exact_ratio_tables(target, &model, windows, clamp)?;
    let generators = [generator];
    let req = GradientRequest {
        ansatz,
        params,
        generators: &generators,
        windows,
        ratio_tables: &tables,
        expectation: Expectation::Exact,
        clamp,
    };
    // Exact expectations consume no randomness; the stream is inert.
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let switch = switch_gradient(&req, &mut rng)?;
    Ok(GradientEstimate {
        values: switch.values,
        circuit_evaluations: switch.circuit_evaluations,
    })
}

/// Exact-expectation, exact-ratio gradient under generator switching.
pub fn f_switch_gradient(
    ansatz: &AnsatzSpec,
    params: &[f64],
    generators: &[Divergence],
    target: &DiscreteDistribution,
    clamp: RatioClampPolicy,
) -> Result<SwitchGradient> {
    let model = born_probabilities(ansatz, params)?;
    let windows = [Window::full(ansatz.n_qubits())];
    let tables = exact_ratio_tables(target, &model, &windows, clamp)?;
    let req = GradientRequest {
        ansatz,
        params,
        generators,
        windows: &windows,
        ratio_tables: &tables,
        expectation: Expectation::Exact,
        clamp,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    switch_gradient(&req, &mut rng)
}

/// Mean divergence between window marginals over all sliding width-k
/// windows; the objective whose gradient [`k_local_gradient`] estimates.
pub fn k_local_cost(
    generator: Divergence,
    target: &DiscreteDistribution,
    model: &DiscreteDistribution,
    k: usize,
) -> Result<f64> {
    if target.n_bits() != model.n_bits() {
        return Err(Error::WidthMismatch {
            left: target.n_bits(),
            right: model.n_bits(),
        });
    }
    let windows = Window::sliding(target.n_bits(), k)?;
    let mut total = 0.0;
    for w in &windows {
        total += exact_divergence_definition(generator, &target.marginal(*w)?, &model.marginal(*w)?)?;
    }
    Ok(total / windows.len() as f64)
}

/// Metrics recorded after one parameter update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based update count.
    pub epoch: usize,
    /// Exact total variation to the target after the update.
    pub exact_tv: f64,
    /// Exact KL(q_θ ‖ p) after the update; infinite when the model puts
    /// mass where the target has none.
    pub exact_kl: f64,
    /// Winning generator per direction, recorded under switching only.
    pub chosen: Option<Vec<Divergence>>,
}

/// Everything produced by one seeded training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainRecord {
    pub seed: u64,
    pub epochs: Vec<EpochRecord>,
    /// Parameter vectors after initialisation and each update, when
    /// requested.
    pub params_trace: Option<Vec<Vec<f64>>>,
    pub final_params: Vec<f64>,
}

/// Runs one seeded training loop: θ ~ U[−π, π) per coordinate, constant
/// learning-rate SGD, exact total variation and reverse KL recorded after
/// every update. A single ChaCha8 stream seeded from `config.seed` drives
/// initialisation, sampling, classifier initialisation, and shuffling, so
/// runs are bit-reproducible.
pub fn run_training(
    config: &TrainConfig,
    target: &DiscreteDistribution,
    ansatz: &AnsatzSpec,
) -> Result<TrainRecord> {
    config.validate(ansatz)?;
    if target.n_bits() != ansatz.n_qubits() {
        return Err(Error::WidthMismatch {
            left: target.n_bits(),
            right: ansatz.n_qubits(),
        });
    }
    let n = ansatz.n_qubits();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params: Vec<f64> = (0..ansatz.param_count())
        .map(|_| rng.gen_range(-PI..PI))
        .collect();
    let windows = match config.heuristic {
        Heuristic::KLocal { k } => Window::sliding(n, k)?,
        _ => vec![Window::full(n)],
    };
    let mut classifiers = match &config.ratio_mode {
        RatioMode::Exact => None,
        RatioMode::Trained(tc) => Some(
            windows
                .iter()
                .map(|w| NeuralClassifier::new(w.width, tc.hidden_per_bit * w.width, &mut rng))
                .collect::<Result<Vec<_>>>()?,
        ),
    };
    let mut epochs = Vec::with_capacity(config.epochs);
    let mut trace = config
        .record_parameters
        .then(|| Vec::with_capacity(config.epochs + 1));
    if let Some(t) = &mut trace {
        t.push(params.clone());
    }
    let mut model = born_probabilities(ansatz, &params)?;
    for epoch in 1..=config.epochs {
        let tables = match (&config.ratio_mode, &mut classifiers) {
            (RatioMode::Exact, _) => exact_ratio_tables(target, &model, &windows, config.clamp)?,
            (RatioMode::Trained(tc), Some(classifiers)) => {
                let model_samples = sample(&model, tc.samples_per_refresh, &mut rng);
                let target_samples = sample(target, tc.samples_per_refresh, &mut rng);
                let fit_config = ClassifierTrainConfig {
                    learning_rate: tc.learning_rate,
                    epochs: tc.epochs_per_refresh,
                    batch_size: tc.batch_size,
                    seed: config.seed,
                };
                for (w, c) in windows.iter().zip(classifiers.iter_mut()) {
                    let model_window: Vec<usize> =
                        model_samples.iter().map(|&x| w.extract(x, n)).collect();
                    let target_window: Vec<usize> =
                        target_samples.iter().map(|&x| w.extract(x, n)).collect();
                    c.fit(&model_window, &target_window, &fit_config, &mut rng)?;
                }
                trained_ratio_tables(classifiers, config.clamp)?
            }
            (RatioMode::Trained(_), None) => unreachable!("classifiers exist in trained mode"),
        };
        let req = GradientRequest {
            ansatz,
            params: &params,
            generators: &config.generators,
            windows: &windows,
            ratio_tables: &tables,
            expectation: config.expectation,
            clamp: config.clamp,
        };
        let gradient = switch_gradient(&req, &mut rng)?;
        for (p, g) in params.iter_mut().zip(&gradient.values) {
            *p -= config.learning_rate * g;
        }
        model = born_probabilities(ansatz, &params)?;
        let exact_tv = exact_divergence_definition(Divergence::Tv, target, &model)?;
        let exact_kl = match exact_divergence_definition(Divergence::KlIRev, target, &model) {
            Ok(v) => v,
            Err(Error::SupportViolation { .. }) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        let chosen =
            matches!(config.heuristic, Heuristic::FSwitch).then(|| gradient.chosen.clone());
        epochs.push(EpochRecord {
            epoch,
            exact_tv,
            exact_kl,
            chosen,
        });
        if let Some(t) = &mut trace {
            t.push(params.clone());
        }
    }
    Ok(TrainRecord {
        seed: config.seed,
        epochs,
        params_trace: trace,
        final_params: params,
    })
}

/// Which recorded metric to aggregate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    ExactTv,
    ExactKl,
}

/// Per-epoch bootstrap aggregate of a metric across seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSummary {
    /// 50th percentile of the bootstrapped medians.
    pub median: Vec<f64>,
    /// 5th percentile.
    pub lower: Vec<f64>,
    /// 95th percentile.
    pub upper: Vec<f64>,
}

fn median_inplace(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Nearest-rank percentile of an ascending slice: index round((N−1)·q).
fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let index = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[index]
}

/// Bootstraps the median of one metric series per epoch. Rows are sorted
/// per epoch before resampling, so the output is invariant, bit for bit,
/// under permutation of the input rows.
pub fn bootstrap_series(
    series: &[Vec<f64>],
    resamples: usize,
    seed: u64,
) -> Result<BootstrapSummary> {
    if series.len() < 2 {
        return Err(Error::TooFewRecords(series.len()));
    }
    let epochs = series[0].len();
    if series.iter().any(|row| row.len() != epochs) {
        return Err(Error::RaggedRecords);
    }
    let rows = series.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut summary = BootstrapSummary {
        median: Vec::with_capacity(epochs),
        lower: Vec::with_capacity(epochs),
        upper: Vec::with_capacity(epochs),
    };
    let mut draw = vec![0.0; rows];
    let mut medians = vec![0.0; resamples];
    for e in 0..epochs {
        let mut values: Vec<f64> = series.iter().map(|row| row[e]).collect();
        values.sort_unstable_by(f64::total_cmp);
        for m in medians.iter_mut() {
            for d in draw.iter_mut() {
                *d = values[rng.gen_range(0..rows)];
            }
            *m = median_inplace(&mut draw);
        }
        medians.sort_unstable_by(f64::total_cmp);
        summary.median.push(percentile_sorted(&medians, 0.5));
        summary.lower.push(percentile_sorted(&medians, 0.05));
        summary.upper.push(percentile_sorted(&medians, 0.95));
    }
    Ok(summary)
}

/// Bootstrap aggregate of one metric across seeded runs.
pub fn bootstrap_summary(
    records: &[TrainRecord],
    metric: Metric,
    resamples: usize,
    seed: u64,
) -> Result<BootstrapSummary> {
    let series: Vec<Vec<f64>> = records
        .iter()
        .map(|record| {
            record
                .epochs
                .iter()
                .map(|e| match metric {
                    Metric::ExactTv => e.exact_tv,
                    Metric::ExactKl => e.exact_kl,
                })
                .collect()
        })
        .collect();
    bootstrap_series(&series, resamples, seed)
}
