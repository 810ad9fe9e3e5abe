//! Density-ratio estimation by classification.
//!
//! A probabilistic classifier d(x) trained to tell model samples (label 1)
//! from target samples (label 0) implies the ratio r(x) = d(x)/(1 − d(x)):
//! at the optimum d*(x) = q(x)/(p(x) + q(x)), so r recovers q(x)/p(x)
//! exactly. [`ExactClassifier`] evaluates that optimum from known tables;
//! [`NeuralClassifier`] is the trained stand-in used when only samples are
//! available: one hidden ReLU layer of `10·k` units on a `k`-bit window
//! (bits fed as reals in {0, 1}), a logistic output, plain constant-rate
//! SGD on the two-class cross entropy.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dist::DiscreteDistribution;
use crate::error::{Error, Result};
use crate::fdiv::RatioClampPolicy;

/// Hidden units per input bit for the default classifier width.
pub const HIDDEN_UNITS_PER_BIT: usize = 10;

/// Classifier outputs are clamped to [ε, 1 − ε] with this ε before being
/// turned into ratios or losses.
pub const POSTERIOR_CLAMP: f64 = 1e-7;

/// The optimal classifier for a known target/model pair.
#[derive(Debug, Clone)]
pub struct ExactClassifier {
    target: DiscreteDistribution,
    model: DiscreteDistribution,
}

impl ExactClassifier {
    pub fn new(target: DiscreteDistribution, model: DiscreteDistribution) -> Result<Self> {
        if target.n_bits() != model.n_bits() {
            return Err(Error::WidthMismatch {
                left: target.n_bits(),
                right: model.n_bits(),
            });
        }
        Ok(ExactClassifier { target, model })
    }

    pub fn n_bits(&self) -> usize {
        self.target.n_bits()
    }

    /// d*(x) = q(x)/(p(x) + q(x)); ½ where both masses vanish.
    pub fn posterior(&self, outcome: usize) -> f64 {
        let p = self.target.prob(outcome);
        let q = self.model.prob(outcome);
        if p == 0.0 && q == 0.0 {
            0.5
        } else {
            q / (p + q)
        }
    }

    /// The implied ratio q(x)/p(x). By convention 0/0 = 1; a zero target
    /// mass under positive model mass overflows and is reported as an
    /// error so callers can decide how to saturate.
    pub fn exact_ratio(&self, outcome: usize) -> Result<f64> {
        let p = self.target.prob(outcome);
        let q = self.model.prob(outcome);
        if p == 0.0 {
            if q == 0.0 {
                Ok(1.0)
            } else {
                Err(Error::RatioOverflow {
                    outcome,
                    model_mass: q,
                })
            }
        } else {
            Ok(q / p)
        }
    }
}

/// One-hidden-layer classifier on a fixed-width bit window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeuralClassifier {
    input_bits: usize,
    hidden: usize,
    /// Hidden weights, `hidden × input_bits`, row-major.
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: f64,
}

/// Hyper-parameters for classifier SGD.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierTrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for ClassifierTrainConfig {
    fn default() -> Self {
        ClassifierTrainConfig {
            learning_rate: 0.01,
            epochs: 50,
            batch_size: 32,
            seed: 0,
        }
    }
}

impl NeuralClassifier {
    /// Fresh classifier with uniform ±1/√fan_in weights.
    pub fn new(input_bits: usize, hidden: usize, rng: &mut ChaCha8Rng) -> Result<Self> {
        if input_bits == 0 {
            return Err(Error::NoQubits);
        }
        let bound1 = 1.0 / (input_bits as f64).sqrt();
        let bound2 = 1.0 / (hidden as f64).sqrt();
        Ok(NeuralClassifier {
            input_bits,
            hidden,
            w1: (0..hidden * input_bits)
                .map(|_| rng.gen_range(-bound1..bound1))
                .collect(),
            b1: vec![0.0; hidden],
            w2: (0..hidden).map(|_| rng.gen_range(-bound2..bound2)).collect(),
            b2: 0.0,
        })
    }

    /// Default geometry for a `k`-bit window: `10·k` hidden units.
    pub fn for_window(input_bits: usize, rng: &mut ChaCha8Rng) -> Result<Self> {
        NeuralClassifier::new(input_bits, HIDDEN_UNITS_PER_BIT * input_bits, rng)
    }

    pub fn input_bits(&self) -> usize {
        self.input_bits
    }

    pub fn hidden_units(&self) -> usize {
        self.hidden
    }

    fn check_outcome(&self, outcome: usize) -> Result<()> {
        if outcome >= 1 << self.input_bits {
            return Err(Error::OutcomeOutOfRange {
                outcome,
                n_bits: self.input_bits,
            });
        }
        Ok(())
    }

    fn bits_of(&self, outcome: usize) -> Vec<f64> {
        (0..self.input_bits)
            .map(|b| ((outcome >> (self.input_bits - 1 - b)) & 1) as f64)
            .collect()
    }

    /// Forward pass; returns (hidden activations, raw output, posterior).
    fn forward(&self, bits: &[f64]) -> (Vec<f64>, f64, f64) {
        let mut hidden = vec![0.0; self.hidden];
        for h in 0..self.hidden {
            let mut z = self.b1[h];
            let row = &self.w1[h * self.input_bits..(h + 1) * self.input_bits];
            for (w, x) in row.iter().zip(bits) {
                z += w * x;
            }
            hidden[h] = z.max(0.0);
        }
        let z2 = self
            .w2
            .iter()
            .zip(&hidden)
            .map(|(w, h)| w * h)
            .sum::<f64>()
            + self.b2;
        let d = 1.0 / (1.0 + (-z2).exp());
        (hidden, z2, d)
    }

    /// Classifier output d(x) ∈ [ε, 1 − ε].
    pub fn posterior(&self, outcome: usize) -> Result<f64> {
        self.check_outcome(outcome)?;
        let (_, _, d) = self.forward(&self.bits_of(outcome));
        Ok(d.clamp(POSTERIOR_CLAMP, 1.0 - POSTERIOR_CLAMP))
    }

    /// The implied density ratio d/(1 − d), clamped by the caller's policy.
    pub fn predict_ratio(&self, outcome: usize, clamp: RatioClampPolicy) -> Result<f64> {
        let d = self.posterior(outcome)?;
        Ok(clamp.clamp(d / (1.0 - d)))
    }

    /// Flat view of all parameters, ordered (w1, b1, w2, b2).
    pub fn parameters(&self) -> Vec<f64> {
        let mut out = self.w1.clone();
        out.extend_from_slice(&self.b1);
        out.extend_from_slice(&self.w2);
        out.push(self.b2);
        out
    }

    pub fn set_parameters(&mut self, flat: &[f64]) -> Result<()> {
        let expected = self.w1.len() + self.b1.len() + self.w2.len() + 1;
        if flat.len() != expected {
            return Err(Error::ParameterCount {
                expected,
                got: flat.len(),
            });
        }
        let (w1, rest) = flat.split_at(self.w1.len());
        let (b1, rest) = rest.split_at(self.b1.len());
        let (w2, b2) = rest.split_at(self.w2.len());
        self.w1.copy_from_slice(w1);
        self.b1.copy_from_slice(b1);
        self.w2.copy_from_slice(w2);
        self.b2 = b2[0];
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Serialisation(e.to_string()))
    }

    pub fn from_json(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| Error::Serialisation(e.to_string()))
    }

    /// Two-class cross entropy: mean −ln d over model samples plus mean
    /// −ln(1 − d) over target samples.
    pub fn loss(&self, model_samples: &[usize], target_samples: &[usize]) -> Result<f64> {
        let mut total = 0.0;
        for &x in model_samples {
            self.check_outcome(x)?;
            total -= self.posterior(x)?.ln() / model_samples.len() as f64;
        }
        for &x in target_samples {
            self.check_outcome(x)?;
            total -= (1.0 - self.posterior(x)?).ln() / target_samples.len() as f64;
        }
        Ok(total)
    }

    /// Loss and its gradient over full batches, each class mean-weighted.
    /// Used by tests and full-batch training.
    pub fn loss_gradient(
        &self,
        model_samples: &[usize],
        target_samples: &[usize],
    ) -> Result<(f64, Vec<f64>)> {
        let mut grad = vec![0.0; self.w1.len() + self.b1.len() + self.w2.len() + 1];
        let mut loss = 0.0;
        for (samples, label) in [(model_samples, 1.0), (target_samples, 0.0)] {
            if samples.is_empty() {
                return Err(Error::EmptySamples);
            }
            let weight = 1.0 / samples.len() as f64;
            for &x in samples {
                self.check_outcome(x)?;
                loss += weight * self.accumulate(x, label, weight, &mut grad);
            }
        }
        Ok((loss, grad))
    }

    /// Adds the gradient of this sample's weighted loss into `grad` and
    /// returns the sample's unweighted loss.
    fn accumulate(&self, outcome: usize, label: f64, weight: f64, grad: &mut [f64]) -> f64 {
        let bits = self.bits_of(outcome);
        let (hidden, _, d_raw) = self.forward(&bits);
        let d = d_raw.clamp(POSTERIOR_CLAMP, 1.0 - POSTERIOR_CLAMP);
        // dL/dz2 of −[y ln d + (1 − y) ln(1 − d)] is d − y.
        let delta2 = weight * (d_raw - label);
        let (w1_len, b1_len, w2_len) = (self.w1.len(), self.b1.len(), self.w2.len());
        for h in 0..self.hidden {
            grad[w1_len + b1_len + h] += delta2 * hidden[h];
            if hidden[h] > 0.0 {
                let delta1 = delta2 * self.w2[h];
                for (b, &x) in bits.iter().enumerate() {
                    grad[h * self.input_bits + b] += delta1 * x;
                }
                grad[w1_len + h] += delta1;
            }
        }
        grad[w1_len + b1_len + w2_len] += delta2;
        if label > 0.5 {
            -d.ln()
        } else {
            -(1.0 - d).ln()
        }
    }

    /// Minibatch SGD, continuing from the current weights (warm start).
    /// Returns the final full-batch loss.
    pub fn fit(
        &mut self,
        model_samples: &[usize],
        target_samples: &[usize],
        config: &ClassifierTrainConfig,
        rng: &mut ChaCha8Rng,
    ) -> Result<f64> {
        if model_samples.is_empty() || target_samples.is_empty() {
            return Err(Error::EmptySamples);
        }
        if !(config.learning_rate.is_finite() && config.learning_rate > 0.0) {
            return Err(Error::InvalidLearningRate(config.learning_rate));
        }
        for &x in model_samples.iter().chain(target_samples) {
            self.check_outcome(x)?;
        }
        let batch = config.batch_size.max(1);
        let mut order: Vec<(usize, f64)> = model_samples
            .iter()
            .map(|&x| (x, 1.0))
            .chain(target_samples.iter().map(|&x| (x, 0.0)))
            .collect();
        let mut grad = vec![0.0; self.w1.len() + self.b1.len() + self.w2.len() + 1];
        for _ in 0..config.epochs {
            order.shuffle(rng);
            for chunk in order.chunks(batch) {
                let ones = chunk.iter().filter(|(_, y)| *y > 0.5).count();
                let zeros = chunk.len() - ones;
                grad.iter_mut().for_each(|g| *g = 0.0);
                for &(x, y) in chunk {
                    let weight = if y > 0.5 {
                        1.0 / ones as f64
                    } else {
                        1.0 / zeros as f64
                    };
                    self.accumulate(x, y, weight, &mut grad);
                }
                self.apply_step(config.learning_rate, &grad);
            }
        }
        self.loss(model_samples, target_samples)
    }

    fn apply_step(&mut self, learning_rate: f64, grad: &[f64]) {
        let (w1_len, b1_len) = (self.w1.len(), self.b1.len());
        for (i, w) in self.w1.iter_mut().enumerate() {
            *w -= learning_rate * grad[i];
        }
        for (i, b) in self.b1.iter_mut().enumerate() {
            *b -= learning_rate * grad[w1_len + i];
        }
        for (i, w) in self.w2.iter_mut().enumerate() {
            *w -= learning_rate * grad[w1_len + b1_len + i];
        }
        self.b2 -= learning_rate * grad[w1_len + b1_len + self.w2.len()];
    }
}

/// Trains a fresh default-geometry classifier on the two sample sets.
pub fn train_classifier(
    model_samples: &[usize],
    target_samples: &[usize],
    input_bits: usize,
    config: &ClassifierTrainConfig,
) -> Result<NeuralClassifier> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut classifier = NeuralClassifier::for_window(input_bits, &mut rng)?;
    classifier.fit(model_samples, target_samples, config, &mut rng)?;
    Ok(classifier)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DiscreteDistribution;

    fn exact_pair() -> ExactClassifier {
        let target = DiscreteDistribution::new(2, vec![0.4, 0.3, 0.3, 0.0]).unwrap();
        let model = DiscreteDistribution::new(2, vec![0.2, 0.3, 0.0, 0.5]).unwrap();
        ExactClassifier::new(target, model).unwrap()
    }

    #[test]
    fn exact_posterior_and_ratio() {
        let c = exact_pair();
        assert!((c.posterior(0) - 0.2 / 0.6).abs() < 1e-15);
        assert!((c.exact_ratio(0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(c.exact_ratio(1).unwrap(), 1.0);
        // Zero model mass under positive target mass: ratio 0.
        assert_eq!(c.exact_ratio(2).unwrap(), 0.0);
        // Zero target mass under positive model mass: overflow.
        assert!(matches!(
            c.exact_ratio(3),
            Err(Error::RatioOverflow { outcome: 3, .. })
        ));
    }

    #[test]
    fn exact_ratio_recovers_posterior_odds() {
        let c = exact_pair();
        for x in 0..3 {
            let d = c.posterior(x);
            let from_odds = d / (1.0 - d);
            assert!((from_odds - c.exact_ratio(x).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn mismatched_widths_rejected() {
        let target = DiscreteDistribution::uniform(2).unwrap();
        let model = DiscreteDistribution::uniform(3).unwrap();
        assert!(ExactClassifier::new(target, model).is_err());
    }

    #[test]
    fn separable_classes_are_learned() {
        // Model mass on outcome 1, target mass on outcome 0.
        let model: Vec<usize> = vec![1; 200];
        let target: Vec<usize> = vec![0; 200];
        let config = ClassifierTrainConfig {
            learning_rate: 0.1,
            epochs: 200,
            batch_size: 50,
            seed: 7,
        };
        let c = train_classifier(&model, &target, 1, &config).unwrap();
        assert!(c.posterior(1).unwrap() > 0.9);
        assert!(c.posterior(0).unwrap() < 0.1);
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut c = NeuralClassifier::new(3, 6, &mut rng).unwrap();
        let model = [0usize, 5, 7, 2, 5];
        let target = [1usize, 3, 0, 6, 4];
        let (_, grad) = c.loss_gradient(&model, &target).unwrap();
        let params = c.parameters();
        let h = 1e-6;
        for i in 0..params.len() {
            let mut up = params.clone();
            let mut down = params.clone();
            up[i] += h;
            down[i] -= h;
            c.set_parameters(&up).unwrap();
            let lu = c.loss(&model, &target).unwrap();
            c.set_parameters(&down).unwrap();
            let ld = c.loss(&model, &target).unwrap();
            let fd = (lu - ld) / (2.0 * h);
            assert!(
                (grad[i] - fd).abs() < 1e-5 * fd.abs().max(1.0),
                "parameter {i}: analytic {} vs fd {fd}",
                grad[i]
            );
        }
    }

    #[test]
    fn full_batch_descent_never_increases_loss() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut c = NeuralClassifier::for_window(2, &mut rng).unwrap();
        let model = [3usize, 3, 2, 3, 2, 3];
        let target = [0usize, 1, 0, 0, 1, 0];
        let config = ClassifierTrainConfig {
            learning_rate: 1e-3,
            epochs: 1,
            batch_size: model.len() + target.len(),
            seed: 0,
        };
        let mut last = c.loss(&model, &target).unwrap();
        for _ in 0..200 {
            let loss = c.fit(&model, &target, &config, &mut rng).unwrap();
            assert!(loss <= last + 1e-10, "loss rose from {last} to {loss}");
            last = loss;
        }
    }

    #[test]
    fn training_reduces_loss_from_initialisation() {
        let model = [1usize, 1, 1, 0];
        let target = [0usize, 0, 0, 1];
        let config = ClassifierTrainConfig {
            learning_rate: 0.05,
            epochs: 100,
            batch_size: 8,
            seed: 3,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut c = NeuralClassifier::for_window(1, &mut rng).unwrap();
        let initial = c.loss(&model, &target).unwrap();
        let trained = c.fit(&model, &target, &config, &mut rng).unwrap();
        assert!(trained < initial);
    }

    #[test]
    fn posterior_is_clamped_and_checked() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let c = NeuralClassifier::for_window(2, &mut rng).unwrap();
        for x in 0..4 {
            let d = c.posterior(x).unwrap();
            assert!(d >= POSTERIOR_CLAMP && d <= 1.0 - POSTERIOR_CLAMP);
        }
        assert!(matches!(
            c.posterior(4),
            Err(Error::OutcomeOutOfRange { outcome: 4, .. })
        ));
        assert!(c.predict_ratio(9, RatioClampPolicy::default()).is_err());
    }

    #[test]
    fn ratio_respects_clamp_policy() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let c = NeuralClassifier::for_window(1, &mut rng).unwrap();
        let tight = RatioClampPolicy::new(0.9, 1.1).unwrap();
        for x in 0..2 {
            let r = c.predict_ratio(x, tight).unwrap();
            assert!((0.9..=1.1).contains(&r));
        }
    }

    #[test]
    fn weights_round_trip_through_json() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let c = NeuralClassifier::for_window(3, &mut rng).unwrap();
        let restored = NeuralClassifier::from_json(&c.to_json().unwrap()).unwrap();
        assert_eq!(c, restored);
        for x in 0..8 {
            assert_eq!(
                c.posterior(x).unwrap().to_bits(),
                restored.posterior(x).unwrap().to_bits()
            );
        }
    }
}
