//! Dense statevector simulation of the layered Born-machine circuit.
//!
//! The circuit on `n` qubits with depth `D` is: a Hadamard on every qubit,
//! then `D` entangling blocks, each a per-qubit `Rz(θ) Rx(θ)` pair followed
//! by a CZ ladder on neighbouring pairs (0,1), (1,2), …, (n−2,n−1), then one
//! final per-qubit `Rz(θ) Rx(θ)` layer. That gives `D + 1` rotation layers
//! and `n(2D + 2)` parameters.
//!
//! Parameter order: layer by layer, qubit by qubit, Rz angle before Rx
//! angle — parameter `2(ℓn + j)` is the Rz angle of qubit `j` in layer `ℓ`
//! and `2(ℓn + j) + 1` the Rx angle.
//!
//! Rotations use the full-angle convention `Rz(θ) = exp(−iθZ)`,
//! `Rx(θ) = exp(−iθX)`. The generator has eigenvalues ±1, so every Born
//! probability is trigonometric with period π in each angle and the shift
//! rule is exact with shift π/4:
//!
//! ```text
//! ∂ q_θ(x) / ∂ θ_i  =  q_{θ + (π/4)e_i}(x)  −  q_{θ − (π/4)e_i}(x)
//! ```
//!
//! Qubit 0 is the most significant bit of an outcome index.

use num_complex::Complex64;
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist::DiscreteDistribution;
use crate::error::{Error, Result};

/// The exact shift used by the parameter-shift rule.
pub const PARAMETER_SHIFT: f64 = std::f64::consts::FRAC_PI_4;

/// Geometry of the layered ansatz: qubit count and entangling depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    n_qubits: usize,
    depth: usize,
}

impl AnsatzSpec {
    pub fn new(n_qubits: usize, depth: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::NoQubits);
        }
        Ok(AnsatzSpec { n_qubits, depth })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Total rotation-angle count, n(2D + 2).
    pub fn param_count(&self) -> usize {
        self.n_qubits * (2 * self.depth + 2)
    }

    pub(crate) fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::ParameterCount {
                expected: self.param_count(),
                got: params.len(),
            });
        }
        Ok(())
    }
}

/// Dense state of `n` qubits: 2^n complex amplitudes.
#[derive(Debug, Clone)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// The computational basis state |0…0⟩.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::NoQubits);
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// Born probabilities |amplitude|² per outcome.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Index mask selecting the given qubit's bit (qubit 0 = top bit).
    fn mask(&self, qubit: usize) -> usize {
        1 << (self.n_qubits - 1 - qubit)
    }

    fn apply_h(&mut self, qubit: usize) {
        let mask = self.mask(qubit);
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let j = i | mask;
                let a = self.amps[i];
                let b = self.amps[j];
                self.amps[i] = (a + b) * inv_sqrt2;
                self.amps[j] = (a - b) * inv_sqrt2;
            }
        }
    }

    /// Rz(θ) = exp(−iθZ) = diag(e^{−iθ}, e^{+iθ}).
    fn apply_rz(&mut self, qubit: usize, theta: f64) {
        let mask = self.mask(qubit);
        let phase_zero = Complex64::from_polar(1.0, -theta);
        let phase_one = Complex64::from_polar(1.0, theta);
        for (i, amp) in self.amps.iter_mut().enumerate() {
            *amp *= if i & mask == 0 { phase_zero } else { phase_one };
        }
    }

    /// Rx(θ) = exp(−iθX) = cosθ·I − i sinθ·X.
    fn apply_rx(&mut self, qubit: usize, theta: f64) {
        let mask = self.mask(qubit);
        let c = theta.cos();
        let ms = Complex64::new(0.0, -theta.sin());
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let j = i | mask;
                let a = self.amps[i];
                let b = self.amps[j];
                self.amps[i] = a * c + b * ms;
                self.amps[j] = a * ms + b * c;
            }
        }
    }

    fn apply_cz(&mut self, a: usize, b: usize) {
        let mask = self.mask(a) | self.mask(b);
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & mask == mask {
                *amp = -*amp;
            }
        }
    }
}

/// Runs the ansatz circuit on |0…0⟩.
pub fn simulate(ansatz: &AnsatzSpec, params: &[f64]) -> Result<StateVector> {
    ansatz.check_params(params)?;
    let n = ansatz.n_qubits();
    let mut state = StateVector::zero(n)?;
    for qubit in 0..n {
        state.apply_h(qubit);
    }
    let mut next = 0usize;
    for layer in 0..=ansatz.depth() {
        for qubit in 0..n {
            state.apply_rz(qubit, params[next]);
            state.apply_rx(qubit, params[next + 1]);
            next += 2;
        }
        if layer < ansatz.depth() {
            for qubit in 0..n.saturating_sub(1) {
                state.apply_cz(qubit, qubit + 1);
            }
        }
    }
    Ok(state)
}

/// The distribution sampled when measuring a state in the computational
/// basis.
pub fn born_distribution(state: &StateVector) -> Result<DiscreteDistribution> {
    DiscreteDistribution::new(state.n_qubits(), state.probabilities())
}

/// Convenience: simulate then measure.
pub fn born_probabilities(ansatz: &AnsatzSpec, params: &[f64]) -> Result<DiscreteDistribution> {
    born_distribution(&simulate(ansatz, params)?)
}

/// Draws `count` outcome indices from a distribution. A fixed generator
/// state yields a bit-identical sequence.
pub fn sample<R: Rng + ?Sized>(
    dist: &DiscreteDistribution,
    count: usize,
    rng: &mut R,
) -> Vec<usize> {
    let index = WeightedIndex::new(dist.probabilities())
        .expect("validated distributions have non-negative mass summing to 1");
    (0..count).map(|_| index.sample(rng)).collect()
}

/// Direction of a parameter shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shift {
    Plus,
    Minus,
}

/// Copies `params` with entry `index` moved by ±π/4.
pub fn shifted_parameters(params: &[f64], index: usize, shift: Shift) -> Result<Vec<f64>> {
    if index >= params.len() {
        return Err(Error::ParameterIndex {
            index,
            count: params.len(),
        });
    }
    let mut out = params.to_vec();
    match shift {
        Shift::Plus => out[index] += PARAMETER_SHIFT,
        Shift::Minus => out[index] -= PARAMETER_SHIFT,
    }
    Ok(out)
}

/// Exact probability gradient in one parameter direction,
/// `q_{θ+} − q_{θ−}` per outcome.
pub fn probability_gradient(
    ansatz: &AnsatzSpec,
    params: &[f64],
    index: usize,
) -> Result<Vec<f64>> {
    ansatz.check_params(params)?;
    let plus = born_probabilities(ansatz, &shifted_parameters(params, index, Shift::Plus)?)?;
    let minus = born_probabilities(ansatz, &shifted_parameters(params, index, Shift::Minus)?)?;
    Ok(plus
        .probabilities()
        .iter()
        .zip(minus.probabilities())
        .map(|(p, m)| p - m)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_params(ansatz: &AnsatzSpec, rng: &mut ChaCha8Rng) -> Vec<f64> {
        use rand::Rng;
        (0..ansatz.param_count())
            .map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
            .collect()
    }

    #[test]
    fn parameter_count_is_n_times_2d_plus_2() {
        assert_eq!(AnsatzSpec::new(1, 0).unwrap().param_count(), 2);
        assert_eq!(AnsatzSpec::new(3, 1).unwrap().param_count(), 12);
        assert_eq!(AnsatzSpec::new(3, 4).unwrap().param_count(), 30);
        assert_eq!(AnsatzSpec::new(4, 4).unwrap().param_count(), 40);
        assert!(AnsatzSpec::new(0, 2).is_err());
    }

    #[test]
    fn rejects_wrong_parameter_length() {
        let ansatz = AnsatzSpec::new(2, 1).unwrap();
        assert!(matches!(
            simulate(&ansatz, &[0.0; 7]),
            Err(Error::ParameterCount {
                expected: 8,
                got: 7
            })
        ));
    }

    #[test]
    fn zero_angles_give_uniform() {
        for (n, d) in [(1usize, 0usize), (2, 1), (3, 2), (4, 3)] {
            let ansatz = AnsatzSpec::new(n, d).unwrap();
            let dist = born_probabilities(&ansatz, &vec![0.0; ansatz.param_count()]).unwrap();
            let want = 1.0 / (1 << n) as f64;
            for x in 0..dist.outcome_count() {
                assert!(
                    (dist.prob(x) - want).abs() < 1e-12,
                    "outcome {x} deviates from uniform at n={n}, d={d}"
                );
            }
        }
    }

    #[test]
    fn single_qubit_rotations_only_add_phases_after_hadamard() {
        // After H the state is |+⟩; Rz only rotates phases and Rx(π/2) is X
        // up to global phase, so the outcome stays unbiased.
        let ansatz = AnsatzSpec::new(1, 0).unwrap();
        for params in [
            [0.0, std::f64::consts::FRAC_PI_2],
            [std::f64::consts::FRAC_PI_3, 0.0],
        ] {
            let dist = born_probabilities(&ansatz, &params).unwrap();
            assert!((dist.prob(0) - 0.5).abs() < 1e-12);
            assert!((dist.prob(1) - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn rx_rotates_populations_at_full_angle() {
        // Directly on |0⟩: Rx(θ) puts sin²θ on |1⟩ under the full-angle
        // convention.
        let theta = 0.3f64;
        let mut state = StateVector::zero(1).unwrap();
        state.apply_rx(0, theta);
        let probs = state.probabilities();
        assert!((probs[0] - theta.cos().powi(2)).abs() < 1e-15);
        assert!((probs[1] - theta.sin().powi(2)).abs() < 1e-15);
    }

    #[test]
    fn norm_is_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (n, d) in [(2usize, 2usize), (3, 3), (5, 2)] {
            let ansatz = AnsatzSpec::new(n, d).unwrap();
            let params = random_params(&ansatz, &mut rng);
            let state = simulate(&ansatz, &params).unwrap();
            let norm: f64 = state.probabilities().iter().sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn probabilities_have_period_pi_in_every_angle() {
        // exp(−i(θ+π)V) = −exp(−iθV): a global sign, invisible in Born
        // probabilities. This distinguishes the full-angle convention from
        // the half-angle one (period 2π).
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ansatz = AnsatzSpec::new(3, 1).unwrap();
        let params = random_params(&ansatz, &mut rng);
        let base = born_probabilities(&ansatz, &params).unwrap();
        for i in 0..ansatz.param_count() {
            let mut moved = params.clone();
            moved[i] += std::f64::consts::PI;
            let shifted = born_probabilities(&ansatz, &moved).unwrap();
            for x in 0..base.outcome_count() {
                assert!((base.prob(x) - shifted.prob(x)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn shift_rule_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ansatz = AnsatzSpec::new(3, 2).unwrap();
        let params = random_params(&ansatz, &mut rng);
        let h = 1e-5;
        for index in 0..ansatz.param_count() {
            let grad = probability_gradient(&ansatz, &params, index).unwrap();
            let mut up = params.clone();
            let mut down = params.clone();
            up[index] += h;
            down[index] -= h;
            let fu = born_probabilities(&ansatz, &up).unwrap();
            let fd = born_probabilities(&ansatz, &down).unwrap();
            for x in 0..grad.len() {
                let fd_grad = (fu.prob(x) - fd.prob(x)) / (2.0 * h);
                assert!(
                    (grad[x] - fd_grad).abs() < 1e-8,
                    "direction {index}, outcome {x}: shift {} vs fd {fd_grad}",
                    grad[x]
                );
            }
        }
    }

    #[test]
    fn gradient_tables_sum_to_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let ansatz = AnsatzSpec::new(4, 2).unwrap();
        let params = random_params(&ansatz, &mut rng);
        for index in [0, 7, ansatz.param_count() - 1] {
            let grad = probability_gradient(&ansatz, &params, index).unwrap();
            let total: f64 = grad.iter().sum();
            assert!(total.abs() < 1e-12);
        }
    }

    #[test]
    fn sampling_is_reproducible_and_unbiased() {
        let dist = DiscreteDistribution::uniform(3).unwrap();
        let mut rng_a = ChaCha8Rng::seed_from_u64(42);
        let mut rng_b = ChaCha8Rng::seed_from_u64(42);
        let a = sample(&dist, 1_000_000, &mut rng_a);
        let b = sample(&dist, 1_000_000, &mut rng_b);
        assert_eq!(a, b);

        let freq = DiscreteDistribution::empirical(3, &a).unwrap();
        for x in 0..8 {
            assert!(
                (freq.prob(x) - 0.125).abs() < 0.002,
                "outcome {x} frequency {}",
                freq.prob(x)
            );
        }
    }

    #[test]
    fn point_mass_sampling_never_strays() {
        let dist = DiscreteDistribution::point_mass(2, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        assert!(sample(&dist, 1000, &mut rng).iter().all(|&x| x == 3));
    }

    #[test]
    fn shifted_parameters_bounds_check() {
        assert!(matches!(
            shifted_parameters(&[0.0, 0.0], 2, Shift::Plus),
            Err(Error::ParameterIndex { index: 2, count: 2 })
        ));
        let up = shifted_parameters(&[1.0, 2.0], 1, Shift::Plus).unwrap();
        assert_eq!(up, vec![1.0, 2.0 + PARAMETER_SHIFT]);
    }
}
