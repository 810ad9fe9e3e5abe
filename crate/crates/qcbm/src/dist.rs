//! Discrete probability distributions over fixed-width bitstrings.
//!
//! An `n`-bit distribution is a dense table of 2^n probabilities. Outcome
//! indices encode bitstrings most significant bit first: bit 0 of the string
//! (qubit 0 of a circuit) is the top bit of the index, so the 3-bit string
//! `101` is outcome 5. Tables are validated on construction: entries in
//! [0, 1] and total mass 1 within [`NORMALISATION_TOLERANCE`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest accepted deviation of a probability table's total mass from 1.
pub const NORMALISATION_TOLERANCE: f64 = 1e-10;

/// A contiguous run of bit positions, `start .. start + width`.
///
/// `start` counts from the most significant bit, consistent with the outcome
/// index encoding: on the 3-bit string `101`, the window with `start = 1`,
/// `width = 2` reads `01`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub start: usize,
    pub width: usize,
}

impl Window {
    pub fn new(start: usize, width: usize) -> Self {
        Window { start, width }
    }

    /// The window covering all `n_bits` positions.
    pub fn full(n_bits: usize) -> Self {
        Window {
            start: 0,
            width: n_bits,
        }
    }

    /// All `n_bits - width + 1` windows of a given width, left to right.
    pub fn sliding(n_bits: usize, width: usize) -> Result<Vec<Window>> {
        if width == 0 {
            return Err(Error::EmptyWindow);
        }
        if width > n_bits {
            return Err(Error::WindowWidthOutOfRange { k: width, n_bits });
        }
        Ok((0..=n_bits - width)
            .map(|start| Window { start, width })
            .collect())
    }

    pub fn validate(&self, n_bits: usize) -> Result<()> {
        if self.width == 0 {
            return Err(Error::EmptyWindow);
        }
        if self.start + self.width > n_bits {
            return Err(Error::WindowOutOfRange {
                start: self.start,
                width: self.width,
                n_bits,
            });
        }
        Ok(())
    }

    /// Restrict a full `n_bits`-wide outcome index to this window's bits.
    pub fn extract(&self, outcome: usize, n_bits: usize) -> usize {
        (outcome >> (n_bits - self.start - self.width)) & ((1 << self.width) - 1)
    }
}

/// A validated probability table over `2^n_bits` outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDistribution {
    n_bits: usize,
    probabilities: Vec<f64>,
}

impl DiscreteDistribution {
    /// Builds a distribution from a dense table, validating shape, entry
    /// range, and normalisation.
    pub fn new(n_bits: usize, probabilities: Vec<f64>) -> Result<Self> {
        if n_bits == 0 {
            return Err(Error::NoQubits);
        }
        let expected = 1usize << n_bits;
        if probabilities.len() != expected {
            return Err(Error::TableLength {
                expected,
                got: probabilities.len(),
            });
        }
        for (index, &value) in probabilities.iter().enumerate() {
            if !(value >= 0.0 && value <= 1.0 + NORMALISATION_TOLERANCE) {
                return Err(Error::InvalidProbability { index, value });
            }
        }
        let sum: f64 = probabilities.iter().sum();
        if (sum - 1.0).abs() > NORMALISATION_TOLERANCE {
            return Err(Error::NotNormalised {
                sum,
                tolerance: NORMALISATION_TOLERANCE,
            });
        }
        Ok(DiscreteDistribution {
            n_bits,
            probabilities,
        })
    }

    /// The uniform distribution on `n_bits` bits.
    pub fn uniform(n_bits: usize) -> Result<Self> {
        if n_bits == 0 {
            return Err(Error::NoQubits);
        }
        let len = 1usize << n_bits;
        Ok(DiscreteDistribution {
            n_bits,
            probabilities: vec![1.0 / len as f64; len],
        })
    }

    /// All mass on a single outcome.
    pub fn point_mass(n_bits: usize, outcome: usize) -> Result<Self> {
        if n_bits == 0 {
            return Err(Error::NoQubits);
        }
        let len = 1usize << n_bits;
        if outcome >= len {
            return Err(Error::OutcomeOutOfRange { outcome, n_bits });
        }
        let mut probabilities = vec![0.0; len];
        probabilities[outcome] = 1.0;
        Ok(DiscreteDistribution {
            n_bits,
            probabilities,
        })
    }

    /// Frequencies of observed outcomes. Errors on an empty sample set or an
    /// out-of-range outcome.
    pub fn empirical(n_bits: usize, samples: &[usize]) -> Result<Self> {
        if n_bits == 0 {
            return Err(Error::NoQubits);
        }
        if samples.is_empty() {
            return Err(Error::EmptySamples);
        }
        let len = 1usize << n_bits;
        let mut counts = vec![0u64; len];
        for &sample in samples {
            if sample >= len {
                return Err(Error::OutcomeOutOfRange {
                    outcome: sample,
                    n_bits,
                });
            }
            counts[sample] += 1;
        }
        let total = samples.len() as f64;
        Ok(DiscreteDistribution {
            n_bits,
            probabilities: counts.iter().map(|&c| c as f64 / total).collect(),
        })
    }

    /// A Gaussian profile discretised on outcome indices 0 .. 2^n − 1 and
    /// renormalised: mass at x is proportional to exp(−(x − mean)² / 2σ²).
    pub fn target_gaussian(n_bits: usize, mean: f64, std: f64) -> Result<Self> {
        if n_bits == 0 {
            return Err(Error::NoQubits);
        }
        if !(std > 0.0 && std.is_finite()) || !mean.is_finite() {
            return Err(Error::InvalidStd(std));
        }
        let len = 1usize << n_bits;
        let mut weights: Vec<f64> = (0..len)
            .map(|x| {
                let z = (x as f64 - mean) / std;
                (-0.5 * z * z).exp()
            })
            .collect();
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        Ok(DiscreteDistribution {
            n_bits,
            probabilities: weights,
        })
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    /// Number of outcomes, 2^n.
    pub fn outcome_count(&self) -> usize {
        self.probabilities.len()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn prob(&self, outcome: usize) -> f64 {
        self.probabilities[outcome]
    }

    /// Marginal over a contiguous window of bit positions.
    pub fn marginal(&self, window: Window) -> Result<DiscreteDistribution> {
        window.validate(self.n_bits)?;
        let mut probabilities = vec![0.0; 1 << window.width];
        for (outcome, &p) in self.probabilities.iter().enumerate() {
            probabilities[window.extract(outcome, self.n_bits)] += p;
        }
        Ok(DiscreteDistribution {
            n_bits: window.width,
            probabilities,
        })
    }

    /// Marginal over an arbitrary (not necessarily contiguous) list of bit
    /// positions; the listed bits become the marginal's bits in the given
    /// order. Defaults elsewhere in the crate only ever use contiguous
    /// windows.
    pub fn marginal_bits(&self, bits: &[usize]) -> Result<DiscreteDistribution> {
        if bits.is_empty() {
            return Err(Error::EmptyWindow);
        }
        for &b in bits {
            if b >= self.n_bits {
                return Err(Error::WindowOutOfRange {
                    start: b,
                    width: 1,
                    n_bits: self.n_bits,
                });
            }
        }
        let mut probabilities = vec![0.0; 1 << bits.len()];
        for (outcome, &p) in self.probabilities.iter().enumerate() {
            let mut reduced = 0usize;
            for &b in bits {
                reduced = (reduced << 1) | ((outcome >> (self.n_bits - 1 - b)) & 1);
            }
            probabilities[reduced] += p;
        }
        Ok(DiscreteDistribution {
            n_bits: bits.len(),
            probabilities,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_malformed_tables() {
        assert!(DiscreteDistribution::new(2, vec![0.5, 0.5]).is_err());
        assert!(DiscreteDistribution::new(1, vec![0.6, 0.6]).is_err());
        assert!(DiscreteDistribution::new(1, vec![-0.1, 1.1]).is_err());
        assert!(DiscreteDistribution::new(1, vec![f64::NAN, 1.0]).is_err());
        assert!(DiscreteDistribution::new(0, vec![1.0]).is_err());
    }

    #[test]
    fn uniform_and_point_mass() {
        let u = DiscreteDistribution::uniform(3).unwrap();
        assert_eq!(u.outcome_count(), 8);
        assert!(u.probabilities().iter().all(|&p| (p - 0.125).abs() < 1e-15));

        let d = DiscreteDistribution::point_mass(3, 5).unwrap();
        assert_eq!(d.prob(5), 1.0);
        assert_eq!(d.probabilities().iter().sum::<f64>(), 1.0);
        assert!(DiscreteDistribution::point_mass(3, 8).is_err());
    }

    #[test]
    fn window_restricts_msb_first() {
        // On the 3-bit string 101, the window starting at bit 1 of width 2
        // reads 01.
        let d = DiscreteDistribution::point_mass(3, 0b101).unwrap();
        let m = d.marginal(Window::new(1, 2)).unwrap();
        assert_eq!(m.n_bits(), 2);
        assert_eq!(m.prob(0b01), 1.0);
    }

    #[test]
    fn marginal_matches_string_slicing() {
        // Independent route: restrict outcomes by slicing their binary
        // string representation.
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = rng.gen_range(2..=5usize);
            let raw: Vec<f64> = (0..1usize << n).map(|_| rng.gen::<f64>() + 1e-3).collect();
            let total: f64 = raw.iter().sum();
            let d =
                DiscreteDistribution::new(n, raw.iter().map(|w| w / total).collect()).unwrap();
            let width = rng.gen_range(1..=n);
            let start = rng.gen_range(0..=n - width);
            let m = d.marginal(Window::new(start, width)).unwrap();

            let mut expected = vec![0.0; 1 << width];
            for x in 0..1usize << n {
                let bits = format!("{x:0n$b}");
                let y = usize::from_str_radix(&bits[start..start + width], 2).unwrap();
                expected[y] += d.prob(x);
            }
            for y in 0..expected.len() {
                assert!((m.prob(y) - expected[y]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn full_window_marginal_is_identity() {
        let d = DiscreteDistribution::target_gaussian(3, 3.5, 2.0).unwrap();
        let m = d.marginal(Window::full(3)).unwrap();
        assert_eq!(m.probabilities(), d.probabilities());
    }

    #[test]
    fn marginals_compose() {
        let d = DiscreteDistribution::target_gaussian(5, 11.0, 6.0).unwrap();
        let wide = d.marginal(Window::new(1, 3)).unwrap();
        let narrow_direct = d.marginal(Window::new(2, 2)).unwrap();
        let narrow_via_wide = wide.marginal(Window::new(1, 2)).unwrap();
        for y in 0..4 {
            assert!((narrow_direct.prob(y) - narrow_via_wide.prob(y)).abs() < 1e-14);
        }
    }

    #[test]
    fn marginal_bits_agrees_with_contiguous_window() {
        let d = DiscreteDistribution::target_gaussian(4, 9.0, 3.0).unwrap();
        let via_window = d.marginal(Window::new(1, 2)).unwrap();
        let via_bits = d.marginal_bits(&[1, 2]).unwrap();
        assert_eq!(via_window.probabilities(), via_bits.probabilities());

        // Non-contiguous selections are accepted too.
        let skip = d.marginal_bits(&[0, 3]).unwrap();
        assert!((skip.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empirical_counts() {
        let d = DiscreteDistribution::empirical(2, &[0, 1, 1, 3]).unwrap();
        assert_eq!(d.probabilities(), &[0.25, 0.5, 0.0, 0.25]);
        assert!(matches!(
            DiscreteDistribution::empirical(2, &[]),
            Err(Error::EmptySamples)
        ));
        assert!(DiscreteDistribution::empirical(2, &[4]).is_err());
    }

    #[test]
    fn gaussian_profile_is_symmetric_and_unimodal() {
        let d = DiscreteDistribution::target_gaussian(4, 7.5, 4.0).unwrap();
        assert!((d.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for x in 0..8 {
            assert!((d.prob(x) - d.prob(15 - x)).abs() < 1e-15);
        }
        for x in 0..7 {
            assert!(d.prob(x) < d.prob(x + 1));
        }
        assert!(DiscreteDistribution::target_gaussian(4, 7.5, 0.0).is_err());
        assert!(DiscreteDistribution::target_gaussian(4, 7.5, -1.0).is_err());
    }

    #[test]
    fn serialises_with_bit_count() {
        let d = DiscreteDistribution::point_mass(2, 2).unwrap();
        let json = serde_json::to_string(&d).unwrap();
        assert!(json.contains("\"n_bits\":2"));
        let back: DiscreteDistribution = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);
    }
}
