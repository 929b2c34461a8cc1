//! Born-rule sampling and outcome tallies.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::observable::LocalObservable;
use super::state::{parity_mean, QuantumState};
use super::StateError;

/// Histogram over the `2^N` joint outcomes of one joint setting.
///
/// Index bit `n - q` set means qubit `q` returned -1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub setting: Vec<LocalObservable>,
    pub counts: Vec<u64>,
}

impl OutcomeCounts {
    pub fn shots(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Outcome label such as `"+-+"` for an index.
    pub fn outcome_label(n: usize, index: usize) -> String {
        (0..n)
            .map(|k| {
                if index >> (n - 1 - k) & 1 == 0 {
                    '+'
                } else {
                    '-'
                }
            })
            .collect()
    }
}

/// Portable seeded generator used for every sampling path.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixes a master seed with a stream index (splitmix64 finalizer).
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draws `shots` multinomial samples from the Born distribution of `setting`.
pub fn born_sample(
    state: &QuantumState,
    setting: &[LocalObservable],
    shots: u64,
    seed: u64,
) -> Result<OutcomeCounts, StateError> {
    if shots == 0 {
        return Err(StateError::ZeroShots);
    }
    let probs = state.outcome_probabilities(setting)?;
    let dist = WeightedIndex::new(&probs)
        .map_err(|e| StateError::InvalidState(format!("outcome distribution: {e}")))?;
    let mut rng = seeded_rng(seed);
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..shots {
        counts[dist.sample(&mut rng)] += 1;
    }
    Ok(OutcomeCounts {
        setting: setting.to_vec(),
        counts,
    })
}

/// A point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

/// Outcome frequencies for one joint setting, either sampled (`shots` set)
/// or exact (`shots == None`, contributing no statistical error).
#[derive(Debug, Clone, PartialEq)]
pub struct Tally {
    pub probabilities: Vec<f64>,
    pub shots: Option<u64>,
}

impl Tally {
    pub fn from_counts(counts: &[u64]) -> Result<Self, StateError> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(StateError::ZeroShots);
        }
        Ok(Tally {
            probabilities: counts.iter().map(|&c| c as f64 / total as f64).collect(),
            shots: Some(total),
        })
    }

    pub fn exact(probabilities: Vec<f64>) -> Self {
        Tally {
            probabilities,
            shots: None,
        }
    }

    /// Mean of the ±1 product over `mask` and the variance of that mean.
    pub fn parity_estimate(&self, mask: usize) -> (f64, f64) {
        if mask == 0 {
            return (1.0, 0.0);
        }
        let mean = parity_mean(&self.probabilities, mask);
        (mean, self.variance_of_mean(1.0 - mean * mean))
    }

    /// Total probability of the listed outcomes and the variance of that estimate.
    pub fn probability_estimate(&self, outcomes: &[usize]) -> (f64, f64) {
        let p: f64 = outcomes
            .iter()
            .filter_map(|&i| self.probabilities.get(i))
            .sum();
        (p, self.variance_of_mean(p * (1.0 - p)))
    }

    fn variance_of_mean(&self, per_shot: f64) -> f64 {
        match self.shots {
            Some(s) => per_shot.max(0.0) / s as f64,
            None => 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliTerm;

    #[test]
    fn ghz_z_outcomes_are_perfectly_correlated() {
        let g = QuantumState::ghz(2).unwrap();
        let c = born_sample(&g, &[LocalObservable::Z; 2], 5000, 1).unwrap();
        assert_eq!(c.counts[0b01] + c.counts[0b10], 0);
        assert_eq!(c.shots(), 5000);
        assert!(c.counts[0] > 2000 && c.counts[3] > 2000);
    }

    #[test]
    fn ghz_xxx_parity_is_even() {
        let g = QuantumState::ghz(3).unwrap();
        let c = born_sample(&g, &[LocalObservable::X; 3], 2000, 9).unwrap();
        for (x, &n) in c.counts.iter().enumerate() {
            if x.count_ones() % 2 == 1 {
                assert_eq!(n, 0);
            }
        }
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let g = QuantumState::ghz(3).unwrap().white_noise(0.7).unwrap();
        let a = born_sample(&g, &[LocalObservable::X; 3], 1000, 42).unwrap();
        let b = born_sample(&g, &[LocalObservable::X; 3], 1000, 42).unwrap();
        let c = born_sample(&g, &[LocalObservable::X; 3], 1000, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn empirical_correlator_converges() {
        let s = QuantumState::ghz(2).unwrap().white_noise(0.5).unwrap();
        let shots = 100_000;
        let c = born_sample(&s, &[LocalObservable::Z; 2], shots, 3).unwrap();
        let (mean, _) = Tally::from_counts(&c.counts).unwrap().parity_estimate(0b11);
        let exact = s
            .expectation(&PauliTerm::parse("ZZ", 1.0).unwrap())
            .unwrap();
        assert!((exact - 0.5).abs() < 1e-12);
        assert!((mean - exact).abs() < 3.0 / (shots as f64).sqrt());
    }

    #[test]
    fn errors() {
        let g = QuantumState::ghz(2).unwrap();
        assert!(matches!(
            born_sample(&g, &[LocalObservable::Z; 2], 0, 1),
            Err(StateError::ZeroShots)
        ));
        assert!(matches!(
            born_sample(&g, &[LocalObservable::Z; 3], 10, 1),
            Err(StateError::LengthMismatch { .. })
        ));
        assert!(Tally::from_counts(&[0, 0]).is_err());
    }

    #[test]
    fn outcome_labels() {
        assert_eq!(OutcomeCounts::outcome_label(3, 0b010), "+-+");
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(7, 0), derive_seed(7, 1));
        assert_ne!(derive_seed(7, 0), derive_seed(8, 0));
        assert_eq!(derive_seed(7, 3), derive_seed(7, 3));
    }
}
