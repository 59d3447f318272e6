//! Probability distributions over measurement bitstrings, Kullback-Leibler
//! and Jensen-Shannon divergences, and classification accuracy.
//!
//! Both divergences use base-2 logarithms, which keeps the JS divergence in
//! [0, 1]. KL is the standard weighted form Σᵢ P₁(i)·log₂(P₁(i)/P₂(i)) with
//! 0·log(0/x) = 0 and a +∞ sentinel when P₁ puts mass where P₂ has none.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::Label;
use crate::qcore::{index_to_bitstring, Counts, StateVector};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("probabilities must be nonnegative")]
    NegativeProbability,
    #[error("probabilities sum to {0}, expected 1")]
    BadSum(f64),
    #[error("support/probability lengths differ ({support} vs {probs})")]
    LengthMismatch { support: usize, probs: usize },
    #[error("distributions have different supports")]
    SupportMismatch,
    #[error("label sequences have different lengths ({0} vs {1})")]
    LabelLengthMismatch(usize, usize),
    #[error("label sequences are empty")]
    Empty,
}

/// A discrete probability distribution over an ordered bitstring support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbDist {
    support: Vec<String>,
    probs: Vec<f64>,
}

impl ProbDist {
    pub fn new(support: Vec<String>, probs: Vec<f64>) -> Result<Self, MetricsError> {
        if support.len() != probs.len() {
            return Err(MetricsError::LengthMismatch {
                support: support.len(),
                probs: probs.len(),
            });
        }
        if probs.iter().any(|p| *p < 0.0) {
            return Err(MetricsError::NegativeProbability);
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(MetricsError::BadSum(sum));
        }
        Ok(Self { support, probs })
    }

    pub fn support(&self) -> &[String] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.probs
            .iter()
            .zip(other.probs.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Empirical distribution of a measurement record over the full 2ⁿ support;
/// absent bitstrings get probability 0.
pub fn dist_from_counts(counts: &Counts) -> ProbDist {
    let n = counts.num_qubits;
    let dim = 1usize << n;
    let mut support = Vec::with_capacity(dim);
    let mut probs = Vec::with_capacity(dim);
    for i in 0..dim {
        let bits = index_to_bitstring(i, n);
        probs.push(counts.get(&bits) as f64 / counts.shots as f64);
        support.push(bits);
    }
    ProbDist { support, probs }
}

/// The Born distribution |aᵢ|² of an exact statevector.
pub fn dist_from_state(state: &StateVector) -> ProbDist {
    let n = state.num_qubits();
    let support = (0..state.dim()).map(|i| index_to_bitstring(i, n)).collect();
    ProbDist { support, probs: state.probabilities() }
}

/// KL divergence in bits. +∞ when `p1` has mass outside `p2`'s support.
pub fn kl_divergence(p1: &ProbDist, p2: &ProbDist) -> Result<f64, MetricsError> {
    if p1.support != p2.support {
        return Err(MetricsError::SupportMismatch);
    }
    let mut acc = 0.0;
    for (a, b) in p1.probs.iter().zip(p2.probs.iter()) {
        if *a == 0.0 {
            continue;
        }
        if *b == 0.0 {
            return Ok(f64::INFINITY);
        }
        acc += a * (a / b).log2();
    }
    Ok(acc)
}

/// JS divergence in bits: symmetric, finite, and within [0, 1].
pub fn js_divergence(p1: &ProbDist, p2: &ProbDist) -> Result<f64, MetricsError> {
    if p1.support != p2.support {
        return Err(MetricsError::SupportMismatch);
    }
    let mix: Vec<f64> =
        p1.probs.iter().zip(p2.probs.iter()).map(|(a, b)| (a + b) / 2.0).collect();
    let mixture = ProbDist { support: p1.support.clone(), probs: mix };
    let js = 0.5 * kl_divergence(p1, &mixture)? + 0.5 * kl_divergence(p2, &mixture)?;
    // The mixture dominates both inputs, so the value is finite; rounding
    // can leave a tiny negative residue near zero.
    Ok(js.max(0.0))
}

/// Fraction of predictions matching the truth.
pub fn accuracy(predicted: &[Label], truth: &[Label]) -> Result<f64, MetricsError> {
    if predicted.len() != truth.len() {
        return Err(MetricsError::LabelLengthMismatch(predicted.len(), truth.len()));
    }
    if predicted.is_empty() {
        return Err(MetricsError::Empty);
    }
    let correct = predicted.iter().zip(truth.iter()).filter(|(a, b)| a == b).count();
    Ok(correct as f64 / predicted.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    fn dist(probs: Vec<f64>) -> ProbDist {
        let n = probs.len().trailing_zeros() as usize;
        let support = (0..probs.len()).map(|i| index_to_bitstring(i, n)).collect();
        ProbDist::new(support, probs).unwrap()
    }

    #[test]
    fn dist_from_counts_examples() {
        let counts = Counts {
            shots: 100,
            num_qubits: 1,
            table: BTreeMap::from([("0".into(), 50u64), ("1".into(), 50u64)]),
        };
        let d = dist_from_counts(&counts);
        assert_eq!(d.probs(), &[0.5, 0.5]);

        let counts = Counts {
            shots: 8192,
            num_qubits: 2,
            table: BTreeMap::from([("00".into(), 8192u64)]),
        };
        let d = dist_from_counts(&counts);
        assert_eq!(d.probs(), &[1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn dist_probabilities_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let mut table = BTreeMap::new();
            let mut shots = 0u64;
            for i in 0..8 {
                let c = rng.gen_range(0..1000u64);
                shots += c;
                if c > 0 {
                    table.insert(index_to_bitstring(i, 3), c);
                }
            }
            if shots == 0 {
                continue;
            }
            let d = dist_from_counts(&Counts { shots, num_qubits: 3, table });
            let sum: f64 = d.probs().iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn kl_examples() {
        let a = dist(vec![1.0, 0.0]);
        let b = dist(vec![0.5, 0.5]);
        assert_eq!(kl_divergence(&a, &a).unwrap(), 0.0);
        assert!((kl_divergence(&a, &b).unwrap() - 1.0).abs() < 1e-12);
        assert!(kl_divergence(&b, &a).unwrap().is_infinite());
    }

    #[test]
    fn kl_rejects_support_mismatch() {
        let a = dist(vec![1.0, 0.0]);
        let b = dist(vec![0.25, 0.25, 0.25, 0.25]);
        assert!(matches!(kl_divergence(&a, &b), Err(MetricsError::SupportMismatch)));
    }

    #[test]
    fn js_examples() {
        let a = dist(vec![1.0, 0.0]);
        let b = dist(vec![0.0, 1.0]);
        let c = dist(vec![0.5, 0.5]);
        assert_eq!(js_divergence(&a, &a).unwrap(), 0.0);
        assert!((js_divergence(&a, &b).unwrap() - 1.0).abs() < 1e-12);
        // Hand evaluation with base-2 logs:
        // ½·log₂(4/3) + ½·(½·log₂(2/3) + ½·log₂ 2) = 0.311278…
        assert!((js_divergence(&a, &c).unwrap() - 0.311278).abs() < 1e-4);
    }

    #[test]
    fn js_symmetry_and_bounds_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..1000 {
            let raw: Vec<f64> = (0..8).map(|_| rng.gen_range(0.0..1.0)).collect();
            let s1: f64 = raw.iter().sum();
            let p = dist(raw.iter().map(|x| x / s1).collect());
            let raw2: Vec<f64> = (0..8).map(|_| rng.gen_range(0.0..1.0)).collect();
            let s2: f64 = raw2.iter().sum();
            let q = dist(raw2.iter().map(|x| x / s2).collect());
            let ab = js_divergence(&p, &q).unwrap();
            let ba = js_divergence(&q, &p).unwrap();
            assert!((ab - ba).abs() < 1e-12);
            assert!((0.0..=1.0 + 1e-12).contains(&ab));
            if p.max_abs_diff(&q) < 1e-12 {
                assert!(ab < 1e-9);
            } else {
                assert!(ab > 0.0);
            }
        }
    }

    #[test]
    fn accuracy_examples() {
        use Label::{Minus, Plus};
        let truth = vec![Plus, Minus, Plus, Minus];
        assert_eq!(accuracy(&truth, &truth).unwrap(), 1.0);
        let pred = vec![Plus, Minus, Minus, Minus];
        assert_eq!(accuracy(&pred, &truth).unwrap(), 0.75);
        assert!(matches!(accuracy(&truth[..2], &truth), Err(MetricsError::LabelLengthMismatch(..))));
        assert!(matches!(accuracy(&[], &[]), Err(MetricsError::Empty)));
    }
}
