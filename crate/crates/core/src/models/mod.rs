//! Generative models used inside the EDA loop and exact KL divergence
//! against finite target distributions.

mod born;
mod chain;
mod positive;

pub use born::{nll, nll_gradient, train_born_machine, PairSample, TrainConfig};
pub use chain::{fit_chain_bayes, ChainBayes};
pub use positive::train_positive_mps;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::mps::Mps;
use crate::rng::Rng as RunRng;

/// Anything that assigns exact probabilities to bit strings and can be
/// sampled from.
pub trait GenerativeModel {
    fn n_sites(&self) -> usize;

    fn probability(&self, x: &BitString) -> Result<f64>;

    /// `ln p(x)` for every string; models with an expensive normalizer
    /// override this to compute it once.
    fn log_probabilities(&self, xs: &[BitString]) -> Result<Vec<f64>> {
        xs.iter().map(|x| self.probability(x).map(f64::ln)).collect()
    }

    fn sample_many(&self, count: usize, rng: &mut RunRng) -> Result<Vec<BitString>>;
}

impl GenerativeModel for Mps {
    fn n_sites(&self) -> usize {
        Mps::n_sites(self)
    }

    fn probability(&self, x: &BitString) -> Result<f64> {
        Mps::probability(self, x)
    }

    fn log_probabilities(&self, xs: &[BitString]) -> Result<Vec<f64>> {
        let log_z = self.log_partition_function()?;
        xs.iter()
            .map(|x| {
                x.check_len(Mps::n_sites(self))?;
                Ok(self.log_probability_given(x, log_z))
            })
            .collect()
    }

    fn sample_many(&self, count: usize, rng: &mut RunRng) -> Result<Vec<BitString>> {
        Ok(self.sampler()?.sample_many(count, rng))
    }
}

impl GenerativeModel for ChainBayes {
    fn n_sites(&self) -> usize {
        ChainBayes::n_sites(self)
    }

    fn probability(&self, x: &BitString) -> Result<f64> {
        self.chain_probability(x)
    }

    fn sample_many(&self, count: usize, rng: &mut RunRng) -> Result<Vec<BitString>> {
        Ok((0..count).map(|_| self.sample(rng)).collect())
    }
}

/// A normalized distribution with finite support.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteDistribution {
    support: Vec<BitString>,
    probs: Vec<f64>,
}

impl FiniteDistribution {
    /// Rejects negative masses and totals that differ from one by more than
    /// `1e-9`.
    pub fn new(support: Vec<BitString>, probs: Vec<f64>) -> Result<Self> {
        if support.len() != probs.len() {
            return Err(Error::DimensionMismatch {
                expected: support.len(),
                actual: probs.len(),
            });
        }
        if support.is_empty() {
            return Err(Error::Empty("target support"));
        }
        if probs.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::invalid("negative or NaN probability in target"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized(total));
        }
        Ok(FiniteDistribution { support, probs })
    }

    /// Normalizes nonnegative weights.
    pub fn from_weights(support: Vec<BitString>, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::invalid(format!("weights sum to {total}")));
        }
        let probs = weights.into_iter().map(|w| w / total).collect();
        FiniteDistribution::new(support, probs)
    }

    pub fn support(&self) -> &[BitString] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        self.probs.iter().filter(|&&p| p > 0.0).map(|p| -p * p.ln()).sum()
    }

    /// Only the points with strictly positive mass.
    pub fn positive_part(&self) -> (Vec<BitString>, Vec<f64>) {
        self.support
            .iter()
            .zip(&self.probs)
            .filter(|(_, &p)| p > 0.0)
            .map(|(x, &p)| (x.clone(), p))
            .unzip()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &BitString {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (x, p) in self.support.iter().zip(&self.probs) {
            acc += p;
            if u < acc {
                return x;
            }
        }
        self.support.last().expect("nonempty support")
    }
}

/// `KL(target ‖ model)` in nats. When the model puts zero mass on a support
/// point the value is `+∞` and `zero_support` counts those points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KlDivergence {
    pub value: f64,
    pub zero_support: usize,
}

impl KlDivergence {
    pub fn is_infinite(&self) -> bool {
        self.zero_support > 0
    }

    /// `Some(value)` when finite.
    pub fn finite(&self) -> Option<f64> {
        (!self.is_infinite()).then_some(self.value)
    }
}

/// KL over the target support given the model's log-probabilities there.
pub fn kl_from_log_probs(target_probs: &[f64], model_log_probs: &[f64]) -> KlDivergence {
    let mut value = 0.0;
    let mut zero_support = 0;
    for (&t, &lm) in target_probs.iter().zip(model_log_probs) {
        if t == 0.0 {
            continue;
        }
        if lm == f64::NEG_INFINITY {
            zero_support += 1;
            continue;
        }
        value += t * (t.ln() - lm);
    }
    if zero_support > 0 {
        value = f64::INFINITY;
    }
    // Rounding can push an exact match slightly negative.
    KlDivergence {
        value: if value < 0.0 && value > -1e-12 { 0.0 } else { value },
        zero_support,
    }
}

/// Exact `KL(target ‖ model)` summed over the target support.
pub fn model_kl_vs_target<M: GenerativeModel + ?Sized>(model: &M, target: &FiniteDistribution) -> Result<KlDivergence> {
    let (support, probs) = target.positive_part();
    let log_probs = model.log_probabilities(&support)?;
    Ok(kl_from_log_probs(&probs, &log_probs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mps::Mode;

    fn strings(n: usize) -> Vec<BitString> {
        (0..1u64 << n).map(|v| BitString::from_index(v, n)).collect()
    }

    #[test]
    fn kl_of_identical_distributions_is_zero() {
        let m = Mps::uniform(2, Mode::DirectPositive).unwrap();
        let t = FiniteDistribution::new(strings(2), vec![0.25; 4]).unwrap();
        assert_eq!(model_kl_vs_target(&m, &t).unwrap().value, 0.0);
    }

    #[test]
    fn two_point_target_against_uniform() {
        // Σ 0.5·ln(0.5/0.25) = ln 2.
        let m = Mps::uniform(2, Mode::Amplitude).unwrap();
        let t = FiniteDistribution::new(strings(2)[..2].to_vec(), vec![0.5, 0.5]).unwrap();
        let kl = model_kl_vs_target(&m, &t).unwrap();
        assert!((kl.value - std::f64::consts::LN_2).abs() < 1e-12);
        assert!((kl.value - std::f64::consts::LN_2).abs() < 1e-4);
    }

    #[test]
    fn zero_model_mass_is_infinite() {
        let x: BitString = "01".parse().unwrap();
        let m = Mps::product_state(&x, Mode::DirectPositive).unwrap();
        let t = FiniteDistribution::new(strings(2), vec![0.25; 4]).unwrap();
        let kl = model_kl_vs_target(&m, &t).unwrap();
        assert!(kl.is_infinite());
        assert_eq!(kl.zero_support, 3);
        assert_eq!(kl.finite(), None);
    }

    #[test]
    fn target_must_be_normalized() {
        assert!(matches!(
            FiniteDistribution::new(strings(1), vec![0.5, 0.6]),
            Err(Error::NotNormalized(_))
        ));
        assert!(FiniteDistribution::new(strings(1), vec![0.5, 0.5 + 1e-11]).is_ok());
        assert!(FiniteDistribution::new(strings(1), vec![1.5, -0.5]).is_err());
    }
}
