//! Exact KL diagnostics for the models trained inside a run.
//!
//! Each generation the trained model is compared with the Boltzmann
//! distribution its training data was drawn from. Mutation is folded into
//! the model exactly by diffusing its physical legs, and a reference model
//! trained on the same parents gives the baseline for the reported delta.

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::engine::{
    boltzmann_weights, run_eda, FittedModel, GenerationView, ModelKind, Observer, RunResult, SolutionBank,
    SolverConfig,
};
use crate::error::{Error, Result};
use crate::models::{
    fit_chain_bayes, model_kl_vs_target, train_born_machine, train_positive_mps, FiniteDistribution, KlDivergence,
};
use crate::mps::{Mode, Mps};
use crate::problems::Problem;
use crate::rng::{self, Rng};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KlReport {
    pub generation: usize,
    pub kl_primary: KlDivergence,
    pub kl_reference: KlDivergence,
    /// `kl_primary - kl_reference`, when both are finite.
    pub delta: Option<f64>,
}

impl KlReport {
    pub fn new(generation: usize, kl_primary: KlDivergence, kl_reference: KlDivergence) -> Self {
        let delta = kl_primary.finite().zip(kl_reference.finite()).map(|(a, b)| a - b);
        KlReport {
            generation,
            kl_primary,
            kl_reference,
            delta,
        }
    }
}

/// `exp(-f/T)` normalized over the pool entries of `bank`. Entries whose
/// weight underflows to zero are left out of the support.
pub fn boltzmann_target(bank: &SolutionBank, pool: &[usize], temperature: f64) -> Result<FiniteDistribution> {
    let weights = boltzmann_weights(&bank.values(pool), temperature)?;
    let (support, probs): (Vec<BitString>, Vec<f64>) = pool
        .iter()
        .zip(weights)
        .filter(|(_, w)| *w > 0.0)
        .map(|(&i, w)| (bank.entry(i).x.clone(), w))
        .unzip();
    FiniteDistribution::from_weights(support, probs)
}

/// Empirical distribution of a list of strings.
pub fn empirical_target(data: &[BitString]) -> Result<FiniteDistribution> {
    let mut support: Vec<BitString> = Vec::new();
    let mut counts: Vec<f64> = Vec::new();
    let mut index = std::collections::HashMap::new();
    for x in data {
        let i = *index.entry(x).or_insert_with(|| {
            support.push(x.clone());
            counts.push(0.0);
            support.len() - 1
        });
        counts[i] += 1.0;
    }
    if support.is_empty() {
        return Err(Error::Empty("training data"));
    }
    FiniteDistribution::from_weights(support, counts)
}

/// `KL(target ‖ model diffused by p_flip)`, evaluated exactly on the target
/// support.
pub fn diffused_kl(model: &Mps, p_flip: f64, target: &FiniteDistribution) -> Result<KlDivergence> {
    if !(0.0..=1.0).contains(&p_flip) {
        return Err(Error::invalid(format!("p_flip {p_flip} outside [0, 1]")));
    }
    if p_flip == 0.0 {
        return model_kl_vs_target(model, target);
    }
    model_kl_vs_target(&model.apply_diffusion(p_flip)?, target)
}

/// The model's distribution as an MPS; `None` for model-free operators.
pub fn model_as_mps(model: &FittedModel) -> Option<Mps> {
    match model {
        FittedModel::Mps(m) => Some(m.clone()),
        FittedModel::Chain(c) => Some(c.to_mps()),
        FittedModel::None => None,
    }
}

/// The bystander model trained next to the primary one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceConfig {
    pub model: ModelKind,
    /// Diffusion applied to the reference before computing its KL.
    #[serde(default)]
    pub p_flip: f64,
    #[serde(default)]
    pub tensor_noise: f64,
    /// Replay the primary's generator state instead of using an independent
    /// stream.
    #[serde(default)]
    pub mirror_rng: bool,
}

impl ReferenceConfig {
    /// Same model family and training settings as `primary`, without
    /// mutation or tensor noise.
    pub fn noiseless(primary: &SolverConfig) -> Self {
        ReferenceConfig {
            model: primary.model.clone(),
            p_flip: 0.0,
            tensor_noise: 0.0,
            mirror_rng: false,
        }
    }

    /// Exactly the primary's model, noise and mutation.
    pub fn mirror(primary: &SolverConfig) -> Self {
        ReferenceConfig {
            model: primary.model.clone(),
            p_flip: primary.eda.mutation_rate,
            tensor_noise: primary.eda.tensor_noise,
            mirror_rng: true,
        }
    }
}

/// Observer that trains the reference model on every generation's parents
/// and reports both KL divergences.
pub struct KlObserver {
    reference: ReferenceConfig,
    rng: Rng,
    carried: Option<Mps>,
}

impl KlObserver {
    pub fn new(reference: ReferenceConfig, rng: Rng) -> Result<Self> {
        if !(0.0..=1.0).contains(&reference.p_flip) {
            return Err(Error::invalid("reference p_flip outside [0, 1]"));
        }
        if matches!(reference.model, ModelKind::Crossover { .. }) {
            return Err(Error::invalid("reference needs a generative model"));
        }
        Ok(KlObserver {
            reference,
            rng,
            carried: None,
        })
    }

    fn train(&mut self, parents: &[BitString], rng: &mut Rng) -> Result<Mps> {
        let m = match &self.reference.model {
            ModelKind::BornMachine { train } => {
                let m = train_born_machine(parents, train, self.carried.as_ref(), rng)?;
                if !train.fresh_init {
                    self.carried = Some(m.clone());
                }
                m
            }
            ModelKind::PositiveMps { train } => {
                let init = match self.carried.take() {
                    Some(m) => m,
                    None => Mps::random(parents[0].len(), train.chi_max, Mode::DirectPositive, rng)?,
                };
                let m = train_positive_mps(parents, train, &init)?;
                self.carried = Some(m.clone());
                m
            }
            ModelKind::ChainBayes { smoothing } => fit_chain_bayes(parents, *smoothing)?.to_mps(),
            ModelKind::Crossover { .. } => unreachable!("rejected in KlObserver::new"),
        };
        if self.reference.tensor_noise > 0.0 {
            m.add_tensor_noise(self.reference.tensor_noise, rng)
        } else {
            Ok(m)
        }
    }
}

impl Observer for KlObserver {
    fn observe(&mut self, view: &GenerationView<'_>) -> Result<Option<KlReport>> {
        let Some(primary) = model_as_mps(view.model) else {
            return Ok(None);
        };
        let target = match view.temperature {
            Some(t) => boltzmann_target(view.bank, view.pool, t)?,
            None => empirical_target(view.parents)?,
        };
        let kl_primary = diffused_kl(&primary, view.mutation_rate, &target)?;
        let reference = if self.reference.mirror_rng {
            let mut rng = view.train_rng.clone();
            self.train(view.parents, &mut rng)?
        } else {
            let mut rng = self.rng.clone();
            let m = self.train(view.parents, &mut rng)?;
            self.rng = rng;
            m
        };
        let kl_reference = diffused_kl(&reference, self.reference.p_flip, &target)?;
        Ok(Some(KlReport::new(view.generation, kl_primary, kl_reference)))
    }
}

/// Runs `primary` on `problem` with a reference model trained alongside.
/// The run uses stream [`rng::stream::RUN`] of `seed` and the reference
/// stream [`rng::stream::REFERENCE`], so the run's trajectory is the same as
/// without the reference.
pub fn run_with_reference<P: Problem + ?Sized>(
    problem: &P,
    primary: &SolverConfig,
    reference: &ReferenceConfig,
    seed: u64,
) -> Result<(RunResult, Vec<KlReport>)> {
    let mut run_rng = rng::stream(seed, rng::stream::RUN);
    let mut observer = KlObserver::new(reference.clone(), rng::stream(seed, rng::stream::REFERENCE))?;
    let result = run_eda(problem, primary, &mut run_rng, Some(&mut observer))?;
    let reports = result.records.iter().filter_map(|r| r.kl).collect();
    Ok((result, reports))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn strings(n: usize) -> Vec<BitString> {
        (0..1u64 << n).map(|v| BitString::from_index(v, n)).collect()
    }

    #[test]
    fn boltzmann_target_cases() {
        let mut bank = SolutionBank::new();
        bank.insert("00".parse().unwrap(), 0.0, 0);
        bank.insert("01".parse().unwrap(), 3f64.ln(), 0);
        bank.insert("10".parse().unwrap(), 0.0, 0);
        let t = boltzmann_target(&bank, &[0, 1], 1.0).unwrap();
        assert!((t.probs()[0] - 0.75).abs() < 1e-15 && (t.probs()[1] - 0.25).abs() < 1e-15);
        assert_eq!(boltzmann_target(&bank, &[1], 1.0).unwrap().probs(), &[1.0]);
        assert_eq!(boltzmann_target(&bank, &[0, 2], 0.3).unwrap().probs(), &[0.5, 0.5]);
        assert!(boltzmann_target(&bank, &[], 1.0).is_err());
    }

    #[test]
    fn half_flip_gives_entropy_identity() {
        let m = Mps::random(6, 3, Mode::Amplitude, &mut seeded(1)).unwrap();
        let support = strings(6)[..7].to_vec();
        let target = FiniteDistribution::from_weights(support, (1..=7).map(f64::from).collect()).unwrap();
        let kl = diffused_kl(&m, 0.5, &target).unwrap();
        let expected = 6.0 * std::f64::consts::LN_2 - target.entropy();
        assert!((kl.value - expected).abs() < 1e-12);
        assert_eq!(diffused_kl(&m, 0.0, &target).unwrap(), model_kl_vs_target(&m, &target).unwrap());
    }

    #[test]
    fn empirical_counts() {
        let data: Vec<BitString> = ["01", "10", "01", "01"].iter().map(|s| s.parse().unwrap()).collect();
        let t = empirical_target(&data).unwrap();
        assert_eq!(t.probs(), &[0.75, 0.25]);
    }

    #[test]
    fn report_delta() {
        let a = KlDivergence { value: 0.5, zero_support: 0 };
        let b = KlDivergence { value: 0.2, zero_support: 0 };
        let inf = KlDivergence {
            value: f64::INFINITY,
            zero_support: 2,
        };
        assert!((KlReport::new(1, a, b).delta.unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(KlReport::new(1, inf, b).delta, None);
    }
}
