//! MPS Born machine trained by two-site sweeps on the negative log-likelihood.
//!
//! Training keeps the chain in mixed-canonical form: every site left of the
//! active pair is left-orthonormal and every site right of it is
//! right-orthonormal, so the partition function reduces to the squared norm
//! of the merged pair tensor. Each pair update merges two neighbours, takes
//! gradient steps on the merged tensor, renormalizes to `Z = 1` and splits
//! back by truncated SVD.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::mps::{split_two_site, renormalize, Mode, Mps, SiteTensor, SplitDirection, TwoSiteTensor};
use crate::rng::Rng;

/// Amplitudes below this magnitude are treated as zero when differentiating
/// `ln ψ²`.
const PSI_FLOOR: f64 = 1e-150;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// One sweep is a pass down the chain and back.
    pub sweeps: usize,
    pub chi_max: usize,
    /// Singular values with `σ/σ_max` below this ratio are discarded.
    pub svd_cutoff: f64,
    /// Start every training call from a new random network.
    pub fresh_init: bool,
    pub grad_steps_per_pair: usize,
}

impl TrainConfig {
    /// Settings used for the portfolio experiments: learning rate 0.1, one
    /// sweep, one gradient step per pair, cutoff 1e-6, bond dimension ≤ 5,
    /// fresh initialization every generation.
    pub fn portfolio() -> Self {
        TrainConfig {
            learning_rate: 0.1,
            sweeps: 1,
            chi_max: 5,
            svd_cutoff: 1e-6,
            fresh_init: true,
            grad_steps_per_pair: 1,
        }
    }

    /// Benchmark-solver settings: bond dimension 2, learning rate 0.15, a
    /// single training step.
    pub fn solver() -> Self {
        TrainConfig {
            learning_rate: 0.15,
            sweeps: 1,
            chi_max: 2,
            svd_cutoff: 1e-6,
            fresh_init: true,
            grad_steps_per_pair: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::invalid("learning_rate must be finite and >= 0"));
        }
        if self.sweeps == 0 {
            return Err(Error::invalid("sweeps must be at least 1"));
        }
        if self.chi_max == 0 {
            return Err(Error::invalid("chi_max must be at least 1"));
        }
        if !(self.svd_cutoff >= 0.0) {
            return Err(Error::invalid("svd_cutoff must be >= 0"));
        }
        if self.grad_steps_per_pair == 0 {
            return Err(Error::invalid("grad_steps_per_pair must be at least 1"));
        }
        Ok(())
    }
}

/// One training string seen from a merged pair: its left and right boundary
/// vectors, its two physical bits and its weight in the empirical
/// distribution.
#[derive(Clone, Copy, Debug)]
pub struct PairSample<'a> {
    pub left: &'a [f64],
    pub right: &'a [f64],
    pub s: usize,
    pub t: usize,
    pub weight: f64,
}

/// Local negative log-likelihood and its gradient with respect to the merged
/// tensor `theta`:
///
/// `L(θ) = ln Z(θ) - Σ_j w_j ln ψ_j(θ)²`, with `ψ_j = l_jᵀ θ[:, s_j, t_j, :] r_j`
/// and `Z(θ) = Σ_{s,t} tr(Eₗ θ_st E_r θ_stᵀ)`.
///
/// `left_env` and `right_env` are the row-major norm environments of the
/// pair (identity in mixed-canonical form). With exact boundary vectors and
/// weights summing to one, `L` is the training-set NLL of the whole chain.
pub fn nll_gradient(
    theta: &TwoSiteTensor,
    left_env: &[f64],
    right_env: &[f64],
    batch: &[PairSample<'_>],
) -> (f64, TwoSiteTensor) {
    let (cl, cr) = (theta.left(), theta.right());
    // m = Eₗ θ_st E_r for every (s, t); ∂Z/∂θ = 2m.
    let mut m = TwoSiteTensor::zeros(cl, cr);
    for s in 0..2 {
        for t in 0..2 {
            let mut lt = vec![0.0; cl * cr];
            for l in 0..cl {
                for l2 in 0..cl {
                    let e = left_env[l * cl + l2];
                    if e == 0.0 {
                        continue;
                    }
                    for r in 0..cr {
                        lt[l * cr + r] += e * theta.get(l2, s, t, r);
                    }
                }
            }
            for l in 0..cl {
                for r in 0..cr {
                    let v: f64 = (0..cr).map(|r2| lt[l * cr + r2] * right_env[r2 * cr + r]).sum();
                    m.set(l, s, t, r, v);
                }
            }
        }
    }
    let z: f64 = theta.data().iter().zip(m.data()).map(|(a, b)| a * b).sum();

    let mut grad = TwoSiteTensor::zeros(cl, cr);
    for (g, mv) in grad.data_mut().iter_mut().zip(m.data()) {
        *g = 2.0 * mv / z;
    }
    let mut nll = z.ln();
    for sample in batch {
        let psi = amplitude(theta, sample);
        if psi.abs() < PSI_FLOOR {
            nll = f64::INFINITY;
            continue;
        }
        nll -= sample.weight * (psi * psi).ln();
        let coef = 2.0 * sample.weight / psi;
        for (l, &lv) in sample.left.iter().enumerate() {
            if lv == 0.0 {
                continue;
            }
            for (r, &rv) in sample.right.iter().enumerate() {
                let i = grad_index(&grad, l, sample.s, sample.t, r);
                grad.data_mut()[i] -= coef * lv * rv;
            }
        }
    }
    (nll, grad)
}

#[inline]
fn grad_index(g: &TwoSiteTensor, l: usize, s: usize, t: usize, r: usize) -> usize {
    ((l * 2 + s) * 2 + t) * g.right() + r
}

fn amplitude(theta: &TwoSiteTensor, sample: &PairSample<'_>) -> f64 {
    let mut psi = 0.0;
    for (l, &lv) in sample.left.iter().enumerate() {
        if lv == 0.0 {
            continue;
        }
        let start = grad_index(theta, l, sample.s, sample.t, 0);
        let row = &theta.data()[start..start + theta.right()];
        psi += lv * row.iter().zip(sample.right).map(|(a, b)| a * b).sum::<f64>();
    }
    psi
}

fn identity(d: usize) -> Vec<f64> {
    let mut m = vec![0.0; d * d];
    (0..d).for_each(|i| m[i * d + i] = 1.0);
    m
}

/// Unique strings with their empirical weights, in first-seen order.
pub(crate) fn empirical(data: &[BitString]) -> Vec<(&BitString, f64)> {
    let mut index: HashMap<&BitString, usize> = HashMap::new();
    let mut out: Vec<(&BitString, f64)> = Vec::new();
    let w = 1.0 / data.len() as f64;
    for x in data {
        match index.get(x) {
            Some(&i) => out[i].1 += w,
            None => {
                index.insert(x, out.len());
                out.push((x, w));
            }
        }
    }
    out
}

pub(crate) fn check_data(data: &[BitString], n: Option<usize>) -> Result<usize> {
    let first = data.first().ok_or(Error::Empty("training data"))?;
    let n = n.unwrap_or(first.len());
    for x in data {
        x.check_len(n)?;
    }
    if n == 0 {
        return Err(Error::invalid("training strings must have at least one bit"));
    }
    Ok(n)
}

struct Sweeper<'a> {
    tensors: Vec<SiteTensor>,
    data: Vec<(&'a BitString, f64)>,
    /// `left[b][j]`: contraction of sites `0..b` for string `j`.
    left: Vec<Vec<Vec<f64>>>,
    /// `right[b][j]`: contraction of sites `b..N` for string `j`.
    right: Vec<Vec<Vec<f64>>>,
    cfg: &'a TrainConfig,
}

impl<'a> Sweeper<'a> {
    fn new(tensors: Vec<SiteTensor>, data: Vec<(&'a BitString, f64)>, cfg: &'a TrainConfig) -> Self {
        let n = tensors.len();
        let u = data.len();
        let mut left = vec![vec![Vec::new(); u]; n + 1];
        let mut right = vec![vec![Vec::new(); u]; n + 1];
        left[0] = vec![vec![1.0]; u];
        right[n] = vec![vec![1.0]; u];
        let mut s = Sweeper {
            tensors,
            data,
            left,
            right,
            cfg,
        };
        for b in (2..n).rev() {
            s.refresh_right(b);
        }
        s
    }

    /// Recomputes `right[b]` from site `b` and `right[b + 1]`.
    fn refresh_right(&mut self, b: usize) {
        let t = &self.tensors[b];
        for (j, (x, _)) in self.data.iter().enumerate() {
            let mut v = t.right_apply(x.get(b) as usize, &self.right[b + 1][j]);
            renormalize(&mut v);
            self.right[b][j] = v;
        }
    }

    /// Recomputes `left[b + 1]` from `left[b]` and site `b`.
    fn refresh_left(&mut self, b: usize) {
        let t = &self.tensors[b];
        for (j, (x, _)) in self.data.iter().enumerate() {
            let mut v = t.left_apply(&self.left[b][j], x.get(b) as usize);
            renormalize(&mut v);
            self.left[b + 1][j] = v;
        }
    }

    fn update_pair(&mut self, i: usize, direction: SplitDirection) -> Result<()> {
        let mut theta = TwoSiteTensor::merge(&self.tensors[i], &self.tensors[i + 1]);
        let (cl, cr) = (theta.left(), theta.right());
        let (el, er) = (identity(cl), identity(cr));
        for _ in 0..self.cfg.grad_steps_per_pair {
            let batch: Vec<PairSample<'_>> = self
                .data
                .iter()
                .enumerate()
                .map(|(j, (x, w))| PairSample {
                    left: &self.left[i][j],
                    right: &self.right[i + 2][j],
                    s: x.get(i) as usize,
                    t: x.get(i + 1) as usize,
                    weight: *w,
                })
                .collect();
            let (_, grad) = nll_gradient(&theta, &el, &er, &batch);
            let lr = self.cfg.learning_rate;
            for (a, g) in theta.data_mut().iter_mut().zip(grad.data()) {
                *a -= lr * g;
            }
            let norm = theta.frobenius_norm();
            if !(norm > 0.0) || !norm.is_finite() {
                return Err(Error::Unnormalizable(norm * norm));
            }
            theta.data_mut().iter_mut().for_each(|a| *a /= norm);
        }

        let mut split = split_two_site(&theta, self.cfg.chi_max, self.cfg.svd_cutoff, direction)?;
        let kept = split.singular_values.iter().map(|s| s * s).sum::<f64>().sqrt();
        match direction {
            SplitDirection::Right => split.right.scale(1.0 / kept),
            SplitDirection::Left => split.left.scale(1.0 / kept),
        }
        self.tensors[i] = split.left;
        self.tensors[i + 1] = split.right;
        match direction {
            SplitDirection::Right => self.refresh_left(i),
            SplitDirection::Left => self.refresh_right(i + 1),
        }
        Ok(())
    }

    fn sweep(&mut self) -> Result<()> {
        let n = self.tensors.len();
        for i in 0..n - 1 {
            self.update_pair(i, SplitDirection::Right)?;
        }
        for i in (0..n - 1).rev() {
            self.update_pair(i, SplitDirection::Left)?;
        }
        Ok(())
    }
}

/// Single-site chain: `p(s) = a_s² / (a_0² + a_1²)`.
fn train_single_site(tensor: &mut SiteTensor, data: &[(&BitString, f64)], cfg: &TrainConfig) {
    let steps = cfg.sweeps * cfg.grad_steps_per_pair;
    for _ in 0..steps {
        let a = [tensor.get(0, 0, 0), tensor.get(0, 1, 0)];
        let z = a[0] * a[0] + a[1] * a[1];
        let mut grad = [2.0 * a[0] / z, 2.0 * a[1] / z];
        for (x, w) in data {
            let s = x.get(0) as usize;
            if a[s].abs() >= PSI_FLOOR {
                grad[s] -= 2.0 * w / a[s];
            }
        }
        let mut next = [a[0] - cfg.learning_rate * grad[0], a[1] - cfg.learning_rate * grad[1]];
        let norm = (next[0] * next[0] + next[1] * next[1]).sqrt();
        if norm > 0.0 && norm.is_finite() {
            next.iter_mut().for_each(|v| *v /= norm);
            tensor.set(0, 0, 0, next[0]);
            tensor.set(0, 1, 0, next[1]);
        }
    }
}

/// Trains an amplitude-mode MPS on `data` by `cfg.sweeps` down-and-back
/// two-site sweeps.
///
/// With `cfg.fresh_init` (or no `init`) training starts from
/// [`Mps::random`] drawn from `rng`; otherwise from `init`. The returned
/// network is normalized (`Z = 1`).
pub fn train_born_machine(data: &[BitString], cfg: &TrainConfig, init: Option<&Mps>, rng: &mut Rng) -> Result<Mps> {
    cfg.validate()?;
    let n = check_data(data, init.map(|m| m.n_sites()))?;
    let mut start = match init {
        Some(m) if !cfg.fresh_init => {
            if m.mode() != Mode::Amplitude {
                return Err(Error::WrongMode {
                    expected: Mode::Amplitude.name(),
                    actual: m.mode().name(),
                });
            }
            m.clone()
        }
        _ => Mps::random(n, cfg.chi_max, Mode::Amplitude, rng)?,
    };
    start.right_canonicalize()?;
    let chi_max = start.chi_max().max(cfg.chi_max);
    let weights = empirical(data);

    if n == 1 {
        let mut tensors = start.tensors().to_vec();
        train_single_site(&mut tensors[0], &weights, cfg);
        return Mps::from_tensors(tensors, Mode::Amplitude, chi_max);
    }

    let mut sweeper = Sweeper::new(start.tensors().to_vec(), weights, cfg);
    for _ in 0..cfg.sweeps {
        sweeper.sweep()?;
    }
    Mps::from_tensors(sweeper.tensors, Mode::Amplitude, chi_max)
}

/// Mean negative log-likelihood of `data` under `model`.
pub fn nll(model: &Mps, data: &[BitString]) -> Result<f64> {
    let log_z = model.log_partition_function()?;
    let mut total = 0.0;
    for x in data {
        x.check_len(model.n_sites())?;
        total -= model.log_probability_given(x, log_z);
    }
    Ok(total / data.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn config_validation() {
        assert!(TrainConfig::portfolio().validate().is_ok());
        assert!(TrainConfig::solver().validate().is_ok());
        let mut c = TrainConfig::solver();
        c.sweeps = 0;
        assert!(c.validate().is_err());
        let mut c = TrainConfig::solver();
        c.learning_rate = f64::NAN;
        assert!(c.validate().is_err());
        let mut c = TrainConfig::solver();
        c.svd_cutoff = -1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn rejects_bad_data() {
        let cfg = TrainConfig::solver();
        assert!(matches!(
            train_born_machine(&[], &cfg, None, &mut seeded(0)),
            Err(Error::Empty(_))
        ));
        let data = vec![BitString::zeros(3), BitString::zeros(4)];
        assert!(matches!(
            train_born_machine(&data, &cfg, None, &mut seeded(0)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn empirical_weights_merge_duplicates() {
        let a: BitString = "01".parse().unwrap();
        let b: BitString = "11".parse().unwrap();
        let data = vec![a.clone(), b.clone(), a.clone(), a.clone()];
        let e = empirical(&data);
        assert_eq!(e.len(), 2);
        assert_eq!(e[0].0, &a);
        assert!((e[0].1 - 0.75).abs() < 1e-15);
        assert!((e[1].1 - 0.25).abs() < 1e-15);
    }

    #[test]
    fn concentrates_on_repeated_string() {
        let target: BitString = "1011001110".parse().unwrap();
        let data = vec![target.clone(); 200];
        let cfg = TrainConfig {
            learning_rate: 0.1,
            sweeps: 5,
            chi_max: 2,
            svd_cutoff: 1e-6,
            fresh_init: true,
            grad_steps_per_pair: 1,
        };
        let m = train_born_machine(&data, &cfg, None, &mut seeded(3)).unwrap();
        assert!(m.probability(&target).unwrap() > 0.9);
    }

    #[test]
    fn single_site_training() {
        let data = vec![BitString::ones(1); 10];
        let cfg = TrainConfig {
            sweeps: 20,
            ..TrainConfig::solver()
        };
        let m = train_born_machine(&data, &cfg, None, &mut seeded(1)).unwrap();
        assert!(m.probability(&BitString::ones(1)).unwrap() > 0.9);
    }

    #[test]
    fn small_learning_rate_decreases_nll() {
        let mut rng = seeded(8);
        let data: Vec<BitString> = (0..50).map(|_| BitString::random(8, &mut rng)).collect();
        let init = Mps::random(8, 3, Mode::Amplitude, &mut rng).unwrap();
        let cfg = TrainConfig {
            learning_rate: 1e-3,
            sweeps: 1,
            chi_max: 3,
            svd_cutoff: 0.0,
            fresh_init: false,
            grad_steps_per_pair: 1,
        };
        let before = nll(&init, &data).unwrap();
        let after = nll(&train_born_machine(&data, &cfg, Some(&init), &mut rng).unwrap(), &data).unwrap();
        assert!(after <= before, "{after} > {before}");
    }

    #[test]
    fn result_respects_bond_cap_and_normalization() {
        let mut rng = seeded(4);
        let data: Vec<BitString> = (0..100).map(|_| BitString::random(12, &mut rng)).collect();
        let cfg = TrainConfig::portfolio();
        let m = train_born_machine(&data, &cfg, None, &mut rng).unwrap();
        assert!(m.bond_dims().iter().all(|&b| b <= 5));
        assert!((m.partition_function().unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn wrong_init_mode_rejected() {
        let init = Mps::uniform(3, Mode::DirectPositive).unwrap();
        let cfg = TrainConfig {
            fresh_init: false,
            ..TrainConfig::solver()
        };
        let data = vec![BitString::zeros(3)];
        assert!(matches!(
            train_born_machine(&data, &cfg, Some(&init), &mut seeded(0)),
            Err(Error::WrongMode { .. })
        ));
    }
}
