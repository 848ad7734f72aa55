//! Matrix product states over binary variables.
//!
//! An [`Mps`] is a chain of order-3 tensors `T[i]` of shape `(χ_i, 2, χ_{i+1})`
//! with `χ_0 = χ_N = 1`. Depending on [`Mode`] the contracted value is either an
//! amplitude `ψ(x)` whose square is an unnormalized probability (Born machine),
//! or an unnormalized probability directly.
//!
//! Every contraction carries a running log-scale so the partition function and
//! string probabilities stay finite for long chains.

mod io;
mod split;
mod tensor;

pub use io::{dump, load};
pub use split::{canonicalize_split, split_two_site, SplitDirection, SplitResult};
pub use tensor::{SiteTensor, TwoSiteTensor};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};

/// How the contracted network value maps to a probability.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    /// `p(x) = ψ(x)² / Z` with real amplitudes.
    Amplitude,
    /// `p(x) = T(x) / Z` with every tensor entry nonnegative.
    DirectPositive,
    /// `p(x) = T(x) / Z` where entries may be negative but every contracted
    /// value is nonnegative, e.g. the squared network of a Born machine.
    DirectSigned,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Amplitude => "Amplitude",
            Mode::DirectPositive => "DirectPositive",
            Mode::DirectSigned => "DirectSigned",
        }
    }

    fn is_direct(self) -> bool {
        !matches!(self, Mode::Amplitude)
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Amplitude" => Ok(Mode::Amplitude),
            "DirectPositive" => Ok(Mode::DirectPositive),
            "DirectSigned" => Ok(Mode::DirectSigned),
            other => Err(Error::invalid(format!("unknown mode {other:?}"))),
        }
    }
}

/// A value `mantissa · e^{log_scale}`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Scaled {
    pub mantissa: f64,
    pub log_scale: f64,
}

impl Scaled {
    pub fn ln_abs(self) -> f64 {
        if self.mantissa == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.mantissa.abs().ln() + self.log_scale
        }
    }
}

/// Divides `v` by its largest magnitude and returns the log of that factor
/// (0 for an all-zero vector).
pub(crate) fn renormalize(v: &mut [f64]) -> f64 {
    let m = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if m == 0.0 || !m.is_finite() {
        return 0.0;
    }
    v.iter_mut().for_each(|x| *x /= m);
    m.ln()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mps {
    tensors: Vec<SiteTensor>,
    mode: Mode,
    chi_max: usize,
}

impl Mps {
    /// Validates the bond, boundary and sign invariants.
    pub fn from_tensors(tensors: Vec<SiteTensor>, mode: Mode, chi_max: usize) -> Result<Self> {
        if tensors.is_empty() {
            return Err(Error::invalid("an MPS needs at least one site"));
        }
        if chi_max == 0 {
            return Err(Error::invalid("chi_max must be positive"));
        }
        if tensors[0].left() != 1 || tensors[tensors.len() - 1].right() != 1 {
            return Err(Error::invalid("boundary bond dimensions must be 1"));
        }
        for (i, pair) in tensors.windows(2).enumerate() {
            if pair[0].right() != pair[1].left() {
                return Err(Error::invalid(format!(
                    "bond mismatch between sites {i} and {}: {} vs {}",
                    i + 1,
                    pair[0].right(),
                    pair[1].left()
                )));
            }
        }
        if let Some(t) = tensors.iter().find(|t| t.left() > chi_max || t.right() > chi_max) {
            return Err(Error::invalid(format!(
                "bond dimension {} exceeds chi_max {chi_max}",
                t.left().max(t.right())
            )));
        }
        if mode == Mode::DirectPositive && tensors.iter().any(|t| t.data().iter().any(|&v| v < 0.0)) {
            return Err(Error::invalid("negative entry in DirectPositive MPS"));
        }
        if tensors.iter().any(|t| t.data().iter().any(|v| !v.is_finite())) {
            return Err(Error::invalid("non-finite tensor entry"));
        }
        Ok(Mps {
            tensors,
            mode,
            chi_max,
        })
    }

    /// Random network with bond dimensions `min(chi, 2^i, 2^(N-i))`.
    ///
    /// Amplitude entries are iid uniform on `[-1, 1]`; direct-mode entries are
    /// iid uniform on `(0, 1]`.
    pub fn random<R: Rng + ?Sized>(n_sites: usize, chi: usize, mode: Mode, rng: &mut R) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::invalid("n_sites must be at least 1"));
        }
        if chi == 0 {
            return Err(Error::invalid("bond dimension must be at least 1"));
        }
        let bonds = natural_bonds(n_sites, chi);
        let tensors = (0..n_sites)
            .map(|i| {
                SiteTensor::from_fn(bonds[i], bonds[i + 1], |_, _, _| match mode {
                    Mode::Amplitude => rng.random_range(-1.0..=1.0),
                    // 1 - [0,1) lies in (0,1]
                    _ => 1.0 - rng.random::<f64>(),
                })
            })
            .collect();
        Mps::from_tensors(tensors, mode, chi)
    }

    /// Network with all entries equal to one and every bond of dimension 1.
    pub fn uniform(n_sites: usize, mode: Mode) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::invalid("n_sites must be at least 1"));
        }
        let tensors = (0..n_sites).map(|_| SiteTensor::from_vec(1, 1, vec![1.0, 1.0])).collect();
        Mps::from_tensors(tensors, mode, 1)
    }

    /// Bond-dimension-1 network putting all probability on `x`.
    pub fn product_state(x: &BitString, mode: Mode) -> Result<Self> {
        let tensors = x
            .bits()
            .iter()
            .map(|&b| {
                let mut d = vec![0.0, 0.0];
                d[b as usize] = 1.0;
                SiteTensor::from_vec(1, 1, d)
            })
            .collect();
        Mps::from_tensors(tensors, mode, 1)
    }

    pub fn n_sites(&self) -> usize {
        self.tensors.len()
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn chi_max(&self) -> usize {
        self.chi_max
    }

    pub fn tensors(&self) -> &[SiteTensor] {
        &self.tensors
    }

    pub fn tensor(&self, i: usize) -> &SiteTensor {
        &self.tensors[i]
    }

    /// `χ_0, …, χ_N`.
    pub fn bond_dims(&self) -> Vec<usize> {
        let mut dims: Vec<usize> = self.tensors.iter().map(|t| t.left()).collect();
        dims.push(1);
        dims
    }

    /// Contracted network value at `x`: `ψ(x)` in amplitude mode, the
    /// unnormalized probability otherwise.
    pub(crate) fn contract_string(&self, x: &BitString) -> Scaled {
        let mut v = vec![1.0];
        let mut log_scale = 0.0;
        for (t, &b) in self.tensors.iter().zip(x.bits()) {
            v = t.left_apply(&v, b as usize);
            log_scale += renormalize(&mut v);
        }
        Scaled {
            mantissa: v[0],
            log_scale,
        }
    }

    /// Amplitude `ψ(x)` (or the unnormalized direct-mode value), without
    /// scale tracking.
    pub fn value(&self, x: &BitString) -> Result<f64> {
        x.check_len(self.n_sites())?;
        let s = self.contract_string(x);
        Ok(s.mantissa * s.log_scale.exp())
    }

    /// `ln Z`, computed by sequential transfer-matrix contraction.
    pub fn log_partition_function(&self) -> Result<f64> {
        let z = self.partition_scaled();
        if !(z.mantissa > 0.0) || !z.mantissa.is_finite() {
            return Err(Error::Unnormalizable(z.mantissa * z.log_scale.exp()));
        }
        Ok(z.ln_abs())
    }

    /// `Z = Σ_x ψ(x)²` (amplitude) or `Σ_x T(x)` (direct modes).
    pub fn partition_function(&self) -> Result<f64> {
        self.log_partition_function().map(f64::exp)
    }

    fn partition_scaled(&self) -> Scaled {
        if self.mode.is_direct() {
            let mut v = vec![1.0];
            let mut log_scale = 0.0;
            for t in &self.tensors {
                let mut w = t.left_apply(&v, 0);
                for (a, b) in w.iter_mut().zip(t.left_apply(&v, 1)) {
                    *a += b;
                }
                v = w;
                log_scale += renormalize(&mut v);
            }
            Scaled {
                mantissa: v[0],
                log_scale,
            }
        } else {
            let mut env = vec![1.0];
            let mut log_scale = 0.0;
            for t in &self.tensors {
                env = left_env_step(&env, t);
                log_scale += renormalize(&mut env);
            }
            Scaled {
                mantissa: env[0],
                log_scale,
            }
        }
    }

    /// Normalized probability of `x`.
    pub fn probability(&self, x: &BitString) -> Result<f64> {
        Ok(self.log_probability(x)?.exp())
    }

    /// `ln p(x)`; `-∞` when the model assigns zero mass.
    pub fn log_probability(&self, x: &BitString) -> Result<f64> {
        x.check_len(self.n_sites())?;
        let log_z = self.log_partition_function()?;
        Ok(self.log_probability_given(x, log_z))
    }

    pub(crate) fn log_probability_given(&self, x: &BitString, log_z: f64) -> f64 {
        let v = self.contract_string(x);
        if self.mode.is_direct() {
            if v.mantissa <= 0.0 {
                return f64::NEG_INFINITY;
            }
            v.ln_abs() - log_z
        } else {
            2.0 * v.ln_abs() - log_z
        }
    }

    /// Precomputes right environments for repeated exact sampling.
    pub fn sampler(&self) -> Result<Sampler<'_>> {
        self.log_partition_function()?;
        Ok(Sampler::new(self))
    }

    /// One exact draw via sequential conditional marginals.
    pub fn perfect_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<BitString> {
        Ok(self.sampler()?.sample(rng))
    }

    /// Dense probability network with entries `A[l,s,r]·A[l',s,r']` on the
    /// doubled bond `(l,l')`. Direct-mode networks are returned unchanged.
    pub fn to_probability_network(&self) -> Mps {
        if self.mode.is_direct() {
            return self.clone();
        }
        let tensors = self
            .tensors
            .iter()
            .map(|t| {
                let (cl, cr) = (t.left(), t.right());
                SiteTensor::from_fn(cl * cl, cr * cr, |ll, s, rr| {
                    let (l, l2) = (ll / cl, ll % cl);
                    let (r, r2) = (rr / cr, rr % cr);
                    t.get(l, s, r) * t.get(l2, s, r2)
                })
            })
            .collect();
        Mps {
            tensors,
            mode: Mode::DirectSigned,
            chi_max: self.chi_max * self.chi_max,
        }
    }

    /// Network for the distribution of `x` after drawing from `self` and
    /// flipping every bit independently with probability `p_flip`.
    ///
    /// Each physical leg is contracted with the column-stochastic matrix
    /// `D = [[1-p, p], [p, 1-p]]`. Amplitude-mode input is first squared into
    /// its probability network, so the result has bond dimension `χ²`.
    pub fn apply_diffusion(&self, p_flip: f64) -> Result<Mps> {
        if !(0.0..=1.0).contains(&p_flip) {
            return Err(Error::invalid(format!("p_flip {p_flip} outside [0, 1]")));
        }
        let mut out = self.to_probability_network();
        let keep = 1.0 - p_flip;
        for t in out.tensors.iter_mut() {
            for l in 0..t.left() {
                for r in 0..t.right() {
                    let (a0, a1) = (t.get(l, 0, r), t.get(l, 1, r));
                    t.set(l, 0, r, keep * a0 + p_flip * a1);
                    t.set(l, 1, r, p_flip * a0 + keep * a1);
                }
            }
        }
        Ok(out)
    }

    /// Adds iid `N(0, alpha_noise)` to every entry. Direct-positive networks
    /// are clamped at zero afterwards.
    pub fn add_tensor_noise<R: Rng + ?Sized>(&self, alpha_noise: f64, rng: &mut R) -> Result<Mps> {
        if !(alpha_noise >= 0.0) || !alpha_noise.is_finite() {
            return Err(Error::invalid(format!("alpha_noise {alpha_noise} must be finite and >= 0")));
        }
        let mut out = self.clone();
        if alpha_noise == 0.0 {
            return Ok(out);
        }
        let normal = Normal::new(0.0, alpha_noise).map_err(|e| Error::invalid(e.to_string()))?;
        let clamp = self.mode == Mode::DirectPositive;
        for t in out.tensors.iter_mut() {
            for v in t.data_mut() {
                *v += normal.sample(rng);
                if clamp && *v < 0.0 {
                    *v = 0.0;
                }
            }
        }
        Ok(out)
    }

    /// Brings the chain into right-canonical form (every site but the first
    /// right-orthonormal) and scales it so that `Z = 1`.
    ///
    /// Only meaningful for amplitude networks; bond dimensions may shrink to
    /// the exact rank.
    pub fn right_canonicalize(&mut self) -> Result<()> {
        let n = self.n_sites();
        for i in (1..n).rev() {
            let t = &self.tensors[i];
            let (cl, cr) = (t.left(), t.right());
            // A_i viewed as a χ_l × 2χ_r matrix: A = U S Vᵀ, keep Vᵀ on site i.
            let svd = split::svd(cl, 2 * cr, t.data());
            let k = svd.sigma.len();
            let right = SiteTensor::from_vec(k, cr, svd.vt.clone());
            // U S folded into the left neighbour.
            let mut us = vec![0.0; cl * k];
            for a in 0..cl {
                for j in 0..k {
                    us[a * k + j] = svd.u[a * k + j] * svd.sigma[j];
                }
            }
            let prev = &self.tensors[i - 1];
            let left = SiteTensor::from_fn(prev.left(), k, |l, s, j| {
                prev.row(l, s).iter().enumerate().map(|(a, p)| p * us[a * k + j]).sum()
            });
            self.tensors[i - 1] = left;
            self.tensors[i] = right;
        }
        let z = self.partition_function()?;
        let norm = if self.mode.is_direct() { z } else { z.sqrt() };
        self.tensors[0].scale(1.0 / norm);
        Ok(())
    }
}

/// Bond dimensions `χ_b = min(chi, 2^b, 2^(N-b))` for `b = 0..=N`.
pub(crate) fn natural_bonds(n: usize, chi: usize) -> Vec<usize> {
    (0..=n)
        .map(|b| {
            let lim = |k: usize| if k >= 40 { usize::MAX } else { 1usize << k };
            chi.min(lim(b)).min(lim(n - b))
        })
        .collect()
}

/// `E' = Σ_s A_sᵀ E A_s` for a symmetric `χ_l × χ_l` environment `E`.
pub(crate) fn left_env_step(env: &[f64], t: &SiteTensor) -> Vec<f64> {
    let (cl, cr) = (t.left(), t.right());
    let mut out = vec![0.0; cr * cr];
    // tmp = E A_s  (cl × cr)
    let mut tmp = vec![0.0; cl * cr];
    for s in 0..2 {
        tmp.iter_mut().for_each(|v| *v = 0.0);
        for l in 0..cl {
            for l2 in 0..cl {
                let e = env[l * cl + l2];
                if e == 0.0 {
                    continue;
                }
                for (o, a) in tmp[l * cr..(l + 1) * cr].iter_mut().zip(t.row(l2, s)) {
                    *o += e * a;
                }
            }
        }
        for l in 0..cl {
            let arow = t.row(l, s);
            for r in 0..cr {
                let a = arow[r];
                if a == 0.0 {
                    continue;
                }
                for (o, b) in out[r * cr..(r + 1) * cr].iter_mut().zip(&tmp[l * cr..(l + 1) * cr]) {
                    *o += a * b;
                }
            }
        }
    }
    out
}

/// `E' = Σ_s A_s E A_sᵀ` for a symmetric `χ_r × χ_r` environment `E`.
pub(crate) fn right_env_step(env: &[f64], t: &SiteTensor) -> Vec<f64> {
    let (cl, cr) = (t.left(), t.right());
    let mut out = vec![0.0; cl * cl];
    let mut tmp = vec![0.0; cl * cr];
    for s in 0..2 {
        // tmp = A_s E  (cl × cr)
        for l in 0..cl {
            let arow = t.row(l, s);
            for r2 in 0..cr {
                tmp[l * cr + r2] = (0..cr).map(|r| arow[r] * env[r * cr + r2]).sum();
            }
        }
        for l in 0..cl {
            for l2 in 0..cl {
                out[l * cl + l2] += tmp[l * cr..(l + 1) * cr]
                    .iter()
                    .zip(t.row(l2, s))
                    .map(|(a, b)| a * b)
                    .sum::<f64>();
            }
        }
    }
    out
}

/// Right environments for exact ancestral sampling.
pub struct Sampler<'a> {
    mps: &'a Mps,
    /// `right[b]` summarizes sites `b..N`; matrices in amplitude mode,
    /// vectors in direct modes.
    right: Vec<Vec<f64>>,
}

impl<'a> Sampler<'a> {
    fn new(mps: &'a Mps) -> Self {
        let n = mps.n_sites();
        let mut right = vec![Vec::new(); n + 1];
        right[n] = vec![1.0];
        for b in (0..n).rev() {
            let t = &mps.tensors[b];
            let mut env = if mps.mode.is_direct() {
                let mut w = t.right_apply(0, &right[b + 1]);
                for (a, c) in w.iter_mut().zip(t.right_apply(1, &right[b + 1])) {
                    *a += c;
                }
                w
            } else {
                right_env_step(&right[b + 1], t)
            };
            renormalize(&mut env);
            right[b] = env;
        }
        Sampler { mps, right }
    }

    fn weight(&self, w: &[f64], b: usize) -> f64 {
        let env = &self.right[b];
        let val = if self.mps.mode.is_direct() {
            w.iter().zip(env).map(|(a, c)| a * c).sum::<f64>()
        } else {
            let d = w.len();
            (0..d)
                .map(|r| w[r] * (0..d).map(|r2| env[r * d + r2] * w[r2]).sum::<f64>())
                .sum::<f64>()
        };
        val.max(0.0)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> BitString {
        let n = self.mps.n_sites();
        let mut bits = Vec::with_capacity(n);
        let mut v = vec![1.0];
        for i in 0..n {
            let t = &self.mps.tensors[i];
            let w0 = t.left_apply(&v, 0);
            let w1 = t.left_apply(&v, 1);
            let p0 = self.weight(&w0, i + 1);
            let p1 = self.weight(&w1, i + 1);
            let total = p0 + p1;
            let bit = if total > 0.0 {
                rng.random::<f64>() * total >= p0
            } else {
                // Unreachable prefix; only happens through rounding.
                rng.random::<bool>()
            };
            v = if bit { w1 } else { w0 };
            renormalize(&mut v);
            bits.push(bit as u8);
        }
        BitString::from_bits(bits)
    }

    pub fn sample_many<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<BitString> {
        (0..count).map(|_| self.sample(rng)).collect()
    }
}
