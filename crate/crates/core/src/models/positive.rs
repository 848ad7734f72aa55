//! Incremental log-likelihood ascent for nonnegative MPS models.
//!
//! Neighbouring tensors are updated in tandem (both gradients taken at the
//! same point) and projected back onto the nonnegative orthant. A diagonal
//! gauge keeps the sites left of the active pair column-stochastic and the
//! sites right of it row-stochastic, which keeps step sizes comparable
//! across sites. An SVD split is never used here since it would destroy
//! positivity, so bond dimensions stay fixed.

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::mps::{Mode, Mps, SiteTensor};

use super::born::{check_data, empirical};
use super::TrainConfig;

const MAX_HALVINGS: usize = 40;

/// Row vector `1ᵀ` summed through site `t`: `v (A_0 + A_1)`.
fn summed_left(t: &SiteTensor, v: &[f64]) -> Vec<f64> {
    let mut w = t.left_apply(v, 0);
    for (a, b) in w.iter_mut().zip(t.left_apply(v, 1)) {
        *a += b;
    }
    w
}

fn summed_right(t: &SiteTensor, v: &[f64]) -> Vec<f64> {
    let mut w = t.right_apply(0, v);
    for (a, b) in w.iter_mut().zip(t.right_apply(1, v)) {
        *a += b;
    }
    w
}

/// Rescales bond `b + 1` so that site `b` becomes column-stochastic.
fn push_gauge_right(tensors: &mut [SiteTensor], b: usize) {
    let ones = vec![1.0; tensors[b].left()];
    let c = summed_left(&tensors[b], &ones);
    for (r, &cr) in c.iter().enumerate() {
        if cr > 0.0 && cr.is_finite() {
            for l in 0..tensors[b].left() {
                for s in 0..2 {
                    let v = tensors[b].get(l, s, r);
                    tensors[b].set(l, s, r, v / cr);
                }
            }
            let next = &mut tensors[b + 1];
            for s in 0..2 {
                for r2 in 0..next.right() {
                    let v = next.get(r, s, r2);
                    next.set(r, s, r2, v * cr);
                }
            }
        }
    }
}

/// Rescales bond `b` so that site `b` becomes row-stochastic.
fn push_gauge_left(tensors: &mut [SiteTensor], b: usize) {
    let ones = vec![1.0; tensors[b].right()];
    let c = summed_right(&tensors[b], &ones);
    for (l, &cl) in c.iter().enumerate() {
        if cl > 0.0 && cl.is_finite() {
            for s in 0..2 {
                for r in 0..tensors[b].right() {
                    let v = tensors[b].get(l, s, r);
                    tensors[b].set(l, s, r, v / cl);
                }
            }
            let prev = &mut tensors[b - 1];
            for l0 in 0..prev.left() {
                for s in 0..2 {
                    let v = prev.get(l0, s, l);
                    prev.set(l0, s, l, v * cl);
                }
            }
        }
    }
}

struct PositiveSweeper<'a> {
    tensors: Vec<SiteTensor>,
    data: Vec<(&'a BitString, f64)>,
    left: Vec<Vec<Vec<f64>>>,
    right: Vec<Vec<Vec<f64>>>,
    /// Summed (normalizer) boundary vectors.
    zleft: Vec<Vec<f64>>,
    zright: Vec<Vec<f64>>,
    lr: f64,
}

impl<'a> PositiveSweeper<'a> {
    fn new(tensors: Vec<SiteTensor>, data: Vec<(&'a BitString, f64)>, lr: f64) -> Self {
        let n = tensors.len();
        let u = data.len();
        let mut s = PositiveSweeper {
            tensors,
            data,
            left: vec![vec![Vec::new(); u]; n + 1],
            right: vec![vec![Vec::new(); u]; n + 1],
            zleft: vec![Vec::new(); n + 1],
            zright: vec![Vec::new(); n + 1],
            lr,
        };
        s.left[0] = vec![vec![1.0]; u];
        s.right[n] = vec![vec![1.0]; u];
        s.zleft[0] = vec![1.0];
        s.zright[n] = vec![1.0];
        for b in (2..n).rev() {
            s.refresh_right(b);
        }
        s
    }

    fn refresh_right(&mut self, b: usize) {
        let t = &self.tensors[b];
        for (j, (x, _)) in self.data.iter().enumerate() {
            self.right[b][j] = t.right_apply(x.get(b) as usize, &self.right[b + 1][j]);
        }
        self.zright[b] = summed_right(t, &self.zright[b + 1]);
    }

    fn refresh_left(&mut self, b: usize) {
        let t = &self.tensors[b];
        for (j, (x, _)) in self.data.iter().enumerate() {
            self.left[b + 1][j] = t.left_apply(&self.left[b][j], x.get(b) as usize);
        }
        self.zleft[b + 1] = summed_left(t, &self.zleft[b]);
    }

    /// Gradient of `Σ_j w_j ln p(x_j)` with respect to sites `i` and `i + 1`.
    fn gradients(&self, i: usize) -> (SiteTensor, SiteTensor) {
        let (a, b) = (&self.tensors[i], &self.tensors[i + 1]);
        let mut ga = SiteTensor::zeros(a.left(), a.right());
        let mut gb = SiteTensor::zeros(b.left(), b.right());

        // Normalizer part: -∂ ln Z.
        let zl = &self.zleft[i];
        let zr = &self.zright[i + 2];
        let zr_mid = summed_right(b, zr);
        let zl_mid = summed_left(a, zl);
        let z: f64 = zl_mid.iter().zip(&zr_mid).map(|(p, q)| p * q).sum();
        for s in 0..2 {
            for l in 0..a.left() {
                for m in 0..a.right() {
                    ga.set(l, s, m, -zl[l] * zr_mid[m] / z);
                }
            }
            for m in 0..b.left() {
                for r in 0..b.right() {
                    gb.set(m, s, r, -zl_mid[m] * zr[r] / z);
                }
            }
        }

        // Data part: Σ w ∂ ln P(x).
        for (j, (x, w)) in self.data.iter().enumerate() {
            let (s, t) = (x.get(i) as usize, x.get(i + 1) as usize);
            let lvec = &self.left[i][j];
            let rvec = &self.right[i + 2][j];
            let br = b.right_apply(t, rvec);
            let la = a.left_apply(lvec, s);
            let p: f64 = la.iter().zip(&br).map(|(p, q)| p * q).sum();
            if !(p > 0.0) {
                continue;
            }
            let coef = w / p;
            for (l, &lv) in lvec.iter().enumerate() {
                for (m, &bv) in br.iter().enumerate() {
                    let g = ga.get(l, s, m);
                    ga.set(l, s, m, g + coef * lv * bv);
                }
            }
            for (m, &av) in la.iter().enumerate() {
                for (r, &rv) in rvec.iter().enumerate() {
                    let g = gb.get(m, t, r);
                    gb.set(m, t, r, g + coef * av * rv);
                }
            }
        }
        (ga, gb)
    }

    fn update_pair(&mut self, i: usize, moving_right: bool) {
        let (ga, gb) = self.gradients(i);
        // Halve the step until the projected pair still has positive mass.
        let mut lr = self.lr;
        for _ in 0..MAX_HALVINGS {
            let step = |t: &SiteTensor, g: &SiteTensor| {
                let mut out = t.clone();
                for (v, d) in out.data_mut().iter_mut().zip(g.data()) {
                    *v = (*v + lr * d).max(0.0);
                }
                out
            };
            let a = step(&self.tensors[i], &ga);
            let b = step(&self.tensors[i + 1], &gb);
            let mid = summed_right(&b, &self.zright[i + 2]);
            let z: f64 = summed_left(&a, &self.zleft[i]).iter().zip(&mid).map(|(p, q)| p * q).sum();
            if z > 0.0 && z.is_finite() {
                self.tensors[i] = a;
                self.tensors[i + 1] = b;
                break;
            }
            lr *= 0.5;
        }
        if moving_right {
            push_gauge_right(&mut self.tensors, i);
            self.refresh_left(i);
            self.normalize_site(i + 1);
        } else {
            push_gauge_left(&mut self.tensors, i + 1);
            self.refresh_right(i + 1);
            self.normalize_site(i);
        }
    }

    /// Scales site `b` so the whole chain has `Z = 1`, given that every
    /// other site is stochastic in the appropriate direction.
    fn normalize_site(&mut self, b: usize) {
        let zl = &self.zleft[b];
        let zr = &self.zright[b + 1];
        let mid = summed_left(&self.tensors[b], zl);
        let z: f64 = mid.iter().zip(zr).map(|(p, q)| p * q).sum();
        if z > 0.0 && z.is_finite() {
            self.tensors[b].scale(1.0 / z);
        }
    }

    fn sweep(&mut self) {
        let n = self.tensors.len();
        for i in 0..n - 1 {
            self.update_pair(i, true);
        }
        for i in (0..n - 1).rev() {
            self.update_pair(i, false);
        }
    }
}

/// Gauges every site but the first to be row-stochastic and scales the first
/// so that `Z = 1`.
fn right_gauge(tensors: &mut [SiteTensor]) {
    for b in (1..tensors.len()).rev() {
        push_gauge_left(tensors, b);
    }
    let ones = vec![1.0; tensors[0].right()];
    let z: f64 = summed_right(&tensors[0], &ones).iter().sum();
    if z > 0.0 && z.is_finite() {
        tensors[0].scale(1.0 / z);
    }
}

/// Updates a nonnegative MPS towards higher log-likelihood on `data`,
/// starting from `init` (never re-initialized). Entries are clamped at zero
/// after every step.
pub fn train_positive_mps(data: &[BitString], cfg: &TrainConfig, init: &Mps) -> Result<Mps> {
    cfg.validate()?;
    if init.mode() != Mode::DirectPositive {
        return Err(Error::WrongMode {
            expected: Mode::DirectPositive.name(),
            actual: init.mode().name(),
        });
    }
    check_data(data, Some(init.n_sites()))?;
    let weights = empirical(data);
    let mut tensors = init.tensors().to_vec();
    right_gauge(&mut tensors);

    if tensors.len() == 1 {
        let t = &mut tensors[0];
        for _ in 0..cfg.sweeps * cfg.grad_steps_per_pair {
            let (a0, a1) = (t.get(0, 0, 0), t.get(0, 1, 0));
            let z = a0 + a1;
            let mut g = [-1.0 / z, -1.0 / z];
            for (x, w) in &weights {
                let s = x.get(0) as usize;
                let a = if s == 0 { a0 } else { a1 };
                if a > 0.0 {
                    g[s] += w / a;
                }
            }
            let n0 = (a0 + cfg.learning_rate * g[0]).max(0.0);
            let n1 = (a1 + cfg.learning_rate * g[1]).max(0.0);
            if n0 + n1 > 0.0 {
                t.set(0, 0, 0, n0 / (n0 + n1));
                t.set(0, 1, 0, n1 / (n0 + n1));
            }
        }
        return Mps::from_tensors(tensors, Mode::DirectPositive, init.chi_max());
    }

    let mut sweeper = PositiveSweeper::new(tensors, weights, cfg.learning_rate);
    for _ in 0..cfg.sweeps {
        for _ in 0..cfg.grad_steps_per_pair {
            sweeper.sweep();
        }
    }
    let out = Mps::from_tensors(sweeper.tensors, Mode::DirectPositive, init.chi_max())?;
    out.log_partition_function()?;
    Ok(out)
}
