use nalgebra::DMatrix;

use super::tensor::{SiteTensor, TwoSiteTensor};
use crate::error::{Error, Result};

/// Thin SVD `M = U diag(σ) Vᵀ` with singular values in descending order.
/// `u` is `rows × k` and `vt` is `k × cols`, both row-major.
pub(crate) struct Svd {
    pub u: Vec<f64>,
    pub sigma: Vec<f64>,
    pub vt: Vec<f64>,
}

pub(crate) fn svd(rows: usize, cols: usize, data: &[f64]) -> Svd {
    let m = DMatrix::from_row_slice(rows, cols, data);
    let dec = m.svd(true, true);
    let u = dec.u.expect("u requested");
    let vt = dec.v_t.expect("v_t requested");
    let k = dec.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| dec.singular_values[b].total_cmp(&dec.singular_values[a]));

    let mut out_u = vec![0.0; rows * k];
    let mut out_vt = vec![0.0; k * cols];
    let mut sigma = Vec::with_capacity(k);
    for (j, &src) in order.iter().enumerate() {
        sigma.push(dec.singular_values[src]);
        for i in 0..rows {
            out_u[i * k + j] = u[(i, src)];
        }
        for c in 0..cols {
            out_vt[j * cols + c] = vt[(src, c)];
        }
    }
    Svd {
        u: out_u,
        sigma,
        vt: out_vt,
    }
}

/// Which factor absorbs the singular values after a split.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitDirection {
    /// Left factor is `U` (left-orthonormal), right is `S Vᵀ`; used when a
    /// sweep moves to the right.
    Right,
    /// Left factor is `U S`, right is `Vᵀ` (right-orthonormal).
    Left,
}

#[derive(Clone, Debug)]
pub struct SplitResult {
    pub left: SiteTensor,
    pub right: SiteTensor,
    /// Retained singular values, descending.
    pub singular_values: Vec<f64>,
    /// `sqrt(Σ σ_k²)` over the dropped singular values; equals the Frobenius
    /// reconstruction error.
    pub discarded_norm: f64,
}

impl SplitResult {
    pub fn bond_dim(&self) -> usize {
        self.singular_values.len()
    }
}

/// Splits a merged `(χ_l, 2, 2, χ_r)` tensor back into two site tensors by
/// truncated SVD, keeping the singular values in the right factor.
///
/// Singular values with `σ_k / σ_max < cutoff` are dropped and at most
/// `chi_max` are retained (always at least one).
pub fn canonicalize_split(theta: &TwoSiteTensor, chi_max: usize, cutoff: f64) -> Result<SplitResult> {
    split_two_site(theta, chi_max, cutoff, SplitDirection::Right)
}

pub fn split_two_site(
    theta: &TwoSiteTensor,
    chi_max: usize,
    cutoff: f64,
    direction: SplitDirection,
) -> Result<SplitResult> {
    if chi_max == 0 {
        return Err(Error::invalid("chi_max must be positive"));
    }
    if !(cutoff >= 0.0) {
        return Err(Error::invalid(format!("cutoff {cutoff} must be >= 0")));
    }
    if theta.data().iter().all(|&v| v == 0.0) {
        return Err(Error::invalid("cannot split an all-zero tensor"));
    }
    let (cl, cr) = (theta.left(), theta.right());
    let (rows, cols) = (2 * cl, 2 * cr);
    let dec = svd(rows, cols, theta.data());
    let full = dec.sigma.len();
    let smax = dec.sigma[0];
    let keep = dec
        .sigma
        .iter()
        .take_while(|&&s| s / smax >= cutoff)
        .count()
        .clamp(1, chi_max.min(full));
    let discarded_norm = dec.sigma[keep..].iter().map(|s| s * s).sum::<f64>().sqrt();

    let mut left = SiteTensor::zeros(cl, keep);
    let mut right = SiteTensor::zeros(keep, cr);
    for row in 0..rows {
        let (l, s) = (row / 2, row % 2);
        for j in 0..keep {
            let mut v = dec.u[row * full + j];
            if direction == SplitDirection::Left {
                v *= dec.sigma[j];
            }
            left.set(l, s, j, v);
        }
    }
    for j in 0..keep {
        for col in 0..cols {
            let (t, r) = (col / cr, col % cr);
            let mut v = dec.vt[j * cols + col];
            if direction == SplitDirection::Right {
                v *= dec.sigma[j];
            }
            right.set(j, t, r, v);
        }
    }
    Ok(SplitResult {
        left,
        right,
        singular_values: dec.sigma[..keep].to_vec(),
        discarded_norm,
    })
}
