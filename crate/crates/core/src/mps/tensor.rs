/// Order-3 site tensor with shape `(left, 2, right)`, stored row-major so that
/// entry `[l][s][r]` lives at `(l * 2 + s) * right + r`.
#[derive(Clone, Debug, PartialEq)]
pub struct SiteTensor {
    left: usize,
    right: usize,
    data: Vec<f64>,
}

impl SiteTensor {
    pub fn zeros(left: usize, right: usize) -> Self {
        SiteTensor {
            left,
            right,
            data: vec![0.0; left * 2 * right],
        }
    }

    /// Panics if `data.len() != left * 2 * right`.
    pub fn from_vec(left: usize, right: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), left * 2 * right, "site tensor data length");
        SiteTensor { left, right, data }
    }

    pub fn from_fn(left: usize, right: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut t = SiteTensor::zeros(left, right);
        for l in 0..left {
            for s in 0..2 {
                for r in 0..right {
                    t.data[(l * 2 + s) * right + r] = f(l, s, r);
                }
            }
        }
        t
    }

    #[inline]
    pub fn left(&self) -> usize {
        self.left
    }

    #[inline]
    pub fn right(&self) -> usize {
        self.right
    }

    #[inline]
    pub fn get(&self, l: usize, s: usize, r: usize) -> f64 {
        self.data[(l * 2 + s) * self.right + r]
    }

    #[inline]
    pub fn set(&mut self, l: usize, s: usize, r: usize, v: f64) {
        self.data[(l * 2 + s) * self.right + r] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Row `l` of the matrix selected by physical index `s`.
    #[inline]
    pub(crate) fn row(&self, l: usize, s: usize) -> &[f64] {
        let start = (l * 2 + s) * self.right;
        &self.data[start..start + self.right]
    }

    pub fn scale(&mut self, factor: f64) {
        self.data.iter_mut().for_each(|v| *v *= factor);
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `w = v · A_s`.
    pub(crate) fn left_apply(&self, v: &[f64], s: usize) -> Vec<f64> {
        let mut w = vec![0.0; self.right];
        for (l, &vl) in v.iter().enumerate() {
            if vl == 0.0 {
                continue;
            }
            for (wr, a) in w.iter_mut().zip(self.row(l, s)) {
                *wr += vl * a;
            }
        }
        w
    }

    /// `w = A_s · v`.
    pub(crate) fn right_apply(&self, s: usize, v: &[f64]) -> Vec<f64> {
        (0..self.left)
            .map(|l| self.row(l, s).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Merged two-site tensor with shape `(left, 2, 2, right)`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoSiteTensor {
    left: usize,
    right: usize,
    data: Vec<f64>,
}

impl TwoSiteTensor {
    pub fn zeros(left: usize, right: usize) -> Self {
        TwoSiteTensor {
            left,
            right,
            data: vec![0.0; left * 4 * right],
        }
    }

    pub fn from_vec(left: usize, right: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), left * 4 * right, "two-site tensor data length");
        TwoSiteTensor { left, right, data }
    }

    /// Contracts the shared bond of two neighbouring site tensors.
    pub fn merge(a: &SiteTensor, b: &SiteTensor) -> Self {
        assert_eq!(a.right(), b.left(), "bond mismatch in merge");
        let (left, mid, right) = (a.left(), a.right(), b.right());
        let mut out = TwoSiteTensor::zeros(left, right);
        for l in 0..left {
            for s in 0..2 {
                for m in 0..mid {
                    let am = a.get(l, s, m);
                    if am == 0.0 {
                        continue;
                    }
                    for t in 0..2 {
                        let base = out.index(l, s, t, 0);
                        for (o, bv) in out.data[base..base + right].iter_mut().zip(b.row(m, t)) {
                            *o += am * bv;
                        }
                    }
                }
            }
        }
        out
    }

    #[inline]
    pub fn left(&self) -> usize {
        self.left
    }

    #[inline]
    pub fn right(&self) -> usize {
        self.right
    }

    #[inline]
    pub(crate) fn index(&self, l: usize, s: usize, t: usize, r: usize) -> usize {
        ((l * 2 + s) * 2 + t) * self.right + r
    }

    #[inline]
    pub fn get(&self, l: usize, s: usize, t: usize, r: usize) -> f64 {
        self.data[self.index(l, s, t, r)]
    }

    #[inline]
    pub fn set(&mut self, l: usize, s: usize, t: usize, r: usize, v: f64) {
        let i = self.index(l, s, t, r);
        self.data[i] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}
