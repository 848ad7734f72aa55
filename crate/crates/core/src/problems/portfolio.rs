use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::Problem;
use crate::bits::BitString;
use crate::error::{Error, Result};

/// Equal-weighted portfolio selection with soft cardinality bounds.
///
/// For `n_min ≤ |x| ≤ n_max` the objective is the variance of the
/// equal-weighted portfolio, `xᵀΣx / |x|²`. Outside the range it is
/// `C·(|x| - n_max)` or `C·(n_min - |x|)`.
#[derive(Clone, Debug)]
pub struct Portfolio {
    sigma: DMatrix<f64>,
    n_min: usize,
    n_max: usize,
    penalty_c: f64,
}

impl Portfolio {
    pub const DEFAULT_PENALTY: f64 = 100.0;

    pub fn new(sigma: DMatrix<f64>, n_min: usize, n_max: usize, penalty_c: f64) -> Result<Self> {
        let n = sigma.nrows();
        if n == 0 || sigma.ncols() != n {
            return Err(Error::invalid("covariance must be a nonempty square matrix"));
        }
        if (&sigma - sigma.transpose()).amax() > 1e-9 {
            return Err(Error::invalid("covariance is not symmetric"));
        }
        if n_min > n_max || n_max > n {
            return Err(Error::invalid(format!("need n_min <= n_max <= {n}, got {n_min}, {n_max}")));
        }
        if !(penalty_c > 0.0) {
            return Err(Error::invalid("penalty constant must be positive"));
        }
        Ok(Portfolio {
            sigma,
            n_min,
            n_max,
            penalty_c,
        })
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn bounds(&self) -> (usize, usize) {
        (self.n_min, self.n_max)
    }

    pub fn penalty_c(&self) -> f64 {
        self.penalty_c
    }

    /// Correlation matrix implied by the covariance; assets with zero
    /// variance are treated as uncorrelated with everything.
    pub fn correlation(&self) -> DMatrix<f64> {
        let n = self.sigma.nrows();
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                return 1.0;
            }
            let d = (self.sigma[(i, i)] * self.sigma[(j, j)]).sqrt();
            if d > 0.0 {
                (self.sigma[(i, j)] / d).clamp(-1.0, 1.0)
            } else {
                0.0
            }
        })
    }

    /// The same instance with assets relabelled: asset `k` of the result is
    /// asset `perm[k]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Portfolio {
        let n = perm.len();
        Portfolio {
            sigma: DMatrix::from_fn(n, n, |i, j| self.sigma[(perm[i], perm[j])]),
            ..self.clone()
        }
    }
}

impl Problem for Portfolio {
    fn dim(&self) -> usize {
        self.sigma.nrows()
    }

    fn evaluate(&self, x: &BitString) -> f64 {
        let k = x.count_ones();
        if k > self.n_max {
            return self.penalty_c * (k - self.n_max) as f64;
        }
        if k < self.n_min {
            return self.penalty_c * (self.n_min - k) as f64;
        }
        if k == 0 {
            return f64::INFINITY;
        }
        let chosen: Vec<usize> = (0..x.len()).filter(|&i| x.get(i) == 1).collect();
        let mut quad = 0.0;
        for &i in &chosen {
            for &j in &chosen {
                quad += self.sigma[(i, j)];
            }
        }
        quad / (k * k) as f64
    }
}

/// How to read a CSV matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CovarianceInput {
    /// Square covariance matrix.
    Covariance,
    /// `T × N` table of returns, one row per period.
    Returns,
}

/// Loads a covariance matrix from CSV. A first row in which no cell parses as
/// a number is taken as a header. Covariance input is symmetrized by
/// averaging with its transpose; asymmetry above `1e-6` is rejected. Returns
/// input yields the sample covariance with divisor `T - 1`.
pub fn load_covariance_csv(text: &str, input: CovarianceInput) -> Result<DMatrix<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::parse(i + 1, e.to_string()))?;
        let line = record.position().map_or(i + 1, |p| p.line() as usize);
        if record.iter().all(|c| c.is_empty()) {
            continue;
        }
        if rows.is_empty() && i == 0 && record.iter().all(|c| c.parse::<f64>().is_err()) {
            continue;
        }
        let row = record
            .iter()
            .map(|c| {
                c.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::parse(line, format!("non-numeric cell {c:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::parse(line, format!("expected {} cells, found {}", first.len(), row.len())));
            }
        }
        rows.push(row);
    }
    let cols = rows.first().map(Vec::len).ok_or(Error::Empty("CSV matrix"))?;
    let m = DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]);
    match input {
        CovarianceInput::Covariance => {
            if m.nrows() != m.ncols() {
                return Err(Error::invalid(format!("covariance is {}x{}, not square", m.nrows(), m.ncols())));
            }
            let asym = (&m - m.transpose()).amax();
            if asym > 1e-6 {
                return Err(Error::invalid(format!("covariance asymmetric by {asym}")));
            }
            Ok((&m + m.transpose()) * 0.5)
        }
        CovarianceInput::Returns => sample_covariance(&m),
    }
}

fn sample_covariance(returns: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let t = returns.nrows();
    if t < 2 {
        return Err(Error::invalid("need at least two return periods"));
    }
    let means = returns.row_mean();
    let mut centered = returns.clone();
    for mut row in centered.row_iter_mut() {
        row -= &means;
    }
    let cov = centered.transpose() * &centered / (t - 1) as f64;
    Ok((&cov + cov.transpose()) * 0.5)
}

/// A synthetic covariance matrix: the sample covariance of 250 periods of a
/// market-plus-sector factor model, so assets form correlated clusters.
pub fn random_covariance<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    const PERIODS: usize = 250;
    let sectors = (n / 8).max(2);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let sector: Vec<usize> = (0..n).map(|_| rng.random_range(0..sectors)).collect();
    let beta: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
    let gamma: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..1.0)).collect();
    let idio: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
    let mut returns = DMatrix::zeros(PERIODS, n);
    for t in 0..PERIODS {
        let market = normal.sample(rng);
        let factors: Vec<f64> = (0..sectors).map(|_| normal.sample(rng)).collect();
        for i in 0..n {
            let r = beta[i] * market + gamma[i] * factors[sector[i]] + idio[i] * normal.sample(rng);
            returns[(t, i)] = 0.01 * r;
        }
    }
    sample_covariance(&returns).expect("enough periods")
}
