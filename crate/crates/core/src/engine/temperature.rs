use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Used when the adaptive rule has no gap to work with.
pub const FLOOR_TEMPERATURE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemperatureSchedule {
    /// `T_t = T0^(1 - t/t_max)`. `t0 = None` takes the standard deviation of
    /// the initial population's objectives; `t_max = None` uses the number
    /// of generations.
    Annealed { t0: Option<f64>, t_max: Option<usize> },
    /// The solution of rank `rank` is `1/ratio` times as likely as the best.
    AdaptiveGap { rank: usize, ratio: f64 },
    Fixed(f64),
}

impl TemperatureSchedule {
    pub fn adaptive() -> Self {
        TemperatureSchedule::AdaptiveGap { rank: 5, ratio: 3.0 }
    }

    pub fn annealed() -> Self {
        TemperatureSchedule::Annealed { t0: None, t_max: None }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            TemperatureSchedule::Annealed { t0, t_max } => {
                if t0.is_some_and(|t| !(t > 0.0) || !t.is_finite()) {
                    return Err(Error::invalid("annealing t0 must be positive"));
                }
                if t_max == Some(0) {
                    return Err(Error::invalid("annealing t_max must be positive"));
                }
            }
            TemperatureSchedule::AdaptiveGap { rank, ratio } => {
                if rank < 2 || !(ratio > 1.0) {
                    return Err(Error::invalid("adaptive temperature needs rank >= 2 and ratio > 1"));
                }
            }
            TemperatureSchedule::Fixed(t) => {
                if !(t > 0.0) {
                    return Err(Error::invalid("fixed temperature must be positive"));
                }
            }
        }
        Ok(())
    }
}

/// `T0^(1 - t/t_max)`.
pub fn annealed_temperature(t0: f64, t: usize, t_max: usize) -> f64 {
    if t >= t_max {
        return 1.0;
    }
    t0.powf(1.0 - t as f64 / t_max as f64)
}

/// Sample standard deviation of the finite objectives, or 1 when that is
/// zero or undefined.
pub fn initial_temperature(values: &[f64]) -> f64 {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.len() < 2 {
        return 1.0;
    }
    let mean = finite.iter().sum::<f64>() / finite.len() as f64;
    let var = finite.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (finite.len() - 1) as f64;
    let std = var.sqrt();
    if std > 0.0 && std.is_finite() {
        std
    } else {
        1.0
    }
}

/// `(f(x_rank) - f(x_1)) / ln(ratio)` over the objectives of the distinct
/// solutions found so far.
///
/// When `rank` or more solutions tie for best, `f(x_rank)` is replaced by the
/// best objective outside the tie. With fewer than `rank` solutions the worst
/// one plays the role of `x_rank`. Fails with [`Error::DegenerateBank`] when
/// all objectives are equal.
pub fn adaptive_temperature(values: &[f64], rank: usize, ratio: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("bank"));
    }
    if rank < 1 || !(ratio > 1.0) {
        return Err(Error::invalid("adaptive temperature needs rank >= 1 and ratio > 1"));
    }
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let best = sorted[0];
    let at_rank = sorted[rank.min(sorted.len()) - 1];
    let reference = if at_rank > best {
        at_rank
    } else {
        *sorted
            .iter()
            .find(|&&v| v > best)
            .ok_or_else(|| Error::DegenerateBank(format!("all {} objectives equal {best}", sorted.len())))?
    };
    let t = (reference - best) / ratio.ln();
    if t > 0.0 && t.is_finite() {
        Ok(t)
    } else {
        Err(Error::DegenerateBank(format!("temperature {t} from gap {best} .. {reference}")))
    }
}
