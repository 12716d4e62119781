//! Rank-based marginal estimation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Average ranks (1-based) of `sample`, ties sharing the mean of their ranks.
pub fn average_ranks(sample: &[f64]) -> Vec<f64> {
    let m = sample.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| sample[a].total_cmp(&sample[b]));
    let mut ranks = vec![0.0; m];
    let mut i = 0;
    while i < m {
        let mut j = i + 1;
        while j < m && sample[order[j]] == sample[order[i]] {
            j += 1;
        }
        // positions i..j (0-based) share ranks i+1..=j
        let avg = 0.5 * ((i + 1) + j) as f64;
        for &idx in &order[i..j] {
            ranks[idx] = avg;
        }
        i = j;
    }
    ranks
}

/// Rank transform into `(0, 1)`: `rank / (m + 1)` with average ranks for ties.
pub fn pseudo_observations(sample: &[f64]) -> Result<Vec<f64>> {
    let m = sample.len();
    if m < 2 {
        return Err(Error::SampleTooSmall { min: 2, got: m });
    }
    if let Some(i) = sample.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let scale = 1.0 / (m as f64 + 1.0);
    Ok(average_ranks(sample).into_iter().map(|r| r * scale).collect())
}

/// Empirical marginal distribution built from a sorted sample.
///
/// `cdf` uses mid-ranks scaled by `1/(m+1)`, so it agrees with
/// [`pseudo_observations`] at sample points and stays strictly inside
/// `(0, 1)` everywhere. `quantile(p)` returns the smallest sample point
/// whose pseudo-observation is at least `p` (right-continuous inverse),
/// clamped to the sample maximum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct EmpiricalMarginal {
    sorted: Vec<f64>,
    /// pseudo-observation of each sorted point (ties averaged)
    levels: Vec<f64>,
}

impl EmpiricalMarginal {
    pub fn new(sample: &[f64]) -> Result<Self> {
        let m = sample.len();
        if m < 2 {
            return Err(Error::SampleTooSmall { min: 2, got: m });
        }
        if let Some(i) = sample.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let mut sorted = sample.to_vec();
        sorted.sort_by(f64::total_cmp);
        let levels = pseudo_observations(&sorted)?;
        Ok(Self { sorted, levels })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn min(&self) -> f64 {
        self.sorted[0]
    }

    pub fn max(&self) -> f64 {
        self.sorted[self.sorted.len() - 1]
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let below = self.sorted.partition_point(|&v| v < x);
        let upto = self.sorted.partition_point(|&v| v <= x);
        let ties = upto - below;
        let rank = if ties > 0 { below as f64 + 0.5 * (ties as f64 + 1.0) } else { below as f64 + 0.5 };
        // same rounding as pseudo_observations so quantile(cdf(x)) == x
        rank * (1.0 / (self.sorted.len() as f64 + 1.0))
    }

    pub fn quantile(&self, p: f64) -> f64 {
        let idx = self.levels.partition_point(|&l| l < p);
        self.sorted[idx.min(self.sorted.len() - 1)]
    }

    pub fn mean(&self) -> f64 {
        self.sorted.iter().sum::<f64>() / self.sorted.len() as f64
    }
}

impl TryFrom<Vec<f64>> for EmpiricalMarginal {
    type Error = Error;
    fn try_from(sample: Vec<f64>) -> Result<Self> {
        Self::new(&sample)
    }
}

impl From<EmpiricalMarginal> for Vec<f64> {
    fn from(m: EmpiricalMarginal) -> Vec<f64> {
        m.sorted
    }
}
