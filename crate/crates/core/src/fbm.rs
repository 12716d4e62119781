//! Fractional Brownian motion on the integer grid `1..=n`.
//!
//! Two generators are provided. [`CholeskyGenerator`] factors the full
//! covariance matrix of `(B_H(1), ..., B_H(n))` and is exact by
//! construction; it serves as the reference. [`CirculantGenerator`] embeds
//! the stationary covariance of fractional Gaussian noise in a circulant
//! matrix of size `2n`, diagonalizes it with an FFT, and cumulative-sums
//! the resulting noise. The fGn embedding is nonnegative for every
//! `H in (0, 1)`, so the fast path is exact as well.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative pivot tolerance for the Cholesky factorization.
const PIVOT_TOL: f64 = 1e-10;
/// Eigenvalues in `(-EIGEN_CLAMP, 0)` are treated as zero.
const EIGEN_CLAMP: f64 = 1e-9;

/// Hurst index, strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct HurstParameter(f64);

impl HurstParameter {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value < 1.0 {
            Ok(Self(value))
        } else {
            Err(Error::InvalidHurst(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for HurstParameter {
    type Error = Error;
    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<HurstParameter> for f64 {
    fn from(h: HurstParameter) -> f64 {
        h.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FbmGenerator {
    ExactCholesky,
    CirculantEmbedding,
}

/// A sampled fBm path at times `1..=n`. `B_H(0) = 0` is implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct FbmPath {
    values: Vec<f64>,
    hurst: HurstParameter,
    generator: FbmGenerator,
}

impl FbmPath {
    pub fn new(values: Vec<f64>, hurst: HurstParameter, generator: FbmGenerator) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySeries);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { values, hurst, generator })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn hurst(&self) -> HurstParameter {
        self.hurst
    }

    pub fn generator(&self) -> FbmGenerator {
        self.generator
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// `Cov(B_H(s), B_H(t)) = (|t|^{2H} + |s|^{2H} - |t - s|^{2H}) / 2`.
pub fn fbm_covariance(s: u64, t: u64, hurst: HurstParameter) -> f64 {
    let two_h = 2.0 * hurst.value();
    let d = s.abs_diff(t) as f64;
    0.5 * ((t as f64).powf(two_h) + (s as f64).powf(two_h) - d.powf(two_h))
}

/// Autocovariance of unit-variance fractional Gaussian noise at lag `k`.
pub fn fgn_autocovariance(k: u64, hurst: HurstParameter) -> f64 {
    let two_h = 2.0 * hurst.value();
    let k = k as f64;
    let below = if k >= 1.0 { (k - 1.0).powf(two_h) } else { 1.0 };
    0.5 * ((k + 1.0).powf(two_h) - 2.0 * k.powf(two_h) + below)
}

/// Dense symmetric matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Zero-based entry access.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.n)
    }

    /// Lower Cholesky factor, row-major. Fails when a pivot drops below
    /// `1e-10` times the largest diagonal entry.
    pub fn cholesky(&self) -> Result<Vec<f64>> {
        let n = self.n;
        let max_diag = (0..n).map(|i| self.get(i, i)).fold(0.0, f64::max);
        let tol = PIVOT_TOL * max_diag;
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = self.get(j, j);
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if d.is_nan() || d <= tol {
                return Err(Error::Factorization { index: j + 1, pivot: d });
            }
            let djj = d.sqrt();
            l[j * n + j] = djj;
            for i in (j + 1)..n {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / djj;
            }
        }
        Ok(l)
    }
}

/// Covariance matrix of `(B_H(1), ..., B_H(n))`.
pub fn fbm_covariance_matrix(n: usize, hurst: HurstParameter) -> Result<SymmetricMatrix> {
    if n == 0 {
        return Err(Error::EmptySeries);
    }
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let c = fbm_covariance(i as u64 + 1, j as u64 + 1, hurst);
            data[i * n + j] = c;
            data[j * n + i] = c;
        }
    }
    Ok(SymmetricMatrix { n, data })
}

/// Exact generator: path = L z with `L` the Cholesky factor of the
/// covariance matrix. The factor is computed once and reused.
#[derive(Debug, Clone)]
pub struct CholeskyGenerator {
    n: usize,
    hurst: HurstParameter,
    factor: Vec<f64>,
}

impl CholeskyGenerator {
    pub fn new(n: usize, hurst: HurstParameter) -> Result<Self> {
        let factor = fbm_covariance_matrix(n, hurst)?.cholesky()?;
        Ok(Self { n, hurst, factor })
    }

    /// Map a standard-normal vector of length `n` through the factor.
    pub fn transform(&self, z: &[f64]) -> Result<FbmPath> {
        if z.len() != self.n {
            return Err(Error::LengthMismatch { left: z.len(), right: self.n });
        }
        let n = self.n;
        let values = (0..n)
            .map(|i| {
                let row = &self.factor[i * n..i * n + i + 1];
                row.iter().zip(z).map(|(l, z)| l * z).sum()
            })
            .collect();
        FbmPath::new(values, self.hurst, FbmGenerator::ExactCholesky)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<FbmPath> {
        let z: Vec<f64> = (0..self.n).map(|_| rng.sample(StandardNormal)).collect();
        self.transform(&z)
    }
}

pub fn generate_fbm_cholesky<R: Rng + ?Sized>(n: usize, hurst: HurstParameter, rng: &mut R) -> Result<FbmPath> {
    CholeskyGenerator::new(n, hurst)?.sample(rng)
}

/// First row of the circulant embedding of the fGn covariance: length `2n`.
fn embedding_row(n: usize, hurst: HurstParameter) -> Vec<f64> {
    let size = 2 * n;
    (0..size)
        .map(|k| {
            let lag = if k <= n { k } else { size - k };
            fgn_autocovariance(lag as u64, hurst)
        })
        .collect()
}

/// Eigenvalues of the `2n x 2n` circulant embedding (unclamped).
pub fn circulant_eigenvalues(n: usize, hurst: HurstParameter) -> Vec<f64> {
    let row = embedding_row(n, hurst);
    let mut buf: Vec<Complex64> = row.iter().map(|&c| Complex64::new(c, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf.iter().map(|c| c.re).collect()
}

/// Fast generator via circulant embedding of fractional Gaussian noise.
#[derive(Clone)]
pub struct CirculantGenerator {
    n: usize,
    hurst: HurstParameter,
    /// `sqrt(lambda_k / (2N))` scale per frequency, `N = 2n`.
    scale: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for CirculantGenerator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CirculantGenerator").field("n", &self.n).field("hurst", &self.hurst).finish()
    }
}

impl CirculantGenerator {
    pub fn new(n: usize, hurst: HurstParameter) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptySeries);
        }
        let size = 2 * n;
        let eig = circulant_eigenvalues(n, hurst);
        let mut scale = Vec::with_capacity(size);
        for (index, &value) in eig.iter().enumerate() {
            let value = if value < 0.0 {
                if value > -EIGEN_CLAMP {
                    0.0
                } else {
                    return Err(Error::NegativeEigenvalue { index, value });
                }
            } else {
                value
            };
            scale.push((value / (2.0 * size as f64)).sqrt());
        }
        let fft = FftPlanner::new().plan_fft_forward(size);
        Ok(Self { n, hurst, scale, fft })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// One fGn realization of length `n` with unit marginal variance.
    pub fn sample_fgn<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.n;
        let size = 2 * n;
        let mut w = vec![Complex64::new(0.0, 0.0); size];
        // k = 0 and k = n are real; the rest come in conjugate pairs.
        let z: f64 = rng.sample(StandardNormal);
        w[0] = Complex64::new(self.scale[0] * std::f64::consts::SQRT_2 * z, 0.0);
        for k in 1..n {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            let c = Complex64::new(a, b) * self.scale[k];
            w[k] = c;
            w[size - k] = c.conj();
        }
        let z: f64 = rng.sample(StandardNormal);
        w[n] = Complex64::new(self.scale[n] * std::f64::consts::SQRT_2 * z, 0.0);
        self.fft.process(&mut w);
        w[..n].iter().map(|c| c.re).collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<FbmPath> {
        let mut acc = 0.0;
        let values = self
            .sample_fgn(rng)
            .into_iter()
            .map(|g| {
                acc += g;
                acc
            })
            .collect();
        FbmPath::new(values, self.hurst, FbmGenerator::CirculantEmbedding)
    }
}

pub fn generate_fbm_circulant<R: Rng + ?Sized>(n: usize, hurst: HurstParameter, rng: &mut R) -> Result<FbmPath> {
    CirculantGenerator::new(n, hurst)?.sample(rng)
}

/// `B_H(t) - B_H(t-1)` for `t = 1..=n`, with `B_H(0) = 0`.
pub fn fgn_increments(path: &FbmPath) -> Vec<f64> {
    let mut prev = 0.0;
    path.values()
        .iter()
        .map(|&v| {
            let d = v - prev;
            prev = v;
            d
        })
        .collect()
}
