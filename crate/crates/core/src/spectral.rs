//! DFT, coherence statistic and period detection along support lines.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest length evaluated by the direct O(n^2) sum.
pub const DIRECT_DFT_MAX: usize = 64;

/// Largest candidate period tried by default.
pub const DEFAULT_T_MAX: usize = 12;

/// DFT ordinates `d(lambda_k)`, `lambda_k = 2 pi (k-1) / n`, `k = 1..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Vec<Complex64>,
    energy: f64,
}

/// Window energy at or below this fraction of the total counts as zero.
const DEGENERATE_RELATIVE: f64 = 1e-24;

impl Spectrum {
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// 1-based ordinate with circular wrap.
    pub fn at(&self, k: usize) -> Complex64 {
        self.values[(k - 1) % self.values.len()]
    }

    pub fn frequency(&self, k: usize) -> f64 {
        2.0 * PI * (k - 1) as f64 / self.values.len() as f64
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    fn from_values(values: Vec<Complex64>) -> Self {
        let energy = values.iter().map(|c| c.norm_sqr()).sum();
        Self { values, energy }
    }
}

/// `d(lambda) = n^{-1/2} sum_t x_t e^{i (t-1) lambda}` by direct summation.
pub fn dft_direct(values: &[f64]) -> Spectrum {
    let n = values.len();
    let norm = 1.0 / (n as f64).sqrt();
    let out = (0..n)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, &x) in values.iter().enumerate() {
                // reduce j k mod n to keep the angle small
                let angle = 2.0 * PI * ((j * k) % n) as f64 / n as f64;
                acc += Complex64::from_polar(x, angle);
            }
            acc * norm
        })
        .collect();
    Spectrum::from_values(out)
}

/// Same transform through an inverse FFT (which carries the `e^{+i}` sign).
pub fn dft_fft(values: &[f64]) -> Spectrum {
    let n = values.len();
    let mut buf: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    if n > 0 {
        FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    }
    let norm = 1.0 / (n as f64).sqrt();
    buf.iter_mut().for_each(|c| *c *= norm);
    Spectrum::from_values(buf)
}

pub fn dft(values: &[f64]) -> Result<Spectrum> {
    if values.is_empty() {
        return Err(Error::EmptySeries);
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    Ok(if values.len() <= DIRECT_DFT_MAX { dft_direct(values) } else { dft_fft(values) })
}

fn check_window(n: usize, p: usize, q: usize, span: usize) -> Result<()> {
    if span == 0 || span > n {
        return Err(Error::InvalidWindow(format!("span M = {span} must lie in 1..={n}")));
    }
    if p == 0 || q == 0 || p > n || q > n {
        return Err(Error::InvalidWindow(format!("indices ({p}, {q}) must lie in 1..={n}")));
    }
    Ok(())
}

/// `|gamma(p, q, M)|^2` from precomputed ordinates; indices wrap modulo `n`.
pub fn coherence_from_spectrum(spec: &Spectrum, p: usize, q: usize, span: usize) -> Result<f64> {
    let n = spec.len();
    check_window(n, p, q, span)?;
    let d = spec.values();
    let mut cross = Complex64::new(0.0, 0.0);
    let (mut ep, mut eq) = (0.0, 0.0);
    for m in 0..span {
        let a = d[(p - 1 + m) % n];
        let b = d[(q - 1 + m) % n];
        cross += a * b.conj();
        ep += a.norm_sqr();
        eq += b.norm_sqr();
    }
    let floor = DEGENERATE_RELATIVE * spec.energy();
    if ep <= floor || eq <= floor {
        return Err(Error::DegenerateWindow { p, q });
    }
    if p == q {
        return Ok(1.0);
    }
    Ok((cross.norm_sqr() / (ep * eq)).clamp(0.0, 1.0))
}

pub fn coherence_statistic(values: &[f64], p: usize, q: usize, span: usize) -> Result<f64> {
    coherence_from_spectrum(&dft(values)?, p, q, span)
}

/// `n x n` grid of coherence values, row `p`, column `q` (both 1-based).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceMap {
    pub n: usize,
    pub span: usize,
    /// Row-major, `values[(p-1) * n + (q-1)]`.
    pub values: Vec<f64>,
}

impl CoherenceMap {
    pub fn get(&self, p: usize, q: usize) -> f64 {
        self.values[(p - 1) * self.n + (q - 1)]
    }

    /// Plot-ready long format: `p,q,coherence`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("p,q,coherence\n");
        for p in 1..=self.n {
            for q in 1..=self.n {
                out.push_str(&format!("{p},{q},{}\n", self.get(p, q)));
            }
        }
        out
    }
}

pub fn coherence_map(values: &[f64], span: usize) -> Result<CoherenceMap> {
    let spec = dft(values)?;
    let n = spec.len();
    let rows: Vec<Vec<f64>> = (1..=n)
        .into_par_iter()
        .map(|p| (1..=n).map(|q| coherence_from_spectrum(&spec, p, q, span)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    Ok(CoherenceMap { n, span, values: rows.concat() })
}

/// Default smoothing span `floor(sqrt(n))`.
pub fn default_span(n: usize) -> usize {
    ((n as f64).sqrt().floor() as usize).max(1)
}

/// Default decision threshold: twice the null mean `1/M` of the coherence.
pub fn default_threshold(span: usize) -> f64 {
    (2.0 / span.max(1) as f64).min(0.99)
}

/// Default candidate range `2..=min(12, n/4)`.
pub fn default_t_max(n: usize) -> usize {
    DEFAULT_T_MAX.min(n / 4).max(1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodDetection {
    /// `None` means no candidate exceeded the threshold (stationary, T = 1).
    pub estimated_t: Option<usize>,
    /// `(T, mean coherence along the line q = p + round(n / T))`.
    pub line_scores: Vec<(usize, f64)>,
    /// Candidates skipped because `n / T` is too far from an integer.
    pub skipped: Vec<usize>,
    pub span: usize,
    pub threshold: f64,
}

/// Average coherence along the off-diagonal `q = p + offset` (circular).
pub fn line_score(spec: &Spectrum, offset: usize, span: usize) -> Result<f64> {
    let n = spec.len();
    let mut total = 0.0;
    let mut usable = 0usize;
    for p in 1..=n {
        let q = (p - 1 + offset) % n + 1;
        match coherence_from_spectrum(spec, p, q, span) {
            Ok(v) => {
                total += v;
                usable += 1;
            }
            Err(Error::DegenerateWindow { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    if usable == 0 {
        return Err(Error::DegenerateWindow { p: 1, q: offset % n + 1 });
    }
    Ok(total / usable as f64)
}

/// Score every candidate `T` in `2..=t_max` and pick the period.
///
/// The support lines of a period-`T` process sit at offsets `j n / T`, so a
/// period-4 process also lights up the `T = 2` line, more weakly. Among the
/// candidates whose score exceeds `threshold` the highest-scoring one wins
/// (ties go to the smaller `T`).
pub fn detect_period(values: &[f64], span: usize, t_max: usize, threshold: f64) -> Result<PeriodDetection> {
    let n = values.len();
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidConfig(format!("threshold must lie in (0, 1), got {threshold}")));
    }
    if t_max == 0 || t_max > n / 4 {
        return Err(Error::InvalidConfig(format!("T_max must lie in 1..={}, got {t_max}", n / 4)));
    }
    let spec = dft(values)?;
    let mut line_scores = Vec::new();
    let mut skipped = Vec::new();
    let mut best: Option<(usize, f64)> = None;
    for t in 2..=t_max {
        let exact = n as f64 / t as f64;
        let offset = exact.round();
        if (exact - offset).abs() > 0.25 {
            skipped.push(t);
            continue;
        }
        let score = line_score(&spec, offset as usize, span)?;
        line_scores.push((t, score));
        if score > threshold && best.is_none_or(|(_, b)| score > b) {
            best = Some((t, score));
        }
    }
    Ok(PeriodDetection { estimated_t: best.map(|b| b.0), line_scores, skipped, span, threshold })
}
