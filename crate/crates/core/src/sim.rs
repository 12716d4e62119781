//! PARFBM(1) simulation and phase-splitting utilities.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fbm::{CirculantGenerator, HurstParameter};

/// A real-valued series indexed `1..=n`, optionally carrying a period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    period: Option<usize>,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>, period: Option<usize>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySeries);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        if period == Some(0) {
            return Err(Error::InvalidPeriod);
        }
        Ok(Self { values, period })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn period(&self) -> Option<usize> {
        self.period
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Value at 1-based time `t`.
    pub fn at(&self, t: usize) -> f64 {
        self.values[t - 1]
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// What drives the recursion: fGn increments or the fBm level itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorTerm {
    #[default]
    Increment,
    Level,
}

impl std::str::FromStr for ErrorTerm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "increment" => Ok(ErrorTerm::Increment),
            "level" => Ok(ErrorTerm::Level),
            other => Err(Error::InvalidConfig(format!("unknown error term '{other}'"))),
        }
    }
}

impl std::fmt::Display for ErrorTerm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ErrorTerm::Increment => "increment",
            ErrorTerm::Level => "level",
        })
    }
}

fn default_noise_sd() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParfbmConfig {
    pub n: usize,
    #[serde(rename = "T")]
    pub period: usize,
    pub phi: f64,
    pub alpha: f64,
    pub hurst: HurstParameter,
    #[serde(default = "default_noise_sd")]
    pub noise_sd: f64,
    #[serde(default)]
    pub error_term: ErrorTerm,
}

impl ParfbmConfig {
    pub fn new(n: usize, period: usize, phi: f64, alpha: f64, hurst: HurstParameter) -> Self {
        Self { n, period, phi, alpha, hurst, noise_sd: 1.0, error_term: ErrorTerm::Increment }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::EmptySeries);
        }
        if self.period == 0 {
            return Err(Error::InvalidPeriod);
        }
        if !self.n.is_multiple_of(self.period) {
            return Err(Error::NotDivisible { n: self.n, period: self.period });
        }
        if !(self.noise_sd > 0.0 && self.noise_sd.is_finite()) {
            return Err(Error::InvalidConfig(format!("noise_sd must be positive, got {}", self.noise_sd)));
        }
        if !self.phi.is_finite() || !self.alpha.is_finite() {
            return Err(Error::InvalidConfig("phi and alpha must be finite".into()));
        }
        Ok(())
    }

    /// Steps discarded before recording.
    pub fn burn_in(&self) -> usize {
        5 * self.period
    }
}

/// `(1 + phi cos(2 pi t / T)) / 2`, with `t` reduced modulo `T` first.
pub fn phi_schedule(t: i64, period: usize, phi: f64) -> f64 {
    let r = t.rem_euclid(period as i64) as f64;
    (1.0 + phi * (2.0 * PI * r / period as f64).cos()) / 2.0
}

/// Reusable simulator: the fGn generator for the full length is built once.
#[derive(Debug, Clone)]
pub struct ParfbmSimulator {
    config: ParfbmConfig,
    generator: CirculantGenerator,
    coefficients: Vec<f64>,
}

impl ParfbmSimulator {
    pub fn new(config: ParfbmConfig) -> Result<Self> {
        config.validate()?;
        let total = config.n + config.burn_in();
        let generator = CirculantGenerator::new(total, config.hurst)?;
        let coefficients = (0..config.period as i64).map(|r| phi_schedule(r, config.period, config.phi)).collect();
        Ok(Self { config, generator, coefficients })
    }

    pub fn config(&self) -> &ParfbmConfig {
        &self.config
    }

    /// Draw `(X, Y)`. The fGn path is drawn first, then the `W` noise.
    pub fn simulate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(TimeSeries, TimeSeries)> {
        let fgn = self.generator.sample_fgn(rng);
        let w: Vec<f64> = (0..self.config.n).map(|_| rng.sample(StandardNormal)).collect();
        self.from_draws(fgn, &w)
    }

    /// Deterministic part of the model given the raw draws: `fgn` covers the
    /// burn-in plus `n` steps, `w` holds `n` standard normals.
    pub fn from_draws(&self, mut fgn: Vec<f64>, w: &[f64]) -> Result<(TimeSeries, TimeSeries)> {
        let c = &self.config;
        let burn = c.burn_in();
        if fgn.len() != c.n + burn {
            return Err(Error::LengthMismatch { left: fgn.len(), right: c.n + burn });
        }
        if w.len() != c.n {
            return Err(Error::LengthMismatch { left: w.len(), right: c.n });
        }
        if c.error_term == ErrorTerm::Level {
            let mut acc = 0.0;
            for e in fgn.iter_mut() {
                acc += *e;
                *e = acc;
            }
        }
        let mut x = Vec::with_capacity(c.n);
        let mut prev = 0.0;
        for (s, e) in fgn.iter().enumerate() {
            // burn-in is a whole number of periods, so step s + 1 and the
            // recorded time s + 1 - burn share a phase
            prev = self.coefficients[(s + 1) % c.period] * prev + e;
            if s >= burn {
                x.push(prev);
            }
        }
        let y = x.iter().zip(w).map(|(&xv, &wv)| c.alpha * xv + c.noise_sd * wv).collect();
        Ok((TimeSeries::new(x, Some(c.period))?, TimeSeries::new(y, Some(c.period))?))
    }
}

pub fn simulate_parfbm<R: Rng + ?Sized>(config: &ParfbmConfig, rng: &mut R) -> Result<(TimeSeries, TimeSeries)> {
    ParfbmSimulator::new(*config)?.simulate(rng)
}

/// `T` interleaved sub-samples: phase `i` (1-based) holds `z_i, z_{i+T}, ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePartition<V = f64> {
    phases: Vec<Vec<V>>,
}

impl<V: Copy> PhasePartition<V> {
    /// Wrap raw phase samples; shape is checked by [`combine_phases`].
    pub fn from_phases(phases: Vec<Vec<V>>) -> Self {
        Self { phases }
    }

    pub fn period(&self) -> usize {
        self.phases.len()
    }

    /// Repetitions per phase (length of phase 1).
    pub fn m(&self) -> usize {
        self.phases.first().map_or(0, Vec::len)
    }

    /// 1-based phase access.
    pub fn phase(&self, i: usize) -> &[V] {
        &self.phases[i - 1]
    }

    pub fn phases(&self) -> &[Vec<V>] {
        &self.phases
    }

    pub fn into_phases(self) -> Vec<Vec<V>> {
        self.phases
    }
}

pub fn split_phases<V: Copy>(values: &[V], period: usize) -> Result<PhasePartition<V>> {
    if period == 0 {
        return Err(Error::InvalidPeriod);
    }
    let n = values.len();
    if n == 0 {
        return Err(Error::EmptySeries);
    }
    if !n.is_multiple_of(period) {
        return Err(Error::NotDivisible { n, period });
    }
    let phases = (0..period).map(|i| values[i..].iter().step_by(period).copied().collect()).collect();
    Ok(PhasePartition { phases })
}

pub fn combine_phases<V: Copy>(partition: &PhasePartition<V>) -> Result<Vec<V>> {
    let period = partition.period();
    if period == 0 {
        return Err(Error::InvalidPeriod);
    }
    let m = partition.m();
    for (i, p) in partition.phases.iter().enumerate() {
        if p.len() != m || m == 0 {
            return Err(Error::RaggedPartition { phase: i + 1, len: p.len(), expected: m.max(1) });
        }
    }
    let mut out = Vec::with_capacity(m * period);
    for j in 0..m {
        for p in &partition.phases {
            out.push(p[j]);
        }
    }
    Ok(out)
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Least common multiple of two periods.
pub fn lcm_period(t1: usize, t2: usize) -> usize {
    if t1 == 0 || t2 == 0 {
        return 0;
    }
    t1 / gcd(t1, t2) * t2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseStats {
    pub means: Vec<f64>,
    /// Lag-0 variances with divisor `m`.
    pub variances: Vec<f64>,
}

pub fn empirical_phase_stats(values: &[f64], period: usize) -> Result<PhaseStats> {
    let part = split_phases(values, period)?;
    let mut means = Vec::with_capacity(period);
    let mut variances = Vec::with_capacity(period);
    for p in part.phases() {
        let m = p.len() as f64;
        let mean = p.iter().sum::<f64>() / m;
        let var = p.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m;
        means.push(mean);
        variances.push(var);
    }
    Ok(PhaseStats { means, variances })
}
