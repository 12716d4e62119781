//! Per-phase copula regression and phase-dispatched prediction.
//!
//! For each phase the copula is fitted by tau inversion, the conditional
//! mean `E[Y | X = x] = int_0^1 G^{-1}(v) dh(v | F(x))` is evaluated on the
//! observed `x`, and an OLS line through those points gives `(b0, b1)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::copula::{fit_copula_with, CopulaFamily, CopulaParams, EmpiricalMarginal, FitOptions, FittedCopula};
use crate::error::{Error, Result};
use crate::sim::split_phases;

/// Number of `v` nodes used for the conditional-mean quadrature.
pub const V_NODES: usize = 201;

/// `v_k = (2k + 1) / 402`, `k = 0..=200`.
pub fn v_grid() -> Vec<f64> {
    (0..V_NODES).map(|k| (2 * k + 1) as f64 / (2 * V_NODES) as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegressionMode {
    /// `b0 + b1 x`, extrapolating linearly.
    #[default]
    Linear,
    /// Piecewise-linear conditional-mean curve, clamped at its ends.
    Curve,
}

impl std::str::FromStr for RegressionMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(RegressionMode::Linear),
            "curve" => Ok(RegressionMode::Curve),
            other => Err(Error::InvalidConfig(format!("unknown regression mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RegressionOptions {
    pub mode: RegressionMode,
    pub fit: FitOptions,
}

/// Sampled conditional-mean curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Curve {
    /// Linear interpolation, constant beyond the end points.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.x.len();
        if x <= self.x[0] {
            return self.y[0];
        }
        if x >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let i = self.x.partition_point(|&g| g <= x);
        let (x0, x1) = (self.x[i - 1], self.x[i]);
        let w = (x - x0) / (x1 - x0);
        self.y[i - 1] + w * (self.y[i] - self.y[i - 1])
    }
}

/// Evaluates `E[Y | X = x]` for one fitted copula; the `v`-side work is
/// done once at construction.
struct ConditionalMean {
    grid: crate::copula::HGrid,
    quantiles: Vec<f64>,
    x_marginal: EmpiricalMarginal,
}

impl ConditionalMean {
    fn new(fitted: &FittedCopula) -> Self {
        let nodes = v_grid();
        let quantiles = nodes.iter().map(|&v| fitted.marginals.1.quantile(v)).collect();
        let grid = fitted.copula().h_grid(&nodes);
        Self { grid, quantiles, x_marginal: fitted.marginals.0.clone() }
    }

    fn eval(&self, x: f64, h: &mut [f64]) -> f64 {
        let u = self.x_marginal.cdf(x);
        self.grid.eval_into(u, h);
        let last = h.len() - 1;
        // trapezoidal weights on the h-differences; they telescope to 1
        let mut total = self.quantiles[0] * (h[0] + 0.5 * (h[1] - h[0]));
        for k in 1..last {
            total += self.quantiles[k] * 0.5 * (h[k + 1] - h[k - 1]);
        }
        total + self.quantiles[last] * ((1.0 - h[last]) + 0.5 * (h[last] - h[last - 1]))
    }

    fn eval_many(&self, xs: &[f64]) -> Vec<f64> {
        let mut h = vec![0.0; V_NODES];
        xs.iter().map(|&x| self.eval(x, &mut h)).collect()
    }
}

/// `E[Y | X = x]` on a strictly increasing grid.
pub fn conditional_mean_curve(fitted: &FittedCopula, x_grid: &[f64]) -> Result<Curve> {
    if x_grid.is_empty() {
        return Err(Error::EmptySeries);
    }
    if let Some(i) = x_grid.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    if x_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig("x grid must be strictly increasing".into()));
    }
    let y = ConditionalMean::new(fitted).eval_many(x_grid);
    Ok(Curve { x: x_grid.to_vec(), y })
}

/// OLS line through `(x, c)`. Deviations of `c` are taken from `c[0]`, so
/// constant targets give a slope of exactly zero.
pub fn ols_line(x: &[f64], c: &[f64]) -> Result<(f64, f64)> {
    let m = x.len() as f64;
    let x_bar = x.iter().sum::<f64>() / m;
    let pivot = c[0];
    let (mut sxx, mut sxc) = (0.0, 0.0);
    for (&xi, &ci) in x.iter().zip(c) {
        let dx = xi - x_bar;
        sxx += dx * dx;
        sxc += dx * (ci - pivot);
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateX);
    }
    let b1 = sxc / sxx;
    let c_bar = pivot + c.iter().map(|ci| ci - pivot).sum::<f64>() / m;
    Ok((c_bar - b1 * x_bar, b1))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseModel {
    /// 1-based phase index.
    pub phase: usize,
    pub b0: f64,
    pub b1: f64,
    pub fitted: FittedCopula,
    /// Conditional mean at the distinct observed `x`.
    pub curve: Curve,
}

impl PhaseModel {
    fn build(phase: usize, fitted: FittedCopula, coefficients: Option<(f64, f64)>, xs: &[f64]) -> Result<Self> {
        let cm = ConditionalMean::new(&fitted);
        let mut grid = fitted.marginals.0.sorted().to_vec();
        grid.dedup();
        let curve = Curve { y: cm.eval_many(&grid), x: grid };
        let (b0, b1) = match coefficients {
            Some(c) => c,
            None => {
                let at_obs: Vec<f64> = xs.iter().map(|&x| curve.y[curve.x.partition_point(|&g| g < x)]).collect();
                ols_line(xs, &at_obs)?
            }
        };
        Ok(Self { phase, b0, b1, fitted, curve })
    }

    pub fn predict(&self, x: f64, mode: RegressionMode) -> f64 {
        match mode {
            RegressionMode::Linear => self.b0 + self.b1 * x,
            RegressionMode::Curve => self.curve.eval(x),
        }
    }
}

pub fn fit_phase_regression(x: &[f64], y: &[f64], family: CopulaFamily) -> Result<PhaseModel> {
    fit_phase_regression_with(x, y, family, FitOptions::default())
}

pub fn fit_phase_regression_with(
    x: &[f64],
    y: &[f64],
    family: CopulaFamily,
    options: FitOptions,
) -> Result<PhaseModel> {
    fit_phase(1, x, y, family, options)
}

fn fit_phase(phase: usize, x: &[f64], y: &[f64], family: CopulaFamily, options: FitOptions) -> Result<PhaseModel> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.len() >= 2 && x.iter().all(|&v| v == x[0]) {
        return Err(Error::DegenerateX);
    }
    let pairs: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    let fitted = fit_copula_with(&pairs, family, options)?;
    PhaseModel::build(phase, fitted, None, x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycloModel {
    pub period: usize,
    pub family: CopulaFamily,
    pub mode: RegressionMode,
    /// One model per phase, ordered by phase.
    pub models: Vec<PhaseModel>,
}

pub fn fit_cyclo_model(x: &[f64], y: &[f64], period: usize, family: CopulaFamily) -> Result<CycloModel> {
    fit_cyclo_model_with(x, y, period, family, RegressionOptions::default())
}

pub fn fit_cyclo_model_with(
    x: &[f64],
    y: &[f64],
    period: usize,
    family: CopulaFamily,
    options: RegressionOptions,
) -> Result<CycloModel> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    let xs = split_phases(x, period)?;
    let ys = split_phases(y, period)?;
    let models = (1..=period)
        .into_par_iter()
        .map(|i| {
            fit_phase(i, xs.phase(i), ys.phase(i), family, options.fit)
                .map_err(|e| Error::Phase { phase: i, source: Box::new(e) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CycloModel { period, family, mode: options.mode, models })
}

impl CycloModel {
    /// Phase of 1-based time `t`: `((t - 1) mod T) + 1`.
    pub fn phase_of(&self, t: u64) -> usize {
        ((t.max(1) - 1) % self.period as u64) as usize + 1
    }

    pub fn predict(&self, x: f64, t: u64) -> f64 {
        self.models[self.phase_of(t) - 1].predict(x, self.mode)
    }

    /// Predictions at `x_t`, `t = 1..=n`.
    pub fn predict_series(&self, x: &[f64]) -> Vec<f64> {
        x.iter().enumerate().map(|(i, &v)| self.predict(v, i as u64 + 1)).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ModelFile::from(self)).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Data(format!("model file: {e}")))?;
        file.try_into()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PhaseRecord {
    phase: usize,
    b0: f64,
    b1: f64,
    theta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    nu: Option<f64>,
    tau_hat: f64,
    x_sample: EmpiricalMarginal,
    y_sample: EmpiricalMarginal,
}

/// On-disk model layout.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModelFile {
    family: CopulaFamily,
    #[serde(rename = "T")]
    period: usize,
    #[serde(default)]
    mode: RegressionMode,
    phases: Vec<PhaseRecord>,
}

impl From<&CycloModel> for ModelFile {
    fn from(m: &CycloModel) -> Self {
        let phases = m
            .models
            .iter()
            .map(|p| PhaseRecord {
                phase: p.phase,
                b0: p.b0,
                b1: p.b1,
                theta: p.fitted.params.theta,
                nu: p.fitted.params.nu,
                tau_hat: p.fitted.tau_hat,
                x_sample: p.fitted.marginals.0.clone(),
                y_sample: p.fitted.marginals.1.clone(),
            })
            .collect();
        Self { family: m.family, period: m.period, mode: m.mode, phases }
    }
}

impl TryFrom<ModelFile> for CycloModel {
    type Error = Error;
    fn try_from(f: ModelFile) -> Result<Self> {
        if f.period == 0 {
            return Err(Error::InvalidPeriod);
        }
        if f.phases.len() != f.period {
            return Err(Error::Data(format!("model has {} phases for T = {}", f.phases.len(), f.period)));
        }
        let mut models = Vec::with_capacity(f.period);
        for (i, rec) in f.phases.into_iter().enumerate() {
            if rec.phase != i + 1 {
                return Err(Error::Data(format!("phase records out of order at position {}", i + 1)));
            }
            let params = CopulaParams { theta: rec.theta, nu: rec.nu };
            params.validate(f.family)?;
            let fitted = FittedCopula {
                family: f.family,
                params,
                tau_hat: rec.tau_hat,
                marginals: (rec.x_sample, rec.y_sample),
            };
            models.push(PhaseModel::build(rec.phase, fitted, Some((rec.b0, rec.b1)), &[])?);
        }
        Ok(CycloModel { period: f.period, family: f.family, mode: f.mode, models })
    }
}
