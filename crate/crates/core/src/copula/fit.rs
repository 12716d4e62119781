//! Kendall tau relations and method-of-moments fitting.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::families::Copula;
use super::kendall::kendall_tau;
use super::marginal::EmpiricalMarginal;
use super::special::debye;
use super::{CopulaFamily, CopulaParams, DEFAULT_NU};
use crate::error::{Error, Result};

/// Sample tau is clipped to `±(1 - TAU_CLIP)` before inversion.
pub const TAU_CLIP: f64 = 1e-6;

/// Smallest sample accepted by [`fit_copula`].
pub const MIN_FIT_SAMPLE: usize = 8;

fn frank_tau_pos(theta: f64) -> f64 {
    if theta < 1e-2 {
        let t2 = theta * theta;
        theta * (1.0 / 9.0 - t2 / 900.0 + t2 * t2 / 52920.0)
    } else {
        1.0 + 4.0 * (debye(1, theta) - 1.0) / theta
    }
}

fn frank_tau(theta: f64) -> f64 {
    frank_tau_pos(theta.abs()).copysign(theta)
}

pub(crate) fn tau_of(c: &Copula) -> f64 {
    let theta = c.theta();
    let tau = match c.family() {
        CopulaFamily::Gaussian | CopulaFamily::StudentT => 2.0 / PI * theta.asin(),
        CopulaFamily::Clayton => theta / (theta + 2.0),
        CopulaFamily::Gumbel => 1.0 - 1.0 / theta,
        CopulaFamily::Frank => frank_tau(theta),
    };
    tau.clamp(-1.0, 1.0)
}

/// Population Kendall tau of the copula.
pub fn tau_from_theta(family: CopulaFamily, params: CopulaParams) -> Result<f64> {
    Ok(tau_of(&Copula::new(family, params)?))
}

fn frank_theta(tau: f64) -> Result<f64> {
    let target = tau.abs();
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while frank_tau_pos(hi) < target {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::NoConvergence(format!("Frank theta for tau {tau}")));
        }
    }
    for _ in 0..300 {
        let mid = if lo > 0.0 && hi > 4.0 * lo { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        if mid <= lo || mid >= hi {
            break;
        }
        let t = frank_tau_pos(mid);
        if (t - target).abs() < 1e-10 {
            return Ok(mid.copysign(tau));
        }
        if t < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).copysign(tau))
}

/// Invert the tau relation. Student t gets `nu` (default 4).
pub fn theta_from_tau(family: CopulaFamily, tau: f64, nu: Option<f64>) -> Result<CopulaParams> {
    let out_of_range = |range| Err(Error::TauOutOfRange { family, tau, range });
    if !tau.is_finite() {
        return out_of_range("finite");
    }
    let params = match family {
        CopulaFamily::Gaussian | CopulaFamily::StudentT => {
            if tau <= -1.0 || tau >= 1.0 {
                return out_of_range("(-1, 1)");
            }
            let theta = (PI * tau / 2.0).sin();
            if family == CopulaFamily::StudentT {
                CopulaParams::student(theta, nu.unwrap_or(DEFAULT_NU))
            } else {
                CopulaParams::theta(theta)
            }
        }
        CopulaFamily::Clayton => {
            if tau <= 0.0 || tau >= 1.0 {
                return out_of_range("(0, 1)");
            }
            CopulaParams::theta(2.0 * tau / (1.0 - tau))
        }
        CopulaFamily::Gumbel => {
            if !(0.0..1.0).contains(&tau) {
                return out_of_range("[0, 1)");
            }
            CopulaParams::theta(1.0 / (1.0 - tau))
        }
        CopulaFamily::Frank => {
            if tau == 0.0 || tau <= -1.0 || tau >= 1.0 {
                return out_of_range("(-1, 0) or (0, 1)");
            }
            CopulaParams::theta(frank_theta(tau)?)
        }
    };
    params.validate(family)?;
    Ok(params)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Student t degrees of freedom.
    pub nu: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { nu: DEFAULT_NU }
    }
}

/// A copula fitted to paired data, with the marginals it was fitted against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedCopula {
    pub family: CopulaFamily,
    pub params: CopulaParams,
    pub tau_hat: f64,
    pub marginals: (EmpiricalMarginal, EmpiricalMarginal),
}

impl FittedCopula {
    pub fn copula(&self) -> Copula {
        Copula::new(self.family, self.params).expect("fitted parameters are valid")
    }

    pub fn m(&self) -> usize {
        self.marginals.0.len()
    }
}

pub fn fit_copula(pairs: &[(f64, f64)], family: CopulaFamily) -> Result<FittedCopula> {
    fit_copula_with(pairs, family, FitOptions::default())
}

/// Tau-inversion fit: empirical marginals, sample tau-b, clipped, inverted.
pub fn fit_copula_with(pairs: &[(f64, f64)], family: CopulaFamily, options: FitOptions) -> Result<FittedCopula> {
    if pairs.len() < MIN_FIT_SAMPLE {
        return Err(Error::SampleTooSmall { min: MIN_FIT_SAMPLE, got: pairs.len() });
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let marginals = (EmpiricalMarginal::new(&xs)?, EmpiricalMarginal::new(&ys)?);
    let tau_hat = kendall_tau(pairs)?.clamp(-1.0 + TAU_CLIP, 1.0 - TAU_CLIP);
    let params = theta_from_tau(family, tau_hat, Some(options.nu))?;
    Ok(FittedCopula { family, params, tau_hat, marginals })
}
