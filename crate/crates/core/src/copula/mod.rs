//! Bivariate copulas: Gaussian, Student t, Clayton, Gumbel and Frank.
//!
//! Every family provides the distribution function `C(a, b)`, the
//! conditional distribution `h(v | u) = dC(u, v)/du` and its inverse in `v`,
//! the Kendall tau relation and tau-inversion fitting.

mod bvn;
mod bvt;
mod families;
mod fit;
mod kendall;
mod marginal;
pub mod special;

pub use bvn::bvn_cdf;
pub use bvt::bvt_cdf;
pub use families::{Copula, HGrid};
pub use fit::{
    fit_copula, fit_copula_with, tau_from_theta, theta_from_tau, FitOptions, FittedCopula, MIN_FIT_SAMPLE, TAU_CLIP,
};
pub use kendall::kendall_tau;
pub use marginal::{average_ranks, pseudo_observations, EmpiricalMarginal};
pub use special::debye;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default Student t degrees of freedom.
pub const DEFAULT_NU: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CopulaFamily {
    Gaussian,
    StudentT,
    Clayton,
    Gumbel,
    Frank,
}

impl CopulaFamily {
    pub const ALL: [CopulaFamily; 5] = [
        CopulaFamily::Gaussian,
        CopulaFamily::StudentT,
        CopulaFamily::Clayton,
        CopulaFamily::Gumbel,
        CopulaFamily::Frank,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CopulaFamily::Gaussian => "gaussian",
            CopulaFamily::StudentT => "student_t",
            CopulaFamily::Clayton => "clayton",
            CopulaFamily::Gumbel => "gumbel",
            CopulaFamily::Frank => "frank",
        }
    }
}

impl std::fmt::Display for CopulaFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for CopulaFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "gaussian" | "normal" => Ok(CopulaFamily::Gaussian),
            "student_t" | "t" | "studentt" => Ok(CopulaFamily::StudentT),
            "clayton" => Ok(CopulaFamily::Clayton),
            "gumbel" => Ok(CopulaFamily::Gumbel),
            "frank" => Ok(CopulaFamily::Frank),
            other => Err(Error::InvalidConfig(format!("unknown copula family '{other}'"))),
        }
    }
}

/// Copula parameter `theta`, plus degrees of freedom for Student t.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CopulaParams {
    pub theta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
}

impl CopulaParams {
    pub fn theta(theta: f64) -> Self {
        Self { theta, nu: None }
    }

    pub fn student(theta: f64, nu: f64) -> Self {
        Self { theta, nu: Some(nu) }
    }

    pub fn validate(&self, family: CopulaFamily) -> Result<()> {
        let bad = |reason: String| Err(Error::InvalidParams { family, reason });
        let t = self.theta;
        if !t.is_finite() {
            return bad(format!("theta must be finite, got {t}"));
        }
        match (family, self.nu) {
            (CopulaFamily::StudentT, None) => return bad("nu is required".into()),
            (CopulaFamily::StudentT, Some(nu)) if !(nu > 0.0 && nu.is_finite()) => {
                return bad(format!("nu must be positive, got {nu}"))
            }
            (CopulaFamily::StudentT, Some(_)) => {}
            (_, Some(_)) => return bad("nu is only meaningful for the Student t family".into()),
            (_, None) => {}
        }
        match family {
            CopulaFamily::Gaussian | CopulaFamily::StudentT if !(-1.0..=1.0).contains(&t) => {
                bad(format!("theta must lie in [-1, 1], got {t}"))
            }
            CopulaFamily::Clayton if t < -1.0 || t == 0.0 => {
                bad(format!("theta must satisfy theta >= -1 and theta != 0, got {t}"))
            }
            CopulaFamily::Gumbel if t < 1.0 => bad(format!("theta must be >= 1, got {t}")),
            CopulaFamily::Frank if t == 0.0 => bad("theta must be nonzero".into()),
            _ => Ok(()),
        }
    }
}

pub fn copula_cdf(family: CopulaFamily, params: CopulaParams, a: f64, b: f64) -> Result<f64> {
    Ok(Copula::new(family, params)?.cdf(a, b))
}

/// `h(v | u) = P(V <= v | U = u)`.
pub fn conditional_h(family: CopulaFamily, params: CopulaParams, v: f64, u: f64) -> Result<f64> {
    Ok(Copula::new(family, params)?.h(v, u))
}

/// Draw `m` pairs by conditional inversion: `u ~ U(0,1)`, `v = h^{-1}(w | u)`.
pub fn sample_copula<R: Rng + ?Sized>(
    family: CopulaFamily,
    params: CopulaParams,
    m: usize,
    rng: &mut R,
) -> Result<Vec<(f64, f64)>> {
    Ok(Copula::new(family, params)?.sample(m, rng))
}
