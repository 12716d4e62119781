use rand::Rng;

use super::bvn::bvn_cdf;
use super::bvt::bvt_cdf;
use super::special::{norm_cdf, norm_quantile, t_cdf, t_quantile};
use super::{CopulaFamily, CopulaParams};
use crate::error::Result;

/// A validated copula: family plus parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Copula {
    family: CopulaFamily,
    params: CopulaParams,
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Clayton with theta > 0 in log coordinates `a = -theta ln u`, `b = -theta ln v`:
/// returns `ln(e^a + e^b - 1)`.
fn clayton_ln_s(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    let rest = if lo > 30.0 { (lo - hi).exp() * -(-lo).exp_m1() } else { (-hi).exp() * lo.exp_m1() };
    hi + rest.ln_1p()
}

/// Frank bracket `1 + e^{-t(M-m)} - e^{-tM} - e^{-t(1-m)}` for theta > 0,
/// written with expm1 so it is accurate for small and large theta.
fn frank_bracket(theta: f64, a: f64, b: f64) -> f64 {
    let (m, big) = if a <= b { (a, b) } else { (b, a) };
    (-theta * (big - m)).exp_m1() - (-theta * big).exp_m1() - (-theta * (1.0 - m)).exp_m1()
}

fn frank_cdf_pos(theta: f64, a: f64, b: f64) -> f64 {
    let p = -(-theta * a).exp_m1();
    let q = -(-theta * b).exp_m1();
    let d = -(-theta).exp_m1();
    let t = p * q / d;
    if t < 0.5 {
        -(-t).ln_1p() / theta
    } else {
        a.min(b) - (frank_bracket(theta, a, b).ln() - d.ln()) / theta
    }
}

fn frank_h_pos(theta: f64, v: f64, u: f64) -> f64 {
    let q = -(-theta * v).exp_m1();
    let m = u.min(v);
    (-theta * (u - m)).exp() * q / frank_bracket(theta, u, v)
}

fn frank_h_inv_pos(theta: f64, w: f64, u: f64) -> f64 {
    let top = (w * (-theta * (1.0 - u)).exp_m1()).ln_1p();
    let bottom = ((1.0 - w) * (-theta * u).exp_m1()).ln_1p();
    u - (top - bottom) / theta
}

/// ln h(v|u) for Gumbel given `x = -ln u`, `y = -ln v`.
fn gumbel_ln_h(theta: f64, x: f64, y: f64) -> f64 {
    let l = x.max(y);
    let r = x.min(y) / l;
    let rho = r.powf(theta);
    let s = rho.ln_1p() / theta;
    -l * s.exp() + (theta - 1.0) * (x / l).ln() + (1.0 / theta - 1.0) * rho.ln_1p() + x
}

impl Copula {
    pub fn new(family: CopulaFamily, params: CopulaParams) -> Result<Self> {
        params.validate(family)?;
        Ok(Self { family, params })
    }

    pub fn family(&self) -> CopulaFamily {
        self.family
    }

    pub fn params(&self) -> CopulaParams {
        self.params
    }

    pub fn theta(&self) -> f64 {
        self.params.theta
    }

    fn nu(&self) -> f64 {
        self.params.nu.unwrap_or(super::DEFAULT_NU)
    }

    pub fn tau(&self) -> f64 {
        super::fit::tau_of(self)
    }

    pub fn cdf(&self, a: f64, b: f64) -> f64 {
        if a <= 0.0 || b <= 0.0 {
            return 0.0;
        }
        if a >= 1.0 {
            return b.min(1.0);
        }
        if b >= 1.0 {
            return a;
        }
        let theta = self.theta();
        let value = match self.family {
            CopulaFamily::Gaussian | CopulaFamily::StudentT if theta == 1.0 => a.min(b),
            CopulaFamily::Gaussian | CopulaFamily::StudentT if theta == -1.0 => (a + b - 1.0).max(0.0),
            CopulaFamily::Gaussian if theta == 0.0 => a * b,
            CopulaFamily::Gaussian => bvn_cdf(norm_quantile(a), norm_quantile(b), theta),
            CopulaFamily::StudentT => {
                let nu = self.nu();
                bvt_cdf(t_quantile(a, nu), t_quantile(b, nu), theta, nu)
            }
            CopulaFamily::Clayton if theta > 0.0 => {
                let ln_s = clayton_ln_s(-theta * a.ln(), -theta * b.ln());
                (-ln_s / theta).exp()
            }
            CopulaFamily::Clayton => {
                let s = a.powf(-theta) + b.powf(-theta) - 1.0;
                if s <= 0.0 {
                    0.0
                } else {
                    s.powf(-1.0 / theta)
                }
            }
            CopulaFamily::Gumbel => {
                let (x, y) = (-a.ln(), -b.ln());
                let l = x.max(y);
                let r = x.min(y) / l;
                let s = (r.powf(theta).ln_1p() / theta).exp();
                (-l * s).exp()
            }
            CopulaFamily::Frank if theta > 0.0 => frank_cdf_pos(theta, a, b),
            CopulaFamily::Frank => a - frank_cdf_pos(-theta, a, 1.0 - b),
        };
        // Fréchet–Hoeffding bounds hold exactly; trim rounding excursions.
        value.clamp((a + b - 1.0).max(0.0), a.min(b))
    }

    /// Conditional distribution `h(v | u) = dC(u, v)/du` for `u` in (0, 1).
    pub fn h(&self, v: f64, u: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        if v >= 1.0 {
            return 1.0;
        }
        let theta = self.theta();
        let value = match self.family {
            CopulaFamily::Gaussian | CopulaFamily::StudentT if theta == 1.0 => step(v >= u),
            CopulaFamily::Gaussian | CopulaFamily::StudentT if theta == -1.0 => step(u + v >= 1.0),
            CopulaFamily::Gaussian if theta == 0.0 => v,
            CopulaFamily::Gaussian => {
                let s = (1.0 - theta * theta).sqrt();
                norm_cdf((norm_quantile(v) - theta * norm_quantile(u)) / s)
            }
            CopulaFamily::StudentT => {
                let nu = self.nu();
                let x1 = t_quantile(u, nu);
                let x2 = t_quantile(v, nu);
                let scale = ((nu + x1 * x1) * (1.0 - theta * theta) / (nu + 1.0)).sqrt();
                t_cdf((x2 - theta * x1) / scale, nu + 1.0)
            }
            CopulaFamily::Clayton if theta > 0.0 => {
                let a = -theta * u.ln();
                let ln_s = clayton_ln_s(a, -theta * v.ln());
                ((1.0 + 1.0 / theta) * (a - ln_s)).exp()
            }
            CopulaFamily::Clayton => {
                let s = u.powf(-theta) + v.powf(-theta) - 1.0;
                if s <= 0.0 {
                    0.0
                } else {
                    u.powf(-theta - 1.0) * s.powf(-1.0 / theta - 1.0)
                }
            }
            CopulaFamily::Gumbel => gumbel_ln_h(theta, -u.ln(), -v.ln()).exp(),
            CopulaFamily::Frank if theta > 0.0 => frank_h_pos(theta, v, u),
            CopulaFamily::Frank => 1.0 - frank_h_pos(-theta, 1.0 - v, u),
        };
        value.clamp(0.0, 1.0)
    }

    /// Inverse of `h(. | u)`: the `v` with `h(v | u) = w`.
    pub fn h_inv(&self, w: f64, u: f64) -> f64 {
        if w <= 0.0 {
            return 0.0;
        }
        if w >= 1.0 {
            return 1.0;
        }
        let theta = self.theta();
        let v = match self.family {
            CopulaFamily::Gaussian | CopulaFamily::StudentT if theta == 1.0 => u,
            CopulaFamily::Gaussian | CopulaFamily::StudentT if theta == -1.0 => 1.0 - u,
            CopulaFamily::Gaussian => {
                let s = (1.0 - theta * theta).sqrt();
                norm_cdf(theta * norm_quantile(u) + s * norm_quantile(w))
            }
            CopulaFamily::StudentT => {
                let nu = self.nu();
                let x1 = t_quantile(u, nu);
                let scale = ((nu + x1 * x1) * (1.0 - theta * theta) / (nu + 1.0)).sqrt();
                t_cdf(theta * x1 + scale * t_quantile(w, nu + 1.0), nu)
            }
            CopulaFamily::Clayton if theta > 0.0 => {
                let a = -theta * u.ln();
                let g = -theta / (1.0 + theta) * w.ln();
                (-softplus(g.exp_m1().ln() + a) / theta).exp()
            }
            CopulaFamily::Clayton if theta == -1.0 => 1.0 - u,
            CopulaFamily::Clayton => {
                let base = (w.powf(-theta / (1.0 + theta)) - 1.0) * u.powf(-theta) + 1.0;
                base.max(0.0).powf(-1.0 / theta)
            }
            CopulaFamily::Gumbel => self.h_inv_bisect(w, u),
            CopulaFamily::Frank if theta > 0.0 => frank_h_inv_pos(theta, w, u),
            CopulaFamily::Frank => 1.0 - frank_h_inv_pos(-theta, 1.0 - w, u),
        };
        v.clamp(0.0, 1.0)
    }

    /// Generic monotone inversion of `h(. | u)` by bisection.
    fn h_inv_bisect(&self, w: f64, u: f64) -> f64 {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.h(mid, u) < w {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn sample<R: Rng + ?Sized>(&self, m: usize, rng: &mut R) -> Vec<(f64, f64)> {
        let mut open = || loop {
            let x: f64 = rng.random();
            if x > 0.0 {
                return x;
            }
        };
        (0..m)
            .map(|_| {
                let u = open();
                let w = open();
                (u, self.h_inv(w, u))
            })
            .collect()
    }

    /// Precompute the `v`-side of `h(v | u)` on fixed nodes.
    pub fn h_grid(&self, nodes: &[f64]) -> HGrid {
        let theta = self.theta();
        let transformed = match self.family {
            CopulaFamily::Gaussian => nodes.iter().map(|&v| norm_quantile(v)).collect(),
            CopulaFamily::StudentT => nodes.iter().map(|&v| t_quantile(v, self.nu())).collect(),
            CopulaFamily::Clayton if theta > 0.0 => nodes.iter().map(|&v| -theta * v.ln()).collect(),
            CopulaFamily::Gumbel => nodes.iter().map(|&v| -v.ln()).collect(),
            _ => Vec::new(),
        };
        HGrid { copula: *self, nodes: nodes.to_vec(), transformed }
    }
}

fn step(cond: bool) -> f64 {
    if cond {
        1.0
    } else {
        0.0
    }
}

/// `h(v_j | u)` for a fixed set of nodes `v_j` in (0, 1), with the
/// node-dependent transforms cached.
#[derive(Debug, Clone)]
pub struct HGrid {
    copula: Copula,
    nodes: Vec<f64>,
    transformed: Vec<f64>,
}

impl HGrid {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Fill `out[j] = h(nodes[j] | u)`.
    pub fn eval_into(&self, u: f64, out: &mut [f64]) {
        assert_eq!(out.len(), self.nodes.len());
        let c = &self.copula;
        let theta = c.theta();
        let fast = !self.transformed.is_empty() && theta.abs() != 1.0;
        match c.family {
            CopulaFamily::Gaussian if fast && theta != 0.0 => {
                let s = (1.0 - theta * theta).sqrt();
                let shift = theta * norm_quantile(u);
                for (o, z) in out.iter_mut().zip(&self.transformed) {
                    *o = norm_cdf((z - shift) / s);
                }
            }
            CopulaFamily::StudentT if fast => {
                let nu = c.nu();
                let x1 = t_quantile(u, nu);
                let scale = ((nu + x1 * x1) * (1.0 - theta * theta) / (nu + 1.0)).sqrt();
                let shift = theta * x1;
                for (o, x2) in out.iter_mut().zip(&self.transformed) {
                    *o = t_cdf((x2 - shift) / scale, nu + 1.0);
                }
            }
            CopulaFamily::Clayton if fast => {
                let a = -theta * u.ln();
                let e = 1.0 + 1.0 / theta;
                for (o, b) in out.iter_mut().zip(&self.transformed) {
                    *o = (e * (a - clayton_ln_s(a, *b))).exp().clamp(0.0, 1.0);
                }
            }
            CopulaFamily::Gumbel if fast => {
                let x = -u.ln();
                for (o, y) in out.iter_mut().zip(&self.transformed) {
                    *o = gumbel_ln_h(theta, x, *y).exp().clamp(0.0, 1.0);
                }
            }
            _ => {
                for (o, v) in out.iter_mut().zip(&self.nodes) {
                    *o = c.h(*v, u);
                }
            }
        }
    }
}
