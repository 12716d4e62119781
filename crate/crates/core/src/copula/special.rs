//! Univariate normal and Student t distribution functions, and the Debye
//! function used by the Frank copula.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use statrs::function::beta::{beta_reg, inv_beta_reg};
use statrs::function::erf::erfc_inv;
use statrs::function::gamma::ln_gamma;

use crate::quad;

pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

pub fn norm_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let x = -SQRT_2 * erfc_inv(2.0 * p);
    if !x.is_finite() {
        return x;
    }
    // one Halley step against the accurate cdf
    let e = if p < 0.5 { norm_cdf(x) - p } else { (1.0 - p) - norm_cdf(-x) };
    let d = e / norm_pdf(x);
    x - d / (1.0 + 0.5 * x * d)
}

/// Largest dof for which the finite trigonometric series is used.
const SERIES_DOF_MAX: f64 = 60.0;

/// Student t CDF. Integer degrees of freedom up to 60 use the finite
/// trigonometric series; everything else goes through the regularized
/// incomplete beta function.
pub fn t_cdf(x: f64, nu: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == f64::INFINITY {
        return 1.0;
    }
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    if nu.fract() == 0.0 && (1.0..=SERIES_DOF_MAX).contains(&nu) {
        return t_cdf_integer(x, nu as u32);
    }
    let tail = 0.5 * beta_reg(0.5 * nu, 0.5, nu / (nu + x * x));
    if x > 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// P(T <= x) for integer dof via A(x | nu) = P(|T| <= |x|).
fn t_cdf_integer(x: f64, nu: u32) -> f64 {
    let theta = (x.abs() / (nu as f64).sqrt()).atan();
    let (s, c) = theta.sin_cos();
    let c2 = c * c;
    let a = if nu % 2 == 1 {
        let mut sum = 0.0;
        if nu > 1 {
            let mut term = c;
            sum = term;
            let mut k = 3;
            while k <= nu - 2 {
                term *= c2 * (k - 1) as f64 / k as f64;
                sum += term;
                k += 2;
            }
        }
        2.0 / PI * (theta + s * sum)
    } else {
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 2;
        while k <= nu - 2 {
            term *= c2 * (k - 1) as f64 / k as f64;
            sum += term;
            k += 2;
        }
        s * sum
    };
    if x >= 0.0 {
        0.5 + 0.5 * a
    } else {
        0.5 - 0.5 * a
    }
}

pub fn t_pdf(x: f64, nu: f64) -> f64 {
    let ln_norm = ln_gamma(0.5 * (nu + 1.0)) - ln_gamma(0.5 * nu) - 0.5 * (nu * PI).ln();
    (ln_norm - 0.5 * (nu + 1.0) * (x * x / nu).ln_1p()).exp()
}

/// Student t quantile: incomplete-beta inversion polished by Newton steps.
pub fn t_quantile(p: f64, nu: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    if p == 0.5 {
        return 0.0;
    }
    let lower = p.min(1.0 - p);
    let z = inv_beta_reg(0.5 * nu, 0.5, 2.0 * lower);
    let mut x = -(nu * (1.0 - z) / z).sqrt();
    if p > 0.5 {
        x = -x;
    }
    if !x.is_finite() {
        return x;
    }
    for _ in 0..3 {
        let f = t_pdf(x, nu);
        if f <= 0.0 {
            break;
        }
        let step = (t_cdf(x, nu) - p) / f;
        x -= step;
        if step.abs() <= 1e-15 * x.abs().max(1.0) {
            break;
        }
    }
    x
}

/// `t^k / (e^t - 1)` with the removable singularity at zero handled by its
/// series.
fn debye_integrand(t: f64, k: u32) -> f64 {
    if t.abs() < 1e-4 {
        // t/(e^t - 1) = 1 - t/2 + t^2/12 - t^4/720 + ...
        let t2 = t * t;
        let base = 1.0 - 0.5 * t + t2 / 12.0 - t2 * t2 / 720.0;
        return t.powi(k as i32 - 1) * base;
    }
    t.powi(k as i32) / t.exp_m1()
}

/// Debye function `D_k(a) = k / a^k * int_0^a t^k / (e^t - 1) dt`.
///
/// `a` may be negative. For positive `a` beyond 60 the integrand tail is
/// below double precision and the upper limit is truncated.
pub fn debye(k: u32, alpha: f64) -> f64 {
    assert!(k >= 1, "debye order must be at least 1");
    if alpha == 0.0 {
        return 1.0;
    }
    let upper = alpha.min(60.0);
    let integral = quad::integrate(|t| debye_integrand(t, k), 0.0, upper, 1e-15, 1e-14);
    k as f64 * integral / alpha.powi(k as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_basics() {
        assert_eq!(norm_cdf(0.0), 0.5);
        assert!((norm_cdf(1.96) - 0.975_002_104_851_780).abs() < 1e-12);
        for &p in &[1e-10, 0.01, 0.3, 0.5, 0.77, 0.999] {
            assert!((norm_cdf(norm_quantile(p)) - p).abs() < 1e-13 * p.max(1e-3));
        }
    }

    #[test]
    fn t_cdf_series_matches_beta() {
        for nu in 1..=12u32 {
            for &x in &[-7.5, -2.0, -0.3, 0.0, 0.4, 1.7, 9.0] {
                let series = t_cdf(x, nu as f64);
                let tail = 0.5 * beta_reg(0.5 * nu as f64, 0.5, nu as f64 / (nu as f64 + x * x));
                let reference = if x > 0.0 { 1.0 - tail } else { tail };
                assert!((series - reference).abs() < 1e-13, "nu={nu} x={x} {series} {reference}");
            }
        }
    }

    #[test]
    fn t_cdf_known_values() {
        // Cauchy
        assert!((t_cdf(1.0, 1.0) - 0.75).abs() < 1e-15);
        // nu = 2 closed form: 1/2 + x / (2 sqrt(2 + x^2))
        let x: f64 = 1.3;
        assert!((t_cdf(x, 2.0) - (0.5 + x / (2.0 * (2.0 + x * x).sqrt()))).abs() < 1e-15);
    }

    #[test]
    fn t_quantile_roundtrip() {
        for &nu in &[1.0, 2.5, 4.0, 5.0, 30.0] {
            for &p in &[1e-6, 0.025, 0.2, 0.5, 0.8, 0.975, 1.0 - 1e-6] {
                let q = t_quantile(p, nu);
                assert!((t_cdf(q, nu) - p).abs() < 1e-12, "nu={nu} p={p}");
            }
        }
    }

    /// Composite Simpson with a large fixed panel count, independent of the
    /// adaptive Kronrod path.
    fn simpson_debye(k: u32, alpha: f64, panels: usize) -> f64 {
        let h = alpha / panels as f64;
        let f = |t: f64| {
            if t == 0.0 {
                if k == 1 {
                    1.0
                } else {
                    0.0
                }
            } else {
                t.powi(k as i32) / (t.exp() - 1.0)
            }
        };
        let mut s = f(0.0) + f(alpha);
        for i in 1..panels {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(i as f64 * h);
        }
        k as f64 * s * h / 3.0 / alpha.powi(k as i32)
    }

    #[test]
    fn debye_small_argument_limit() {
        assert!((debye(1, 1e-6) - 1.0).abs() < 1e-5);
        assert!((debye(2, 1e-6) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn debye_one_against_simpson() {
        let oracle = simpson_debye(1, 1.0, 20_000);
        assert!((oracle - 0.777_505).abs() < 1e-6);
        assert!((debye(1, 1.0) - oracle).abs() < 1e-12);
        for &a in &[0.1, 2.0, 7.5, 25.0, -3.0] {
            let o = simpson_debye(1, a, 20_000);
            assert!((debye(1, a) - o).abs() < 1e-10, "a={a}");
            let o2 = simpson_debye(2, a, 20_000);
            assert!((debye(2, a) - o2).abs() < 1e-10, "a={a}");
        }
    }

    #[test]
    fn debye_reflection() {
        let a = 2.0;
        assert!((debye(1, -a) - (debye(1, a) + a / 2.0)).abs() < 1e-8);
    }

    #[test]
    fn debye_large_argument() {
        // D_1(a) -> pi^2 / (6 a)
        let a = 1e4;
        assert!((debye(1, a) - PI * PI / 6.0 / a).abs() < 1e-15);
    }
}
