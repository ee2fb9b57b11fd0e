//! Univariate normal and Student-t distribution functions.

use statrs::function::beta::{beta_reg, inv_beta_reg};
use statrs::function::erf::erfc_inv;
use statrs::function::gamma::ln_gamma;
use std::f64::consts::{PI, SQRT_2};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x - LN_SQRT_2PI).exp()
}

pub fn norm_ppf(p: f64) -> f64 {
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
    let e = if x < 0.0 { norm_cdf(x) - p } else { (1.0 - p) - norm_cdf(-x) };
    let u = e / norm_pdf(x);
    x - u / (1.0 + 0.5 * x * u)
}

/// Log density of the standard Student-t distribution.
pub fn t_ln_pdf(x: f64, nu: f64) -> f64 {
    ln_gamma(0.5 * (nu + 1.0))
        - ln_gamma(0.5 * nu)
        - 0.5 * (nu * PI).ln()
        - 0.5 * (nu + 1.0) * (x * x / nu).ln_1p()
}

pub fn t_pdf(x: f64, nu: f64) -> f64 {
    t_ln_pdf(x, nu).exp()
}

pub fn t_cdf(x: f64, nu: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_infinite() {
        return if x > 0.0 { 1.0 } else { 0.0 };
    }
    let tail = 0.5 * beta_reg(0.5 * nu, 0.5, nu / (nu + x * x));
    if x <= 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

/// Quantile of the standard Student-t distribution with `nu` degrees of freedom
/// (not necessarily integral).
pub fn t_ppf(p: f64, nu: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    if p > 0.5 {
        return -t_ppf(1.0 - p, nu);
    }
    if p == 0.5 {
        return 0.0;
    }
    if nu >= 1e5 {
        // Cornish-Fisher expansion around the normal quantile.
        let z = norm_ppf(p);
        let z3 = z * z * z;
        let z5 = z3 * z * z;
        let g1 = (z3 + z) / 4.0;
        let g2 = (5.0 * z5 + 16.0 * z3 + 3.0 * z) / 96.0;
        return z + g1 / nu + g2 / (nu * nu);
    }
    let w = inv_beta_reg(0.5 * nu, 0.5, 2.0 * p);
    let mut x = if w > 0.0 {
        -(nu * (1.0 / w - 1.0)).sqrt()
    } else {
        f64::NEG_INFINITY
    };
    if !x.is_finite() {
        return x;
    }
    for _ in 0..4 {
        let f = t_cdf(x, nu) - p;
        let d = t_pdf(x, nu);
        if d <= 0.0 || !d.is_finite() {
            break;
        }
        let step = f / d;
        x -= step;
        if step.abs() <= 1e-15 * (1.0 + x.abs()) {
            break;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_reference_values() {
        assert!((norm_cdf(1.959_963_984_540_054) - 0.975).abs() < 1e-15);
        assert!((norm_ppf(0.95) - 1.644_853_626_951_472_2).abs() < 1e-14);
        assert_eq!(norm_ppf(0.5), 0.0);
    }

    #[test]
    fn t_round_trip_fractional_df() {
        for &nu in &[2.0, 2.7, 4.0, 11.3, 30.0, 31.0] {
            for i in 1..100 {
                let p = i as f64 / 100.0;
                let x = t_ppf(p, nu);
                assert!((t_cdf(x, nu) - p).abs() < 1e-14, "nu={nu} p={p}");
            }
        }
    }

    #[test]
    fn t_reference_values() {
        // t_{4}: 0.975 quantile 2.776445105
        assert!((t_ppf(0.975, 4.0) - 2.776_445_105_197_793).abs() < 1e-10);
        // t_{1} is Cauchy.
        assert!((t_cdf(1.0, 1.0) - 0.75).abs() < 1e-14);
    }

    #[test]
    fn large_df_approaches_normal() {
        let q = t_ppf(0.95, 1e8);
        assert!((q - norm_ppf(0.95)).abs() < 1e-7);
    }
}
