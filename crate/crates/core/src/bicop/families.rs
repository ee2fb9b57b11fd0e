//! Unrotated family formulas. Arguments are assumed clamped into (0, 1).
//!
//! Every base family here is exchangeable, so a single conditional
//! distribution `h(u | v) = dC(u, v)/dv` and its inverse suffice; rotations
//! are applied one level up.

use super::bvn::bvn_cdf;
use super::Family;
use crate::error::Result;
use crate::numeric::{find_root, integrate};
use crate::special::{norm_cdf, norm_ppf, t_cdf, t_pdf, t_ppf};
use statrs::function::gamma::ln_gamma;

pub(crate) const EPS: f64 = 1e-10;

/// `ln(1 + e^x)` without overflow.
fn ln1p_exp(x: f64) -> f64 {
    if x > 35.0 {
        x + (-x).exp()
    } else {
        x.exp().ln_1p()
    }
}

/// `ln(u^-d + v^-d - 1)` for `d > 0`.
fn clayton_log_sum(u: f64, v: f64, d: f64) -> f64 {
    let a = -d * u.ln();
    let b = -d * v.ln();
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo.exp_m1() * (-hi).exp()).ln_1p()
}

/// `ln(x^t + y^t)` for positive `x, y`.
fn gumbel_log_sum(x: f64, y: f64, t: f64) -> f64 {
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    t * hi.ln() + (lo / hi).powf(t).ln_1p()
}

pub(crate) fn cdf(family: Family, p: &[f64], u: f64, v: f64) -> f64 {
    match family {
        Family::Independence => u * v,
        Family::Gaussian => bvn_cdf(norm_ppf(u), norm_ppf(v), p[0]),
        Family::StudentT => {
            // C(u, v) = int_{-inf}^{y_v} t(y) T_{nu+1}((x - r y) / s(y)) dy with y = tan(theta)
            let (r, nu) = (p[0], p[1]);
            let x = t_ppf(u, nu);
            let yv = t_ppf(v, nu);
            let s2 = (1.0 - r * r) / (nu + 1.0);
            let f = |th: f64| {
                let c = th.cos();
                if c <= 0.0 {
                    return 0.0;
                }
                let y = th.tan();
                t_pdf(y, nu) * t_cdf((x - r * y) / ((nu + y * y) * s2).sqrt(), nu + 1.0) / (c * c)
            };
            integrate(f, -std::f64::consts::FRAC_PI_2, yv.atan(), 1e-13).clamp(0.0, u.min(v))
        }
        Family::Clayton => (-clayton_log_sum(u, v, p[0]) / p[0]).exp(),
        Family::Gumbel => {
            let t = p[0];
            let ls = gumbel_log_sum(-u.ln(), -v.ln(), t);
            (-(ls / t).exp()).exp()
        }
        Family::Frank => {
            let t = p[0];
            let eu = (-t * u).exp_m1();
            let ev = (-t * v).exp_m1();
            let e1 = (-t).exp_m1();
            -(eu * ev / e1).ln_1p() / t
        }
        Family::Joe => {
            let t = p[0];
            let a = (1.0 - u).powf(t);
            let b = (1.0 - v).powf(t);
            1.0 - (a + b - a * b).powf(1.0 / t)
        }
    }
}

pub(crate) fn ln_pdf(family: Family, p: &[f64], u: f64, v: f64) -> f64 {
    match family {
        Family::Independence => 0.0,
        Family::Gaussian => {
            let r = p[0];
            let x = norm_ppf(u);
            let y = norm_ppf(v);
            let s = 1.0 - r * r;
            -0.5 * s.ln() - (r * r * (x * x + y * y) - 2.0 * r * x * y) / (2.0 * s)
        }
        Family::StudentT => {
            let (r, nu) = (p[0], p[1]);
            let x = t_ppf(u, nu);
            let y = t_ppf(v, nu);
            student_ln_pdf(r, nu, student_const(nu), x, y)
        }
        Family::Clayton => {
            let d = p[0];
            (1.0 + d).ln() + (-1.0 - d) * (u.ln() + v.ln())
                + (-1.0 / d - 2.0) * clayton_log_sum(u, v, d)
        }
        Family::Gumbel => {
            let t = p[0];
            let x = -u.ln();
            let y = -v.ln();
            let ls = gumbel_log_sum(x, y, t);
            let a = (ls / t).exp();
            -a + x + y + (t - 1.0) * (x.ln() + y.ln()) + (2.0 / t - 2.0) * ls
                + ((t - 1.0) / a).ln_1p()
        }
        Family::Frank => {
            let t = p[0];
            let eu = (-t * u).exp_m1();
            let ev = (-t * v).exp_m1();
            let e1 = (-t).exp_m1();
            (t * -e1).ln() - t * (u + v) - 2.0 * (-e1 - eu * ev).abs().ln()
        }
        Family::Joe => {
            let t = p[0];
            let lu = (1.0 - u).ln();
            let lv = (1.0 - v).ln();
            let a = (t * lu).exp();
            let b = (t * lv).exp();
            let s = a + b - a * b;
            (1.0 / t - 2.0) * s.ln() + (t - 1.0) * (lu + lv) + (t - 1.0 + s).ln()
        }
    }
}

/// Parameter-only part of the Student-t copula log density.
pub(crate) fn student_const(nu: f64) -> f64 {
    ln_gamma(0.5 * (nu + 2.0)) + ln_gamma(0.5 * nu) - 2.0 * ln_gamma(0.5 * (nu + 1.0))
}

/// Student-t copula log density on the t scale (`x = T^-1(u)`, `y = T^-1(v)`).
pub(crate) fn student_ln_pdf(r: f64, nu: f64, konst: f64, x: f64, y: f64) -> f64 {
    let s = 1.0 - r * r;
    konst - 0.5 * s.ln()
        - 0.5 * (nu + 2.0) * ((x * x + y * y - 2.0 * r * x * y) / (nu * s)).ln_1p()
        + 0.5 * (nu + 1.0) * ((x * x / nu).ln_1p() + (y * y / nu).ln_1p())
}

/// `h(u | v) = dC(u, v) / dv`.
pub(crate) fn h(family: Family, p: &[f64], u: f64, v: f64) -> f64 {
    let out = match family {
        Family::Independence => u,
        Family::Gaussian => {
            let r = p[0];
            norm_cdf((norm_ppf(u) - r * norm_ppf(v)) / (1.0 - r * r).sqrt())
        }
        Family::StudentT => {
            let (r, nu) = (p[0], p[1]);
            let x = t_ppf(u, nu);
            let y = t_ppf(v, nu);
            let scale = ((nu + y * y) * (1.0 - r * r) / (nu + 1.0)).sqrt();
            t_cdf((x - r * y) / scale, nu + 1.0)
        }
        Family::Clayton => {
            let d = p[0];
            ((-d - 1.0) * v.ln() + (-1.0 / d - 1.0) * clayton_log_sum(u, v, d)).exp()
        }
        Family::Gumbel => {
            let t = p[0];
            let x = -u.ln();
            let y = -v.ln();
            let ls = gumbel_log_sum(x, y, t);
            (-(ls / t).exp() + y + (t - 1.0) * y.ln() + (1.0 / t - 1.0) * ls).exp()
        }
        Family::Frank => {
            let t = p[0];
            let eu = (-t * u).exp_m1();
            let ev = (-t * v).exp_m1();
            let e1 = (-t).exp_m1();
            (ev + 1.0) * eu / (e1 + eu * ev)
        }
        Family::Joe => {
            let t = p[0];
            let a = (1.0 - u).powf(t);
            let lv = (1.0 - v).ln();
            let b = (t * lv).exp();
            let s = a + b - a * b;
            ((1.0 / t - 1.0) * s.ln() + (t - 1.0) * lv).exp() * (1.0 - a)
        }
    };
    out.clamp(0.0, 1.0)
}

/// Inverse of `h(. | v)`: the `u` with `h(u | v) = q`.
pub(crate) fn hinv(family: Family, p: &[f64], q: f64, v: f64) -> Result<f64> {
    let out = match family {
        Family::Independence => q,
        Family::Gaussian => {
            let r = p[0];
            norm_cdf(norm_ppf(q) * (1.0 - r * r).sqrt() + r * norm_ppf(v))
        }
        Family::StudentT => {
            let (r, nu) = (p[0], p[1]);
            let y = t_ppf(v, nu);
            let scale = ((nu + y * y) * (1.0 - r * r) / (nu + 1.0)).sqrt();
            t_cdf(t_ppf(q, nu + 1.0) * scale + r * y, nu)
        }
        Family::Clayton => {
            let d = p[0];
            let a = (-d / (1.0 + d) * q.ln()).exp_m1();
            let ln_term = ln1p_exp(a.ln() - d * v.ln());
            (-ln_term / d).exp()
        }
        Family::Frank => {
            let t = p[0];
            let e1 = (-t).exp_m1();
            let ev = (-t * v).exp();
            -(q * e1 / (q + (1.0 - q) * ev)).ln_1p() / t
        }
        Family::Gumbel | Family::Joe => {
            if h(family, p, EPS, v) >= q {
                return Ok(EPS);
            }
            if h(family, p, 1.0 - EPS, v) <= q {
                return Ok(1.0 - EPS);
            }
            return find_root(|u| h(family, p, u, v) - q, EPS, 1.0 - EPS, 1e-15, 200)
                .map_err(|e| match e {
                    crate::error::Error::Numeric { detail, .. } => crate::error::Error::numeric(
                        "hinv",
                        format!("{family:?} {p:?}, q={q}, v={v}: {detail}"),
                    ),
                    other => other,
                });
        }
    };
    Ok(out.clamp(EPS, 1.0 - EPS))
}

/// Kendall's tau of the unrotated family.
pub(crate) fn tau(family: Family, p: &[f64]) -> f64 {
    match family {
        Family::Independence => 0.0,
        Family::Gaussian | Family::StudentT => 2.0 / std::f64::consts::PI * p[0].asin(),
        Family::Clayton => p[0] / (p[0] + 2.0),
        Family::Gumbel => 1.0 - 1.0 / p[0],
        Family::Frank => frank_tau(p[0]),
        Family::Joe => joe_tau(p[0]),
    }
}

/// Debye function `D1(x) = (1/x) int_0^x t / (e^t - 1) dt` for `x > 0`.
pub(crate) fn debye1(x: f64) -> f64 {
    let f = |t: f64| if t == 0.0 { 1.0 } else { t / t.exp_m1() };
    integrate(f, 0.0, x, 1e-15) / x
}

fn frank_tau(t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let a = t.abs();
    let tau = 1.0 - 4.0 / a * (1.0 - debye1(a));
    tau.copysign(t)
}

/// `tau = 1 + (4/t) int_0^1 (1 - s^t) ln(1 - s^t) s^(1-t) ds`.
pub(crate) fn joe_tau(t: f64) -> f64 {
    if t <= 1.0 {
        return 0.0;
    }
    let f = |s: f64| {
        if s <= 0.0 || s >= 1.0 {
            return 0.0;
        }
        let st = s.powf(t);
        // ln(1 - s^t) s^(1-t) = [ln(1 - s^t) / s^t] s
        let ratio = if st < 1e-300 { -1.0 } else { (-st).ln_1p() / st };
        (1.0 - st) * ratio * s
    };
    1.0 + 4.0 / t * integrate(f, 0.0, 1.0, 1e-15)
}
