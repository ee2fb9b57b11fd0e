//! Maximum-likelihood fitting and family selection for pair copulas.

use super::families::{student_const, student_ln_pdf, EPS};
use super::{tau_to_param, BiCop, Family, Rotation};
use crate::error::{Error, Result};
use crate::numeric::{brent_minimize, kendall_tau};
use crate::special::{norm_cdf, t_ppf};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Model selection criterion used for pair copulas and for the vine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum FitCriterion {
    #[serde(rename = "ll")]
    LogLik,
    #[default]
    #[serde(rename = "aic")]
    Aic,
    #[serde(rename = "bic")]
    Bic,
}

impl FitCriterion {
    /// Criterion value in "smaller is better" orientation.
    pub fn score(self, loglik: f64, n_params: usize, n: usize) -> f64 {
        match self {
            FitCriterion::LogLik => -loglik,
            FitCriterion::Aic => -2.0 * loglik + 2.0 * n_params as f64,
            FitCriterion::Bic => -2.0 * loglik + (n as f64).ln() * n_params as f64,
        }
    }

    /// Value as reported: the log-likelihood itself for `LogLik`, the
    /// corrected `-2 ll + penalty` otherwise.
    pub fn reported(self, loglik: f64, n_params: usize, n: usize) -> f64 {
        match self {
            FitCriterion::LogLik => loglik,
            _ => self.score(loglik, n_params, n),
        }
    }
}

impl fmt::Display for FitCriterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitCriterion::LogLik => "ll",
            FitCriterion::Aic => "aic",
            FitCriterion::Bic => "bic",
        })
    }
}

impl FromStr for FitCriterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ll" | "loglik" | "cll" => Ok(FitCriterion::LogLik),
            "aic" => Ok(FitCriterion::Aic),
            "bic" => Ok(FitCriterion::Bic),
            other => Err(Error::Input(format!("unknown criterion '{other}' (expected ll, aic or bic)"))),
        }
    }
}

/// Result of fitting a pair copula to data.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedPair {
    pub copula: BiCop,
    pub loglik: f64,
    pub n: usize,
    /// A parameter ended on the edge of the family box.
    pub at_boundary: bool,
    /// Data were degenerate (|tau| = 1); parameters clamped to the box.
    pub degenerate: bool,
    /// Every candidate fit failed and independence was returned instead.
    pub fallback: bool,
}

impl FittedPair {
    fn independence(n: usize) -> Self {
        FittedPair {
            copula: BiCop::independence(),
            loglik: 0.0,
            n,
            at_boundary: false,
            degenerate: false,
            fallback: false,
        }
    }

    pub fn score(&self, criterion: FitCriterion) -> f64 {
        criterion.score(self.loglik, self.copula.n_params(), self.n)
    }
}

/// Fitting bounds, slightly inside the open ends of each family box.
fn fit_bounds(family: Family, tau_sign: f64) -> Vec<(f64, f64)> {
    match family {
        Family::Independence => vec![],
        Family::Gaussian => vec![(-0.9999, 0.9999)],
        Family::StudentT => vec![(-0.9999, 0.9999), (2.0, 30.0)],
        Family::Clayton => vec![(1e-4, 28.0)],
        Family::Gumbel => vec![(1.0, 17.0)],
        Family::Joe => vec![(1.0 + 1e-4, 30.0)],
        Family::Frank => {
            if tau_sign < 0.0 {
                vec![(-35.0, -1e-4)]
            } else {
                vec![(1e-4, 35.0)]
            }
        }
    }
}

fn check_data(data: &[[f64; 2]]) -> Result<Vec<[f64; 2]>> {
    if data.len() < 10 {
        return Err(Error::domain(format!("pair fit needs n >= 10, got {}", data.len())));
    }
    data.iter()
        .map(|&[u, v]| {
            if !(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0) {
                Err(Error::domain(format!("pair data ({u}, {v}) outside (0,1)^2")))
            } else {
                Ok([u.clamp(EPS, 1.0 - EPS), v.clamp(EPS, 1.0 - EPS)])
            }
        })
        .collect()
}

fn loglik(c: &BiCop, data: &[[f64; 2]]) -> f64 {
    let ll: f64 = data.iter().map(|&[u, v]| c.ln_pdf(u, v)).sum();
    if ll.is_nan() {
        f64::NEG_INFINITY
    } else {
        ll
    }
}

fn sample_tau(data: &[[f64; 2]]) -> f64 {
    let (x, y): (Vec<f64>, Vec<f64>) = data.iter().map(|&[u, v]| (u, v)).unzip();
    kendall_tau(&x, &y)
}

/// Maximum-likelihood fit of one family/rotation. Starting values come from
/// inverting Kendall's tau; Student-t is profiled over the degrees of freedom.
pub fn fit_bicop_mle(data: &[[f64; 2]], family: Family, rotation: Rotation) -> Result<FittedPair> {
    let data = check_data(data)?;
    fit_checked(&data, family, rotation, sample_tau(&data))
}

fn fit_checked(data: &[[f64; 2]], family: Family, rotation: Rotation, tau: f64) -> Result<FittedPair> {
    let n = data.len();
    if family == Family::Independence {
        return Ok(FittedPair::independence(n));
    }
    if rotation != Rotation::R0 && !family.is_rotatable() {
        return Err(Error::domain(format!("{family} admits no rotation")));
    }
    // Parameters of the unrotated family move with |tau| for rotated fits.
    let eff_tau = if rotation.flips_sign() { -tau } else { tau };
    let bounds = fit_bounds(family, eff_tau);
    let degenerate = tau.abs() >= 1.0 - 1e-12;

    let init = |lo: f64, hi: f64| -> f64 {
        let t = eff_tau.clamp(-0.999, 0.999);
        tau_to_param(family, Rotation::R0, t)
            .map(|p| p[0])
            .unwrap_or(if eff_tau > 0.0 { hi } else { lo })
            .clamp(lo, hi)
    };

    let params = if degenerate {
        let (lo, hi) = bounds[0];
        let edge = if eff_tau > 0.0 { hi } else { lo };
        match family {
            Family::StudentT => vec![edge, bounds[1].1],
            _ => vec![edge],
        }
    } else if family == Family::StudentT {
        fit_student(data, bounds[0], bounds[1], init(bounds[0].0, bounds[0].1))
    } else {
        let (lo, hi) = bounds[0];
        let x0 = init(lo, hi);
        let nll = |p: f64| match BiCop::new(family, rotation, &[p]) {
            Ok(c) => -loglik(&c, data),
            Err(_) => f64::INFINITY,
        };
        let (best, _) = brent_minimize(nll, lo, hi, x0, 1e-8, 200);
        vec![best]
    };

    let copula = BiCop::new(family, rotation, &params)?;
    let ll = loglik(&copula, data);
    if !ll.is_finite() {
        return Err(Error::numeric(
            "fit_bicop_mle",
            format!("non-finite log-likelihood for {copula}"),
        ));
    }
    Ok(FittedPair {
        at_boundary: copula.at_boundary(),
        copula,
        loglik: ll,
        n,
        degenerate,
        fallback: false,
    })
}

/// Profile likelihood over `nu`: the inner correlation fit reuses the t-scale
/// data for each trial `nu`.
fn fit_student(data: &[[f64; 2]], rho_b: (f64, f64), nu_b: (f64, f64), rho0: f64) -> Vec<f64> {
    let profile = |nu: f64| -> (f64, f64) {
        let konst = student_const(nu);
        let xy: Vec<(f64, f64)> = data.iter().map(|&[u, v]| (t_ppf(u, nu), t_ppf(v, nu))).collect();
        let nll = |r: f64| -> f64 {
            let s: f64 = xy.iter().map(|&(x, y)| student_ln_pdf(r, nu, konst, x, y)).sum();
            if s.is_nan() {
                f64::INFINITY
            } else {
                -s
            }
        };
        brent_minimize(nll, rho_b.0, rho_b.1, rho0, 1e-8, 200)
    };
    let (nu, _) = brent_minimize(|nu| profile(nu).1, nu_b.0, nu_b.1, 8.0, 1e-5, 60);
    let (rho, _) = profile(nu);
    vec![rho, nu]
}

/// Asymptotic Kendall-tau test of independence. Returns the two-sided p-value.
pub fn independence_test(tau: f64, n: usize) -> f64 {
    let n = n as f64;
    let stat = tau.abs() * (9.0 * n * (n - 1.0) / (2.0 * (2.0 * n + 5.0))).sqrt();
    2.0 * (1.0 - norm_cdf(stat))
}

/// Candidate (family, rotation) pairs compatible with the sign of tau.
fn candidates(tau: f64) -> Vec<(Family, Rotation)> {
    let (a, b) = if tau >= 0.0 {
        (Rotation::R0, Rotation::R180)
    } else {
        (Rotation::R90, Rotation::R270)
    };
    vec![
        (Family::Gaussian, Rotation::R0),
        (Family::StudentT, Rotation::R0),
        (Family::Clayton, a),
        (Family::Clayton, b),
        (Family::Gumbel, a),
        (Family::Gumbel, b),
        (Family::Frank, Rotation::R0),
        (Family::Joe, a),
        (Family::Joe, b),
    ]
}

/// Chooses a pair copula: independence when the tau test does not reject at
/// `indep_level`, otherwise the criterion-best admissible family/rotation.
pub fn select_bicop(data: &[[f64; 2]], criterion: FitCriterion, indep_level: f64) -> Result<FittedPair> {
    let data = check_data(data)?;
    let n = data.len();
    let tau = sample_tau(&data);
    if independence_test(tau, n) >= indep_level {
        return Ok(FittedPair::independence(n));
    }
    let mut best: Option<(f64, FittedPair)> = None;
    for (fam, rot) in candidates(tau) {
        let Ok(fit) = fit_checked(&data, fam, rot, tau) else {
            continue;
        };
        let score = fit.score(criterion);
        if best.as_ref().is_none_or(|(s, _)| score < *s) {
            best = Some((score, fit));
        }
    }
    Ok(match best {
        Some((_, fit)) => fit,
        None => FittedPair {
            fallback: true,
            ..FittedPair::independence(n)
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn criterion_orientation() {
        assert_eq!(FitCriterion::Aic.score(10.0, 1, 100), -18.0);
        assert_eq!(FitCriterion::LogLik.reported(10.0, 1, 100), 10.0);
        assert!((FitCriterion::Bic.score(10.0, 2, 100) - (-20.0 + 2.0 * 100f64.ln())).abs() < 1e-12);
        assert_eq!("AIC".parse::<FitCriterion>().unwrap(), FitCriterion::Aic);
        assert!("foo".parse::<FitCriterion>().is_err());
    }

    #[test]
    fn gaussian_mle_recovers_rho() {
        let data = BiCop::gaussian(0.8).unwrap().sample(500, 11).unwrap();
        let fit = fit_bicop_mle(&data, Family::Gaussian, Rotation::R0).unwrap();
        let rho = fit.copula.params()[0];
        assert!((0.75..=0.85).contains(&rho), "rho = {rho}");
    }

    #[test]
    fn gaussian_fit_of_independent_data_near_zero() {
        let data = BiCop::independence().sample(500, 3).unwrap();
        let fit = fit_bicop_mle(&data, Family::Gaussian, Rotation::R0).unwrap();
        assert!(fit.copula.params()[0].abs() < 0.1);
    }

    #[test]
    fn student_fit_recovers_both_parameters() {
        let data = BiCop::student_t(0.6, 4.0).unwrap().sample(2000, 5).unwrap();
        let fit = fit_bicop_mle(&data, Family::StudentT, Rotation::R0).unwrap();
        let p = fit.copula.params();
        assert!((p[0] - 0.6).abs() < 0.05, "{p:?}");
        assert!(p[1] > 2.5 && p[1] < 8.0, "{p:?}");
    }

    #[test]
    fn degenerate_data_is_flagged() {
        let data: Vec<[f64; 2]> = (1..=20).map(|i| [i as f64 / 21.0, i as f64 / 21.0]).collect();
        let fit = fit_bicop_mle(&data, Family::Clayton, Rotation::R0).unwrap();
        assert!(fit.degenerate && fit.at_boundary);
        assert_eq!(fit.copula.params()[0], 28.0);
    }

    #[test]
    fn too_few_or_out_of_range_rejected() {
        assert!(fit_bicop_mle(&[[0.5, 0.5]; 5], Family::Gaussian, Rotation::R0).is_err());
        let mut d = vec![[0.3, 0.4]; 12];
        d[3] = [1.0, 0.2];
        assert!(select_bicop(&d, FitCriterion::Aic, 0.05).is_err());
    }

    #[test]
    fn selects_independence_on_independent_data() {
        let data = BiCop::independence().sample(500, 2024).unwrap();
        let fit = select_bicop(&data, FitCriterion::Aic, 0.05).unwrap();
        assert_eq!(fit.copula.family(), Family::Independence);
        assert_eq!(fit.loglik, 0.0);
    }

    #[test]
    fn selects_gaussian_for_gaussian_data() {
        let data = BiCop::gaussian(0.79).unwrap().sample(500, 17).unwrap();
        let fit = select_bicop(&data, FitCriterion::Aic, 0.05).unwrap();
        assert_eq!(fit.copula.family(), Family::Gaussian, "{}", fit.copula);
    }

    #[test]
    fn selects_rotated_family_for_negative_dependence() {
        let c = BiCop::new(Family::Clayton, Rotation::R90, &[3.0]).unwrap();
        let data = c.sample(1000, 9).unwrap();
        let fit = select_bicop(&data, FitCriterion::Aic, 0.05).unwrap();
        assert!(fit.copula.tau() < -0.4);
        assert_eq!(fit.copula.family(), Family::Clayton, "{}", fit.copula);
        assert_eq!(fit.copula.rotation(), Rotation::R90);
    }
}
