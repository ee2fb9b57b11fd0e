//! Parametric bivariate copulas: the building blocks of the pair-copula
//! construction.
//!
//! A [`BiCop`] is a family, a rotation and a parameter vector. All argument
//! values are clamped to `[1e-10, 1 - 1e-10]` before any family formula runs.
//!
//! h-function convention: for a copula `C(u1, u2)`,
//! `hfunc(Conditioning::Second, u, v) = dC(u, v)/dv` (distribution of the
//! first argument given the second) and
//! `hfunc(Conditioning::First, u, v) = dC(v, u)/dv` (distribution of the
//! second argument given the first).

mod bvn;
mod families;
mod fit;

use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

pub use bvn::bvn_cdf;
pub use fit::{fit_bicop_mle, independence_test, select_bicop, FitCriterion, FittedPair};

pub(crate) use families::EPS;

/// Parametric copula families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    Independence,
    Gaussian,
    StudentT,
    Clayton,
    Gumbel,
    Frank,
    Joe,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::Independence,
        Family::Gaussian,
        Family::StudentT,
        Family::Clayton,
        Family::Gumbel,
        Family::Frank,
        Family::Joe,
    ];

    pub fn n_params(self) -> usize {
        match self {
            Family::Independence => 0,
            Family::StudentT => 2,
            _ => 1,
        }
    }

    /// Families whose tails differ and which therefore come in rotated
    /// versions.
    pub fn is_rotatable(self) -> bool {
        matches!(self, Family::Clayton | Family::Gumbel | Family::Joe)
    }

    /// Admissible parameter box as `(lower, upper, lower_open, upper_open)`
    /// per parameter.
    pub fn bounds(self) -> &'static [(f64, f64, bool, bool)] {
        match self {
            Family::Independence => &[],
            Family::Gaussian => &[(-1.0, 1.0, true, true)],
            Family::StudentT => &[(-1.0, 1.0, true, true), (2.0, 30.0, false, false)],
            Family::Clayton => &[(0.0, 28.0, true, false)],
            Family::Gumbel => &[(1.0, 17.0, false, false)],
            Family::Frank => &[(-35.0, 35.0, false, false)],
            Family::Joe => &[(1.0, 30.0, true, false)],
        }
    }

    fn name(self) -> &'static str {
        match self {
            Family::Independence => "Independence",
            Family::Gaussian => "Gaussian",
            Family::StudentT => "StudentT",
            Family::Clayton => "Clayton",
            Family::Gumbel => "Gumbel",
            Family::Frank => "Frank",
            Family::Joe => "Joe",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Counter-clockwise rotation of a copula, in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u16", into = "u16")]
pub enum Rotation {
    R0,
    R90,
    R180,
    R270,
}

impl Rotation {
    pub const ALL: [Rotation; 4] = [Rotation::R0, Rotation::R90, Rotation::R180, Rotation::R270];

    pub fn degrees(self) -> u16 {
        match self {
            Rotation::R0 => 0,
            Rotation::R90 => 90,
            Rotation::R180 => 180,
            Rotation::R270 => 270,
        }
    }

    /// 90 and 270 degree rotations turn positive into negative dependence.
    pub fn flips_sign(self) -> bool {
        matches!(self, Rotation::R90 | Rotation::R270)
    }
}

impl TryFrom<u16> for Rotation {
    type Error = String;

    fn try_from(deg: u16) -> std::result::Result<Self, String> {
        match deg {
            0 => Ok(Rotation::R0),
            90 => Ok(Rotation::R90),
            180 => Ok(Rotation::R180),
            270 => Ok(Rotation::R270),
            other => Err(format!("invalid rotation {other}; expected 0, 90, 180 or 270")),
        }
    }
}

impl From<Rotation> for u16 {
    fn from(r: Rotation) -> u16 {
        r.degrees()
    }
}

/// Which argument of the copula is conditioned on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conditioning {
    First,
    Second,
}

/// A parametric bivariate copula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiCop {
    family: Family,
    rotation: Rotation,
    params: Vec<f64>,
}

fn clamp01(x: f64) -> f64 {
    x.clamp(EPS, 1.0 - EPS)
}

fn clamp_prob(p: f64) -> f64 {
    p.clamp(1e-300, 1.0 - 1e-16)
}

impl BiCop {
    pub fn new(family: Family, rotation: Rotation, params: &[f64]) -> Result<Self> {
        if params.len() != family.n_params() {
            return Err(Error::domain(format!(
                "{family} takes {} parameter(s), got {}",
                family.n_params(),
                params.len()
            )));
        }
        if rotation != Rotation::R0 && !family.is_rotatable() {
            return Err(Error::domain(format!(
                "{family} is radially symmetric and admits no {}-degree rotation",
                rotation.degrees()
            )));
        }
        for (&(lo, hi, lo_open, hi_open), &p) in family.bounds().iter().zip(params) {
            let below = if lo_open { p <= lo } else { p < lo };
            let above = if hi_open { p >= hi } else { p > hi };
            if !p.is_finite() || below || above {
                return Err(Error::domain(format!(
                    "{family} parameter {p} outside {}{lo}, {hi}{}",
                    if lo_open { "(" } else { "[" },
                    if hi_open { ")" } else { "]" }
                )));
            }
        }
        if family == Family::Frank && params[0] == 0.0 {
            return Err(Error::domain("Frank parameter must be non-zero"));
        }
        Ok(BiCop {
            family,
            rotation,
            params: params.to_vec(),
        })
    }

    pub fn independence() -> Self {
        BiCop {
            family: Family::Independence,
            rotation: Rotation::R0,
            params: Vec::new(),
        }
    }

    pub fn gaussian(rho: f64) -> Result<Self> {
        Self::new(Family::Gaussian, Rotation::R0, &[rho])
    }

    pub fn student_t(rho: f64, nu: f64) -> Result<Self> {
        Self::new(Family::StudentT, Rotation::R0, &[rho, nu])
    }

    pub fn clayton(delta: f64) -> Result<Self> {
        Self::new(Family::Clayton, Rotation::R0, &[delta])
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn rotation(&self) -> Rotation {
        self.rotation
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn n_params(&self) -> usize {
        self.family.n_params()
    }

    /// True when some parameter sits on (or numerically at) its box edge.
    pub fn at_boundary(&self) -> bool {
        self.family
            .bounds()
            .iter()
            .zip(&self.params)
            .any(|(&(lo, hi, _, _), &p)| {
                let tol = 1e-6 * (hi - lo);
                (p - lo).abs() < tol || (hi - p).abs() < tol
            })
    }

    /// Re-validates the parameters, e.g. after deserialisation.
    pub fn validate(&self) -> Result<()> {
        Self::new(self.family, self.rotation, &self.params).map(|_| ())
    }

    pub fn cdf(&self, u: f64, v: f64) -> f64 {
        if u <= 0.0 || v <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return v.min(1.0);
        }
        if v >= 1.0 {
            return u;
        }
        let (u, v) = (clamp01(u), clamp01(v));
        let base = |a: f64, b: f64| families::cdf(self.family, &self.params, a, b);
        let c = match self.rotation {
            Rotation::R0 => base(u, v),
            Rotation::R90 => v - base(1.0 - u, v),
            Rotation::R180 => u + v - 1.0 + base(1.0 - u, 1.0 - v),
            Rotation::R270 => u - base(u, 1.0 - v),
        };
        c.clamp((u + v - 1.0).max(0.0), u.min(v))
    }

    pub fn ln_pdf(&self, u: f64, v: f64) -> f64 {
        let (u, v) = (clamp01(u), clamp01(v));
        let (a, b) = self.unrotate(u, v);
        families::ln_pdf(self.family, &self.params, a, b)
    }

    pub fn pdf(&self, u: f64, v: f64) -> f64 {
        self.ln_pdf(u, v).exp()
    }

    fn unrotate(&self, u: f64, v: f64) -> (f64, f64) {
        match self.rotation {
            Rotation::R0 => (u, v),
            Rotation::R90 => (1.0 - u, v),
            Rotation::R180 => (1.0 - u, 1.0 - v),
            Rotation::R270 => (u, 1.0 - v),
        }
    }

    /// `dC(u1, u2) / du2`: distribution of the first argument given the second.
    pub fn h_given_second(&self, u1: f64, u2: f64) -> f64 {
        if u1 <= 0.0 {
            return 0.0;
        }
        if u1 >= 1.0 {
            return 1.0;
        }
        let (u1, u2) = (clamp01(u1), clamp01(u2));
        let h = |a: f64, b: f64| families::h(self.family, &self.params, a, b);
        match self.rotation {
            Rotation::R0 => h(u1, u2),
            Rotation::R90 => 1.0 - h(1.0 - u1, u2),
            Rotation::R180 => 1.0 - h(1.0 - u1, 1.0 - u2),
            Rotation::R270 => h(u1, 1.0 - u2),
        }
    }

    /// `dC(u1, u2) / du1`: distribution of the second argument given the first.
    pub fn h_given_first(&self, u1: f64, u2: f64) -> f64 {
        if u2 <= 0.0 {
            return 0.0;
        }
        if u2 >= 1.0 {
            return 1.0;
        }
        let (u1, u2) = (clamp01(u1), clamp01(u2));
        let h = |a: f64, b: f64| families::h(self.family, &self.params, a, b);
        match self.rotation {
            Rotation::R0 => h(u2, u1),
            Rotation::R90 => h(u2, 1.0 - u1),
            Rotation::R180 => 1.0 - h(1.0 - u2, 1.0 - u1),
            Rotation::R270 => 1.0 - h(1.0 - u2, u1),
        }
    }

    /// Inverse of [`BiCop::h_given_second`] in `u1`.
    pub fn hinv_given_second(&self, p: f64, u2: f64) -> Result<f64> {
        let (p, u2) = (clamp_prob(p), clamp01(u2));
        let hi = |q: f64, b: f64| families::hinv(self.family, &self.params, q, b);
        Ok(match self.rotation {
            Rotation::R0 => hi(p, u2)?,
            Rotation::R90 => 1.0 - hi(1.0 - p, u2)?,
            Rotation::R180 => 1.0 - hi(1.0 - p, 1.0 - u2)?,
            Rotation::R270 => hi(p, 1.0 - u2)?,
        })
    }

    /// Inverse of [`BiCop::h_given_first`] in `u2`.
    pub fn hinv_given_first(&self, p: f64, u1: f64) -> Result<f64> {
        let (p, u1) = (clamp_prob(p), clamp01(u1));
        let hi = |q: f64, b: f64| families::hinv(self.family, &self.params, q, b);
        Ok(match self.rotation {
            Rotation::R0 => hi(p, u1)?,
            Rotation::R90 => hi(p, 1.0 - u1)?,
            Rotation::R180 => 1.0 - hi(1.0 - p, 1.0 - u1)?,
            Rotation::R270 => 1.0 - hi(1.0 - p, u1)?,
        })
    }

    /// Conditional distribution of the free argument `u` given the
    /// conditioning value `v`.
    pub fn hfunc(&self, cond_on: Conditioning, u: f64, v: f64) -> f64 {
        match cond_on {
            Conditioning::Second => self.h_given_second(u, v),
            Conditioning::First => self.h_given_first(v, u),
        }
    }

    /// Inverse of [`BiCop::hfunc`] in its free argument.
    pub fn hinv(&self, cond_on: Conditioning, p: f64, v: f64) -> Result<f64> {
        match cond_on {
            Conditioning::Second => self.hinv_given_second(p, v),
            Conditioning::First => self.hinv_given_first(p, v),
        }
    }

    /// Kendall's tau implied by the parameters.
    pub fn tau(&self) -> f64 {
        let t = families::tau(self.family, &self.params);
        if self.rotation.flips_sign() {
            -t
        } else {
            t
        }
    }

    /// Draws `n` pairs `(u1, u2)` by conditional inversion.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<[f64; 2]>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(n, &mut rng)
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<[f64; 2]>> {
        (0..n)
            .map(|_| {
                let v: f64 = rng.random();
                let w: f64 = rng.random();
                Ok([self.hinv_given_second(w, v)?, v])
            })
            .collect()
    }
}

impl fmt::Display for BiCop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.family)?;
        if self.rotation != Rotation::R0 {
            write!(f, "{}", self.rotation.degrees())?;
        }
        if !self.params.is_empty() {
            let ps: Vec<String> = self.params.iter().map(|p| format!("{p:.4}")).collect();
            write!(f, "({})", ps.join(", "))?;
        }
        Ok(())
    }
}

/// Parameter-to-tau link; equivalent to [`BiCop::tau`].
pub fn param_to_tau(c: &BiCop) -> f64 {
    c.tau()
}

/// Inverts the tau link of a family (default `nu = 8` for Student-t, whose tau
/// does not depend on the degrees of freedom).
pub fn tau_to_param(family: Family, rotation: Rotation, tau: f64) -> Result<Vec<f64>> {
    if !(-1.0..=1.0).contains(&tau) {
        return Err(Error::domain(format!("tau {tau} outside [-1, 1]")));
    }
    let t = if rotation.flips_sign() { -tau } else { tau };
    let unattainable =
        || Error::domain(format!("tau {tau} not attainable by {family} rotated {}", rotation.degrees()));
    let params = match family {
        Family::Independence => {
            if tau != 0.0 {
                return Err(unattainable());
            }
            vec![]
        }
        Family::Gaussian => vec![(std::f64::consts::FRAC_PI_2 * t).sin()],
        Family::StudentT => vec![(std::f64::consts::FRAC_PI_2 * t).sin(), 8.0],
        Family::Clayton => {
            if t <= 0.0 {
                return Err(unattainable());
            }
            vec![2.0 * t / (1.0 - t)]
        }
        Family::Gumbel => {
            if t < 0.0 {
                return Err(unattainable());
            }
            vec![1.0 / (1.0 - t)]
        }
        Family::Frank => {
            if t == 0.0 {
                return Err(unattainable());
            }
            let target = t.abs();
            if target >= families::tau(Family::Frank, &[35.0]) {
                return Err(unattainable());
            }
            let th = crate::numeric::find_root(
                |x| families::tau(Family::Frank, &[x]) - target,
                1e-8,
                35.0,
                1e-13,
                200,
            )?;
            vec![th.copysign(t)]
        }
        Family::Joe => {
            if t <= 0.0 || t >= families::joe_tau(30.0) {
                return Err(unattainable());
            }
            let th = crate::numeric::find_root(|x| families::joe_tau(x) - t, 1.0, 30.0, 1e-13, 200)?;
            vec![th]
        }
    };
    let c = BiCop::new(family, rotation, &params).map_err(|_| unattainable())?;
    Ok(c.params)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_test_copulas() -> Vec<BiCop> {
        let mut out = vec![BiCop::independence()];
        let settings: [(Family, [&[f64]; 3]); 6] = [
            (Family::Gaussian, [&[-0.7], &[0.2], &[0.9]]),
            (Family::StudentT, [&[-0.5, 4.0], &[0.3, 2.5], &[0.8, 12.0]]),
            (Family::Clayton, [&[0.3], &[2.0], &[8.0]]),
            (Family::Gumbel, [&[1.2], &[2.0], &[5.0]]),
            (Family::Frank, [&[-6.0], &[1.5], &[12.0]]),
            (Family::Joe, [&[1.3], &[2.2], &[6.0]]),
        ];
        for (fam, ps) in settings {
            for p in ps {
                let rots: &[Rotation] = if fam.is_rotatable() { &Rotation::ALL } else { &[Rotation::R0] };
                for &r in rots {
                    out.push(BiCop::new(fam, r, p).unwrap());
                }
            }
        }
        out
    }

    fn grid() -> Vec<f64> {
        (1..20).map(|i| i as f64 / 20.0).collect()
    }

    #[test]
    fn spec_point_values() {
        let ind = BiCop::independence();
        assert!((ind.cdf(0.3, 0.5) - 0.15).abs() < 1e-15);
        assert_eq!(ind.ln_pdf(0.2, 0.9), 0.0);
        assert!((ind.hfunc(Conditioning::Second, 0.37, 0.81) - 0.37).abs() < 1e-15);
        assert!((ind.hinv(Conditioning::First, 0.42, 0.1).unwrap() - 0.42).abs() < 1e-15);

        let cl = BiCop::clayton(2.0).unwrap();
        assert!((cl.cdf(0.5, 0.5) - 7f64.powf(-0.5)).abs() < 1e-14);
        let h = cl.hfunc(Conditioning::Second, 0.5, 0.5);
        assert!((h - 0.5f64.powi(-3) * 7f64.powf(-1.5)).abs() < 1e-14);
        assert!((h - 0.43196).abs() < 1e-5);
        let hi = cl.hinv(Conditioning::Second, 0.5, 0.5).unwrap();
        let closed = ((0.5f64.powf(-2.0 / 3.0) - 1.0) * 0.5f64.powi(-2) + 1.0).powf(-0.5);
        assert!((hi - closed).abs() < 1e-14);
        assert!((hi - 0.546391).abs() < 1e-6);

        let g = BiCop::gaussian(0.5).unwrap();
        assert!((g.ln_pdf(0.5, 0.5) - (1.0 / 0.75f64.sqrt()).ln()).abs() < 1e-14);
        assert!((g.ln_pdf(0.5, 0.5) - 0.14384).abs() < 1e-5);
    }

    #[test]
    fn uniform_margins_at_the_edge() {
        for c in all_test_copulas() {
            for &u in &[0.1, 0.5, 0.93] {
                assert!((c.cdf(u, 1.0) - u).abs() < 1e-12, "{c}");
                assert!((c.cdf(1.0, u) - u).abs() < 1e-12, "{c}");
                assert_eq!(c.hfunc(Conditioning::Second, 0.0, u), 0.0);
                assert_eq!(c.hfunc(Conditioning::First, 1.0, u), 1.0);
            }
        }
    }

    #[test]
    fn frechet_bounds_and_monotone_h() {
        let g = grid();
        for c in all_test_copulas() {
            for &v in &g {
                let mut last = [0.0f64; 2];
                for &u in &g {
                    let cuv = c.cdf(u, v);
                    assert!(cuv >= (u + v - 1.0).max(0.0) - 1e-12 && cuv <= u.min(v) + 1e-12, "{c}");
                    for (k, cond) in [Conditioning::First, Conditioning::Second].into_iter().enumerate() {
                        let h = c.hfunc(cond, u, v);
                        assert!((0.0..=1.0).contains(&h));
                        assert!(h >= last[k] - 1e-12, "{c} not monotone at u={u} v={v}");
                        last[k] = h;
                    }
                }
            }
        }
    }

    #[test]
    fn h_is_partial_derivative_of_cdf() {
        let g = grid();
        let step = 1e-5;
        for c in all_test_copulas() {
            for &u in &g {
                for &v in &g {
                    let d2 = (c.cdf(u, v + step) - c.cdf(u, v - step)) / (2.0 * step);
                    let d1 = (c.cdf(u + step, v) - c.cdf(u - step, v)) / (2.0 * step);
                    assert!((c.h_given_second(u, v) - d2).abs() < 1e-4, "{c} d/dv at {u},{v}");
                    assert!((c.h_given_first(u, v) - d1).abs() < 1e-4, "{c} d/du at {u},{v}");
                }
            }
        }
    }

    #[test]
    fn hinv_inverts_h_on_grid() {
        let g = grid();
        for c in all_test_copulas() {
            for cond in [Conditioning::First, Conditioning::Second] {
                for &u in &g {
                    for &v in &g {
                        let p = c.hfunc(cond, u, v);
                        let back = c.hinv(cond, p, v).unwrap();
                        let again = c.hfunc(cond, back, v);
                        assert!((again - p).abs() < 1e-10, "{c} {cond:?} u={u} v={v} {again} {p}");
                        if p > 1e-6 && p < 1.0 - 1e-6 {
                            assert!((back - u).abs() < 1e-8, "{c} {cond:?} u={u} v={v} back={back}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn rotated_180_density_is_survival() {
        for fam in [Family::Clayton, Family::Gumbel, Family::Joe] {
            let base = BiCop::new(fam, Rotation::R0, &[2.5]).unwrap();
            let surv = BiCop::new(fam, Rotation::R180, &[2.5]).unwrap();
            for &u in &grid() {
                for &v in &grid() {
                    assert!((surv.pdf(u, v) - base.pdf(1.0 - u, 1.0 - v)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn exchangeable_families_are_symmetric() {
        for c in all_test_copulas().into_iter().filter(|c| c.rotation() == Rotation::R0) {
            for &(u, v) in &[(0.1, 0.7), (0.33, 0.52), (0.9, 0.05)] {
                assert!((c.ln_pdf(u, v) - c.ln_pdf(v, u)).abs() < 1e-10, "{c}");
            }
        }
    }

    #[test]
    fn tau_links_round_trip() {
        assert_eq!(BiCop::independence().tau(), 0.0);
        assert!((BiCop::gaussian(1.0 - 1e-15).map(|c| c.tau()).unwrap_or(1.0) - 1.0).abs() < 1e-6);
        let cl = BiCop::clayton(4.67).unwrap();
        assert!((cl.tau() - 4.67 / 6.67).abs() < 1e-15);
        let cases = [
            (Family::Gaussian, Rotation::R0, -0.4),
            (Family::Clayton, Rotation::R0, 0.7),
            (Family::Clayton, Rotation::R90, -0.3),
            (Family::Gumbel, Rotation::R180, 0.55),
            (Family::Gumbel, Rotation::R270, -0.2),
            (Family::Frank, Rotation::R0, -0.6),
            (Family::Frank, Rotation::R0, 0.05),
            (Family::Joe, Rotation::R0, 0.35),
            (Family::Joe, Rotation::R90, -0.8),
        ];
        for (fam, rot, tau) in cases {
            let p = tau_to_param(fam, rot, tau).unwrap();
            let c = BiCop::new(fam, rot, &p).unwrap();
            assert!((param_to_tau(&c) - tau).abs() < 1e-10, "{fam:?} {rot:?} {tau}");
        }
        assert!(tau_to_param(Family::Clayton, Rotation::R0, -0.2).is_err());
        assert!(tau_to_param(Family::Gumbel, Rotation::R90, 0.2).is_err());
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(BiCop::gaussian(1.0).is_err());
        assert!(BiCop::student_t(0.5, 1.5).is_err());
        assert!(BiCop::clayton(0.0).is_err());
        assert!(BiCop::new(Family::Frank, Rotation::R0, &[0.0]).is_err());
        assert!(BiCop::new(Family::Gaussian, Rotation::R90, &[0.3]).is_err());
        assert!(BiCop::new(Family::Joe, Rotation::R0, &[31.0]).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let c = BiCop::new(Family::Gumbel, Rotation::R90, &[2.0]).unwrap();
        assert_eq!(c.sample(200, 7).unwrap(), c.sample(200, 7).unwrap());
        assert_ne!(c.sample(200, 7).unwrap(), c.sample(200, 8).unwrap());
    }
}
