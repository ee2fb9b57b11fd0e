//! Closed-form conditional quantiles and exact samplers used as ground truth.
//!
//! Joint distributions put the response first: index `0` is `Y`, indices
//! `1..=d` are the covariates.

use crate::error::{Error, Result};
use crate::numeric::integrate;
use crate::special::{norm_cdf, norm_pdf, norm_ppf, t_cdf, t_pdf, t_ppf};
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use std::f64::consts::PI;

/// Symmetric positive definite matrix from row-major rows.
pub fn matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if let Some(r) = rows.iter().find(|r| r.len() != n) {
        return Err(Error::Dimension { expected: n, got: r.len() });
    }
    let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    for i in 0..n {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 {
                return Err(Error::LinAlg(format!("matrix not symmetric at ({i}, {j})")));
            }
        }
    }
    Ok(m)
}

fn cholesky(m: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(m.clone()).ok_or_else(|| Error::LinAlg("matrix is not positive definite".into()))
}

/// Conditional mean coefficients, conditional variance and the Cholesky
/// factor of the covariate block for a partitioned covariance.
struct Partition {
    /// `Sigma_XX^{-1} Sigma_XY`.
    beta: DVector<f64>,
    var: f64,
    xx: Cholesky<f64, Dyn>,
}

fn partition(cov: &DMatrix<f64>) -> Result<Partition> {
    let p = cov.nrows();
    if p < 2 {
        return Err(Error::Dimension { expected: 2, got: p });
    }
    let xx = cholesky(&cov.view((1, 1), (p - 1, p - 1)).into_owned())
        .map_err(|_| Error::LinAlg("covariate covariance block is singular".into()))?;
    let xy: DVector<f64> = cov.view((1, 0), (p - 1, 1)).column(0).into_owned();
    let beta = xx.solve(&xy);
    let var = cov[(0, 0)] - xy.dot(&beta);
    if !(var > 0.0) {
        return Err(Error::LinAlg("conditional variance is not positive".into()));
    }
    Ok(Partition { beta, var, xx })
}

/// Multivariate normal `N(mean, cov)` over `(Y, X_1, ..., X_d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MvnSpec {
    pub mean: Vec<f64>,
    pub cov: DMatrix<f64>,
}

impl MvnSpec {
    pub fn new(mean: Vec<f64>, cov: DMatrix<f64>) -> Result<Self> {
        if cov.nrows() != mean.len() || cov.ncols() != mean.len() {
            return Err(Error::Dimension { expected: mean.len(), got: cov.nrows() });
        }
        cholesky(&cov)?;
        Ok(MvnSpec { mean, cov })
    }

    /// Zero mean with covariance `cov`.
    pub fn centered(cov: DMatrix<f64>) -> Result<Self> {
        Self::new(vec![0.0; cov.nrows()], cov)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// Multivariate Student-t with `nu` degrees of freedom, location `mean` and
/// scale matrix `scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct MvtSpec {
    pub nu: f64,
    pub mean: Vec<f64>,
    pub scale: DMatrix<f64>,
}

impl MvtSpec {
    pub fn new(nu: f64, mean: Vec<f64>, scale: DMatrix<f64>) -> Result<Self> {
        if !(nu >= 1.0) {
            return Err(Error::domain(format!("degrees of freedom {nu} below 1")));
        }
        let mvn = MvnSpec::new(mean, scale)?;
        Ok(MvtSpec {
            nu,
            mean: mvn.mean,
            scale: mvn.cov,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

fn centered_covariates(mean: &[f64], x: &[f64]) -> Result<DVector<f64>> {
    if x.len() + 1 != mean.len() {
        return Err(Error::Dimension { expected: mean.len() - 1, got: x.len() });
    }
    Ok(DVector::from_iterator(x.len(), x.iter().zip(&mean[1..]).map(|(a, m)| a - m)))
}

/// `alpha`-quantile of `Y | X = x` under a multivariate normal.
pub fn gaussian_cond_quantile(spec: &MvnSpec, alpha: f64, x: &[f64]) -> Result<f64> {
    let dx = centered_covariates(&spec.mean, x)?;
    let p = partition(&spec.cov)?;
    Ok(spec.mean[0] + p.beta.dot(&dx) + p.var.sqrt() * norm_ppf(alpha))
}

/// `alpha`-quantile of `Y | X = x` under a multivariate t: a t distribution
/// with `nu + d` degrees of freedom and data-dependent scale.
pub fn t_cond_quantile(spec: &MvtSpec, alpha: f64, x: &[f64]) -> Result<f64> {
    let dx = centered_covariates(&spec.mean, x)?;
    let p = partition(&spec.scale)?;
    let d = x.len() as f64;
    let maha = dx.dot(&p.xx.solve(&dx));
    let var = (spec.nu + maha) / (spec.nu + d) * p.var;
    Ok(spec.mean[0] + p.beta.dot(&dx) + var.sqrt() * t_ppf(alpha, spec.nu + d))
}

/// Conditional quantile of the Gaussian copula with correlation matrix
/// `corr`, on the unit scale.
pub fn gaussian_copula_cond_quantile(corr: &DMatrix<f64>, alpha: f64, u: &[f64]) -> Result<f64> {
    let x: Vec<f64> = u.iter().map(|&p| norm_ppf(p)).collect();
    let spec = MvnSpec::centered(corr.clone())?;
    Ok(norm_cdf(gaussian_cond_quantile(&spec, alpha, &x)?))
}

/// Conditional quantile of the t copula with correlation `corr` and `nu`
/// degrees of freedom, on the unit scale.
pub fn t_copula_cond_quantile(corr: &DMatrix<f64>, nu: f64, alpha: f64, u: &[f64]) -> Result<f64> {
    let x: Vec<f64> = u.iter().map(|&p| t_ppf(p, nu)).collect();
    let spec = MvtSpec::new(nu, vec![0.0; corr.nrows()], corr.clone())?;
    Ok(t_cdf(t_cond_quantile(&spec, alpha, &x)?, nu))
}

/// Partial correlations of a D-vine with node order `0, 1, ..., p-1`:
/// `out[t - 1][e]` belongs to the pair `(e, e + t)` given the nodes between.
pub fn dvine_partial_correlations(corr: &DMatrix<f64>) -> Result<Vec<Vec<f64>>> {
    let p = corr.nrows();
    cholesky(corr)?;
    let mut out = Vec::with_capacity(p.saturating_sub(1));
    for t in 1..p {
        let mut tree = Vec::with_capacity(p - t);
        for e in 0..p - t {
            let block = corr.view((e, e), (t + 1, t + 1)).into_owned();
            let prec = block
                .try_inverse()
                .ok_or_else(|| Error::LinAlg("singular correlation block".into()))?;
            tree.push(-prec[(0, t)] / (prec[(0, 0)] * prec[(t, t)]).sqrt());
        }
        out.push(tree);
    }
    Ok(out)
}

/// `C^{-1}_{U|V,W}(alpha | v, w)` of the trivariate Clayton copula.
pub fn clayton3_cond_quantile(delta: f64, alpha: f64, v: f64, w: f64) -> f64 {
    let a = alpha.powf(-delta / (1.0 + 2.0 * delta)) - 1.0;
    let b = v.powf(-delta) + w.powf(-delta) - 1.0;
    (a * b + 1.0).powf(-1.0 / delta)
}

/// `C_{U|V,W}(u | v, w)` of the trivariate Clayton copula.
pub fn clayton3_cond_cdf(delta: f64, u: f64, v: f64, w: f64) -> f64 {
    let e = (1.0 + 2.0 * delta) / delta;
    let s3 = u.powf(-delta) + v.powf(-delta) + w.powf(-delta) - 2.0;
    let s2 = v.powf(-delta) + w.powf(-delta) - 1.0;
    (s2 / s3).powf(e)
}

/// `C^{-1}_{V|W}(p | w)` of the bivariate Clayton copula.
fn clayton2_cond_quantile(delta: f64, p: f64, w: f64) -> f64 {
    (w.powf(-delta) * (p.powf(-delta / (1.0 + delta)) - 1.0) + 1.0).powf(-1.0 / delta)
}

/// Joint distributions that the scenario samplers draw from.
#[derive(Debug, Clone, PartialEq)]
pub enum JointDist {
    Mvn(MvnSpec),
    Mvt(MvtSpec),
    /// Trivariate Clayton copula on the unit cube.
    Clayton3 { delta: f64 },
}

/// Draws `n` rows from `dist`; deterministic per seed.
pub fn sample_joint(dist: &JointDist, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_joint_with(dist, n, &mut rng)
}

pub fn sample_joint_with<R: Rng + ?Sized>(dist: &JointDist, n: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
    match dist {
        JointDist::Mvn(spec) => {
            let l = cholesky(&spec.cov)?.l();
            Ok((0..n).map(|_| gaussian_row(&l, &spec.mean, rng)).collect())
        }
        JointDist::Mvt(spec) => {
            let l = cholesky(&spec.scale)?.l();
            let chi = ChiSquared::new(spec.nu).map_err(|e| Error::domain(e.to_string()))?;
            let zero = vec![0.0; spec.dim()];
            Ok((0..n)
                .map(|_| {
                    let z = gaussian_row(&l, &zero, rng);
                    let s = (chi.sample(rng) / spec.nu).sqrt();
                    z.iter().zip(&spec.mean).map(|(zi, m)| m + zi / s).collect()
                })
                .collect())
        }
        JointDist::Clayton3 { delta } => {
            if !(*delta > 0.0) {
                return Err(Error::domain(format!("Clayton parameter {delta} must be positive")));
            }
            Ok((0..n)
                .map(|_| {
                    let w: f64 = open_unit(rng);
                    let v = clayton2_cond_quantile(*delta, open_unit(rng), w);
                    let u = clayton3_cond_quantile(*delta, open_unit(rng), v, w);
                    vec![u, v, w]
                })
                .collect())
        }
    }
}

fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let x: f64 = rng.random();
        if x > 0.0 {
            return x;
        }
    }
}

fn gaussian_row<R: Rng + ?Sized>(l: &DMatrix<f64>, mean: &[f64], rng: &mut R) -> Vec<f64> {
    let z = DVector::from_iterator(mean.len(), (0..mean.len()).map(|_| StandardNormal.sample(rng)));
    let x = l * z;
    x.iter().zip(mean).map(|(a, m)| a + m).collect()
}

/// Skewed family in Azzalini's direct parameterisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SkewKind {
    Normal,
    T { nu: f64 },
}

/// `sN(location, scale2, xi)` or `st_nu(location, scale2, xi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewSpec {
    pub kind: SkewKind,
    pub location: f64,
    pub scale2: f64,
    pub xi: f64,
}

impl SkewSpec {
    pub fn normal(location: f64, scale2: f64, xi: f64) -> Result<Self> {
        Self::new(SkewKind::Normal, location, scale2, xi)
    }

    pub fn t(nu: f64, location: f64, scale2: f64, xi: f64) -> Result<Self> {
        Self::new(SkewKind::T { nu }, location, scale2, xi)
    }

    fn new(kind: SkewKind, location: f64, scale2: f64, xi: f64) -> Result<Self> {
        if !(scale2 > 0.0) {
            return Err(Error::domain(format!("scale {scale2} must be positive")));
        }
        if let SkewKind::T { nu } = kind {
            if !(nu > 0.0) {
                return Err(Error::domain(format!("degrees of freedom {nu} must be positive")));
            }
        }
        Ok(SkewSpec { kind, location, scale2, xi })
    }

    fn scale(&self) -> f64 {
        self.scale2.sqrt()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let s = self.scale();
        let z = (x - self.location) / s;
        let dens = match self.kind {
            SkewKind::Normal => 2.0 * norm_pdf(z) * norm_cdf(self.xi * z),
            SkewKind::T { nu } => {
                let arg = self.xi * z * ((nu + 1.0) / (nu + z * z)).sqrt();
                2.0 * t_pdf(z, nu) * t_cdf(arg, nu + 1.0)
            }
        };
        dens / s
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let z = (x - self.location) / self.scale();
        match self.kind {
            SkewKind::Normal => (norm_cdf(z) - 2.0 * owens_t(z, self.xi)).clamp(0.0, 1.0),
            SkewKind::T { .. } => self.std_mass(-0.5 * PI, z.atan()).clamp(0.0, 1.0),
        }
    }

    /// Mass of the standardised law between `tan(a)` and `tan(b)`, integrated
    /// over the angle.
    fn std_mass(&self, a: f64, b: f64) -> f64 {
        let std = SkewSpec { location: 0.0, scale2: 1.0, ..*self };
        let f = |th: f64| {
            let c = th.cos();
            if c <= 0.0 {
                return 0.0;
            }
            std.pdf(th.tan()) / (c * c)
        };
        integrate(f, a, b, 1e-14)
    }

    /// `cdf(x1)` given `f0 = cdf(x0)`.
    fn cdf_from(&self, x0: f64, f0: f64, x1: f64) -> f64 {
        match self.kind {
            SkewKind::Normal => self.cdf(x1),
            SkewKind::T { .. } => {
                let s = self.scale();
                let angle = |x: f64| ((x - self.location) / s).atan();
                (f0 + self.std_mass(angle(x0), angle(x1))).clamp(0.0, 1.0)
            }
        }
    }

    /// Safeguarded Newton iteration on the distribution function.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::domain(format!("probability {p} outside (0, 1)")));
        }
        let s = self.scale();
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        let mut x = self.location;
        let mut fx = self.cdf(x);
        for _ in 0..300 {
            let r = fx - p;
            if r == 0.0 {
                return Ok(x);
            }
            if r > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let step = -r / self.pdf(x);
            let mut next = x + step;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = match (lo.is_finite(), hi.is_finite()) {
                    (true, true) => 0.5 * (lo + hi),
                    (true, false) => lo + (lo - self.location).abs().max(s),
                    _ => hi - (hi - self.location).abs().max(s),
                };
            } else if step.abs() <= 1e-14 * (s + x.abs()) {
                return Ok(next);
            }
            if lo.is_finite() && hi.is_finite() && hi - lo <= 1e-14 * (s + x.abs()) {
                return Ok(next);
            }
            fx = self.cdf_from(x, fx, next);
            x = next;
        }
        Err(Error::numeric("skew quantile", format!("no convergence at p={p}")))
    }

    /// Mean, variance and skewness of the unscaled direct-parameter law.
    pub fn moments(&self) -> Option<(f64, f64, f64)> {
        let d = self.xi / (1.0 + self.xi * self.xi).sqrt();
        let s = self.scale();
        match self.kind {
            SkewKind::Normal => {
                let m = d * (2.0 / PI).sqrt();
                let var = 1.0 - m * m;
                let skew = (4.0 - PI) / 2.0 * m.powi(3) / var.powf(1.5);
                Some((self.location + s * m, s * s * var, skew))
            }
            SkewKind::T { .. } => None,
        }
    }
}

/// Owen's T function `T(h, a) = (1 / 2pi) int_0^a exp(-h^2 (1 + x^2) / 2) / (1 + x^2) dx`.
pub fn owens_t(h: f64, a: f64) -> f64 {
    let f = |x: f64| {
        let q = 1.0 + x * x;
        (-0.5 * h * h * q).exp() / q
    };
    integrate(f, 0.0, a, 1e-15) / (2.0 * PI)
}

/// Draws `n` values from a skewed law; deterministic per seed.
pub fn sample_skew(spec: &SkewSpec, n: usize, seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| sample_skew_one(spec, &mut rng)).collect()
}

pub fn sample_skew_one<R: Rng + ?Sized>(spec: &SkewSpec, rng: &mut R) -> Result<f64> {
    let d = spec.xi / (1.0 + spec.xi * spec.xi).sqrt();
    let w0: f64 = StandardNormal.sample(rng);
    let w1: f64 = StandardNormal.sample(rng);
    let mut z = d * w0.abs() + (1.0 - d * d).sqrt() * w1;
    if let SkewKind::T { nu } = spec.kind {
        let chi = ChiSquared::new(nu).map_err(|e| Error::domain(e.to_string()))?;
        z /= (chi.sample(rng) / nu).sqrt();
    }
    Ok(spec.location + spec.scale() * z)
}

/// Univariate margins of the simulation scenarios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Marginal {
    /// `N(mean, var)`.
    Normal { mean: f64, var: f64 },
    /// `t_nu(location, scale2)`.
    StudentT { nu: f64, location: f64, scale2: f64 },
    Skew(SkewSpec),
}

impl Marginal {
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Marginal::Normal { mean, var } => norm_cdf((x - mean) / var.sqrt()),
            Marginal::StudentT { nu, location, scale2 } => t_cdf((x - location) / scale2.sqrt(), nu),
            Marginal::Skew(s) => s.cdf(x),
        }
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        match *self {
            Marginal::Normal { mean, var } => Ok(mean + var.sqrt() * norm_ppf(p)),
            Marginal::StudentT { nu, location, scale2 } => Ok(location + scale2.sqrt() * t_ppf(p, nu)),
            Marginal::Skew(s) => s.quantile(p),
        }
    }
}

/// Rejection-based conditional quantile: the empirical `alpha`-quantile of
/// column `0` over rows whose covariates lie within `half_width` of `x` in
/// every coordinate. Returns the quantile and the number of rows kept, or
/// `None` when fewer than `min_kept` rows qualify.
pub fn rejection_cond_quantile(
    rows: &[Vec<f64>],
    x: &[f64],
    half_width: f64,
    alpha: f64,
    min_kept: usize,
) -> Option<(f64, usize)> {
    let mut kept: Vec<f64> = rows
        .iter()
        .filter(|r| r[1..].iter().zip(x).all(|(a, b)| (a - b).abs() <= half_width))
        .map(|r| r[0])
        .collect();
    if kept.len() < min_kept.max(1) {
        return None;
    }
    kept.sort_by(f64::total_cmp);
    let idx = ((alpha * kept.len() as f64).ceil() as usize).clamp(1, kept.len()) - 1;
    Some((kept[idx], kept.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bivariate_gaussian_point() {
        let spec = MvnSpec::centered(matrix(&[vec![1.0, 0.6], vec![0.6, 1.0]]).unwrap()).unwrap();
        let q = gaussian_cond_quantile(&spec, 0.95, &[1.0]).unwrap();
        assert!((q - (0.6 + 0.8 * norm_ppf(0.95))).abs() < 1e-14);
        assert!((q - 1.9159).abs() < 1e-4);
    }

    #[test]
    fn clayton3_worked_point() {
        let q = clayton3_cond_quantile(2.0, 0.5, 0.5, 0.5);
        let want = ((0.5f64.powf(-0.4) - 1.0) * 7.0 + 1.0).powf(-0.5);
        assert!((q - want).abs() < 1e-15);
        assert!((q - 0.5559).abs() < 1e-4);
        assert!((clayton3_cond_cdf(2.0, q, 0.5, 0.5) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn owens_t_reference_values() {
        // T(0, a) = atan(a) / (2 pi); T(h, 1) = Phi(h) (1 - Phi(h)) / 2
        assert!((owens_t(0.0, 0.7) - 0.7f64.atan() / (2.0 * PI)).abs() < 1e-15);
        let h = 0.8;
        assert!((owens_t(h, 1.0) - 0.5 * norm_cdf(h) * (1.0 - norm_cdf(h))).abs() < 1e-14);
    }

    #[test]
    fn skew_cdf_matches_density_quadrature() {
        let sn = SkewSpec::normal(-2.0, 0.5, 3.0).unwrap();
        let num = integrate(|x| sn.pdf(x), -12.0, -1.7, 1e-14);
        assert!((sn.cdf(-1.7) - num).abs() < 1e-11);
        let st = SkewSpec::t(3.0, 1.0, 2.0, 5.0).unwrap();
        assert!((st.cdf(1e9) - 1.0).abs() < 1e-8);
        let q = st.quantile(0.3).unwrap();
        assert!((st.cdf(q) - 0.3).abs() < 1e-11);
    }

    #[test]
    fn zero_skew_reduces_to_symmetric_laws() {
        let sn = SkewSpec::normal(1.0, 4.0, 0.0).unwrap();
        assert!((sn.cdf(2.3) - norm_cdf(0.65)).abs() < 1e-14);
        let st = SkewSpec::t(4.0, 0.0, 1.0, 0.0).unwrap();
        assert!((st.cdf(-0.9) - t_cdf(-0.9, 4.0)).abs() < 1e-11);
    }

    #[test]
    fn partial_correlations_of_ar1_structure() {
        let r = matrix(&[vec![1.0, 0.5, 0.25], vec![0.5, 1.0, 0.5], vec![0.25, 0.5, 1.0]]).unwrap();
        let pc = dvine_partial_correlations(&r).unwrap();
        assert_eq!(pc[0], vec![0.5, 0.5]);
        assert!(pc[1][0].abs() < 1e-14);
    }

    #[test]
    fn rejection_quantile_keeps_nearby_rows() {
        let rows = vec![vec![1.0, 0.0], vec![2.0, 0.01], vec![3.0, 0.5], vec![4.0, -0.02]];
        let (q, kept) = rejection_cond_quantile(&rows, &[0.0], 0.05, 0.5, 1).unwrap();
        assert_eq!(kept, 3);
        assert_eq!(q, 2.0);
        assert!(rejection_cond_quantile(&rows, &[9.0], 0.05, 0.5, 1).is_none());
    }
}
