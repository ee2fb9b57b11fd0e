//! Simulation scenarios, MISE studies, the linear quantile regression
//! baseline and tick-loss backtests.
//!
//! Scenario `C3` couples `(Y, X1, X2)` by a trivariate Clayton copula, `T5`
//! couples `(Y, X1, ..., X4)` by a t copula with 3 degrees of freedom and
//! `M5` draws `X ~ N4(0, 0.5^|i-j|)` with
//! `Y = sqrt|2 x1 - x2 + 0.5| + (1 - 0.5 x3) 0.1 x4^3 + sigma eps`.

mod backtest;
mod lqr;
mod study;

pub use backtest::{oos_backtest, tick_loss, BacktestReport, BacktestRow};
pub use lqr::{check_loss, lqr_fit, lqr_predict, LqrModel};
pub use study::{run_mise_study, Method, StudyReport, StudyRow};

use crate::data::DataTable;
use crate::error::{Error, Result};
use crate::oracles::{
    clayton3_cond_quantile, sample_joint_with, t_copula_cond_quantile, JointDist, Marginal, MvnSpec,
    MvtSpec, SkewSpec,
};
use crate::special::{norm_ppf, t_cdf};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use std::fmt;
use std::str::FromStr;

/// Clayton parameters of scenario `C3`.
pub const DELTA1: f64 = 0.86;
pub const DELTA2: f64 = 4.67;
/// Degrees of freedom of the `T5` copula.
pub const T5_NU: f64 = 3.0;

const R1: [[f64; 5]; 5] = [
    [1.0, 0.6, 0.5, 0.5, 0.4],
    [0.6, 1.0, 0.5, 0.5, 0.5],
    [0.5, 0.5, 1.0, 0.5, 0.5],
    [0.5, 0.5, 0.5, 1.0, 0.5],
    [0.4, 0.5, 0.5, 0.5, 1.0],
];

const R2: [[f64; 5]; 5] = [
    [1.0, 0.27, 0.74, 0.72, 0.41],
    [0.27, 1.0, 0.28, 0.29, 0.27],
    [0.74, 0.28, 1.0, 0.74, 0.42],
    [0.72, 0.29, 0.74, 1.0, 0.40],
    [0.41, 0.27, 0.42, 0.40, 1.0],
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScenarioKind {
    C3,
    #[serde(rename = "t5")]
    T5,
    M5,
}

impl ScenarioKind {
    /// Number of covariates.
    pub fn dim(self) -> usize {
        match self {
            ScenarioKind::C3 => 2,
            ScenarioKind::T5 | ScenarioKind::M5 => 4,
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScenarioKind::C3 => "C3",
            ScenarioKind::T5 => "t5",
            ScenarioKind::M5 => "M5",
        })
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "c3" => Ok(ScenarioKind::C3),
            "t5" => Ok(ScenarioKind::T5),
            "m5" => Ok(ScenarioKind::M5),
            _ => Err(Error::Input(format!("unknown scenario '{s}' (expected C3, t5 or M5)"))),
        }
    }
}

/// Marginal distribution sets of the copula scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MarginChoice {
    M1,
    M2,
}

impl fmt::Display for MarginChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MarginChoice::M1 => "M1",
            MarginChoice::M2 => "M2",
        })
    }
}

impl FromStr for MarginChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "m1" => Ok(MarginChoice::M1),
            "m2" => Ok(MarginChoice::M2),
            _ => Err(Error::Input(format!("unknown margin set '{s}' (expected M1 or M2)"))),
        }
    }
}

impl MarginChoice {
    /// Margins of `Y, X1, ..., X_dim`.
    pub fn marginals(self, dim: usize) -> Result<Vec<Marginal>> {
        let (y, odd, even) = match self {
            MarginChoice::M1 => (
                Marginal::Normal { mean: 0.0, var: 1.0 },
                Marginal::StudentT { nu: 4.0, location: 0.0, scale2: 1.0 },
                Marginal::Normal { mean: 1.0, var: 4.0 },
            ),
            MarginChoice::M2 => (
                Marginal::Skew(SkewSpec::t(4.0, 0.0, 1.0, 2.0)?),
                Marginal::Skew(SkewSpec::normal(-2.0, 0.5, 3.0)?),
                Marginal::Skew(SkewSpec::t(3.0, 1.0, 2.0, 5.0)?),
            ),
        };
        Ok(std::iter::once(y)
            .chain((0..dim).map(|j| if j % 2 == 0 { odd } else { even }))
            .collect())
    }
}

/// Association matrices of scenario `T5`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CorrChoice {
    R1,
    R2,
}

impl CorrChoice {
    pub fn matrix(self) -> DMatrix<f64> {
        let m = match self {
            CorrChoice::R1 => &R1,
            CorrChoice::R2 => &R2,
        };
        DMatrix::from_fn(5, 5, |i, j| m[i][j])
    }
}

/// Dependence parameter of a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScenarioParam {
    /// Clayton parameter of `C3`.
    Delta(f64),
    /// Association matrix of `T5`.
    Corr(CorrChoice),
    /// Noise scale of `M5`.
    Sigma(f64),
}

impl fmt::Display for ScenarioParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioParam::Delta(d) => write!(f, "delta={d}"),
            ScenarioParam::Corr(CorrChoice::R1) => f.write_str("R1"),
            ScenarioParam::Corr(CorrChoice::R2) => f.write_str("R2"),
            ScenarioParam::Sigma(s) => write!(f, "sigma={s}"),
        }
    }
}

impl ScenarioParam {
    /// Parses a parameter for `kind`: `delta1`, `delta2` or a number for
    /// `C3`; `R1` or `R2` for `t5`; a number for `M5`.
    pub fn parse(kind: ScenarioKind, s: &str) -> Result<Self> {
        let bad = || Error::Input(format!("invalid parameter '{s}' for scenario {kind}"));
        let lower = s.to_ascii_lowercase();
        match kind {
            ScenarioKind::C3 => match lower.as_str() {
                "delta1" | "d1" => Ok(ScenarioParam::Delta(DELTA1)),
                "delta2" | "d2" => Ok(ScenarioParam::Delta(DELTA2)),
                _ => lower.parse().map(ScenarioParam::Delta).map_err(|_| bad()),
            },
            ScenarioKind::T5 => match lower.as_str() {
                "r1" => Ok(ScenarioParam::Corr(CorrChoice::R1)),
                "r2" => Ok(ScenarioParam::Corr(CorrChoice::R2)),
                _ => Err(bad()),
            },
            ScenarioKind::M5 => lower.parse().map(ScenarioParam::Sigma).map_err(|_| bad()),
        }
    }

    /// The first Table-1 value of `kind`.
    pub fn default_for(kind: ScenarioKind) -> Self {
        match kind {
            ScenarioKind::C3 => ScenarioParam::Delta(DELTA1),
            ScenarioKind::T5 => ScenarioParam::Corr(CorrChoice::R1),
            ScenarioKind::M5 => ScenarioParam::Sigma(0.1),
        }
    }
}

/// A simulation setting.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub param: ScenarioParam,
    /// Ignored by `M5`.
    pub margins: MarginChoice,
    pub n_train: usize,
    pub alphas: Vec<f64>,
    pub reps: usize,
}

impl ScenarioSpec {
    pub fn new(
        kind: ScenarioKind,
        param: ScenarioParam,
        margins: MarginChoice,
        n_train: usize,
        alphas: Vec<f64>,
        reps: usize,
    ) -> Result<Self> {
        let spec = ScenarioSpec {
            kind,
            param,
            margins,
            n_train,
            alphas,
            reps,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match (self.kind, self.param) {
            (ScenarioKind::C3, ScenarioParam::Delta(d)) if d > 0.0 && d.is_finite() => {}
            (ScenarioKind::T5, ScenarioParam::Corr(_)) => {}
            (ScenarioKind::M5, ScenarioParam::Sigma(s)) if s >= 0.0 && s.is_finite() => {}
            (kind, param) => {
                return Err(Error::Input(format!("parameter {param} does not fit scenario {kind}")));
            }
        }
        if self.n_train < 60 {
            return Err(Error::Input(format!("n_train = {} is below the minimum of 60", self.n_train)));
        }
        if self.reps == 0 {
            return Err(Error::Input("at least one replication is required".into()));
        }
        if self.alphas.is_empty() {
            return Err(Error::Input("at least one quantile level is required".into()));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return Err(Error::Input(format!("quantile level {a} outside (0, 1)")));
        }
        Ok(())
    }

    /// Evaluation sample size, half the training size.
    pub fn n_eval(&self) -> usize {
        self.n_train / 2
    }

    /// Margin set label; `-` for `M5`.
    pub fn margins_label(&self) -> String {
        match self.kind {
            ScenarioKind::M5 => "-".into(),
            _ => self.margins.to_string(),
        }
    }
}

/// True conditional quantile function of a scenario.
#[derive(Debug, Clone)]
pub enum Truth {
    Clayton { delta: f64, margins: Vec<Marginal> },
    TCopula { corr: DMatrix<f64>, nu: f64, margins: Vec<Marginal> },
    Additive { sigma: f64 },
}

impl Truth {
    fn new(spec: &ScenarioSpec) -> Result<Self> {
        let dim = spec.kind.dim();
        Ok(match spec.param {
            ScenarioParam::Delta(delta) => Truth::Clayton {
                delta,
                margins: spec.margins.marginals(dim)?,
            },
            ScenarioParam::Corr(c) => Truth::TCopula {
                corr: c.matrix(),
                nu: T5_NU,
                margins: spec.margins.marginals(dim)?,
            },
            ScenarioParam::Sigma(sigma) => Truth::Additive { sigma },
        })
    }

    /// Conditional `alpha`-quantile of `Y` given covariates `x`.
    pub fn quantile(&self, alpha: f64, x: &[f64]) -> Result<f64> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::domain(format!("quantile level {alpha} outside (0, 1)")));
        }
        match self {
            Truth::Clayton { delta, margins } => {
                let u = covariate_levels(margins, x, 2)?;
                margins[0].quantile(clayton3_cond_quantile(*delta, alpha, u[0], u[1]))
            }
            Truth::TCopula { corr, nu, margins } => {
                let u = covariate_levels(margins, x, 4)?;
                margins[0].quantile(t_copula_cond_quantile(corr, *nu, alpha, &u)?)
            }
            Truth::Additive { sigma } => {
                if x.len() != 4 {
                    return Err(Error::Dimension { expected: 4, got: x.len() });
                }
                Ok(m5_mean(x) + sigma * norm_ppf(alpha))
            }
        }
    }
}

fn covariate_levels(margins: &[Marginal], x: &[f64], dim: usize) -> Result<Vec<f64>> {
    if x.len() != dim {
        return Err(Error::Dimension { expected: dim, got: x.len() });
    }
    Ok(margins[1..]
        .iter()
        .zip(x)
        .map(|(m, &v)| m.cdf(v).clamp(1e-15, 1.0 - 1e-15))
        .collect())
}

/// Mean surface of `M5`.
pub fn m5_mean(x: &[f64]) -> f64 {
    (2.0 * x[0] - x[1] + 0.5).abs().sqrt() + (-0.5 * x[2] + 1.0) * (0.1 * x[3].powi(3))
}

/// One simulated replication.
#[derive(Debug, Clone)]
pub struct Scenario {
    /// Columns `y, x1, ..., xd`.
    pub train: DataTable,
    /// Evaluation covariate rows.
    pub eval_x: Vec<Vec<f64>>,
    pub truth: Truth,
}

/// Generator of replication `replication` under master `seed`. Each
/// replication draws from its own ChaCha stream, so results do not depend on
/// the order in which replications are generated.
pub fn gen_scenario(spec: &ScenarioSpec, replication: u64, seed: u64) -> Result<Scenario> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication);
    let n = spec.n_train + spec.n_eval();
    let truth = Truth::new(spec)?;
    let rows = match &truth {
        Truth::Clayton { delta, margins } => {
            let u = sample_joint_with(&JointDist::Clayton3 { delta: *delta }, n, &mut rng)?;
            to_margins(&u, margins)?
        }
        Truth::TCopula { corr, nu, margins } => {
            let spec = MvtSpec::new(*nu, vec![0.0; 5], corr.clone())?;
            let z = sample_joint_with(&JointDist::Mvt(spec), n, &mut rng)?;
            let u: Vec<Vec<f64>> = z
                .iter()
                .map(|r| r.iter().map(|&v| t_cdf(v, *nu).clamp(1e-15, 1.0 - 1e-15)).collect())
                .collect();
            to_margins(&u, margins)?
        }
        Truth::Additive { sigma } => {
            let cov = DMatrix::from_fn(4, 4, |i, j| 0.5f64.powi((i as i32 - j as i32).abs()));
            let x = sample_joint_with(&JointDist::Mvn(MvnSpec::centered(cov)?), n, &mut rng)?;
            x.into_iter()
                .map(|xr| {
                    let eps: f64 = StandardNormal.sample(&mut rng);
                    std::iter::once(m5_mean(&xr) + sigma * eps).chain(xr).collect()
                })
                .collect()
        }
    };
    let d = spec.kind.dim();
    let names = std::iter::once("y".to_owned())
        .chain((1..=d).map(|j| format!("x{j}")))
        .collect();
    let train = DataTable::from_rows(names, &rows[..spec.n_train])?;
    let eval_x = rows[spec.n_train..].iter().map(|r| r[1..].to_vec()).collect();
    Ok(Scenario { train, eval_x, truth })
}

fn to_margins(u: &[Vec<f64>], margins: &[Marginal]) -> Result<Vec<Vec<f64>>> {
    u.iter()
        .map(|r| r.iter().zip(margins).map(|(&p, m)| m.quantile(p)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::kendall_tau;

    fn spec(kind: ScenarioKind, param: ScenarioParam, n: usize) -> ScenarioSpec {
        ScenarioSpec::new(kind, param, MarginChoice::M1, n, vec![0.5], 1).unwrap()
    }

    #[test]
    fn c3_margins_and_tau() {
        let s = gen_scenario(&spec(ScenarioKind::C3, ScenarioParam::Delta(DELTA1), 2000), 0, 11).unwrap();
        let y = s.train.column("y").unwrap();
        let x1 = s.train.column("x1").unwrap();
        let mut sorted = y.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        let ks = sorted
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let f = crate::special::norm_cdf(v);
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 1.63 / n.sqrt(), "KS statistic {ks}");
        let tau = kendall_tau(y, x1);
        assert!((tau - DELTA1 / (DELTA1 + 2.0)).abs() < 0.04, "tau {tau}");
        assert_eq!(s.eval_x.len(), 1000);
    }

    #[test]
    fn t5_sample_correlation() {
        let s = gen_scenario(&spec(ScenarioKind::T5, ScenarioParam::Corr(CorrChoice::R1), 1000), 0, 5).unwrap();
        let y = s.train.column("y").unwrap();
        let x = s.train.column("x1").unwrap();
        let tau = kendall_tau(y, x);
        let rho = (std::f64::consts::FRAC_PI_2 * tau).sin();
        assert!((rho - 0.6).abs() < 0.05, "rho {rho}");
    }

    #[test]
    fn m5_noiseless_truth_is_mean() {
        let s = gen_scenario(&spec(ScenarioKind::M5, ScenarioParam::Sigma(0.0), 100), 0, 1).unwrap();
        for x in &s.eval_x {
            assert_eq!(s.truth.quantile(0.5, x).unwrap(), m5_mean(x));
            assert_eq!(s.truth.quantile(0.9, x).unwrap(), m5_mean(x));
        }
        let y = s.train.column("y").unwrap();
        assert_eq!(y[0], m5_mean(&s.train.row(0)[1..]));
    }

    #[test]
    fn replications_are_independent_streams() {
        let sp = spec(ScenarioKind::C3, ScenarioParam::Delta(DELTA2), 100);
        let a = gen_scenario(&sp, 3, 9).unwrap();
        let b = gen_scenario(&sp, 3, 9).unwrap();
        let c = gen_scenario(&sp, 4, 9).unwrap();
        assert_eq!(a.train, b.train);
        assert_ne!(a.train, c.train);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(ScenarioSpec::new(ScenarioKind::C3, ScenarioParam::Sigma(1.0), MarginChoice::M1, 300, vec![0.5], 1).is_err());
        assert!(ScenarioSpec::new(ScenarioKind::M5, ScenarioParam::Sigma(1.0), MarginChoice::M1, 300, vec![1.0], 1).is_err());
        assert!("C4".parse::<ScenarioKind>().is_err());
        assert_eq!(ScenarioParam::parse(ScenarioKind::C3, "delta2").unwrap(), ScenarioParam::Delta(DELTA2));
    }

    #[test]
    fn m2_margins_transform() {
        let sp = ScenarioSpec::new(ScenarioKind::C3, ScenarioParam::Delta(DELTA1), MarginChoice::M2, 60, vec![0.5], 1).unwrap();
        let s = gen_scenario(&sp, 0, 2).unwrap();
        let q = s.truth.quantile(0.5, &s.eval_x[0]).unwrap();
        assert!(q.is_finite());
    }
}
