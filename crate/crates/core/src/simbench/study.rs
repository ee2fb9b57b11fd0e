//! Monte Carlo MISE studies.

use super::lqr::lqr_fit;
use super::{gen_scenario, Scenario, ScenarioSpec};
use crate::bicop::FitCriterion;
use crate::dvine::{fit_quantreg, to_exact_json};
use crate::error::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

/// Quantile regression methods compared by the studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Method {
    #[serde(rename = "DVQR")]
    Dvqr,
    #[serde(rename = "LQR")]
    Lqr,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Dvqr => "DVQR",
            Method::Lqr => "LQR",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dvqr" => Ok(Method::Dvqr),
            "lqr" => Ok(Method::Lqr),
            _ => Err(Error::Input(format!("unknown method '{s}' (expected DVQR or LQR)"))),
        }
    }
}

/// One `(alpha, method)` cell of a study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyRow {
    pub scenario: String,
    pub margins: String,
    pub parameter: String,
    pub n_train: usize,
    pub alpha: f64,
    pub method: Method,
    pub mise: f64,
    /// `mise / mise_DVQR`; `NaN` when DVQR was not run.
    pub rmise: f64,
    /// Total fit and prediction time over the replications.
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureCount {
    pub method: Method,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyReport {
    pub seed: u64,
    pub replications: usize,
    pub rows: Vec<StudyRow>,
    /// Replications excluded per method because fitting or prediction failed.
    pub failures: Vec<FailureCount>,
}

impl StudyReport {
    pub fn row(&self, alpha: f64, method: Method) -> Option<&StudyRow> {
        self.rows.iter().find(|r| r.alpha == alpha && r.method == method)
    }

    /// Comma-separated table with a header row.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv emits UTF-8"))
    }

    pub fn to_json(&self) -> Result<String> {
        to_exact_json(self)
    }

    /// Writes the table to `path` and the JSON document next to it with
    /// extension `.json`.
    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()?)?;
        std::fs::write(path.with_extension("json"), self.to_json()?)?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Squared-error sums of one method in one replication, one per alpha.
struct RepOutcome {
    ise: Option<Vec<f64>>,
    seconds: f64,
}

fn run_method(method: Method, sc: &Scenario, alphas: &[f64]) -> RepOutcome {
    let start = Instant::now();
    let ise = predict_all(method, sc, alphas).ok().and_then(|preds| {
        let mut sums = vec![0.0; alphas.len()];
        for (x, q) in sc.eval_x.iter().zip(&preds) {
            for (a, (s, qa)) in alphas.iter().zip(sums.iter_mut().zip(q)) {
                let truth = sc.truth.quantile(*a, x).ok()?;
                *s += (qa - truth).powi(2);
            }
        }
        let n = sc.eval_x.len() as f64;
        Some(sums.into_iter().map(|s| s / n).collect())
    });
    RepOutcome {
        ise,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Predicted quantiles per evaluation row, one per alpha.
fn predict_all(method: Method, sc: &Scenario, alphas: &[f64]) -> Result<Vec<Vec<f64>>> {
    match method {
        Method::Dvqr => {
            let model = fit_quantreg(&sc.train, "y", FitCriterion::Aic, 0.05)?;
            sc.eval_x.iter().map(|x| model.predict_quantiles(alphas, x)).collect()
        }
        Method::Lqr => {
            let y = sc.train.columns()[0].as_slice();
            let xs = &sc.train.columns()[1..];
            let models = alphas
                .iter()
                .map(|&a| lqr_fit(y, xs, a))
                .collect::<Result<Vec<_>>>()?;
            sc.eval_x
                .iter()
                .map(|x| models.iter().map(|m| m.predict(x)).collect())
                .collect()
        }
    }
}

/// Estimated MISE of each method over `spec.reps` replications, with RMISE
/// relative to DVQR. Replications run in parallel; the report does not
/// depend on the scheduling.
pub fn run_mise_study(spec: &ScenarioSpec, methods: &[Method], seed: u64) -> Result<StudyReport> {
    spec.validate()?;
    if methods.is_empty() {
        return Err(Error::Input("no methods requested".into()));
    }
    let mut methods = methods.to_vec();
    methods.dedup();
    let outcomes: Vec<Vec<RepOutcome>> = (0..spec.reps as u64)
        .into_par_iter()
        .map(|rep| {
            let sc = gen_scenario(spec, rep, seed)?;
            Ok(methods.iter().map(|&m| run_method(m, &sc, &spec.alphas)).collect())
        })
        .collect::<Result<_>>()?;

    let mut mise = vec![vec![f64::NAN; spec.alphas.len()]; methods.len()];
    let mut seconds = vec![0.0; methods.len()];
    let mut failures = Vec::new();
    for (mi, &m) in methods.iter().enumerate() {
        let ok: Vec<&Vec<f64>> = outcomes.iter().filter_map(|o| o[mi].ise.as_ref()).collect();
        seconds[mi] = outcomes.iter().map(|o| o[mi].seconds).sum();
        failures.push(FailureCount {
            method: m,
            failed: spec.reps - ok.len(),
        });
        if !ok.is_empty() {
            for (ai, slot) in mise[mi].iter_mut().enumerate() {
                *slot = ok.iter().map(|v| v[ai]).sum::<f64>() / ok.len() as f64;
            }
        }
    }

    let base = methods.iter().position(|&m| m == Method::Dvqr);
    let mut rows = Vec::new();
    for (ai, &alpha) in spec.alphas.iter().enumerate() {
        for (mi, &method) in methods.iter().enumerate() {
            let rmise = match base {
                Some(b) if b == mi => 1.0,
                Some(b) => mise[mi][ai] / mise[b][ai],
                None => f64::NAN,
            };
            rows.push(StudyRow {
                scenario: spec.kind.to_string(),
                margins: spec.margins_label(),
                parameter: spec.param.to_string(),
                n_train: spec.n_train,
                alpha,
                method,
                mise: mise[mi][ai],
                rmise,
                seconds: seconds[mi],
            });
        }
    }
    Ok(StudyReport {
        seed,
        replications: spec.reps,
        rows,
        failures,
    })
}
