//! Out-of-sample tick-loss backtests on a time-ordered table.

use super::lqr::{check_loss, lqr_fit};
use super::study::Method;
use crate::bicop::FitCriterion;
use crate::data::DataTable;
use crate::dvine::{fit_quantreg, to_exact_json};
use crate::error::{Error, Result};
use serde::Serialize;
use std::time::Instant;

/// Average check loss `(1/n) sum rho_alpha(y_i - q_i)`.
pub fn tick_loss(y: &[f64], q: &[f64], alpha: f64) -> Result<f64> {
    if y.len() != q.len() {
        return Err(Error::Dimension { expected: y.len(), got: q.len() });
    }
    if y.is_empty() {
        return Err(Error::domain("tick loss of an empty sample"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("quantile level {alpha} outside (0, 1)")));
    }
    Ok(y.iter().zip(q).map(|(a, b)| check_loss(a - b, alpha)).sum::<f64>() / y.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BacktestRow {
    pub alpha: f64,
    pub method: Method,
    pub tick_loss: f64,
    /// Fit and prediction time of the method (shared across alphas for DVQR).
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BacktestReport {
    pub split_index: usize,
    pub n_train: usize,
    pub n_eval: usize,
    pub rows: Vec<BacktestRow>,
}

impl BacktestReport {
    pub fn row(&self, alpha: f64, method: Method) -> Option<&BacktestRow> {
        self.rows.iter().find(|r| r.alpha == alpha && r.method == method)
    }

    pub fn to_json(&self) -> Result<String> {
        to_exact_json(self)
    }
}

/// Fits each method on rows `..split_index` and scores its quantile
/// predictions on rows `split_index..` by tick loss.
pub fn oos_backtest(
    data: &DataTable,
    response_col: &str,
    split_index: usize,
    alphas: &[f64],
    methods: &[Method],
) -> Result<BacktestReport> {
    let r = data
        .column_index(response_col)
        .ok_or_else(|| Error::Input(format!("response column '{response_col}' not found")))?;
    let n = data.n_rows();
    if split_index < 50 || n.saturating_sub(split_index) < 50 {
        return Err(Error::Input(format!(
            "split at row {split_index} of {n} leaves fewer than 50 rows on one side"
        )));
    }
    if let Some(a) = alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
        return Err(Error::Input(format!("quantile level {a} outside (0, 1)")));
    }
    let train = data.slice_rows(0..split_index);
    let test = data.slice_rows(split_index..n);
    let y_test = &test.columns()[r];
    let covariates = |row: Vec<f64>| -> Vec<f64> {
        row.into_iter().enumerate().filter(|(j, _)| *j != r).map(|(_, v)| v).collect()
    };
    let x_test: Vec<Vec<f64>> = (0..test.n_rows()).map(|i| covariates(test.row(i))).collect();

    let mut rows = Vec::new();
    for &method in methods {
        let start = Instant::now();
        let preds: Vec<Vec<f64>> = match method {
            Method::Dvqr => {
                let model = fit_quantreg(&train, response_col, FitCriterion::Aic, 0.05)?;
                let per_row = x_test
                    .iter()
                    .map(|x| model.predict_quantiles(alphas, x))
                    .collect::<Result<Vec<_>>>()?;
                (0..alphas.len()).map(|a| per_row.iter().map(|q| q[a]).collect()).collect()
            }
            Method::Lqr => {
                let y = &train.columns()[r];
                let xs: Vec<Vec<f64>> = train
                    .columns()
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != r)
                    .map(|(_, c)| c.clone())
                    .collect();
                alphas
                    .iter()
                    .map(|&a| {
                        let m = lqr_fit(y, &xs, a)?;
                        x_test.iter().map(|x| m.predict(x)).collect()
                    })
                    .collect::<Result<Vec<_>>>()?
            }
        };
        let seconds = start.elapsed().as_secs_f64();
        for (&alpha, q) in alphas.iter().zip(&preds) {
            rows.push(BacktestRow {
                alpha,
                method,
                tick_loss: tick_loss(y_test, q, alpha)?,
                seconds,
            });
        }
    }
    Ok(BacktestReport {
        split_index,
        n_train: split_index,
        n_eval: n - split_index,
        rows,
    })
}
