//! End-to-end quantile regression model: margins plus regression vine.

use super::{fit_dvine_regression, DVineRegression};
use crate::bicop::FitCriterion;
use crate::data::DataTable;
use crate::error::{Error, Result};
use crate::margins::{pit_transform, KernelMargin};

/// Fitted D-vine quantile regression model.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantRegModel {
    response_name: String,
    covariate_names: Vec<String>,
    response_margin: KernelMargin,
    covariate_margins: Vec<KernelMargin>,
    vine: DVineRegression,
}

impl QuantRegModel {
    /// Assembles a model. `vine.order()` indexes `covariate_margins`.
    pub fn new(
        response_name: String,
        covariate_names: Vec<String>,
        response_margin: KernelMargin,
        covariate_margins: Vec<KernelMargin>,
        vine: DVineRegression,
    ) -> Result<Self> {
        if covariate_names.len() != covariate_margins.len() {
            return Err(Error::Dimension {
                expected: covariate_margins.len(),
                got: covariate_names.len(),
            });
        }
        if let Some(&j) = vine.order().iter().find(|&&j| j >= covariate_margins.len()) {
            return Err(Error::domain(format!("vine uses covariate {j} without a margin")));
        }
        Ok(QuantRegModel {
            response_name,
            covariate_names,
            response_margin,
            covariate_margins,
            vine,
        })
    }

    pub fn response_name(&self) -> &str {
        &self.response_name
    }

    /// All covariate names in training-table order.
    pub fn covariate_names(&self) -> &[String] {
        &self.covariate_names
    }

    pub fn response_margin(&self) -> &KernelMargin {
        &self.response_margin
    }

    pub fn covariate_margins(&self) -> &[KernelMargin] {
        &self.covariate_margins
    }

    pub fn vine(&self) -> &DVineRegression {
        &self.vine
    }

    /// Names of the selected covariates in vine order.
    pub fn selected(&self) -> Vec<&str> {
        self.vine.order().iter().map(|&j| self.covariate_names[j].as_str()).collect()
    }

    /// Order as `V–U2–U1` using `U{j}` labels (1-based covariate positions).
    pub fn order_label(&self) -> String {
        std::iter::once("V".to_owned())
            .chain(self.vine.order().iter().map(|j| format!("U{}", j + 1)))
            .collect::<Vec<_>>()
            .join("–")
    }

    fn covariate_levels(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.covariate_names.len() {
            return Err(Error::Dimension {
                expected: self.covariate_names.len(),
                got: x.len(),
            });
        }
        Ok(self.vine.order().iter().map(|&j| self.covariate_margins[j].pit(x[j])).collect())
    }

    /// Conditional `alpha`-quantile of the response at covariate values `x`
    /// (all covariates in training order; unselected ones are ignored).
    pub fn predict_quantile(&self, alpha: f64, x: &[f64]) -> Result<f64> {
        let u = self.covariate_levels(x)?;
        let p = self.vine.cond_quantile(alpha, &u)?;
        self.response_margin.quantile(p)
    }

    /// Quantiles at several levels, sharing the covariate transforms.
    pub fn predict_quantiles(&self, alphas: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        let u = self.covariate_levels(x)?;
        alphas
            .iter()
            .map(|&a| self.response_margin.quantile(self.vine.cond_quantile(a, &u)?))
            .collect()
    }

    /// Response quantile level on the unit scale with the selected covariates
    /// pinned at PIT levels `kappa` (vine order).
    pub fn stress_predict(&self, kappa: &[f64], alpha: f64) -> Result<f64> {
        self.vine.cond_quantile(alpha, kappa)
    }

    /// Like [`QuantRegModel::stress_predict`] with levels given by covariate
    /// name; selected covariates not named are held at their median, `0.5`.
    /// Naming an unknown covariate is an error; unselected ones have no
    /// effect.
    pub fn stress_predict_named(&self, kappa: &[(String, f64)], alpha: f64) -> Result<f64> {
        let mut levels = vec![0.5; self.vine.k()];
        for (name, level) in kappa {
            let j = self
                .covariate_names
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| Error::Input(format!("unknown covariate '{name}'")))?;
            if !(*level > 0.0 && *level < 1.0) {
                return Err(Error::Input(format!("stress level {level} for '{name}' outside (0, 1)")));
            }
            if let Some(pos) = self.vine.order().iter().position(|&o| o == j) {
                levels[pos] = *level;
            }
        }
        self.stress_predict(&levels, alpha)
    }
}

/// Two-step fit: kernel margins and PITs, then forward vine selection.
pub fn fit_quantreg(raw: &DataTable, response_col: &str, criterion: FitCriterion, indep_level: f64) -> Result<QuantRegModel> {
    let (pseudo, margins) = pit_transform(raw, response_col)?;
    let vine = fit_dvine_regression(&pseudo, criterion, indep_level)?;
    QuantRegModel::new(
        pseudo.response_name,
        pseudo.covariate_names,
        margins.response,
        margins.covariates,
        vine,
    )
}
