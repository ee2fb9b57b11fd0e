//! Linear quantile regression by majorize-minimize reweighted least squares.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Linear conditional quantile `beta_0 + sum beta_j x_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct LqrModel {
    /// Intercept first.
    pub beta: Vec<f64>,
    pub alpha: f64,
}

impl LqrModel {
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() + 1 != self.beta.len() {
            return Err(Error::Dimension {
                expected: self.beta.len() - 1,
                got: x.len(),
            });
        }
        Ok(self.beta[0] + self.beta[1..].iter().zip(x).map(|(b, v)| b * v).sum::<f64>())
    }
}

pub fn lqr_predict(m: &LqrModel, x: &[f64]) -> Result<f64> {
    m.predict(x)
}

/// Check loss `rho_alpha(r) = r (alpha - 1{r < 0})`.
pub fn check_loss(r: f64, alpha: f64) -> f64 {
    if r < 0.0 {
        r * (alpha - 1.0)
    } else {
        r * alpha
    }
}

fn objective(design: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>, alpha: f64) -> f64 {
    (y - design * beta).iter().map(|&r| check_loss(r, alpha)).sum()
}

fn weighted_solve(design: &DMatrix<f64>, rhs_y: &DVector<f64>, w: &DVector<f64>, shift: f64) -> Result<DVector<f64>> {
    let p = design.ncols();
    let mut xtwx = DMatrix::zeros(p, p);
    let mut rhs = DVector::zeros(p);
    for (i, row) in design.row_iter().enumerate() {
        let wi = w[i];
        for a in 0..p {
            rhs[a] += row[a] * (wi * rhs_y[i] + shift);
            for b in 0..=a {
                xtwx[(a, b)] += wi * row[a] * row[b];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            xtwx[(b, a)] = xtwx[(a, b)];
        }
    }
    xtwx.cholesky()
        .map(|c| c.solve(&rhs))
        .ok_or_else(|| Error::LinAlg("design matrix is rank deficient".into()))
}

/// Fits the `alpha`-quantile regression of `y` on covariate columns `x`.
///
/// Minimises the perturbed check loss `rho(r) - (eps/2) ln(eps + |r|)` by
/// majorize-minimize steps, each a weighted least-squares solve of
/// `X'WX beta = X'Wy + (2 alpha - 1) X'1` with `w_i = 1 / (eps + |r_i|)`,
/// shrinking `eps` to `1e-6` within at most 200 iterations. The result is
/// then compared with the exact fit through the `d + 1` smallest residuals.
pub fn lqr_fit(y: &[f64], x: &[Vec<f64>], alpha: f64) -> Result<LqrModel> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("quantile level {alpha} outside (0, 1)")));
    }
    let n = y.len();
    let p = x.len() + 1;
    if let Some(c) = x.iter().find(|c| c.len() != n) {
        return Err(Error::Dimension { expected: n, got: c.len() });
    }
    if n <= p {
        return Err(Error::domain(format!("need more than {p} observations, got {n}")));
    }
    let design = DMatrix::from_fn(n, p, |i, j| if j == 0 { 1.0 } else { x[j - 1][i] });
    let yv = DVector::from_column_slice(y);

    let ones = DVector::from_element(n, 1.0);
    let mut beta = weighted_solve(&design, &yv, &ones, 0.0)?;
    let scale = (&yv - &design * &beta).iter().map(|r| r.abs()).sum::<f64>() / n as f64;
    let floor = 1e-6;
    let mut eps = (1e-2 * scale).max(floor);
    let mut obj = objective(&design, &yv, &beta, alpha);
    let shift = 2.0 * alpha - 1.0;
    for _ in 0..200 {
        let r = &yv - &design * &beta;
        let w = r.map(|ri| 1.0 / (eps + ri.abs()));
        beta = weighted_solve(&design, &yv, &w, shift)?;
        let new_obj = objective(&design, &yv, &beta, alpha);
        let done = eps <= floor && (obj - new_obj).abs() <= 1e-12 * (1.0 + obj.abs());
        obj = new_obj;
        if done {
            break;
        }
        eps = (eps * 0.5).max(floor);
    }

    if let Some(vertex) = vertex_fit(&design, &yv, &beta) {
        let v_obj = objective(&design, &yv, &vertex, alpha);
        if v_obj < obj {
            beta = vertex;
        }
    }
    if beta.iter().any(|b| !b.is_finite()) {
        return Err(Error::numeric("lqr_fit", "non-finite coefficients"));
    }
    Ok(LqrModel {
        beta: beta.iter().copied().collect(),
        alpha,
    })
}

/// Exact fit through the observations with the smallest residuals.
fn vertex_fit(design: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>) -> Option<DVector<f64>> {
    let p = design.ncols();
    let r = y - design * beta;
    let mut idx: Vec<usize> = (0..y.len()).collect();
    idx.sort_by(|&a, &b| r[a].abs().total_cmp(&r[b].abs()));
    let rows: Vec<usize> = idx.into_iter().take(p).collect();
    let sub = DMatrix::from_fn(p, p, |i, j| design[(rows[i], j)]);
    let rhs = DVector::from_iterator(p, rows.iter().map(|&i| y[i]));
    sub.lu().solve(&rhs)
}
