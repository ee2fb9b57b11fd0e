//! Regression D-vines with the response as first node.
//!
//! Nodes are numbered `0` (the response `V`) and `1..=k` (the selected
//! covariates in vine order). Tree `t` has edges `e = 0..=k-t`, edge `e`
//! joining nodes `e` and `e + t` given the nodes in between; its copula takes
//! `F(x_e | x_{e+1..e+t-1})` as first and `F(x_{e+t} | x_{e+1..e+t-1})` as
//! second argument. Edge `0` of every tree involves `V`.

mod io;
mod model;
mod select;

pub(crate) use io::to_exact_json;
pub use io::{sample_digest, FORMAT_NAME, FORMAT_VERSION};
pub use model::{fit_quantreg, QuantRegModel};
pub use select::fit_dvine_regression;

use crate::bicop::{BiCop, FitCriterion};
use crate::error::{Error, Result};
use crate::margins::PseudoData;

/// A fitted regression D-vine with order `V - U_{l1} - ... - U_{lk}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DVineRegression {
    order: Vec<usize>,
    pairs: Vec<Vec<BiCop>>,
    criterion: FitCriterion,
    cll_path: Vec<f64>,
    loglik_path: Vec<f64>,
}

impl DVineRegression {
    /// Builds a vine from explicit pair copulas; `pairs[t - 1]` holds the
    /// `k + 1 - t` copulas of tree `t`.
    pub fn new(order: Vec<usize>, pairs: Vec<Vec<BiCop>>, criterion: FitCriterion) -> Result<Self> {
        let k = order.len();
        if pairs.len() != k {
            return Err(Error::Dimension { expected: k, got: pairs.len() });
        }
        for (t, tree) in pairs.iter().enumerate() {
            if tree.len() != k - t {
                return Err(Error::Dimension { expected: k - t, got: tree.len() });
            }
        }
        for (i, j) in order.iter().enumerate() {
            if order[..i].contains(j) {
                return Err(Error::domain(format!("covariate {j} appears twice in the order")));
            }
        }
        Ok(DVineRegression {
            order,
            pairs,
            criterion,
            cll_path: Vec::new(),
            loglik_path: Vec::new(),
        })
    }

    /// The vine without covariates.
    pub fn empty(criterion: FitCriterion) -> Self {
        DVineRegression {
            order: Vec::new(),
            pairs: Vec::new(),
            criterion,
            cll_path: Vec::new(),
            loglik_path: Vec::new(),
        }
    }

    /// Attaches selection paths; both are empty for a vine that was specified
    /// rather than selected.
    pub(crate) fn with_paths(mut self, cll_path: Vec<f64>, loglik_path: Vec<f64>) -> Result<Self> {
        let unselected = cll_path.is_empty() && loglik_path.is_empty();
        if !unselected && (cll_path.len() != self.k() || loglik_path.len() != self.k()) {
            return Err(Error::Dimension {
                expected: self.k(),
                got: cll_path.len().min(loglik_path.len()),
            });
        }
        self.cll_path = cll_path;
        self.loglik_path = loglik_path;
        Ok(self)
    }

    /// Number of covariates in the vine.
    pub fn k(&self) -> usize {
        self.order.len()
    }

    /// Covariate indices (into the pseudo data columns) in vine order.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// `pairs()[t - 1][e]` is the copula of tree `t`, edge `e`.
    pub fn pairs(&self) -> &[Vec<BiCop>] {
        &self.pairs
    }

    pub fn criterion(&self) -> FitCriterion {
        self.criterion
    }

    /// Criterion value after each accepted covariate (log-likelihood for
    /// `LogLik`, the corrected value for AIC/BIC).
    pub fn cll_path(&self) -> &[f64] {
        &self.cll_path
    }

    /// Uncorrected conditional log-likelihood after each accepted covariate.
    pub fn loglik_path(&self) -> &[f64] {
        &self.loglik_path
    }

    /// Parameter count over all pairs.
    pub fn n_params(&self) -> usize {
        self.pairs.iter().flatten().map(BiCop::n_params).sum()
    }

    fn check_args(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.k() {
            return Err(Error::Dimension { expected: self.k(), got: u.len() });
        }
        if let Some(bad) = u.iter().find(|x| !(**x > 0.0 && **x < 1.0)) {
            return Err(Error::domain(format!("covariate level {bad} outside (0, 1)")));
        }
        Ok(())
    }

    /// `F(u_t | u_1, ..., u_{t-1})` for `t = 1..=k`: the second arguments of
    /// the `V`-spine copulas.
    fn spine_conditioners(&self, u: &[f64]) -> Vec<f64> {
        let k = self.k();
        let mut out = Vec::with_capacity(k);
        let mut fwd = u.to_vec();
        let mut bwd = u.to_vec();
        for t in 1..=k {
            out.push(bwd[0]);
            if t == k {
                break;
            }
            let m = k - t;
            let mut nf = Vec::with_capacity(m);
            let mut nb = Vec::with_capacity(m);
            for i in 0..m {
                let c = &self.pairs[t - 1][i + 1];
                nf.push(c.h_given_second(fwd[i], bwd[i + 1]));
                nb.push(c.h_given_first(fwd[i], bwd[i + 1]));
            }
            fwd = nf;
            bwd = nb;
        }
        out
    }

    /// `C_{V|U}(v | u)` with `u` given in vine order.
    pub fn cond_cdf(&self, v: f64, u: &[f64]) -> Result<f64> {
        self.check_args(u)?;
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::domain(format!("response level {v} outside [0, 1]")));
        }
        let b = self.spine_conditioners(u);
        Ok(self.pairs.iter().zip(&b).fold(v, |p, (tree, &b)| tree[0].h_given_second(p, b)))
    }

    /// `C^{-1}_{V|U}(alpha | u)` with `u` given in vine order.
    pub fn cond_quantile(&self, alpha: f64, u: &[f64]) -> Result<f64> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::domain(format!("quantile level {alpha} outside (0, 1)")));
        }
        self.check_args(u)?;
        let b = self.spine_conditioners(u);
        let mut p = alpha;
        for (tree, &b) in self.pairs.iter().zip(&b).rev() {
            p = tree[0].hinv_given_second(p, b)?;
        }
        Ok(p)
    }

    /// `ln c_{V|U}(v | u)`: sum of the `V`-spine log densities.
    pub fn ln_cond_density(&self, v: f64, u: &[f64]) -> Result<f64> {
        self.check_args(u)?;
        let b = self.spine_conditioners(u);
        let mut p = v;
        let mut sum = 0.0;
        for (tree, &b) in self.pairs.iter().zip(&b) {
            sum += tree[0].ln_pdf(p, b);
            p = tree[0].h_given_second(p, b);
        }
        Ok(sum)
    }

    /// Conditional log-likelihood of `data` (columns indexed by the order),
    /// reported under `criterion`.
    pub fn cll(&self, data: &PseudoData, criterion: FitCriterion) -> Result<f64> {
        if let Some(&j) = self.order.iter().find(|&&j| j >= data.d()) {
            return Err(Error::Dimension { expected: j + 1, got: data.d() });
        }
        let mut ll = 0.0;
        let mut u = vec![0.0; self.k()];
        for i in 0..data.n() {
            for (slot, &j) in u.iter_mut().zip(&self.order) {
                *slot = data.u[j][i];
            }
            ll += self.ln_cond_density(data.v[i], &u)?;
        }
        Ok(criterion.reported(ll, self.n_params(), data.n()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bicop::{Family, Rotation};

    fn clayton_vine(delta: f64) -> DVineRegression {
        let c1 = BiCop::clayton(delta).unwrap();
        let c2 = BiCop::clayton(delta / (1.0 + delta)).unwrap();
        DVineRegression::new(vec![0, 1], vec![vec![c1.clone(), c1], vec![c2]], FitCriterion::Aic).unwrap()
    }

    #[test]
    fn single_pair_reduces_to_hfunc() {
        let c = BiCop::new(Family::Gumbel, Rotation::R180, &[2.5]).unwrap();
        let vine = DVineRegression::new(vec![0], vec![vec![c.clone()]], FitCriterion::Aic).unwrap();
        assert_eq!(vine.cond_cdf(0.3, &[0.7]).unwrap(), c.h_given_second(0.3, 0.7));
    }

    #[test]
    fn independence_vine_is_identity() {
        let ind = BiCop::independence();
        let vine = DVineRegression::new(
            vec![2, 0, 1],
            vec![vec![ind.clone(); 3], vec![ind.clone(); 2], vec![ind]],
            FitCriterion::Aic,
        )
        .unwrap();
        let u = [0.2, 0.9, 0.4];
        assert_eq!(vine.cond_cdf(0.37, &u).unwrap(), 0.37);
        assert!((vine.cond_quantile(0.81, &u).unwrap() - 0.81).abs() < 1e-15);
        assert_eq!(vine.ln_cond_density(0.5, &u).unwrap(), 0.0);
    }

    #[test]
    fn quantile_inverts_cdf() {
        let vine = clayton_vine(2.0);
        for &a in &[0.01, 0.3, 0.5, 0.95, 0.99] {
            let q = vine.cond_quantile(a, &[0.2, 0.8]).unwrap();
            assert!((vine.cond_cdf(q, &[0.2, 0.8]).unwrap() - a).abs() < 1e-10);
        }
    }

    #[test]
    fn shape_and_domain_checks() {
        let c = BiCop::independence();
        assert!(DVineRegression::new(vec![0, 1], vec![vec![c.clone(); 2]], FitCriterion::Aic).is_err());
        assert!(DVineRegression::new(vec![0, 0], vec![vec![c.clone(); 2], vec![c]], FitCriterion::Aic).is_err());
        let vine = clayton_vine(1.0);
        assert!(vine.cond_quantile(0.5, &[0.5]).is_err());
        assert!(vine.cond_quantile(1.0, &[0.5, 0.5]).is_err());
        assert!(vine.cond_quantile(0.5, &[0.0, 0.5]).is_err());
    }
}
