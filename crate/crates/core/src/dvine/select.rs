//! Forward covariate selection.

use super::DVineRegression;
use crate::bicop::{select_bicop, BiCop, FitCriterion, FittedPair};
use crate::error::{Error, Result};
use crate::margins::PseudoData;
use rayon::prelude::*;

/// Extension of the current vine by one candidate covariate.
struct Extension {
    /// New copulas for trees `1..=k`, tree `k` being the `V`-spine edge.
    pairs: Vec<FittedPair>,
    /// `F(x_{k-s} | x_{k-s+1..k})` per observation for `s = 0..=k`.
    last_fwd: Vec<Vec<f64>>,
}

impl Extension {
    fn spine_loglik(&self) -> f64 {
        self.pairs.last().map_or(0.0, |p| p.loglik)
    }

    fn n_params(&self) -> usize {
        self.pairs.iter().map(|p| p.copula.n_params()).sum()
    }
}

/// Fits the copulas joining a new last node (PIT column `uj`) to a vine
/// whose cached last forward transforms are `last_fwd`.
fn extend(last_fwd: &[Vec<f64>], uj: &[f64], criterion: FitCriterion, indep_level: f64) -> Result<Extension> {
    let k = last_fwd.len();
    let n = uj.len();
    let mut pairs = Vec::with_capacity(k);
    let mut new_fwd = Vec::with_capacity(k + 1);
    new_fwd.push(uj.to_vec());
    let mut b = uj.to_vec();
    let mut buf = vec![[0.0; 2]; n];
    for t in 1..=k {
        let a = &last_fwd[t - 1];
        for (slot, (&ai, &bi)) in buf.iter_mut().zip(a.iter().zip(&b)) {
            *slot = [ai, bi];
        }
        let fit = select_bicop(&buf, criterion, indep_level)?;
        let c = &fit.copula;
        let fwd: Vec<f64> = buf.iter().map(|&[x, y]| c.h_given_second(x, y)).collect();
        b = buf.iter().map(|&[x, y]| c.h_given_first(x, y)).collect();
        new_fwd.push(fwd);
        pairs.push(fit);
    }
    Ok(Extension {
        pairs,
        last_fwd: new_fwd,
    })
}

/// Grows a regression D-vine by forward selection.
///
/// Each step tries every unused covariate as the new last node, fitting only
/// the new edges (existing copulas stay fixed), and accepts the candidate
/// with the best criterion value if it strictly improves on the current
/// vine. Ties go to the lowest covariate index. Candidates are fitted in
/// parallel; the result does not depend on scheduling.
pub fn fit_dvine_regression(data: &PseudoData, criterion: FitCriterion, indep_level: f64) -> Result<DVineRegression> {
    let n = data.n();
    let d = data.d();
    if n < 30 {
        return Err(Error::domain(format!("vine fit needs n >= 30, got {n}")));
    }
    if d == 0 {
        return Err(Error::domain("no covariates"));
    }
    if !(0.0..=1.0).contains(&indep_level) {
        return Err(Error::domain(format!("independence test level {indep_level} outside [0, 1]")));
    }

    let mut order: Vec<usize> = Vec::new();
    let mut trees: Vec<Vec<BiCop>> = Vec::new();
    let mut last_fwd = vec![data.v.clone()];
    let mut ll = 0.0;
    let mut n_params = 0;
    let mut score = criterion.score(0.0, 0, n);
    let mut cll_path = Vec::new();
    let mut loglik_path = Vec::new();

    loop {
        let remaining: Vec<usize> = (0..d).filter(|j| !order.contains(j)).collect();
        if remaining.is_empty() {
            break;
        }
        let fits: Vec<Result<Extension>> = remaining
            .par_iter()
            .map(|&j| extend(&last_fwd, &data.u[j], criterion, indep_level))
            .collect();

        let mut best: Option<(f64, usize, Extension)> = None;
        for (&j, fit) in remaining.iter().zip(fits) {
            let ext = fit?;
            let s = criterion.score(ll + ext.spine_loglik(), n_params + ext.n_params(), n);
            if best.as_ref().is_none_or(|(bs, _, _)| s < *bs) {
                best = Some((s, j, ext));
            }
        }
        let Some((s, j, ext)) = best else { break };
        if !(s < score) {
            break;
        }

        ll += ext.spine_loglik();
        n_params += ext.n_params();
        score = s;
        order.push(j);
        let k = order.len();
        for (t, fit) in ext.pairs.into_iter().enumerate() {
            if t + 1 == k {
                trees.push(vec![fit.copula]);
            } else {
                trees[t].push(fit.copula);
            }
        }
        last_fwd = ext.last_fwd;
        cll_path.push(criterion.reported(ll, n_params, n));
        loglik_path.push(ll);
    }

    DVineRegression::new(order, trees, criterion)?.with_paths(cll_path, loglik_path)
}
