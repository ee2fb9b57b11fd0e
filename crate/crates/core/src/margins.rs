//! Kernel-smoothed marginal distribution functions and the probability
//! integral transform to pseudo copula data.

use crate::data::DataTable;
use crate::error::{Error, Result};
use crate::special::{norm_cdf, norm_pdf};
use serde::{Deserialize, Serialize};

/// Gaussian-kernel smoothed CDF `F(x) = (1/n) sum Phi((x - x_i) / h)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelMargin {
    sample: Vec<f64>,
    bandwidth: f64,
}

/// Normal-reference bandwidth `1.59 * sigma * n^(-1/3)` with the robust scale
/// `sigma = min(sd, IQR / 1.349)`.
pub fn reference_bandwidth(sample: &[f64]) -> Result<f64> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::DegenerateMargin(format!("need at least 2 observations, got {n}")));
    }
    let mean = sample.iter().sum::<f64>() / n as f64;
    let var = sample.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    if !(var > 0.0) || !var.is_finite() {
        return Err(Error::DegenerateMargin("sample has zero variance".into()));
    }
    let sd = var.sqrt();
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let scale = if iqr > 0.0 { sd.min(iqr / 1.349) } else { sd };
    Ok(normal_reference_rule(scale, n))
}

/// `1.59 * scale * n^(-1/3)`.
pub fn normal_reference_rule(scale: f64, n: usize) -> f64 {
    1.59 * scale * (n as f64).powf(-1.0 / 3.0)
}

/// Linear-interpolation sample quantile of sorted data.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

impl KernelMargin {
    /// Fits the margin with the normal-reference bandwidth. Requires at least
    /// 10 finite observations with positive variance.
    pub fn fit(sample: &[f64]) -> Result<Self> {
        if sample.len() < 10 {
            return Err(Error::DegenerateMargin(format!(
                "need at least 10 observations, got {}",
                sample.len()
            )));
        }
        if sample.iter().any(|x| !x.is_finite()) {
            return Err(Error::DegenerateMargin("sample contains non-finite values".into()));
        }
        let h = reference_bandwidth(sample)?;
        Self::with_bandwidth(sample.to_vec(), h)
    }

    /// Margin with a caller-chosen bandwidth (no minimum sample size).
    pub fn with_bandwidth(sample: Vec<f64>, bandwidth: f64) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::DegenerateMargin("empty sample".into()));
        }
        if !(bandwidth > 0.0) || !bandwidth.is_finite() {
            return Err(Error::domain(format!("bandwidth must be positive, got {bandwidth}")));
        }
        let mut sample = sample;
        sample.sort_by(f64::total_cmp);
        Ok(KernelMargin { sample, bandwidth })
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// Training observations in ascending order.
    pub fn sample(&self) -> &[f64] {
        &self.sample
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        let h = self.bandwidth;
        let n = self.sample.len() as f64;
        // Points more than 10 bandwidths below x contribute exactly 1 in
        // double precision.
        let lo = self.sample.partition_point(|&s| s < x - 10.0 * h);
        let hi = self.sample.partition_point(|&s| s <= x + 10.0 * h);
        if lo == 0 && hi == 0 {
            let s: f64 = self.sample.iter().map(|&s| norm_cdf((x - s) / h)).sum();
            return s / n;
        }
        let s: f64 = self.sample[lo..hi].iter().map(|&s| norm_cdf((x - s) / h)).sum();
        (lo as f64 + s) / n
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let h = self.bandwidth;
        let lo = self.sample.partition_point(|&s| s < x - 40.0 * h);
        let hi = self.sample.partition_point(|&s| s <= x + 40.0 * h);
        let s: f64 = self.sample[lo..hi].iter().map(|&s| norm_pdf((x - s) / h)).sum();
        s / (self.sample.len() as f64 * h)
    }

    /// Inverse of [`KernelMargin::cdf`] for `p` in (0, 1).
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::domain(format!("quantile level {p} outside (0, 1)")));
        }
        let h = self.bandwidth;
        let (min, max) = (self.sample[0], self.sample[self.sample.len() - 1]);
        let mut lo = min - 8.0 * h;
        let mut hi = max + 8.0 * h;
        // Beyond eight bandwidths from the sample range the cdf is within
        // Phi(-8) of 0 or 1.
        let extreme = p < 1e-14 || p > 1.0 - 1e-14;
        let mut widen = 8.0 * h;
        while extreme && self.cdf(lo) > p {
            widen *= 2.0;
            lo = min - widen;
            if !lo.is_finite() {
                return Err(Error::numeric("kernel quantile", format!("cannot bracket p={p}")));
            }
        }
        widen = 8.0 * h;
        while extreme && self.cdf(hi) < p {
            widen *= 2.0;
            hi = max + widen;
            if !hi.is_finite() {
                return Err(Error::numeric("kernel quantile", format!("cannot bracket p={p}")));
            }
        }
        // Newton steps from the sample quantile, safeguarded by the bracket.
        let mut x = quantile_sorted(&self.sample, p).clamp(lo, hi);
        for _ in 0..200 {
            let f = self.cdf(x) - p;
            if f.abs() <= 1e-13 {
                return Ok(x);
            }
            if f > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            if hi - lo <= 1e-14 * (1.0 + x.abs()) {
                return Ok(x);
            }
            let d = self.pdf(x);
            let newton = x - f / d;
            x = if d > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        Ok(x)
    }

    /// PIT value clamped into `[1/(n+1), n/(n+1)]`, `n` being the training size.
    pub fn pit(&self, x: f64) -> f64 {
        let n = self.sample.len() as f64;
        self.cdf(x).clamp(1.0 / (n + 1.0), n / (n + 1.0))
    }
}

/// Response and covariate PIT values of a training set.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoData {
    /// Response PITs.
    pub v: Vec<f64>,
    /// Covariate PITs, one vector per covariate.
    pub u: Vec<Vec<f64>>,
    pub response_name: String,
    pub covariate_names: Vec<String>,
}

impl PseudoData {
    pub fn new(v: Vec<f64>, u: Vec<Vec<f64>>) -> Result<Self> {
        let names = (1..=u.len()).map(|j| format!("U{j}")).collect();
        Self::with_names(v, u, "V".into(), names)
    }

    pub fn with_names(
        v: Vec<f64>,
        u: Vec<Vec<f64>>,
        response_name: String,
        covariate_names: Vec<String>,
    ) -> Result<Self> {
        if covariate_names.len() != u.len() {
            return Err(Error::Dimension {
                expected: u.len(),
                got: covariate_names.len(),
            });
        }
        for col in &u {
            if col.len() != v.len() {
                return Err(Error::Dimension {
                    expected: v.len(),
                    got: col.len(),
                });
            }
        }
        let inside = |x: &f64| *x > 0.0 && *x < 1.0;
        if !v.iter().all(inside) || !u.iter().flatten().all(inside) {
            return Err(Error::domain("pseudo observations must lie in (0, 1)"));
        }
        Ok(PseudoData {
            v,
            u,
            response_name,
            covariate_names,
        })
    }

    pub fn n(&self) -> usize {
        self.v.len()
    }

    pub fn d(&self) -> usize {
        self.u.len()
    }
}

/// Fitted margins of a training table.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginSet {
    pub response: KernelMargin,
    /// In covariate order (table order with the response removed).
    pub covariates: Vec<KernelMargin>,
}

/// Fits one kernel margin per column and transforms the training data to
/// pseudo copula data.
pub fn pit_transform(raw: &DataTable, response_col: &str) -> Result<(PseudoData, MarginSet)> {
    let r = raw
        .column_index(response_col)
        .ok_or_else(|| Error::Input(format!("response column '{response_col}' not found")))?;
    let fit_col = |j: usize| {
        KernelMargin::fit(&raw.columns()[j])
            .map_err(|e| Error::DegenerateMargin(format!("column '{}': {e}", raw.names()[j])))
    };
    let response = fit_col(r)?;
    let v: Vec<f64> = raw.columns()[r].iter().map(|&x| response.pit(x)).collect();
    let mut covariates = Vec::new();
    let mut u = Vec::new();
    let mut names = Vec::new();
    for j in (0..raw.n_cols()).filter(|&j| j != r) {
        let m = fit_col(j)?;
        u.push(raw.columns()[j].iter().map(|&x| m.pit(x)).collect());
        covariates.push(m);
        names.push(raw.names()[j].clone());
    }
    let pseudo = PseudoData::with_names(v, u, response_col.to_owned(), names)?;
    Ok((pseudo, MarginSet { response, covariates }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn normal_sample(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn symmetric_sample_median() {
        let m = KernelMargin::with_bandwidth(vec![-1.0, 0.0, 1.0], 0.7).unwrap();
        assert_eq!(m.cdf(0.0), 0.5);
        assert!(m.quantile(0.5).unwrap().abs() < 1e-12);
    }

    #[test]
    fn direct_evaluations() {
        let single = KernelMargin::with_bandwidth(vec![3.2], 0.4).unwrap();
        assert_eq!(single.cdf(3.2), 0.5);
        let two = KernelMargin::with_bandwidth(vec![0.0, 10.0], 1.0).unwrap();
        let want = (norm_cdf(0.0) + norm_cdf(-10.0)) / 2.0;
        assert!((two.cdf(0.0) - want).abs() < 1e-16);
        assert!(two.cdf(-1e6) < 1e-300 && two.cdf(1e6) == 1.0);
    }

    #[test]
    fn normal_sample_tail_values() {
        let m = KernelMargin::fit(&normal_sample(1000, 42)).unwrap();
        let f = m.cdf(1.96);
        assert!((0.95..=0.985).contains(&f), "F(1.96) = {f}");
        let q = m.quantile(0.95).unwrap();
        assert!((1.5..=1.8).contains(&q), "q(0.95) = {q}");
    }

    #[test]
    fn monotone_on_wide_grid() {
        let m = KernelMargin::fit(&normal_sample(300, 1)).unwrap();
        let h = m.bandwidth();
        let (lo, hi) = (m.sample()[0] - 4.0 * h, m.sample()[299] + 4.0 * h);
        let mut last = 0.0;
        for i in 0..1000 {
            let x = lo + (hi - lo) * i as f64 / 999.0;
            let f = m.cdf(x);
            assert!(f - last >= -1e-12);
            last = f;
        }
    }

    #[test]
    fn quantile_round_trips() {
        let sample = normal_sample(500, 9);
        let m = KernelMargin::fit(&sample).unwrap();
        for &x in sample.iter().step_by(25) {
            assert!((m.quantile(m.cdf(x)).unwrap() - x).abs() < 1e-6);
        }
        for i in 1..50 {
            let p = i as f64 / 50.0;
            assert!((m.cdf(m.quantile(p).unwrap()) - p).abs() < 1e-9);
        }
        assert!(m.quantile(0.0).is_err() && m.quantile(1.0).is_err());
    }

    #[test]
    fn bandwidth_rate() {
        let ratio = normal_reference_rule(0.83, 8000) / normal_reference_rule(0.83, 1000);
        assert!((ratio - 0.5).abs() < 1e-9);
        let h = reference_bandwidth(&normal_sample(1000, 3)).unwrap();
        assert!(h > 0.1 && h < 0.2, "{h}");
    }

    #[test]
    fn degenerate_margins_rejected() {
        assert!(matches!(KernelMargin::fit(&[2.0; 20]), Err(Error::DegenerateMargin(_))));
        assert!(KernelMargin::fit(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn pit_columns_are_roughly_uniform() {
        let y = normal_sample(1000, 5);
        let x: Vec<f64> = y.iter().map(|v| 2.0 * v + 1.0).collect();
        let t = DataTable::new(vec!["y".into(), "x".into(), "x2".into()], vec![y, x.clone(), x]).unwrap();
        let (pd, ms) = pit_transform(&t, "y").unwrap();
        assert_eq!(pd.u[0], pd.u[1]);
        assert_eq!(ms.covariates.len(), 2);
        for col in std::iter::once(&pd.v).chain(&pd.u) {
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            assert!((0.45..=0.55).contains(&mean));
            let mut s = col.clone();
            s.sort_by(f64::total_cmp);
            let n = s.len() as f64;
            let ks = s
                .iter()
                .enumerate()
                .map(|(i, &p)| ((i + 1) as f64 / n - p).abs().max((p - i as f64 / n).abs()))
                .fold(0.0, f64::max);
            assert!(ks < 2.0 * 1.36 / n.sqrt(), "ks = {ks}");
        }
        assert!(pit_transform(&t, "nope").is_err());
    }
}
