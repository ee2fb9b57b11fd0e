//! Vine quantiles against closed-form conditional quantiles.
//!
//! Usage: `cargo run --example closed_form_oracles`

use dvine_qr::oracles::{clayton3_cond_quantile, dvine_partial_correlations, gaussian_copula_cond_quantile, matrix};
use dvine_qr::{BiCop, DVineRegression, FitCriterion};

fn main() -> dvine_qr::Result<()> {
    let corr = matrix(&[vec![1.0, 0.5, 0.3], vec![0.5, 1.0, 0.2], vec![0.3, 0.2, 1.0]])?;
    let partial = dvine_partial_correlations(&corr)?;
    let pairs = partial
        .iter()
        .map(|tree| tree.iter().map(|&r| BiCop::gaussian(r)).collect())
        .collect::<dvine_qr::Result<Vec<Vec<_>>>>()?;
    let vine = DVineRegression::new(vec![0, 1], pairs, FitCriterion::Aic)?;
    println!("Gaussian copula, partial correlations {partial:?}");
    for (a, u) in [(0.1, [0.2, 0.9]), (0.5, [0.5, 0.5]), (0.95, [0.99, 0.01])] {
        let v = vine.cond_quantile(a, &u)?;
        let exact = gaussian_copula_cond_quantile(&corr, a, &u)?;
        println!("  alpha {a} u {u:?}: vine {v:.10} closed form {exact:.10}");
    }

    let delta = 2.0;
    let c = BiCop::clayton(delta)?;
    let spine = BiCop::clayton(delta / (1.0 + delta))?;
    let vine = DVineRegression::new(vec![0, 1], vec![vec![c.clone(), c], vec![spine]], FitCriterion::Aic)?;
    println!("trivariate Clayton, delta = {delta}");
    for (a, v, w) in [(0.1, 0.3, 0.6), (0.5, 0.5, 0.5), (0.9, 0.05, 0.95)] {
        println!(
            "  alpha {a} v {v} w {w}: vine {:.10} closed form {:.10}",
            vine.cond_quantile(a, &[v, w])?,
            clayton3_cond_quantile(delta, a, v, w)
        );
    }
    Ok(())
}
