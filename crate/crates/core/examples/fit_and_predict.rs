//! Fit a quantile regression model and predict conditional quantiles.
//!
//! Usage: `cargo run --example fit_and_predict`

use dvine_qr::simbench::{gen_scenario, CorrChoice, MarginChoice, ScenarioKind, ScenarioParam, ScenarioSpec};
use dvine_qr::{fit_quantreg, FitCriterion};

fn main() -> dvine_qr::Result<()> {
    let spec = ScenarioSpec::new(ScenarioKind::T5, ScenarioParam::Corr(CorrChoice::R1), MarginChoice::M1, 500, vec![0.5], 1)?;
    let sc = gen_scenario(&spec, 0, 5)?;
    let model = fit_quantreg(&sc.train, "y", FitCriterion::Aic, 0.05)?;
    println!("order {} with {} pair parameters", model.order_label(), model.vine().n_params());

    let alphas = [0.05, 0.25, 0.5, 0.75, 0.95];
    println!("{:>28} | {}", "x", alphas.map(|a| format!("{:>8}", format!("q{a}"))).join(" "));
    for x in sc.eval_x.iter().take(6) {
        let q = model.predict_quantiles(&alphas, x)?;
        let truth: Vec<f64> = alphas.iter().map(|&a| sc.truth.quantile(a, x)).collect::<dvine_qr::Result<_>>()?;
        let xs: Vec<String> = x.iter().map(|v| format!("{v:6.2}")).collect();
        println!("{:>28} | {}", xs.join(" "), q.iter().map(|v| format!("{v:8.3}")).collect::<Vec<_>>().join(" "));
        println!("{:>28} | {}", "true", truth.iter().map(|v| format!("{v:8.3}")).collect::<Vec<_>>().join(" "));
    }
    Ok(())
}
