//! Conditional response quantiles with covariates pinned in their tails.
//!
//! Usage: `cargo run --example stress_test`

use dvine_qr::simbench::{gen_scenario, CorrChoice, MarginChoice, ScenarioKind, ScenarioParam, ScenarioSpec};
use dvine_qr::{fit_quantreg, FitCriterion};

fn main() -> dvine_qr::Result<()> {
    let spec = ScenarioSpec::new(ScenarioKind::T5, ScenarioParam::Corr(CorrChoice::R1), MarginChoice::M1, 1000, vec![0.5], 1)?;
    let model = fit_quantreg(&gen_scenario(&spec, 0, 21)?.train, "y", FitCriterion::Aic, 0.05)?;
    println!("order {}", model.order_label());
    let first = model.selected()[0].to_owned();
    println!("{first} pinned at kappa, others at their medians");
    println!("{:>6} {:>10} {:>10} {:>10}", "kappa", "q0.05", "q0.5", "q0.95");
    for kappa in [0.01, 0.05, 0.5, 0.95, 0.99] {
        let levels = [(first.clone(), kappa)];
        let q: Vec<String> = [0.05, 0.5, 0.95]
            .iter()
            .map(|&a| {
                let p = model.stress_predict_named(&levels, a)?;
                Ok(format!("{:>10.4}", model.response_margin().quantile(p)?))
            })
            .collect::<dvine_qr::Result<_>>()?;
        println!("{kappa:>6} {}", q.join(" "));
    }
    Ok(())
}
