//! Out-of-sample tick-loss comparison of D-vine and linear quantile regression.
//!
//! Usage: `cargo run --release --example backtest_tick_loss [seed]`

use dvine_qr::simbench::{gen_scenario, oos_backtest, CorrChoice, MarginChoice, Method, ScenarioKind, ScenarioParam, ScenarioSpec};

fn main() -> dvine_qr::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let spec = ScenarioSpec::new(ScenarioKind::T5, ScenarioParam::Corr(CorrChoice::R1), MarginChoice::M1, 1000, vec![0.5], 1)?;
    let panel = gen_scenario(&spec, 0, seed)?.train;
    let report = oos_backtest(&panel, "y", 500, &[0.01, 0.05, 0.5, 0.95, 0.99], &[Method::Dvqr, Method::Lqr])?;
    println!("train rows {}, evaluation rows {}", report.n_train, report.n_eval);
    println!("{:>6} {:>10} {:>10}", "alpha", "DVQR", "LQR");
    for a in [0.01, 0.05, 0.5, 0.95, 0.99] {
        let loss = |m| report.row(a, m).map_or(f64::NAN, |r| r.tick_loss);
        println!("{a:>6} {:>10.5} {:>10.5}", loss(Method::Dvqr), loss(Method::Lqr));
    }
    Ok(())
}
