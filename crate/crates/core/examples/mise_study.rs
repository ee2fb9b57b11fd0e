//! Scenario study comparing D-vine and linear quantile regression.
//!
//! Usage: `cargo run --release --example mise_study -- [C3|t5|M5] [param] [n_train] [reps]`

use dvine_qr::simbench::{run_mise_study, MarginChoice, Method, ScenarioKind, ScenarioParam, ScenarioSpec};
use std::time::Instant;

fn main() -> dvine_qr::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let kind: ScenarioKind = args.first().map_or("C3", String::as_str).parse()?;
    let param = match args.get(1) {
        Some(p) => ScenarioParam::parse(kind, p)?,
        None => ScenarioParam::default_for(kind),
    };
    let n_train = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(300);
    let reps = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(10);

    let spec = ScenarioSpec::new(kind, param, MarginChoice::M1, n_train, vec![0.05, 0.5, 0.95], reps)?;
    let start = Instant::now();
    let report = run_mise_study(&spec, &[Method::Dvqr, Method::Lqr], 2017)?;
    println!("{kind} {param} n_train={n_train} reps={reps} ({:.1}s)", start.elapsed().as_secs_f64());
    println!("{:>6} {:>6} {:>12} {:>8}", "alpha", "method", "MISE", "RMISE");
    for r in &report.rows {
        println!("{:>6} {:>6} {:>12.5} {:>8.3}", r.alpha, r.method, r.mise, r.rmise);
    }
    for f in report.failures.iter().filter(|f| f.failed > 0) {
        println!("{}: {} failed replications", f.method, f.failed);
    }
    Ok(())
}
