//! Save a fitted model to JSON, load it back and compare predictions.
//!
//! Usage: `cargo run --example model_roundtrip [path]`

use dvine_qr::simbench::{gen_scenario, CorrChoice, MarginChoice, ScenarioKind, ScenarioParam, ScenarioSpec};
use dvine_qr::{fit_quantreg, FitCriterion, QuantRegModel};
use std::path::PathBuf;

fn main() -> dvine_qr::Result<()> {
    let path = std::env::args().nth(1).map_or_else(|| std::env::temp_dir().join("dvqr_model.json"), PathBuf::from);
    let spec = ScenarioSpec::new(ScenarioKind::T5, ScenarioParam::Corr(CorrChoice::R2), MarginChoice::M1, 300, vec![0.5], 1)?;
    let sc = gen_scenario(&spec, 0, 10)?;
    let model = fit_quantreg(&sc.train, "y", FitCriterion::Aic, 0.05)?;
    model.save(&path)?;
    let loaded = QuantRegModel::load(&path)?;
    println!("wrote {} ({} bytes)", path.display(), std::fs::metadata(&path)?.len());
    println!("identical after reload: {}", loaded == model);
    let worst = sc
        .eval_x
        .iter()
        .map(|x| Ok((model.predict_quantile(0.9, x)? - loaded.predict_quantile(0.9, x)?).abs()))
        .collect::<dvine_qr::Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    println!("largest change in the 0.9 quantile over {} rows: {worst:e}", sc.eval_x.len());
    Ok(())
}
