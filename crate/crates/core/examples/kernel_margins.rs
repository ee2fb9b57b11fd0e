//! Kernel smoothed distribution functions and probability integral transforms.
//!
//! Usage: `cargo run --example kernel_margins`

use dvine_qr::margins::reference_bandwidth;
use dvine_qr::oracles::{sample_skew, SkewSpec};
use dvine_qr::KernelMargin;

fn main() -> dvine_qr::Result<()> {
    let law = SkewSpec::t(4.0, 0.0, 1.0, 2.0)?;
    let sample = sample_skew(&law, 500, 11)?;
    let margin = KernelMargin::fit(&sample)?;
    println!("n = {}, bandwidth = {:.4} (reference rule {:.4})", sample.len(), margin.bandwidth(), reference_bandwidth(&sample)?);
    println!("{:>6} {:>10} {:>10} {:>10}", "p", "true q", "kernel q", "F(q)");
    for p in [0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99] {
        let q = margin.quantile(p)?;
        println!("{p:>6} {:>10.4} {q:>10.4} {:>10.6}", law.quantile(p)?, margin.cdf(q));
    }
    let u: Vec<f64> = sample.iter().map(|&x| margin.pit(x)).collect();
    let below = |t: f64| u.iter().filter(|&&x| x <= t).count() as f64 / u.len() as f64;
    println!("PIT share below 0.1 / 0.5 / 0.9: {:.3} / {:.3} / {:.3}", below(0.1), below(0.5), below(0.9));
    Ok(())
}
