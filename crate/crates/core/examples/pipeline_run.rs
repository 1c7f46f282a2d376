//! Full pipeline on one family and spin: dataset, split, stacked fit,
//! held-out metrics for every model.
//!
//! cargo run --release --example pipeline_run -- pure 0.5 10000

use spin_negativity::dataset::Family;
use spin_negativity::experiment::{linspace, run_pipeline, sweep_alpha, sweep_theta, ExperimentConfig};
use spin_negativity::states::Spin;

fn main() -> spin_negativity::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let family: Family = args.first().map(String::as_str).unwrap_or("pure").parse()?;
    let j: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0.5);
    let mut config = ExperimentConfig::desk_default(family, j);
    if let Some(s) = args.get(2).and_then(|s| s.parse().ok()) {
        config.samples = s;
    }
    let run = run_pipeline(&config)?;
    println!("{:<12} {:>12} {:>12} {:>9}", "model", "mse", "mae", "r2");
    for r in &run.report.results {
        println!("{:<12} {:>12.3e} {:>12.3e} {:>9.5}", r.model, r.metrics.mse, r.metrics.mae, r.metrics.r2);
    }
    if let Some(fit) = run.report.result("ensemble").and_then(|r| r.line_fit) {
        println!("ensemble scatter fit: slope {:.4}, intercept {:.4}", fit.slope, fit.intercept);
    }
    let spin = Spin::new(j)?;
    match family {
        Family::Werner => {
            let grid = linspace(0.0, 1.0, config.curve_points);
            let c = sweep_alpha(&run.ensemble, spin, config.layout, &grid, false)?;
            println!(
                "alpha threshold: predicted {:?}, exact {:?}",
                c.predicted_threshold(),
                c.exact_threshold()
            );
        }
        Family::Pure => {
            let grid = linspace(0.0, std::f64::consts::FRAC_PI_2, config.curve_points);
            let c = sweep_theta(&run.ensemble, spin, &grid, false)?;
            println!("zeta curve max |error|: {:.4}", c.max_abs_error());
        }
    }
    println!("meta rounds kept: {}", run.report.meta_best_iteration);
    for (stage, secs) in &run.timings.stages {
        println!("{stage:<10} {secs:>8.1} s");
    }
    Ok(())
}
