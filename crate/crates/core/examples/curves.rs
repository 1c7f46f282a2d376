//! Train small ensembles and sweep them along the zeta(theta) and Werner
//! alpha families, writing the curve files used for plots.
//!
//! cargo run --release --example curves -- /tmp/curves

use std::path::PathBuf;

use spin_negativity::dataset::Family;
use spin_negativity::experiment::{linspace, run_pipeline, sweep_alpha, sweep_theta, write_curve, ExperimentConfig};
use spin_negativity::states::Spin;

fn main() -> spin_negativity::Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("spin-curves"));
    std::fs::create_dir_all(&dir)?;
    let spin = Spin::new(0.5)?;

    let mut pure = ExperimentConfig::desk_default(Family::Pure, 0.5);
    pure.samples = 2000;
    let run = run_pipeline(&pure)?;
    let theta = linspace(0.0, std::f64::consts::FRAC_PI_2, 41);
    let zeta = sweep_theta(&run.ensemble, spin, &theta, false)?;
    write_curve(&zeta, &dir, "theta_curve")?;
    println!("zeta sweep: max |predicted - exact| = {:.4}", zeta.max_abs_error());

    let mut werner = ExperimentConfig::desk_default(Family::Werner, 0.5);
    werner.samples = 2000;
    let run = run_pipeline(&werner)?;
    let alpha = linspace(0.0, 1.0, 41);
    let curve = sweep_alpha(&run.ensemble, spin, werner.layout, &alpha, false)?;
    write_curve(&curve, &dir, "alpha_curve")?;
    println!(
        "alpha sweep: exact threshold {:?}, predicted {:?}",
        curve.exact_threshold(),
        curve.predicted_threshold()
    );
    println!("curve files in {}", dir.display());
    Ok(())
}
