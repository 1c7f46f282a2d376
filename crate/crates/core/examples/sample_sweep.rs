//! Sample-size sweeps on pure j=1/2 and j=1, then a refit of the scaling
//! law on the two logs.
//!
//! cargo run --release --example sample_sweep -- /tmp/sweep

use std::path::PathBuf;

use spin_negativity::dataset::Family;
use spin_negativity::experiment::{scaling_fit, sweep_samples, ExperimentConfig};

fn main() -> spin_negativity::Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("spin-sweep"));
    let mut logs = Vec::new();
    for j in [0.5, 1.0] {
        let mut c = ExperimentConfig::desk_default(Family::Pure, j);
        c.out_dir = Some(dir.join(format!("j{j}")));
        c.persist_dataset = false;
        c.persist_ensemble = false;
        let (log, _) = sweep_samples(&c, &[100, 300, 1000])?;
        for (s, r2) in log.ensemble_r2() {
            println!("j={j:<3} S={s:<6} ensemble r2 {r2:.4}");
        }
        logs.push(log);
    }
    let fit = scaling_fit(&logs)?;
    let c = fit.coefficients;
    println!(
        "log10 S = {:.3} + {:.3} j + {:.3} mse + {:.3} mae + {:.3} r2",
        c.c0, c.c_j, c.c_mse, c.c_mae, c.c_r2
    );
    println!("sign pattern of the published fit: {}", fit.matches_published_signs);
    Ok(())
}
