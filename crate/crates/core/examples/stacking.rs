//! Stacked ensemble by hand: fold plan, out-of-fold meta features, the
//! boosted meta-learner, then a save/load round trip.
//!
//! cargo run --release --example stacking

use spin_negativity::dataset::{build_werner_dataset, split, Layout};
use spin_negativity::ensemble::{fit_stack, load_ensemble, save_ensemble, EnsembleConfig};
use spin_negativity::metrics::compute_metrics;
use spin_negativity::regressors::{ExtraTreesConfig, GbtConfig, MlpConfig};
use spin_negativity::states::Spin;
use spin_negativity::RngHandle;

fn main() -> spin_negativity::Result<()> {
    let data = build_werner_dataset(Spin::new(0.5)?, 1500, Layout::DensityFull, &mut RngHandle::new(4))?;
    let plan = split(&data, 0.8, &mut RngHandle::new(5))?;
    let x = data.features.select_rows(&plan.train);
    let y: Vec<f64> = plan.train.iter().map(|&r| data.targets[r]).collect();
    let xt = data.features.select_rows(&plan.test);
    let yt: Vec<f64> = plan.test.iter().map(|&r| data.targets[r]).collect();

    let config = EnsembleConfig {
        mlp: MlpConfig { epochs: 40, ..Default::default() },
        extra_trees: ExtraTreesConfig { n_estimators: 60, ..Default::default() },
        gbt: GbtConfig { n_estimators: 100, ..Default::default() },
        ..Default::default()
    };
    let ens = fit_stack(&x, &y, &config, 42)?;
    println!("fold sizes {:?}", ens.fold_plan.sizes());
    println!(
        "meta learner: baseline column {:?}, {} trees kept of {} run",
        ens.meta.baseline_column.map(|c| ens.meta_columns[c].name()),
        ens.meta.best_iteration,
        ens.meta.validation_curve.len()
    );

    let out = ens.predict_all(&xt)?;
    for (c, m) in ens.meta_columns.iter().enumerate() {
        let p: Vec<f64> = out.base.row_iter().map(|r| r[c]).collect();
        println!("{:<12} mse {:.3e}", m.name(), compute_metrics(&yt, &p)?.mse);
    }
    println!("{:<12} mse {:.3e}", "ensemble", compute_metrics(&yt, &out.ensemble)?.mse);

    let path = std::env::temp_dir().join("stacking_example.json");
    save_ensemble(&ens, &path)?;
    let back = load_ensemble(&path)?;
    assert_eq!(back.predict_all(&xt)?.ensemble, out.ensemble);
    println!("reloaded from {}, predictions identical", path.display());
    Ok(())
}
