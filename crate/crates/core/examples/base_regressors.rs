//! Fit the three base regressors on a pure j=1/2 dataset and score each on a
//! held-out split. Smaller than the desk defaults so it runs in seconds.
//!
//! cargo run --release --example base_regressors

use spin_negativity::dataset::{build_pure_dataset, split, Standardizer};
use spin_negativity::metrics::compute_metrics;
use spin_negativity::regressors::{
    extratrees_fit, gbt_fit, mlp_fit, ExtraTreesConfig, GbtConfig, MlpConfig, TrainedModel,
};
use spin_negativity::states::SpinPair;
use spin_negativity::RngHandle;

fn main() -> spin_negativity::Result<()> {
    let data = build_pure_dataset(SpinPair::new(0.5, 0.5)?, 3000, &mut RngHandle::new(7))?;
    let plan = split(&data, 0.8, &mut RngHandle::new(8))?;
    let st = Standardizer::fit(&data.features.select_rows(&plan.train))?;
    let x = st.apply(&data.features.select_rows(&plan.train))?;
    let xt = st.apply(&data.features.select_rows(&plan.test))?;
    let y: Vec<f64> = plan.train.iter().map(|&r| data.targets[r]).collect();
    let yt: Vec<f64> = plan.test.iter().map(|&r| data.targets[r]).collect();

    let mlp = MlpConfig { epochs: 60, ..Default::default() };
    let models = [
        TrainedModel::Mlp(mlp_fit(&x, &y, &mlp, &mut RngHandle::new(1))?),
        TrainedModel::Gbt(gbt_fit(&x, &y, &GbtConfig::default())?),
        TrainedModel::ExtraTrees(extratrees_fit(&x, &y, &ExtraTreesConfig { n_estimators: 100, ..Default::default() })?),
    ];
    println!("{:<12} {:>11} {:>11} {:>8}", "model", "mse", "mae", "r2");
    for m in &models {
        let r = compute_metrics(&yt, &m.predict(&xt)?)?;
        println!("{:<12} {:>11.3e} {:>11.3e} {:>8.4}", m.name(), r.mse, r.mae, r.r2);
    }
    Ok(())
}
