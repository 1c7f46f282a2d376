//! Build pure and Werner datasets, write them to CSV with the metadata
//! sidecar, read them back and standardize a train split.
//!
//! cargo run --release --example dataset_io -- /tmp/datasets

use std::path::PathBuf;

use spin_negativity::dataset::{
    build_pure_dataset, build_werner_dataset, load_dataset, save_dataset, sidecar_path, split, Layout, Provenance,
    Standardizer,
};
use spin_negativity::states::{Spin, SpinPair};
use spin_negativity::RngHandle;

fn main() -> spin_negativity::Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("spin-datasets"));
    std::fs::create_dir_all(&dir)?;

    let pure = build_pure_dataset(SpinPair::new(1.0, 1.0)?, 500, &mut RngHandle::new(1))?;
    let dense = pure.meta.provenance.iter().filter(|p| matches!(p, Provenance::Dense)).count();
    println!("pure j=1: {} rows x {} amplitudes, {dense} dense", pure.len(), pure.width());

    let werner = build_werner_dataset(Spin::new(1.0)?, 200, Layout::DensityCompact, &mut RngHandle::new(2))?;
    println!("werner j=1 compact: {} rows x {} features", werner.len(), werner.width());

    let path = dir.join("pure_j1.csv");
    save_dataset(&pure, &path)?;
    let back = load_dataset(&path)?;
    assert_eq!(back, pure);
    println!("round trip through {} and {} is exact", path.display(), sidecar_path(&path).display());

    let plan = split(&pure, 0.8, &mut RngHandle::new(3))?;
    let train = pure.features.select_rows(&plan.train);
    let st = Standardizer::fit(&train)?;
    let z = st.apply(&train)?;
    let col0: Vec<f64> = z.row_iter().map(|r| r[0]).collect();
    let mean = col0.iter().sum::<f64>() / col0.len() as f64;
    let var = col0.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / col0.len() as f64;
    println!("train {} / test {}; standardized column 0: mean {mean:.2e}, var {var:.6}", plan.train.len(), plan.test.len());
    Ok(())
}
