//! Sample-size estimates from the published scaling-law coefficients.
//!
//! cargo run --release --example scaling_law

use spin_negativity::metrics::{scaling_estimate, ScalingCoefficients};

fn main() {
    let c = ScalingCoefficients::PUBLISHED;
    // (j, mse, mae, r2) of the ensemble on pure states
    let rows = [(0.5, 0.0, 0.0020, 0.9999), (1.0, 0.0002, 0.0102, 0.9962), (5.0, 0.0011, 0.0245, 0.9717)];
    println!("{:>4} {:>8} {:>8} {:>8} {:>12}", "j", "mse", "mae", "r2", "S");
    for (j, mse, mae, r2) in rows {
        println!("{j:>4} {mse:>8} {mae:>8} {r2:>8} {:>12.4e}", scaling_estimate(j, mse, mae, r2, &c));
    }
    println!("\nsamples for r2 = 0.99 at fixed mse 1e-3, mae 1e-2:");
    for j in [0.5, 1.0, 2.0, 5.0] {
        println!("  j = {j:<3} S ~ {:.0}", scaling_estimate(j, 1e-3, 1e-2, 0.99, &c));
    }
}
