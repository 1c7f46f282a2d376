//! Separability threshold of the Werner family located by bisection on the
//! numeric negativity, next to the exact 1 / (D + 1).
//!
//! cargo run --release --example werner_threshold

use spin_negativity::negativity::{negativity, werner_threshold};
use spin_negativity::states::{werner_state, Spin};

fn main() -> spin_negativity::Result<()> {
    println!("{:>5} {:>4} {:>14} {:>14}", "j", "D", "bisection", "1/(D+1)");
    for j in [0.5, 1.0, 1.5, 2.0, 5.0] {
        let spin = Spin::new(j)?;
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if negativity(&werner_state(spin, mid)?)?.value > 1e-9 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        println!("{j:>5} {:>4} {:>14.8} {:>14.8}", spin.dim(), hi, werner_threshold(spin));
    }
    Ok(())
}
