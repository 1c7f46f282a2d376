//! Negativity of a few textbook states, computed through the partial
//! transpose and checked against closed forms.
//!
//! cargo run --release --example negativity_basics

use spin_negativity::negativity::{
    negativity, partial_transpose, pure_state_negativity, symmetric_eigenvalues, werner_negativity_closed_form,
    zeta_negativity_closed_form,
};
use spin_negativity::states::{density_from_pure, max_entangled_phi, werner_state, zeta_state, Spin};

fn main() -> spin_negativity::Result<()> {
    let half = Spin::new(0.5)?;
    let bell = density_from_pure(&max_entangled_phi(half))?;
    let spectrum = symmetric_eigenvalues(&partial_transpose(&bell)?)?;
    println!("Bell state PT spectrum: {:?}", spectrum.eigenvalues);
    println!("Bell state negativity:  {}", negativity(&bell)?.value);

    println!("\nmaximally entangled phi, N = (D - 1) / 2");
    for j in [0.5, 1.0, 2.5, 5.0] {
        let phi = max_entangled_phi(Spin::new(j)?);
        println!("  j = {j:<4} N = {:.6}", pure_state_negativity(&phi)?.value);
    }

    println!("\nzeta(theta) at j = 1, numeric vs |sin cos|");
    let one = Spin::new(1.0)?;
    for i in 0..=4 {
        let theta = i as f64 * std::f64::consts::FRAC_PI_8;
        let rho = density_from_pure(&zeta_state(one, theta)?)?;
        let n = negativity(&rho)?.value;
        let exact = zeta_negativity_closed_form(one, theta)?.value;
        println!("  theta = {theta:.4}  {n:.12}  {exact:.12}");
    }

    println!("\nWerner at j = 1 (threshold 1/4)");
    for alpha in [0.0, 0.25, 0.5, 1.0] {
        let n = negativity(&werner_state(one, alpha)?)?;
        let exact = werner_negativity_closed_form(one, alpha)?;
        println!("  alpha = {alpha:<4}  N = {:.12}  normalized {:.4}  closed form {:.12}", n.value, n.normalized(), exact.value);
    }
    Ok(())
}
