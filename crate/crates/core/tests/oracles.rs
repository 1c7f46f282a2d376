//! Exact-math oracles: closed forms, brute-force enumerations and
//! independently coded reference loops.

mod common;

fn pass(check: common::Check) {
    if let Err(e) = check {
        panic!("{e}");
    }
}

#[test]
fn werner_grid_matches_closed_form() {
    pass(common::werner_grid());
}

#[test]
fn zeta_grid_matches_closed_form() {
    pass(common::zeta_grid());
}

#[test]
fn partial_transpose_involution_and_trace() {
    pass(common::partial_transpose_laws());
}

#[test]
fn eigensolver_matches_jacobi_at_121() {
    pass(common::eigensolver_at_121());
}

#[test]
fn mlp_gradient_matches_central_differences() {
    pass(common::mlp_gradient_check());
}

#[test]
fn split_gain_matches_brute_force() {
    pass(common::split_gain_brute_force());
}

#[test]
fn variance_reduction_matches_brute_force() {
    pass(common::variance_reduction_brute_force());
}

#[test]
fn leave_one_out_matches_reference_loop() {
    pass(common::leave_one_out_reference());
}

#[test]
fn published_scaling_law_arithmetic() {
    pass(common::published_scaling_arithmetic());
}
