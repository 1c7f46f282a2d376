//! Negativity `(||rho^{T_B}||_1 - 1) / 2` and its ingredients.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::matrix::Matrix;
use crate::states::{DensityOperator, PureState, Spin};

/// Eigensolver noise below this is clamped to zero; anything more negative is an error.
pub const CLAMP_WINDOW: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NegativityValue {
    pub value: f64,
    pub dims: (usize, usize),
}

impl NegativityValue {
    pub fn max_value(&self) -> f64 {
        (self.dims.0.min(self.dims.1) as f64 - 1.0) / 2.0
    }

    /// Value divided by `(min(d1, d2) - 1) / 2`, so maximal entanglement maps to 1.
    pub fn normalized(&self) -> f64 {
        let m = self.max_value();
        if m > 0.0 {
            self.value / m
        } else {
            0.0
        }
    }
}

/// Real eigenvalues of a symmetric matrix, in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricSpectrum {
    pub eigenvalues: Vec<f64>,
}

impl SymmetricSpectrum {
    pub fn trace_norm(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.abs()).sum()
    }
}

/// Transpose every `d2 x d2` block of a `(d1 d2) x (d1 d2)` matrix in place.
pub fn partial_transpose_matrix(m: &Matrix, d1: usize, d2: usize) -> Result<Matrix> {
    let d = d1 * d2;
    if m.rows() != d || m.cols() != d {
        return Err(Error::Structural(format!(
            "{}x{} matrix cannot be split into {d1}x{d1} blocks of size {d2}",
            m.rows(),
            m.cols()
        )));
    }
    let mut out = Matrix::zeros(d, d);
    for a in 0..d1 {
        for ap in 0..d1 {
            for b in 0..d2 {
                for bp in 0..d2 {
                    out[(a * d2 + b, ap * d2 + bp)] = m[(a * d2 + bp, ap * d2 + b)];
                }
            }
        }
    }
    Ok(out)
}

/// Partial transpose with respect to subsystem B.
pub fn partial_transpose(rho: &DensityOperator) -> Result<Matrix> {
    let (d1, d2) = rho.pair().dims();
    let pt = partial_transpose_matrix(rho.matrix(), d1, d2)?;
    let asym = pt.max_asymmetry();
    if asym > 1e-12 {
        return Err(Error::Contract(format!(
            "partial transpose of a real state is asymmetric by {asym:e}"
        )));
    }
    Ok(pt)
}

pub fn symmetric_eigenvalues(m: &Matrix) -> Result<SymmetricSpectrum> {
    if m.rows() != m.cols() {
        return Err(Error::Structural(format!(
            "eigenvalues of a non-square {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let asym = m.max_asymmetry();
    if asym > 1e-10 {
        return Err(Error::Contract(format!("matrix asymmetric by {asym:e}")));
    }
    let n = m.rows();
    let dm = DMatrix::from_row_slice(n, n, m.as_slice());
    let mut eigenvalues: Vec<f64> = dm.symmetric_eigenvalues().iter().copied().collect();
    // the QL iteration can return NaN on very sparse inputs
    let trace_gap = (eigenvalues.iter().sum::<f64>() - m.trace()).abs();
    let scale = m.as_slice().iter().fold(1.0f64, |a, v| a.max(v.abs()));
    if eigenvalues.iter().any(|v| !v.is_finite()) || !(trace_gap <= 1e-9 * scale * n as f64) {
        eigenvalues = jacobi_eigenvalues(m)?;
    }
    eigenvalues.sort_by(|a, b| b.total_cmp(a));
    Ok(SymmetricSpectrum { eigenvalues })
}

/// Cyclic Jacobi rotations on a symmetric matrix; slower than QL but
/// unconditionally convergent.
pub fn jacobi_eigenvalues(m: &Matrix) -> Result<Vec<f64>> {
    let n = m.rows();
    let mut a = m.as_slice().to_vec();
    let total: f64 = a.iter().map(|v| v * v).sum();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&k| k != i).map(move |k| (i, k)))
            .map(|(i, k)| a[i * n + k] * a[i * n + k])
            .sum();
        if off <= 1e-32 * total {
            return Ok((0..n).map(|i| a[i * n + i]).collect());
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (x, y) = (a[k * n + p], a[k * n + q]);
                    a[k * n + p] = c * x - s * y;
                    a[k * n + q] = s * x + c * y;
                }
                for k in 0..n {
                    let (x, y) = (a[p * n + k], a[q * n + k]);
                    a[p * n + k] = c * x - s * y;
                    a[q * n + k] = s * x + c * y;
                }
            }
        }
    }
    Err(Error::Degenerate("Jacobi eigensolver did not converge in 100 sweeps".into()))
}

fn clamp(raw: f64) -> Result<f64> {
    if raw >= 0.0 {
        Ok(raw)
    } else if raw >= -CLAMP_WINDOW {
        Ok(0.0)
    } else {
        Err(Error::Contract(format!(
            "negativity {raw:e} is negative beyond eigensolver noise"
        )))
    }
}

/// Negativity through the partial-transpose spectrum.
pub fn negativity(rho: &DensityOperator) -> Result<NegativityValue> {
    let pt = partial_transpose(rho)?;
    let spectrum = symmetric_eigenvalues(&pt)?;
    let value = clamp((spectrum.trace_norm() - 1.0) / 2.0)?;
    Ok(NegativityValue {
        value,
        dims: rho.pair().dims(),
    })
}

/// Negativity of `|psi><psi|` from the Schmidt coefficients of `psi`.
///
/// For a pure state with Schmidt coefficients `s_i`, the partial transpose
/// has trace norm `(sum s_i)^2`, so no `d^2 x d^2` eigensolve is needed.
pub fn pure_state_negativity(state: &PureState) -> Result<NegativityValue> {
    let pair = state.pair();
    let (d1, d2) = pair.dims();
    let c = DMatrix::from_row_slice(d1, d2, state.amplitudes());
    let s: f64 = c.singular_values().iter().sum();
    let value = clamp((s * s - 1.0) / 2.0)?;
    Ok(NegativityValue {
        value,
        dims: (d1, d2),
    })
}

/// `max(0, (D - 1)/(2D) * (alpha (D + 1) - 1))` for the Werner family, `D = 2j + 1`.
pub fn werner_negativity_closed_form(j: Spin, alpha: f64) -> Result<NegativityValue> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(param(format!("alpha={alpha} outside [0, 1]")));
    }
    let d = j.dim() as f64;
    let value = ((d - 1.0) / (2.0 * d) * (alpha * (d + 1.0) - 1.0)).max(0.0);
    Ok(NegativityValue {
        value,
        dims: (j.dim(), j.dim()),
    })
}

/// Separability threshold `1 / (D + 1)` of the Werner family.
pub fn werner_threshold(j: Spin) -> f64 {
    1.0 / (j.dim() as f64 + 1.0)
}

/// `|sin(theta) cos(theta)|`, independent of the spin.
pub fn zeta_negativity_closed_form(j: Spin, theta: f64) -> Result<NegativityValue> {
    if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta) {
        return Err(param(format!("theta={theta} outside [0, pi/2]")));
    }
    Ok(NegativityValue {
        value: (theta.sin() * theta.cos()).abs(),
        dims: (j.dim(), j.dim()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngHandle;
    use crate::states::*;

    fn spin(j: f64) -> Spin {
        Spin::new(j).unwrap()
    }

    #[test]
    fn diagonal_and_pauli_spectra() {
        let mut m = Matrix::zeros(3, 3);
        m[(0, 0)] = 3.0;
        m[(1, 1)] = 1.0;
        m[(2, 2)] = 2.0;
        assert_eq!(symmetric_eigenvalues(&m).unwrap().eigenvalues, vec![3.0, 2.0, 1.0]);

        let x = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let ev = symmetric_eigenvalues(&x).unwrap().eigenvalues;
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn sparse_spectrum_is_finite() {
        // three-term j=2 state whose PT once came back NaN from the QL path
        let pair = SpinPair::new(2.0, 2.0).unwrap();
        let mut amps = vec![0.0; 25];
        amps[2] = -0.8250944665920018;
        amps[15] = 0.17412169116062953;
        amps[21] = -0.5374948910144377;
        let norm = amps.iter().map(|a| a * a).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        let psi = PureState::new(pair, amps).unwrap();
        let n = negativity(&density_from_pure(&psi).unwrap()).unwrap().value;
        assert!((n - pure_state_negativity(&psi).unwrap().value).abs() < 1e-12, "{n}");
    }

    #[test]
    fn jacobi_agrees_with_default_path() {
        let m = Matrix::from_rows(&[vec![2.0, 1.0, 0.0], vec![1.0, 2.0, 1.0], vec![0.0, 1.0, 2.0]]).unwrap();
        let mut j = jacobi_eigenvalues(&m).unwrap();
        j.sort_by(|a, b| b.total_cmp(a));
        let r = 2f64.sqrt();
        for (a, b) in j.iter().zip([2.0 + r, 2.0, 2.0 - r]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn asymmetric_input_rejected() {
        let m = Matrix::from_rows(&[vec![0.0, 1.0], vec![0.5, 0.0]]).unwrap();
        assert!(matches!(symmetric_eigenvalues(&m), Err(Error::Contract(_))));
    }

    #[test]
    fn identity_is_pt_invariant() {
        let mut id = Matrix::identity(6);
        id.as_mut_slice().iter_mut().for_each(|v| *v /= 6.0);
        assert_eq!(partial_transpose_matrix(&id, 2, 3).unwrap(), id);
    }

    #[test]
    fn dimension_mismatch_is_structural() {
        let m = Matrix::identity(5);
        assert!(matches!(
            partial_transpose_matrix(&m, 2, 2),
            Err(Error::Structural(_))
        ));
    }

    #[test]
    fn bell_partial_transpose_spectrum() {
        let bell = density_from_pure(&max_entangled_phi(spin(0.5))).unwrap();
        let ev = symmetric_eigenvalues(&partial_transpose(&bell).unwrap())
            .unwrap()
            .eigenvalues;
        let expected = [0.5, 0.5, 0.5, -0.5];
        for (a, b) in ev.iter().zip(expected) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn werner_j1_pt_spectrum() {
        let w = werner_state(spin(1.0), 1.0).unwrap();
        let ev = symmetric_eigenvalues(&partial_transpose(&w).unwrap())
            .unwrap()
            .eigenvalues;
        let pos = ev.iter().filter(|l| (**l - 1.0 / 3.0).abs() < 1e-12).count();
        let neg = ev.iter().filter(|l| (**l + 1.0 / 3.0).abs() < 1e-12).count();
        assert_eq!((pos, neg), (6, 3));
    }

    #[test]
    fn named_negativity_values() {
        let n = negativity(&density_from_pure(&max_entangled_phi(spin(5.0))).unwrap()).unwrap();
        assert!((n.value - 5.0).abs() < 1e-10);
        assert!((n.normalized() - 1.0).abs() < 1e-10);
        let n = negativity(&werner_state(spin(0.5), 0.5).unwrap()).unwrap();
        assert!((n.value - 0.125).abs() < 1e-12);
        let n = negativity(&werner_state(spin(0.5), 1.0 / 3.0).unwrap()).unwrap();
        assert!(n.value.abs() < 1e-12);
        let n = negativity(&werner_state(spin(0.5), 0.0).unwrap()).unwrap();
        assert_eq!(n.value, 0.0);
        let n = negativity(&density_from_pure(&max_entangled_phi(spin(1.0))).unwrap()).unwrap();
        assert!((n.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sparse_two_term_state_has_half_negativity() {
        let pair = SpinPair::new(0.5, 0.5).unwrap();
        let a = std::f64::consts::FRAC_1_SQRT_2;
        let s = PureState::new(pair, vec![a, 0.0, 0.0, a]).unwrap();
        let n = negativity(&density_from_pure(&s).unwrap()).unwrap();
        assert!((n.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn closed_form_named_values() {
        assert_eq!(werner_negativity_closed_form(spin(0.5), 0.0).unwrap().value, 0.0);
        assert!((werner_negativity_closed_form(spin(0.5), 1.0).unwrap().value - 0.5).abs() < 1e-15);
        assert_eq!(werner_negativity_closed_form(spin(5.0), 1.0 / 12.0).unwrap().value, 0.0);
        assert!(werner_negativity_closed_form(spin(5.0), 1.0 / 12.0 + 1e-6).unwrap().value > 0.0);
        assert!(werner_negativity_closed_form(spin(5.0), 1.5).is_err());
        let z = |t: f64| zeta_negativity_closed_form(spin(1.0), t).unwrap().value;
        assert_eq!(z(0.0), 0.0);
        assert!((z(std::f64::consts::FRAC_PI_4) - 0.5).abs() < 1e-15);
        assert!((z(std::f64::consts::FRAC_PI_6) - 3f64.sqrt() / 4.0).abs() < 1e-15);
        assert!(zeta_negativity_closed_form(spin(1.0), 2.0).is_err());
    }

    #[test]
    fn zeta_sixth_matches_numeric_at_j1() {
        let s = zeta_state(spin(1.0), std::f64::consts::FRAC_PI_6).unwrap();
        let n = negativity(&density_from_pure(&s).unwrap()).unwrap();
        assert!((n.value - 3f64.sqrt() / 4.0).abs() < 1e-12);
    }

    #[test]
    fn schmidt_route_matches_partial_transpose() {
        let mut rng = RngHandle::new(9);
        for (j1, j2) in [(0.5, 0.5), (1.0, 1.0), (0.5, 1.5), (2.0, 1.0)] {
            let pair = SpinPair::new(j1, j2).unwrap();
            for k in 1..=pair.n_amp() {
                let s = sparse_pure_state(pair, k, &mut rng).unwrap();
                let a = pure_state_negativity(&s).unwrap().value;
                let b = negativity(&density_from_pure(&s).unwrap()).unwrap().value;
                assert!((a - b).abs() < 1e-10, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn werner_negativity_increases_above_threshold() {
        for j in [0.5, 1.0] {
            let j = spin(j);
            let a0 = werner_threshold(j);
            let mut prev = 0.0;
            for i in 1..=20 {
                let alpha = a0 + (1.0 - a0) * i as f64 / 20.0;
                let n = negativity(&werner_state(j, alpha).unwrap()).unwrap().value;
                assert!(n > prev);
                prev = n;
            }
        }
    }
}
