//! Bipartite spin states: random pure states, tunable benchmark families and
//! Werner mixtures.
//!
//! Amplitudes are indexed row-major over the product basis `|m, n>`: the
//! subsystem-A magnetic number `m` runs over `-j1..=j1` in the outer loop and
//! `n` over `-j2..=j2` in the inner loop. Feature vectors inherit this order.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::matrix::Matrix;
use crate::rng::RngHandle;

/// A half-integer spin, stored as `2j` so arithmetic stays exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Spin(u32);

impl Spin {
    pub fn new(j: f64) -> Result<Self> {
        let twice = 2.0 * j;
        if !j.is_finite() || j < 0.5 || (twice - twice.round()).abs() > 1e-9 || twice > 1.0e6 {
            return Err(param(format!("spin must be a half-integer >= 1/2, got {j}")));
        }
        Ok(Spin(twice.round() as u32))
    }

    pub fn from_twice(two_j: u32) -> Result<Self> {
        if two_j == 0 {
            return Err(param("spin must be >= 1/2"));
        }
        Ok(Spin(two_j))
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    pub fn twice(self) -> u32 {
        self.0
    }

    /// Local Hilbert-space dimension `2j + 1`.
    pub fn dim(self) -> usize {
        self.0 as usize + 1
    }
}

impl TryFrom<f64> for Spin {
    type Error = Error;
    fn try_from(j: f64) -> Result<Self> {
        Spin::new(j)
    }
}

impl From<Spin> for f64 {
    fn from(s: Spin) -> f64 {
        s.value()
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinPair {
    pub j1: Spin,
    pub j2: Spin,
}

impl SpinPair {
    pub fn new(j1: f64, j2: f64) -> Result<Self> {
        Ok(Self {
            j1: Spin::new(j1)?,
            j2: Spin::new(j2)?,
        })
    }

    pub fn symmetric(j: Spin) -> Self {
        Self { j1: j, j2: j }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.j1.dim(), self.j2.dim())
    }

    /// Number of product-basis amplitudes, `d1 * d2`.
    pub fn n_amp(&self) -> usize {
        self.j1.dim() * self.j2.dim()
    }

    /// Largest possible (unnormalized) negativity, `(min(d1, d2) - 1) / 2`.
    pub fn max_negativity(&self) -> f64 {
        let (d1, d2) = self.dims();
        (d1.min(d2) as f64 - 1.0) / 2.0
    }

    /// Flat index of `|m, n>` where `m`, `n` are given as offsets `m + j1`, `n + j2`.
    pub fn index(&self, m_offset: usize, n_offset: usize) -> usize {
        m_offset * self.j2.dim() + n_offset
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PureState {
    pair: SpinPair,
    amplitudes: Vec<f64>,
}

impl PureState {
    /// Wrap an amplitude vector; normalization is checked, not applied.
    pub fn new(pair: SpinPair, amplitudes: Vec<f64>) -> Result<Self> {
        if amplitudes.len() != pair.n_amp() {
            return Err(Error::Structural(format!(
                "{} amplitudes for a pair with {} basis states",
                amplitudes.len(),
                pair.n_amp()
            )));
        }
        let norm = l2(&amplitudes);
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::Contract(format!("state norm {norm} is not 1")));
        }
        Ok(Self { pair, amplitudes })
    }

    pub fn pair(&self) -> SpinPair {
        self.pair
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        l2(&self.amplitudes)
    }

    /// Amplitudes reshaped as the `d1 x d2` coefficient matrix `C[m][n]`.
    pub fn coefficient_matrix(&self) -> Matrix {
        let (d1, d2) = self.pair.dims();
        Matrix::from_vec(d1, d2, self.amplitudes.clone()).expect("length checked at construction")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityOperator {
    pair: SpinPair,
    matrix: Matrix,
}

impl DensityOperator {
    /// Checks shape, symmetry and unit trace. Positivity is checked separately
    /// by [`DensityOperator::min_eigenvalue`] because it needs an eigensolve.
    pub fn new(pair: SpinPair, matrix: Matrix) -> Result<Self> {
        let d = pair.n_amp();
        if matrix.rows() != d || matrix.cols() != d {
            return Err(Error::Structural(format!(
                "density matrix is {}x{}, pair requires {d}x{d}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let asym = matrix.max_asymmetry();
        if asym > 1e-12 {
            return Err(Error::Contract(format!("density matrix asymmetry {asym:e}")));
        }
        let tr = matrix.trace();
        if (tr - 1.0).abs() > 1e-10 {
            return Err(Error::Contract(format!("density matrix trace {tr} is not 1")));
        }
        Ok(Self { pair, matrix })
    }

    pub fn pair(&self) -> SpinPair {
        self.pair
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let spectrum = crate::negativity::symmetric_eigenvalues(&self.matrix)?;
        Ok(*spectrum.eigenvalues.last().unwrap_or(&0.0))
    }
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

const MAX_REDRAWS: usize = 8;

fn normalized_draw(
    pair: SpinPair,
    rng: &mut RngHandle,
    mut fill: impl FnMut(&mut RngHandle, &mut [f64]),
) -> Result<PureState> {
    let mut amps = vec![0.0; pair.n_amp()];
    for _ in 0..=MAX_REDRAWS {
        amps.iter_mut().for_each(|a| *a = 0.0);
        fill(rng, &mut amps);
        let norm = l2(&amps);
        if norm > 1e-300 && norm.is_finite() {
            amps.iter_mut().for_each(|a| *a /= norm);
            return Ok(PureState {
                pair,
                amplitudes: amps,
            });
        }
    }
    Err(Error::Contract(format!(
        "random generator produced a zero vector {} times in a row",
        MAX_REDRAWS + 1
    )))
}

/// Dense real Gaussian state: every amplitude i.i.d. `N(0, 1)`, then normalized.
pub fn random_pure_state(pair: SpinPair, rng: &mut RngHandle) -> Result<PureState> {
    normalized_draw(pair, rng, |rng, amps| {
        amps.iter_mut().for_each(|a| *a = rng.normal());
    })
}

/// State with exactly `k` nonzero Gaussian amplitudes at uniformly chosen
/// distinct basis positions.
pub fn sparse_pure_state(pair: SpinPair, k: usize, rng: &mut RngHandle) -> Result<PureState> {
    let n = pair.n_amp();
    if k == 0 || k > n {
        return Err(param(format!("sparsity k={k} outside 1..={n}")));
    }
    let mut support: Vec<usize> = (0..n).collect();
    normalized_draw(pair, rng, |rng, amps| {
        // partial Fisher-Yates: the first k slots become a uniform k-subset
        for i in 0..k {
            let j = i + rng.below(n - i);
            support.swap(i, j);
        }
        for &idx in &support[..k] {
            amps[idx] = rng.normal();
        }
    })
}

/// `cos(theta)|-j,-j> + sin(theta)|j,j>` for `theta` in `[0, pi/2]`.
pub fn zeta_state(j: Spin, theta: f64) -> Result<PureState> {
    if !(0.0..=FRAC_PI_2).contains(&theta) {
        return Err(param(format!("theta={theta} outside [0, pi/2]")));
    }
    let pair = SpinPair::symmetric(j);
    let d = j.dim();
    let mut amps = vec![0.0; pair.n_amp()];
    amps[pair.index(0, 0)] = theta.cos();
    amps[pair.index(d - 1, d - 1)] = theta.sin();
    Ok(PureState {
        pair,
        amplitudes: amps,
    })
}

/// Maximally entangled `(1/sqrt(D)) sum_k |k, k>`.
pub fn max_entangled_phi(j: Spin) -> PureState {
    let pair = SpinPair::symmetric(j);
    let d = j.dim();
    let amp = 1.0 / (d as f64).sqrt();
    let mut amps = vec![0.0; pair.n_amp()];
    for k in 0..d {
        amps[pair.index(k, k)] = amp;
    }
    PureState {
        pair,
        amplitudes: amps,
    }
}

pub fn density_from_pure(state: &PureState) -> Result<DensityOperator> {
    let norm = state.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::Contract(format!("state norm {norm} is not 1")));
    }
    let a = &state.amplitudes;
    let d = a.len();
    let mut m = Matrix::zeros(d, d);
    for i in 0..d {
        if a[i] == 0.0 {
            continue;
        }
        let row = m.row_mut(i);
        for (j, &aj) in a.iter().enumerate() {
            row[j] = a[i] * aj;
        }
    }
    Ok(DensityOperator {
        pair: state.pair,
        matrix: m,
    })
}

/// `alpha |phi><phi| + (1 - alpha) I / D^2`.
pub fn werner_state(j: Spin, alpha: f64) -> Result<DensityOperator> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(param(format!("alpha={alpha} outside [0, 1]")));
    }
    let phi = max_entangled_phi(j);
    let mut rho = density_from_pure(&phi)?;
    let dd = rho.dim();
    let noise = (1.0 - alpha) / dd as f64;
    for v in rho.matrix.as_mut_slice() {
        *v *= alpha;
    }
    for i in 0..dd {
        rho.matrix[(i, i)] += noise;
    }
    Ok(rho)
}
