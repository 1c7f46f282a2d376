//! Exact-math checks shared by the oracle tests and the acceptance run.
//! Each returns a one-line detail, `Err` when the tolerance is missed.

#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

use spin_negativity::ensemble::{
    base_job_seed, kfold_plan, oof_predictions, BaseModel, EnsembleConfig, BASE_MODELS, STAGE_OOF,
};
use spin_negativity::metrics::{scaling_estimate, ScalingCoefficients};
use spin_negativity::negativity::{
    negativity, partial_transpose_matrix, symmetric_eigenvalues, werner_negativity_closed_form,
    zeta_negativity_closed_form,
};
use spin_negativity::regressors::{
    extratrees_fit, gbt_fit, gbt_split_gain, mlp_fit, mlp_gradient, mlp_loss, variance_reduction, ExtraTreesConfig,
    FeatureSampling, GbtConfig, MlpConfig, MlpModel, TreeNode,
};
use spin_negativity::states::{density_from_pure, werner_state, zeta_state, DensityOperator, Spin, SpinPair};
use spin_negativity::{Matrix, RngHandle};

pub type Check = Result<String, String>;

const SPINS: [f64; 3] = [0.5, 1.0, 5.0];

fn within(worst: f64, tol: f64, what: &str) -> Check {
    let line = format!("{what} max error {worst:.2e} (tol {tol:.0e})");
    if worst <= tol {
        Ok(line)
    } else {
        Err(line)
    }
}

fn grid(lo: f64, hi: f64) -> Vec<f64> {
    (0..21).map(|i| lo + (hi - lo) * i as f64 / 20.0).collect()
}

pub fn werner_grid() -> Check {
    let mut worst: f64 = 0.0;
    for j in SPINS {
        let spin = Spin::new(j).unwrap();
        for a in grid(0.0, 1.0) {
            let n = negativity(&werner_state(spin, a).unwrap()).unwrap().value;
            worst = worst.max((n - werner_negativity_closed_form(spin, a).unwrap().value).abs());
        }
    }
    within(worst, 1e-9, "werner grid")
}

pub fn zeta_grid() -> Check {
    let mut worst: f64 = 0.0;
    for j in SPINS {
        let spin = Spin::new(j).unwrap();
        for t in grid(0.0, FRAC_PI_2) {
            let rho = density_from_pure(&zeta_state(spin, t).unwrap()).unwrap();
            let n = negativity(&rho).unwrap().value;
            worst = worst.max((n - zeta_negativity_closed_form(spin, t).unwrap().value).abs());
        }
    }
    within(worst, 1e-9, "zeta grid")
}

pub fn random_density(d1: usize, d2: usize, rng: &mut RngHandle) -> Matrix {
    let d = d1 * d2;
    let a: Vec<f64> = (0..d * d).map(|_| rng.normal()).collect();
    let mut m = Matrix::zeros(d, d);
    for i in 0..d {
        for k in 0..d {
            m[(i, k)] = (0..d).map(|l| a[i * d + l] * a[k * d + l]).sum();
        }
    }
    let t = m.trace();
    m.as_mut_slice().iter_mut().for_each(|v| *v /= t);
    m
}

pub fn partial_transpose_laws() -> Check {
    let mut rng = RngHandle::new(2024);
    let mut worst: f64 = 0.0;
    for (d1, d2) in [(2, 2), (3, 3), (2, 3), (3, 2), (4, 4)] {
        for _ in 0..50 {
            let rho = random_density(d1, d2, &mut rng);
            let pt = partial_transpose_matrix(&rho, d1, d2).unwrap();
            if partial_transpose_matrix(&pt, d1, d2).unwrap() != rho {
                return Err(format!("involution broken at ({d1},{d2})"));
            }
            worst = worst.max((pt.trace() - rho.trace()).abs());
        }
    }
    within(worst, 1e-14, "involution exact, trace")
}

/// Cyclic Jacobi rotations, kept apart from the library's solver.
pub fn reference_eigenvalues(m: &Matrix) -> Vec<f64> {
    let n = m.rows();
    let mut a: Vec<f64> = m.as_slice().to_vec();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&k| k != i).map(move |k| (i, k))).map(|(i, k)| a[i * n + k].powi(2)).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k * n + p], a[k * n + q]);
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p * n + k], a[q * n + k]);
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

pub fn eigensolver_at_121() -> Check {
    let mut rng = RngHandle::new(77);
    let rho = DensityOperator::new(SpinPair::new(5.0, 5.0).unwrap(), random_density(11, 11, &mut rng)).unwrap();
    let pt = partial_transpose_matrix(rho.matrix(), 11, 11).unwrap();
    let ours = symmetric_eigenvalues(&pt).unwrap().eigenvalues;
    let reference = reference_eigenvalues(&pt);
    let scale = reference.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let worst = ours.iter().zip(&reference).map(|(a, b)| (a - b).abs() / scale).fold(0.0, f64::max);
    let sum: f64 = ours.iter().sum();
    if (sum - pt.trace()).abs() > 1e-9 * 121.0 {
        return Err(format!("eigenvalue sum {sum} vs trace {}", pt.trace()));
    }
    within(worst, 1e-10, "121x121 spectrum vs jacobi, relative")
}

pub fn mlp_gradient_check() -> Check {
    let cfg = MlpConfig { hidden: vec![8, 3], ..Default::default() };
    let mut rng = RngHandle::new(5);
    let model = MlpModel::initialize(4, &cfg, 0.1, &mut rng).unwrap();
    let rows: Vec<Vec<f64>> = (0..16).map(|_| (0..4).map(|_| rng.normal()).collect()).collect();
    let x = Matrix::from_rows(&rows).unwrap();
    let y: Vec<f64> = rows.iter().map(|r| r[0] * r[1] - r[2] + 0.3).collect();
    if model.widths() != vec![4, 8, 3, 1] {
        return Err(format!("widths {:?}", model.widths()));
    }

    let grad = mlp_gradient(&model, &x, &y).unwrap();
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for l in 0..model.layers.len() {
        for which in 0..2 {
            let len = if which == 0 { model.layers[l].weights.len() } else { model.layers[l].bias.len() };
            for i in 0..len {
                let bump = |delta: f64| {
                    let mut m = model.clone();
                    let p = if which == 0 { &mut m.layers[l].weights[i] } else { &mut m.layers[l].bias[i] };
                    *p += delta;
                    mlp_loss(&m, &x, &y).unwrap()
                };
                let numeric = (bump(h) - bump(-h)) / (2.0 * h);
                let analytic = if which == 0 { grad.weights[l][i] } else { grad.biases[l][i] };
                let rel = (numeric - analytic).abs() / numeric.abs().max(analytic.abs()).max(1e-8);
                worst = worst.max(rel);
            }
        }
    }
    within(worst, 1e-4, "4-8-3-1 gradient, relative")
}

fn ten_row_node(seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = RngHandle::new(seed);
    let x: Vec<Vec<f64>> = (0..10).map(|_| (0..3).map(|_| (rng.uniform() * 10.0).floor() / 10.0).collect()).collect();
    let y: Vec<f64> = x.iter().map(|r| r[0] - 2.0 * r[1] * r[2] + rng.normal()).collect();
    (x, y)
}

/// Every nonempty proper left set reachable by `x[f] < t` cuts.
fn all_cuts(x: &[Vec<f64>], f: usize) -> Vec<Vec<bool>> {
    let mut values: Vec<f64> = x.iter().map(|r| r[f]).collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    values[1..].iter().map(|&t| x.iter().map(|r| r[f] < t).collect()).collect()
}

pub fn split_gain_brute_force() -> Check {
    let mut worst: f64 = 0.0;
    for seed in 0..5 {
        let (x, y) = ten_row_node(seed);
        // one depth-1 tree with unit learning rate exposes the root choice
        let cfg = GbtConfig {
            n_estimators: 1,
            learning_rate: 1.0,
            max_depth: 1,
            feature_sampling: FeatureSampling::All,
            ..Default::default()
        };
        let m = gbt_fit(&Matrix::from_rows(&x).unwrap(), &y, &cfg).unwrap();
        let g: Vec<f64> = y.iter().map(|t| m.base_score - t).collect();
        let lambda = cfg.lambda;
        let score = |rows: &[usize]| {
            let gs: f64 = rows.iter().map(|&r| g[r]).sum();
            gs * gs / (rows.len() as f64 + lambda)
        };
        let all: Vec<usize> = (0..10).collect();
        let mut best = (f64::NEG_INFINITY, Vec::new());
        for f in 0..3 {
            for mask in all_cuts(&x, f) {
                let left: Vec<usize> = all.iter().copied().filter(|&r| mask[r]).collect();
                let right: Vec<usize> = all.iter().copied().filter(|&r| !mask[r]).collect();
                let brute = 0.5 * (score(&left) + score(&right) - score(&all));
                let gl: f64 = left.iter().map(|&r| g[r]).sum();
                let op = gbt_split_gain(g.iter().sum(), 10.0, gl, left.len() as f64, lambda, 0.0);
                worst = worst.max((op - brute).abs());
                if brute > best.0 + 1e-12 {
                    best = (brute, mask);
                }
            }
        }
        let TreeNode::Split { feature, threshold, .. } = m.trees[0].nodes[0] else {
            return Err(format!("seed {seed}: root is a leaf"));
        };
        let chosen: Vec<bool> = x.iter().map(|r| r[feature] < threshold).collect();
        if chosen != best.1 {
            return Err(format!("seed {seed}: root split is not the brute-force argmax"));
        }
    }
    within(worst, 1e-12, "split gain")
}

pub fn variance_reduction_brute_force() -> Check {
    let var = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|a| (a - m) * (a - m)).sum::<f64>() / v.len() as f64
    };
    let mut worst: f64 = 0.0;
    for seed in 0..5 {
        let (x, y) = ten_row_node(seed + 100);
        for f in 0..3 {
            for mask in all_cuts(&x, f) {
                let l: Vec<f64> = (0..10).filter(|&r| mask[r]).map(|r| y[r]).collect();
                let r: Vec<f64> = (0..10).filter(|&r| !mask[r]).map(|r| y[r]).collect();
                let brute = var(&y) - l.len() as f64 / 10.0 * var(&l) - r.len() as f64 / 10.0 * var(&r);
                let op = variance_reduction(&y, &mask).unwrap();
                worst = worst.max((op - brute).abs());
            }
        }
    }
    within(worst, 1e-12, "variance reduction")
}

pub fn leave_one_out_reference() -> Check {
    let mut rng = RngHandle::new(31);
    let rows: Vec<Vec<f64>> = (0..12).map(|_| vec![rng.normal(), rng.normal()]).collect();
    let x = Matrix::from_rows(&rows).unwrap();
    let y: Vec<f64> = rows.iter().map(|r| (r[0] - r[1]).abs()).collect();
    let config = EnsembleConfig {
        folds: 12,
        mlp: MlpConfig { hidden: vec![6], epochs: 5, batch_size: 4, ..Default::default() },
        extra_trees: ExtraTreesConfig { n_estimators: 5, ..Default::default() },
        gbt: GbtConfig { n_estimators: 5, ..Default::default() },
        ..Default::default()
    };
    let seed = 99;
    let plan = kfold_plan(12, 12, &mut RngHandle::new(1)).unwrap();
    let oof = oof_predictions(&x, &y, &plan, &config, seed).unwrap();

    for row in 0..12 {
        let fold = plan.assignments[row];
        let rest: Vec<usize> = (0..12).filter(|&r| r != row).collect();
        let xr = x.select_rows(&rest);
        let yr: Vec<f64> = rest.iter().map(|&r| y[r]).collect();
        let held = x.select_rows(&[row]);
        for (c, &model) in BASE_MODELS.iter().enumerate() {
            let s = base_job_seed(seed, STAGE_OOF, fold, model);
            let p = match model {
                BaseModel::Mlp => mlp_fit(&xr, &yr, &config.mlp, &mut RngHandle::new(s)).unwrap().predict(&held).unwrap()[0],
                BaseModel::ExtraTrees => {
                    let m = extratrees_fit(&xr, &yr, &ExtraTreesConfig { seed: s, ..config.extra_trees.clone() }).unwrap();
                    m.predict_row(held.row(0))
                }
                BaseModel::Gbt => {
                    let m = gbt_fit(&xr, &yr, &GbtConfig { seed: s, ..config.gbt.clone() }).unwrap();
                    m.predict_row(held.row(0))
                }
            };
            if oof.matrix[(row, c)] != p {
                return Err(format!("row {row}, {}: {} vs {p}", model.name(), oof.matrix[(row, c)]));
            }
        }
    }
    Ok("36 of 36 entries identical".into())
}

pub fn published_scaling_arithmetic() -> Check {
    let c = ScalingCoefficients::PUBLISHED;
    let s_half = scaling_estimate(0.5, 0.0, 0.0020, 0.9999, &c);
    let s_one = scaling_estimate(1.0, 0.0002, 0.0102, 0.9962, &c);
    let line = format!("j=1/2 -> {s_half:.4e}, j=1 -> {s_one:.4e}");
    if (s_half / 1.11e4 - 1.0).abs() <= 0.01 && (s_one / 1.69e4 - 1.0).abs() <= 0.01 {
        Ok(line)
    } else {
        Err(line)
    }
}
