//! Regression metrics, scatter line fits and the sample-size scaling law
//! `log10 S = c0 + cJ j + cMSE mse + cMAE mae + cR2 r2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mse: f64,
    pub mae: f64,
    /// `-inf` when the actuals are constant and the fit is not exact.
    pub r2: f64,
    pub n: usize,
    pub constant_actuals: bool,
}

fn check_pair(actual: &[f64], predicted: &[f64]) -> Result<()> {
    if actual.len() != predicted.len() {
        return Err(Error::Structural(format!(
            "{} actual values but {} predictions",
            actual.len(),
            predicted.len()
        )));
    }
    if actual.is_empty() {
        return Err(Error::Degenerate("no samples".into()));
    }
    Ok(())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn compute_metrics(actual: &[f64], predicted: &[f64]) -> Result<MetricsReport> {
    check_pair(actual, predicted)?;
    let n = actual.len();
    let (mut sse, mut sae) = (0.0, 0.0);
    for (a, p) in actual.iter().zip(predicted) {
        let r = p - a;
        sse += r * r;
        sae += r.abs();
    }
    let m = mean(actual);
    let sst: f64 = actual.iter().map(|a| (a - m) * (a - m)).sum();
    let constant = actual.iter().all(|a| *a == actual[0]);
    let r2 = if constant {
        if sse == 0.0 {
            1.0
        } else {
            f64::NEG_INFINITY
        }
    } else {
        1.0 - sse / sst
    };
    Ok(MetricsReport {
        mse: sse / n as f64,
        mae: sae / n as f64,
        r2,
        n,
        constant_actuals: constant,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
}

/// Least-squares line `predicted ~ slope * actual + intercept`.
pub fn line_fit(actual: &[f64], predicted: &[f64]) -> Result<LineFit> {
    check_pair(actual, predicted)?;
    if actual.len() < 2 {
        return Err(Error::Degenerate("line fit needs at least 2 points".into()));
    }
    let (mx, my) = (mean(actual), mean(predicted));
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in actual.iter().zip(predicted) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::Degenerate("actual values are constant".into()));
    }
    let slope = sxy / sxx;
    Ok(LineFit {
        slope,
        intercept: my - slope * mx,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingCoefficients {
    pub c0: f64,
    pub c_j: f64,
    pub c_mse: f64,
    pub c_mae: f64,
    pub c_r2: f64,
}

impl ScalingCoefficients {
    pub const PUBLISHED: ScalingCoefficients = ScalingCoefficients {
        c0: 2.8,
        c_j: 0.502,
        c_mse: -3.042,
        c_mae: -8.012,
        c_r2: 1.012,
    };

    pub fn as_array(&self) -> [f64; 5] {
        [self.c0, self.c_j, self.c_mse, self.c_mae, self.c_r2]
    }

    pub fn log10_samples(&self, j: f64, mse: f64, mae: f64, r2: f64) -> f64 {
        self.c0 + self.c_j * j + self.c_mse * mse + self.c_mae * mae + self.c_r2 * r2
    }
}

/// Estimated number of samples `S` needed for the given quality.
pub fn scaling_estimate(j: f64, mse: f64, mae: f64, r2: f64, coeffs: &ScalingCoefficients) -> f64 {
    10f64.powf(coeffs.log10_samples(j, mse, mae, r2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRecord {
    pub j: f64,
    pub mse: f64,
    pub mae: f64,
    pub r2: f64,
    #[serde(rename = "S")]
    pub samples: f64,
}

pub const SCALING_COLUMNS: [&str; 5] = ["intercept", "j", "mse", "mae", "r2"];

/// Ordinary least squares of `log10 S` on `(1, j, mse, mae, r2)`.
pub fn fit_scaling_law(records: &[ScalingRecord]) -> Result<ScalingCoefficients> {
    if records.len() < 5 {
        return Err(Error::Degenerate(format!(
            "scaling law has 5 coefficients but only {} records",
            records.len()
        )));
    }
    if records.iter().any(|r| !(r.samples > 0.0)) {
        return Err(Error::Degenerate("sample counts must be positive".into()));
    }
    let design: Vec<[f64; 5]> = records.iter().map(|r| [1.0, r.j, r.mse, r.mae, r.r2]).collect();
    let target: Vec<f64> = records.iter().map(|r| r.samples.log10()).collect();

    // Gram-Schmidt on the columns flags columns lying in the span of earlier ones.
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut collinear = Vec::new();
    for c in 0..5 {
        let col: Vec<f64> = design.iter().map(|row| row[c]).collect();
        let norm0 = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut v = col;
        for b in &basis {
            let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm0 == 0.0 || norm <= 1e-9 * norm0 {
            collinear.push(SCALING_COLUMNS[c]);
        } else {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    if !collinear.is_empty() {
        return Err(Error::Degenerate(format!(
            "scaling-law design is rank deficient; collinear columns: {}",
            collinear.join(", ")
        )));
    }

    let mut gram = nalgebra::Matrix5::<f64>::zeros();
    let mut rhs = nalgebra::Vector5::<f64>::zeros();
    for (row, t) in design.iter().zip(&target) {
        for a in 0..5 {
            rhs[a] += row[a] * t;
            for b in 0..5 {
                gram[(a, b)] += row[a] * row[b];
            }
        }
    }
    let solved = gram.cholesky().map(|ch| ch.solve(&rhs)).or_else(|| {
        let ridge = gram + nalgebra::Matrix5::identity() * 1e-10;
        ridge.cholesky().map(|ch| ch.solve(&rhs))
    });
    let beta = solved.ok_or_else(|| Error::Degenerate("normal equations are singular".into()))?;
    let c = ScalingCoefficients {
        c0: beta[0],
        c_j: beta[1],
        c_mse: beta[2],
        c_mae: beta[3],
        c_r2: beta[4],
    };
    if c.as_array().iter().any(|v| !v.is_finite()) {
        return Err(Error::Degenerate("scaling-law fit is not finite".into()));
    }
    Ok(c)
}
