//! Fully connected ReLU network with a linear scalar output, trained by
//! mini-batch gradient descent on mean squared error.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::matrix::Matrix;
use crate::rng::RngHandle;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Optimizer {
    /// Heavy-ball momentum: `v <- mu v - lr g; w <- w + v`.
    Momentum { momentum: f64 },
    Adam { beta1: f64, beta2: f64, epsilon: f64 },
}

impl Optimizer {
    pub fn adam() -> Self {
        Optimizer::Adam {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpConfig {
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: Optimizer,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            hidden: vec![128, 64, 32],
            learning_rate: 1e-3,
            epochs: 200,
            batch_size: 64,
            optimizer: Optimizer::adam(),
        }
    }
}

/// One affine layer; `weights` is `inputs x outputs`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub config: MlpConfig,
    pub seed: u64,
    pub layers: Vec<Layer>,
    /// Mean training loss of each epoch.
    pub loss_history: Vec<f64>,
}

/// Gradients of the batch MSE, laid out like [`Layer`].
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

struct Params {
    w: Vec<Array2<f64>>,
    b: Vec<Array1<f64>>,
}

impl Params {
    fn from_layers(layers: &[Layer]) -> Self {
        Params {
            w: layers
                .iter()
                .map(|l| {
                    Array2::from_shape_vec((l.inputs, l.outputs), l.weights.clone())
                        .expect("layer shape validated")
                })
                .collect(),
            b: layers.iter().map(|l| Array1::from(l.bias.clone())).collect(),
        }
    }
}

impl MlpModel {
    pub fn widths(&self) -> Vec<usize> {
        let mut w = vec![self.layers[0].inputs];
        w.extend(self.layers.iter().map(|l| l.outputs));
        w
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].inputs
    }

    /// Network with He-scaled Gaussian hidden weights, a small output layer
    /// and an output bias of `output_bias`.
    pub fn initialize(
        input: usize,
        config: &MlpConfig,
        output_bias: f64,
        rng: &mut RngHandle,
    ) -> Result<Self> {
        if input == 0 || config.hidden.contains(&0) {
            return Err(param("MLP layer widths must be positive"));
        }
        let mut widths = vec![input];
        widths.extend(&config.hidden);
        widths.push(1);
        let n_layers = widths.len() - 1;
        let mut layers = Vec::with_capacity(n_layers);
        for l in 0..n_layers {
            let (fan_in, fan_out) = (widths[l], widths[l + 1]);
            let last = l + 1 == n_layers;
            let scale = if last {
                0.1 * (1.0 / fan_in as f64).sqrt()
            } else {
                (2.0 / fan_in as f64).sqrt()
            };
            let weights = (0..fan_in * fan_out).map(|_| scale * rng.normal()).collect();
            let bias = if last { vec![output_bias] } else { vec![0.0; fan_out] };
            layers.push(Layer {
                inputs: fan_in,
                outputs: fan_out,
                weights,
                bias,
            });
        }
        Ok(Self {
            config: config.clone(),
            seed: rng.seed(),
            layers,
            loss_history: Vec::new(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::Integrity("MLP has no layers".into()));
        }
        for (i, l) in self.layers.iter().enumerate() {
            if l.weights.len() != l.inputs * l.outputs || l.bias.len() != l.outputs {
                return Err(Error::Integrity(format!("MLP layer {i} has inconsistent shapes")));
            }
            if i > 0 && self.layers[i - 1].outputs != l.inputs {
                return Err(Error::Integrity(format!(
                    "MLP layer {i} expects {} inputs, previous layer emits {}",
                    l.inputs,
                    self.layers[i - 1].outputs
                )));
            }
            if l.weights.iter().chain(&l.bias).any(|v| !v.is_finite()) {
                return Err(Error::Integrity(format!("MLP layer {i} has non-finite parameters")));
            }
        }
        if self.layers.last().map(|l| l.outputs) != Some(1) {
            return Err(Error::Integrity("MLP output layer must have width 1".into()));
        }
        Ok(())
    }

    pub fn predict(&self, features: &Matrix) -> Result<Vec<f64>> {
        if features.cols() != self.input_width() {
            return Err(Error::Width {
                expected: self.input_width(),
                got: features.cols(),
            });
        }
        if features.rows() == 0 {
            return Ok(Vec::new());
        }
        let params = Params::from_layers(&self.layers);
        let mut out = Vec::with_capacity(features.rows());
        // bounded chunks keep the activations small for wide inputs
        for start in (0..features.rows()).step_by(1024) {
            let end = (start + 1024).min(features.rows());
            let x = ArrayView2::from_shape(
                (end - start, features.cols()),
                &features.as_slice()[start * features.cols()..end * features.cols()],
            )
            .expect("row-major slice");
            let acts = forward(&params, x);
            out.extend(acts.last().expect("output layer").column(0).iter().copied());
        }
        Ok(out)
    }
}

/// Forward pass of one row.
pub fn mlp_forward(model: &MlpModel, x: &[f64]) -> Result<f64> {
    let m = Matrix::from_vec(1, x.len(), x.to_vec())?;
    Ok(model.predict(&m)?[0])
}

/// Post-activation outputs of every layer (the last one is linear).
fn forward(p: &Params, x: ArrayView2<f64>) -> Vec<Array2<f64>> {
    let n = p.w.len();
    let mut acts: Vec<Array2<f64>> = Vec::with_capacity(n);
    for l in 0..n {
        let mut z = if l == 0 { x.dot(&p.w[l]) } else { acts[l - 1].dot(&p.w[l]) };
        z += &p.b[l];
        if l + 1 < n {
            z.mapv_inplace(|v| v.max(0.0));
        }
        acts.push(z);
    }
    acts
}

/// Batch MSE and its gradient with respect to every parameter.
fn backprop(p: &Params, x: ArrayView2<f64>, y: &[f64]) -> (f64, Vec<Array2<f64>>, Vec<Array1<f64>>) {
    let acts = forward(p, x);
    let n = p.w.len();
    let rows = y.len() as f64;
    let out = acts.last().expect("output layer");
    let mut loss = 0.0;
    let mut delta = Array2::<f64>::zeros((y.len(), 1));
    for (i, &t) in y.iter().enumerate() {
        let r = out[(i, 0)] - t;
        loss += r * r;
        delta[(i, 0)] = 2.0 * r / rows;
    }
    loss /= rows;
    let mut gw = vec![Array2::zeros((0, 0)); n];
    let mut gb = vec![Array1::zeros(0); n];
    for l in (0..n).rev() {
        gw[l] = if l == 0 { x.t().dot(&delta) } else { acts[l - 1].t().dot(&delta) };
        gb[l] = delta.sum_axis(Axis(0));
        if l > 0 {
            let mut back = delta.dot(&p.w[l].t());
            back.zip_mut_with(&acts[l - 1], |d, &a| {
                if a <= 0.0 {
                    *d = 0.0;
                }
            });
            delta = back;
        }
    }
    (loss, gw, gb)
}

/// Exact gradient of the MSE over `features`/`targets`.
pub fn mlp_gradient(model: &MlpModel, features: &Matrix, targets: &[f64]) -> Result<MlpGradients> {
    if features.cols() != model.input_width() {
        return Err(Error::Width {
            expected: model.input_width(),
            got: features.cols(),
        });
    }
    if features.rows() == 0 || features.rows() != targets.len() {
        return Err(param("gradient batch must be nonempty with one target per row"));
    }
    let p = Params::from_layers(&model.layers);
    let x = ArrayView2::from_shape((features.rows(), features.cols()), features.as_slice())
        .expect("row-major slice");
    let (_, gw, gb) = backprop(&p, x, targets);
    Ok(MlpGradients {
        weights: gw.into_iter().map(|g| g.iter().copied().collect()).collect(),
        biases: gb.into_iter().map(|g| g.to_vec()).collect(),
    })
}

/// Mean squared error of the model on a batch.
pub fn mlp_loss(model: &MlpModel, features: &Matrix, targets: &[f64]) -> Result<f64> {
    let pred = model.predict(features)?;
    Ok(pred
        .iter()
        .zip(targets)
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        / targets.len() as f64)
}

enum OptState {
    Momentum {
        mu: f64,
        vw: Vec<Array2<f64>>,
        vb: Vec<Array1<f64>>,
    },
    Adam {
        beta1: f64,
        beta2: f64,
        eps: f64,
        step: i32,
        mw: Vec<Array2<f64>>,
        vw: Vec<Array2<f64>>,
        mb: Vec<Array1<f64>>,
        vb: Vec<Array1<f64>>,
    },
}

impl OptState {
    fn new(opt: Optimizer, p: &Params) -> Self {
        let zw = || p.w.iter().map(|w| Array2::zeros(w.raw_dim())).collect::<Vec<_>>();
        let zb = || p.b.iter().map(|b| Array1::zeros(b.raw_dim())).collect::<Vec<_>>();
        match opt {
            Optimizer::Momentum { momentum } => OptState::Momentum {
                mu: momentum,
                vw: zw(),
                vb: zb(),
            },
            Optimizer::Adam {
                beta1,
                beta2,
                epsilon,
            } => OptState::Adam {
                beta1,
                beta2,
                eps: epsilon,
                step: 0,
                mw: zw(),
                vw: zw(),
                mb: zb(),
                vb: zb(),
            },
        }
    }

    fn step(&mut self, p: &mut Params, gw: &[Array2<f64>], gb: &[Array1<f64>], lr: f64) {
        match self {
            OptState::Momentum { mu, vw, vb } => {
                let mu = *mu;
                for l in 0..p.w.len() {
                    ndarray::Zip::from(&mut vw[l])
                        .and(&mut p.w[l])
                        .and(&gw[l])
                        .for_each(|v, w, &g| {
                            *v = mu * *v - lr * g;
                            *w += *v;
                        });
                    ndarray::Zip::from(&mut vb[l])
                        .and(&mut p.b[l])
                        .and(&gb[l])
                        .for_each(|v, b, &g| {
                            *v = mu * *v - lr * g;
                            *b += *v;
                        });
                }
            }
            OptState::Adam {
                beta1,
                beta2,
                eps,
                step,
                mw,
                vw,
                mb,
                vb,
            } => {
                *step += 1;
                let (b1, b2, eps) = (*beta1, *beta2, *eps);
                let c1 = 1.0 - b1.powi(*step);
                let c2 = 1.0 - b2.powi(*step);
                let update = |m: &mut f64, v: &mut f64, w: &mut f64, g: f64| {
                    *m = b1 * *m + (1.0 - b1) * g;
                    *v = b2 * *v + (1.0 - b2) * g * g;
                    *w -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
                };
                for l in 0..p.w.len() {
                    ndarray::Zip::from(&mut mw[l])
                        .and(&mut vw[l])
                        .and(&mut p.w[l])
                        .and(&gw[l])
                        .for_each(|m, v, w, &g| update(m, v, w, g));
                    ndarray::Zip::from(&mut mb[l])
                        .and(&mut vb[l])
                        .and(&mut p.b[l])
                        .and(&gb[l])
                        .for_each(|m, v, w, &g| update(m, v, w, g));
                }
            }
        }
    }
}

/// Train a fresh network on standardized features.
///
/// Input columns that are zero on every training row receive zero gradient
/// forever, so they are left out of the training arithmetic and their
/// first-layer weights keep their initial values.
pub fn mlp_fit(
    features: &Matrix,
    targets: &[f64],
    config: &MlpConfig,
    rng: &mut RngHandle,
) -> Result<MlpModel> {
    let n = features.rows();
    if n != targets.len() {
        return Err(Error::Structural(format!("{n} rows but {} targets", targets.len())));
    }
    if config.batch_size == 0 || n < config.batch_size {
        return Err(param(format!(
            "MLP needs at least batch_size={} rows, got {n}",
            config.batch_size
        )));
    }
    if !(config.learning_rate > 0.0) {
        return Err(param("MLP learning rate must be positive"));
    }
    let width = features.cols();
    let mean_target = targets.iter().sum::<f64>() / n as f64;
    let mut model = MlpModel::initialize(width, config, mean_target, rng)?;

    let active: Vec<usize> = (0..width)
        .filter(|&c| features.row_iter().any(|r| r[c] != 0.0))
        .collect();
    let narrowed = active.len() < width;
    let x_active = if narrowed {
        let mut v = Vec::with_capacity(n * active.len());
        for r in features.row_iter() {
            v.extend(active.iter().map(|&c| r[c]));
        }
        Array2::from_shape_vec((n, active.len()), v).expect("gathered shape")
    } else {
        Array2::from_shape_vec((n, width), features.as_slice().to_vec()).expect("row-major copy")
    };
    let mut params = Params::from_layers(&model.layers);
    if narrowed {
        let w0 = &params.w[0];
        let mut sub = Array2::zeros((active.len(), w0.ncols()));
        for (i, &c) in active.iter().enumerate() {
            sub.row_mut(i).assign(&w0.row(c));
        }
        params.w[0] = sub;
    }

    let mut opt = OptState::new(config.optimizer, &params);
    let bs = config.batch_size;
    let mut history = Vec::with_capacity(config.epochs);
    let mut xb = Array2::<f64>::zeros((bs, x_active.ncols()));
    let mut yb = vec![0.0; bs];
    for epoch in 0..config.epochs {
        let order = rng.permutation(n);
        let mut total = 0.0;
        for chunk in order.chunks(bs) {
            let m = chunk.len();
            for (i, &r) in chunk.iter().enumerate() {
                xb.row_mut(i).assign(&x_active.row(r));
                yb[i] = targets[r];
            }
            let x = xb.slice(ndarray::s![..m, ..]);
            let (loss, gw, gb) = backprop(&params, x, &yb[..m]);
            if !loss.is_finite() {
                return Err(Error::Divergence(format!(
                    "MLP loss became {loss} during epoch {epoch}"
                )));
            }
            total += loss * m as f64;
            opt.step(&mut params, &gw, &gb, config.learning_rate);
        }
        history.push(total / n as f64);
    }

    for (l, layer) in model.layers.iter_mut().enumerate() {
        if l == 0 && narrowed {
            let outputs = layer.outputs;
            for (i, &c) in active.iter().enumerate() {
                layer.weights[c * outputs..(c + 1) * outputs]
                    .iter_mut()
                    .zip(params.w[0].row(i))
                    .for_each(|(w, v)| *w = *v);
            }
        } else {
            layer.weights = params.w[l].iter().copied().collect();
        }
        layer.bias = params.b[l].to_vec();
    }
    model.loss_history = history;
    if model
        .layers
        .iter()
        .any(|l| l.weights.iter().chain(&l.bias).any(|v| !v.is_finite()))
    {
        return Err(Error::Divergence("MLP parameters became non-finite".into()));
    }
    Ok(model)
}
