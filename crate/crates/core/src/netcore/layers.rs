use serde::{Deserialize, Serialize};

use super::Tensor;
use crate::error::{ensure_dim, Error, Result};

/// Largest `f32` strictly below one.
const ONE_MINUS_ULP: f32 = 1.0 - f32::EPSILON / 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Sigmoid,
    None,
}

impl Activation {
    pub fn apply(self, v: f32) -> f32 {
        match self {
            Activation::Relu => v.max(0.0),
            Activation::Sigmoid => sigmoid(v),
            Activation::None => v,
        }
    }
}

/// Logistic function, kept inside the open interval (0, 1) even when the
/// `f32` result would saturate.
pub fn sigmoid(v: f32) -> f32 {
    let y = 1.0 / (1.0 + (-v).exp());
    y.clamp(f32::MIN_POSITIVE, ONE_MINUS_ULP)
}

/// Fully connected layer; `weights` is `[inputs x outputs]` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weights: Tensor,
    pub bias: Tensor,
    pub activation: Activation,
}

impl Dense {
    pub fn new(weights: Tensor, bias: Tensor, activation: Activation) -> Result<Self> {
        let (_, outputs) = weights.dims2()?;
        ensure_dim("dense bias", outputs, bias.len())?;
        Ok(Self {
            weights,
            bias,
            activation,
        })
    }

    pub fn inputs(&self) -> usize {
        self.weights.shape()[0]
    }

    pub fn outputs(&self) -> usize {
        self.weights.shape()[1]
    }

    pub fn forward(&self, x: &[f32]) -> Result<Vec<f32>> {
        dense_forward_slice(x, &self.weights, &self.bias, self.activation)
    }

    /// Pre-activation output `x·W + b`.
    pub fn linear(&self, x: &[f32]) -> Result<Vec<f32>> {
        dense_forward_slice(x, &self.weights, &self.bias, Activation::None)
    }
}

/// `y[j] = act(sum_i x[i] * W[i, j] + b[j])`, accumulated in ascending `i`.
pub fn dense_forward(x: &Tensor, w: &Tensor, b: &Tensor, activation: Activation) -> Result<Tensor> {
    let y = dense_forward_slice(x.data(), w, b, activation)?;
    Ok(Tensor::from_parts_unchecked(vec![y.len()], y))
}

pub(crate) fn dense_forward_slice(
    x: &[f32],
    w: &Tensor,
    b: &Tensor,
    activation: Activation,
) -> Result<Vec<f32>> {
    let (rows, cols) = w.dims2()?;
    ensure_dim("dense input", rows, x.len())?;
    ensure_dim("dense bias", cols, b.len())?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::validation("non-finite dense input"));
    }
    let wd = w.data();
    let mut acc = vec![0.0f32; cols];
    for (i, &xi) in x.iter().enumerate() {
        let row = &wd[i * cols..(i + 1) * cols];
        for (a, &wij) in acc.iter_mut().zip(row) {
            *a += xi * wij;
        }
    }
    for (a, &bj) in acc.iter_mut().zip(b.data()) {
        *a = activation.apply(*a + bj);
    }
    Ok(acc)
}

/// Inference-mode batch normalization over a feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchNorm {
    pub gamma: Vec<f32>,
    pub beta: Vec<f32>,
    pub running_mean: Vec<f32>,
    pub running_var: Vec<f32>,
    pub epsilon: f32,
}

impl BatchNorm {
    pub fn identity(dim: usize) -> Self {
        Self {
            gamma: vec![1.0; dim],
            beta: vec![0.0; dim],
            running_mean: vec![0.0; dim],
            running_var: vec![1.0; dim],
            epsilon: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.gamma.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.gamma.len();
        ensure_dim("batchnorm beta", n, self.beta.len())?;
        ensure_dim("batchnorm running_mean", n, self.running_mean.len())?;
        ensure_dim("batchnorm running_var", n, self.running_var.len())?;
        for (i, &v) in self.running_var.iter().enumerate() {
            if (v + self.epsilon).partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
                return Err(Error::validation(format!(
                    "batchnorm running_var[{i}] + epsilon = {} is not positive",
                    v + self.epsilon
                )));
            }
        }
        Ok(())
    }

    /// Per-feature `(scale, shift)` so that `bn(x) = scale * x + shift`.
    pub fn affine(&self) -> Result<(Vec<f32>, Vec<f32>)> {
        self.validate()?;
        let mut scale = Vec::with_capacity(self.dim());
        let mut shift = Vec::with_capacity(self.dim());
        for i in 0..self.dim() {
            let a = self.gamma[i] / (self.running_var[i] + self.epsilon).sqrt();
            scale.push(a);
            shift.push(self.beta[i] - a * self.running_mean[i]);
        }
        Ok((scale, shift))
    }

    pub fn forward(&self, x: &[f32]) -> Result<Vec<f32>> {
        ensure_dim("batchnorm input", self.dim(), x.len())?;
        let (scale, shift) = self.affine()?;
        Ok(x.iter()
            .zip(scale.iter().zip(&shift))
            .map(|(&v, (&a, &c))| a * v + c)
            .collect())
    }
}

/// Folds an inference-mode batch norm into the dense layer that consumes it.
///
/// `W'[i,j] = W[i,j]·a[i]` and `b'[j] = b[j] + sum_i W[i,j]·c[i]` where
/// `bn(x) = a·x + c`.
pub fn batchnorm_fold(bn: &BatchNorm, dense: &Dense) -> Result<Dense> {
    ensure_dim("batchnorm fold", dense.inputs(), bn.dim())?;
    let (scale, shift) = bn.affine()?;
    let cols = dense.outputs();
    let w = dense.weights.data();
    let mut folded = Vec::with_capacity(w.len());
    let mut bias: Vec<f64> = dense.bias.data().iter().map(|&b| b as f64).collect();
    for i in 0..dense.inputs() {
        let row = &w[i * cols..(i + 1) * cols];
        folded.extend(row.iter().map(|&wij| wij * scale[i]));
        for (bj, &wij) in bias.iter_mut().zip(row) {
            *bj += wij as f64 * shift[i] as f64;
        }
    }
    Dense::new(
        Tensor::matrix(dense.inputs(), cols, folded)?,
        Tensor::vector(bias.into_iter().map(|b| b as f32).collect())?,
        dense.activation,
    )
}
