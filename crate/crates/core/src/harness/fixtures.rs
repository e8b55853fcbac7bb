//! Synthetic models and datasets so the toolchain runs without exported
//! real-data features.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::format::{Dataset, FormatError};
use crate::eval::LabeledSample;
use crate::netcore::{
    Activation, BatchNorm, Dense, HeadModel, Tensor, REFERENCE_DROPOUT1, REFERENCE_DROPOUT2,
};
use crate::rng::{mix_seed, seeded_rng, Rng};

fn normal(rng: &mut Rng) -> f32 {
    StandardNormal.sample(rng)
}

fn gaussian_matrix(rng: &mut Rng, rows: usize, cols: usize, std: f32) -> Tensor {
    Tensor::matrix(rows, cols, (0..rows * cols).map(|_| normal(rng) * std).collect())
        .expect("finite gaussian draws")
}

/// Random head with a non-trivial batch norm and fan-in scaled weights.
pub fn random_head(rng: &mut Rng, feature_dim: usize, hidden: usize, classes: usize) -> HeadModel {
    let bn = BatchNorm {
        gamma: (0..feature_dim).map(|_| rng.random_range(0.5..1.5)).collect(),
        beta: (0..feature_dim).map(|_| rng.random_range(-0.5..0.5)).collect(),
        running_mean: (0..feature_dim).map(|_| rng.random_range(-1.0..1.0)).collect(),
        running_var: (0..feature_dim).map(|_| rng.random_range(0.25..2.0)).collect(),
        epsilon: 1e-3,
    };
    let w1 = gaussian_matrix(rng, feature_dim, hidden, (2.0 / feature_dim as f32).sqrt());
    let b1 = Tensor::vector((0..hidden).map(|_| rng.random_range(-0.1..0.1)).collect()).unwrap();
    let w2 = gaussian_matrix(rng, hidden, classes, (4.0 / hidden as f32).sqrt());
    let b2 = Tensor::vector((0..classes).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
    HeadModel::new(
        bn,
        REFERENCE_DROPOUT1,
        Dense::new(w1, b1, Activation::Relu).unwrap(),
        REFERENCE_DROPOUT2,
        Dense::new(w2, b2, Activation::Sigmoid).unwrap(),
    )
    .expect("consistent random head")
}

/// Feature vectors distributed like the head's batch-norm statistics.
pub fn bn_distributed_features(rng: &mut Rng, model: &HeadModel, n: usize) -> Vec<Tensor> {
    let bn = &model.bn;
    (0..n)
        .map(|_| {
            let v = (0..bn.dim())
                .map(|i| bn.running_mean[i] + bn.running_var[i].sqrt() * normal(rng))
                .collect();
            Tensor::vector(v).unwrap()
        })
        .collect()
}

/// Random head plus `n_calib` features drawn from its input distribution.
pub fn random_calibrated_head(
    rng: &mut Rng,
    feature_dim: usize,
    hidden: usize,
    classes: usize,
    n_calib: usize,
) -> (HeadModel, Vec<Tensor>) {
    let m = random_head(rng, feature_dim, hidden, classes);
    let calib = bn_distributed_features(rng, &m, n_calib);
    (m, calib)
}

/// Inputs inside the calibration distribution: convex blends of two
/// calibration samples, so every element stays within the calibrated range.
pub fn random_features(rng: &mut Rng, calib: &[Tensor], n: usize) -> Vec<Tensor> {
    (0..n)
        .map(|_| {
            let a = &calib[rng.random_range(0..calib.len())];
            let b = &calib[rng.random_range(0..calib.len())];
            let t: f32 = rng.random();
            let v = a.data().iter().zip(b.data()).map(|(x, y)| t * x + (1.0 - t) * y).collect();
            Tensor::vector(v).unwrap()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureSpec {
    pub seed: u64,
    pub feature_dim: usize,
    pub hidden: usize,
    pub classes: usize,
    pub calib_samples: usize,
    pub test_samples: usize,
    /// Within-class noise relative to the class-prototype spread.
    pub noise: f32,
    pub dropout1_p: f32,
    pub dropout2_p: f32,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            feature_dim: 64,
            hidden: 32,
            classes: 10,
            calib_samples: 200,
            test_samples: 100,
            noise: 0.6,
            dropout1_p: REFERENCE_DROPOUT1,
            dropout2_p: REFERENCE_DROPOUT2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub model: HeadModel,
    pub calib: Dataset,
    pub test: Dataset,
}

/// Prototype-classification fixture.
///
/// Each class has a latent prototype; raw features are a per-feature affine
/// image of `prototype + noise`, which the batch norm undoes. The hidden
/// layer is a random ReLU projection and each output unit scores the
/// projection onto its class's centered hidden prototype, biased so the
/// sigmoid crosses 0.5 halfway between own-class and other-class scores.
pub fn make_fixture(spec: &FixtureSpec) -> Result<Fixture, FormatError> {
    let FixtureSpec {
        feature_dim: f,
        hidden: h,
        classes: c,
        ..
    } = *spec;
    let mut rng = seeded_rng(mix_seed(spec.seed, 0));

    let offset: Vec<f32> = (0..f).map(|_| rng.random_range(-2.0..2.0)).collect();
    let spread: Vec<f32> = (0..f).map(|_| rng.random_range(0.5..2.0)).collect();
    let prototypes: Vec<Vec<f32>> = (0..c).map(|_| (0..f).map(|_| normal(&mut rng)).collect()).collect();
    let latent_var = 1.0 + spec.noise * spec.noise;
    let bn = BatchNorm {
        gamma: vec![1.0; f],
        beta: vec![0.0; f],
        running_mean: offset.clone(),
        running_var: spread.iter().map(|s| s * s * latent_var).collect(),
        epsilon: 1e-5,
    };

    let w1 = gaussian_matrix(&mut rng, f, h, (2.0 / f as f32).sqrt());
    let dense1 = Dense::new(w1, Tensor::zeros(vec![h]), Activation::Relu).unwrap();
    let hidden_of = |z: &[f32]| -> Vec<f32> {
        let normed: Vec<f32> = z.iter().map(|v| v / latent_var.sqrt()).collect();
        dense1.forward(&normed).unwrap()
    };
    let proto_hidden: Vec<Vec<f32>> = prototypes.iter().map(|p| hidden_of(p)).collect();
    let centroid: Vec<f32> = (0..h)
        .map(|j| proto_hidden.iter().map(|v| v[j]).sum::<f32>() / c as f32)
        .collect();

    let mut w2 = vec![0.0f32; h * c];
    let mut b2 = vec![0.0f32; c];
    for k in 0..c {
        let mut dir: Vec<f32> = proto_hidden[k].iter().zip(&centroid).map(|(a, m)| a - m).collect();
        let norm = dir.iter().map(|v| v * v).sum::<f32>().sqrt().max(1e-6);
        dir.iter_mut().for_each(|v| *v /= norm);
        let proj = |v: &[f32]| v.iter().zip(&dir).map(|(a, b)| a * b).sum::<f32>();
        let own = proj(&proto_hidden[k]);
        let others = if c > 1 {
            (0..c).filter(|&o| o != k).map(|o| proj(&proto_hidden[o])).sum::<f32>() / (c - 1) as f32
        } else {
            own - 1.0
        };
        let gap = (own - others).max(1e-3);
        let gain = 6.0 / gap;
        for j in 0..h {
            w2[j * c + k] = gain * dir[j];
        }
        b2[k] = -gain * (own + others) / 2.0;
    }
    let dense2 = Dense::new(
        Tensor::matrix(h, c, w2).unwrap(),
        Tensor::vector(b2).unwrap(),
        Activation::Sigmoid,
    )
    .unwrap();
    let model = HeadModel::new(bn, spec.dropout1_p, dense1, spec.dropout2_p, dense2)
        .map_err(|e| FormatError::Invalid(e.to_string()))?;

    let draw = |n: usize, stream: u64| -> Result<Dataset, FormatError> {
        let mut rng = seeded_rng(mix_seed(spec.seed, stream));
        let samples: Vec<LabeledSample> = (0..n)
            .map(|i| {
                let class = rng.random_range(0..c);
                let v = (0..f)
                    .map(|k| offset[k] + spread[k] * (prototypes[class][k] + spec.noise * normal(&mut rng)))
                    .collect();
                LabeledSample {
                    id: i as u64,
                    features: Tensor::vector(v).unwrap(),
                    true_class: class,
                    corruption_tag: None,
                    severity: None,
                }
            })
            .collect();
        Dataset::from_samples(&samples, f, c, None, None)
    };
    let calib = draw(spec.calib_samples, 1)?;
    let test = draw(spec.test_samples, 2)?;
    Ok(Fixture { model, calib, test })
}
