//! Monte-Carlo-dropout sampling and per-class confidence intervals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal::inverse_normal_cdf;
use crate::quant::{QuantTensor, QuantizedHead};
use crate::rng::{mix_seed, seeded_rng};

pub const DEFAULT_CONF_FACTOR: f64 = 0.7;
pub const DEFAULT_NUM_ITER: usize = 50;
pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub num_iter: usize,
    pub conf_factor: f64,
    pub threshold: f64,
    pub base_seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            num_iter: DEFAULT_NUM_ITER,
            conf_factor: DEFAULT_CONF_FACTOR,
            threshold: DEFAULT_THRESHOLD,
            base_seed: 0,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_iter < 2 {
            return Err(Error::validation(format!(
                "num_iter {} must be at least 2",
                self.num_iter
            )));
        }
        if !(self.conf_factor > 0.0 && self.conf_factor < 1.0) {
            return Err(Error::validation(format!(
                "conf_factor {} outside (0, 1)",
                self.conf_factor
            )));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::validation(format!(
                "threshold {} outside (0, 1)",
                self.threshold
            )));
        }
        Ok(())
    }

    pub fn z(&self) -> Result<f64> {
        z_value(self.conf_factor)
    }
}

/// Two-sided z-table value: the standard-normal quantile at `(1 + c) / 2`.
pub fn z_value(conf_factor: f64) -> Result<f64> {
    if !(conf_factor > 0.0 && conf_factor < 1.0) {
        return Err(Error::validation(format!(
            "conf_factor {conf_factor} outside (0, 1)"
        )));
    }
    Ok(inverse_normal_cdf((1.0 + conf_factor) / 2.0))
}

/// `num_iter x num_classes` sigmoid scores, one row per stochastic pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionSamples {
    num_classes: usize,
    data: Vec<f32>,
}

impl PredictionSamples {
    pub fn from_rows(rows: Vec<Vec<f32>>) -> Result<Self> {
        let num_classes = rows.first().map(Vec::len).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * num_classes);
        for (k, row) in rows.into_iter().enumerate() {
            if row.len() != num_classes {
                return Err(Error::dim("prediction sample row", num_classes, row.len()));
            }
            if let Some(v) = row.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::validation(format!(
                    "prediction sample {v} in row {k} outside [0, 1]"
                )));
            }
            data.extend(row);
        }
        Ok(Self { num_classes, data })
    }

    pub fn num_iter(&self) -> usize {
        self.data.len().checked_div(self.num_classes).unwrap_or(0)
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn row(&self, k: usize) -> &[f32] {
        &self.data[k * self.num_classes..(k + 1) * self.num_classes]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f32]> {
        self.data.chunks_exact(self.num_classes.max(1))
    }

    pub fn column(&self, c: usize) -> impl Iterator<Item = f32> + '_ {
        self.rows().map(move |r| r[c])
    }
}

/// Draws `cfg.num_iter` masked forward passes.
///
/// Row `k` uses masks from a generator seeded with `mix_seed(base_seed, k)`,
/// so rows can be produced in any order.
pub fn mc_sample(model: &QuantizedHead, features: &QuantTensor, cfg: &McConfig) -> Result<PredictionSamples> {
    cfg.validate()?;
    sample_rows(model, features, cfg.num_iter, cfg.base_seed)
}

pub(crate) fn sample_rows(
    model: &QuantizedHead,
    features: &QuantTensor,
    num_iter: usize,
    base_seed: u64,
) -> Result<PredictionSamples> {
    let mut rows = Vec::with_capacity(num_iter);
    for k in 0..num_iter {
        let mut rng = seeded_rng(mix_seed(base_seed, k as u64));
        let masks = model.sample_masks(&mut rng)?;
        rows.push(crate::quant::qhead_forward(model, features, Some(&masks))?.into_data());
    }
    PredictionSamples::from_rows(rows)
}

/// `(mu - z*sigma, mu + z*sigma)` for one class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassInterval {
    pub mean: f64,
    pub std: f64,
    pub z: f64,
    pub lo: f64,
    pub hi: f64,
}

impl ClassInterval {
    pub fn new(mean: f64, std: f64, z: f64) -> Self {
        let half = z * std;
        Self {
            mean,
            std,
            z,
            lo: mean - half,
            hi: mean + half,
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, other: &ClassInterval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Per-class mean, Bessel-corrected standard deviation, and interval at `z`.
pub fn interval_per_class(samples: &PredictionSamples, z: f64) -> Result<Vec<ClassInterval>> {
    if samples.num_iter() < 2 {
        return Err(Error::validation(format!(
            "need at least 2 prediction samples, got {}",
            samples.num_iter()
        )));
    }
    if !(z >= 0.0 && z.is_finite()) {
        return Err(Error::validation(format!("z {z} must be finite and non-negative")));
    }
    Ok((0..samples.num_classes())
        .map(|c| {
            let col: Vec<f64> = samples.column(c).map(f64::from).collect();
            let (mean, std) = mean_std(&col);
            ClassInterval::new(mean, std, z)
        })
        .collect())
}

/// Sample skewness of each class column; a diagnostic for the Gaussian
/// assumption behind the intervals. Zero-variance columns report 0.
pub fn column_skewness(samples: &PredictionSamples) -> Vec<f64> {
    (0..samples.num_classes())
        .map(|c| {
            let n = samples.num_iter() as f64;
            let col: Vec<f64> = samples.column(c).map(f64::from).collect();
            let mean = col.iter().sum::<f64>() / n;
            let m2 = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            let m3 = col.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n;
            if m2 == 0.0 {
                0.0
            } else {
                m3 / m2.powf(1.5)
            }
        })
        .collect()
}
