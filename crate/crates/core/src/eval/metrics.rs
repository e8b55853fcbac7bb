use serde::{Deserialize, Serialize};

use crate::error::{ensure_dim, Error, Result};

/// Class-summed confusion counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl NetCounts {
    pub fn add_sample(&mut self, prediction: &[u8], label: &[u8]) -> Result<()> {
        ensure_dim("prediction vs label width", label.len(), prediction.len())?;
        for (&p, &l) in prediction.iter().zip(label) {
            match (p != 0, l != 0) {
                (true, true) => self.tp += 1,
                (true, false) => self.fp += 1,
                (false, true) => self.fn_ += 1,
                (false, false) => {}
            }
        }
        Ok(())
    }

    /// `TP / (TP + (FP + FN) / 2)`.
    pub fn f1(&self) -> Result<f64> {
        if self.tp + self.fp + self.fn_ == 0 {
            return Err(Error::UndefinedMetric("micro-F1 with no positives"));
        }
        Ok(self.tp as f64 / (self.tp as f64 + 0.5 * (self.fp + self.fn_) as f64))
    }
}

pub fn net_counts(predictions: &[Vec<u8>], labels: &[Vec<u8>]) -> Result<NetCounts> {
    ensure_dim("micro-F1 sample count", labels.len(), predictions.len())?;
    let mut c = NetCounts::default();
    for (p, l) in predictions.iter().zip(labels) {
        c.add_sample(p, l)?;
    }
    Ok(c)
}

/// Micro-averaged F1 over binary prediction and label vectors.
pub fn micro_f1(predictions: &[Vec<u8>], labels: &[Vec<u8>]) -> Result<f64> {
    if predictions.is_empty() {
        return Err(Error::UndefinedMetric("micro-F1 of an empty set"));
    }
    net_counts(predictions, labels)?.f1()
}

pub fn one_hot(class: usize, num_classes: usize) -> Vec<u8> {
    let mut v = vec![0; num_classes];
    v[class] = 1;
    v
}

/// Index of the largest score; ties resolve to the lowest index.
pub fn argmax(scores: &[f32]) -> Option<usize> {
    let mut best: Option<(usize, f32)> = None;
    for (i, &s) in scores.iter().enumerate() {
        match best {
            Some((_, b)) if s <= b => {}
            _ => best = Some((i, s)),
        }
    }
    best.map(|(i, _)| i)
}
