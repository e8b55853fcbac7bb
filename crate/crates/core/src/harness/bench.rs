use std::hint::black_box;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::decide::{filter_prediction, TernaryVerdict};
use crate::error::{Error, Result};
use crate::eval::{sample_seed, LabeledSample};
use crate::quant::{qhead_forward, QuantTensor, QuantizedHead};
use crate::uq::{interval_per_class, sample_rows, z_value, ClassInterval, PredictionSamples};

pub const MIN_REPETITIONS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    /// May be 1 here, unlike a UQ run.
    pub num_iter: usize,
    pub repetitions: usize,
    pub conf_factor: f64,
    pub threshold: f64,
    pub base_seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            num_iter: 50,
            repetitions: MIN_REPETITIONS,
            conf_factor: 0.7,
            threshold: 0.5,
            base_seed: 0,
        }
    }
}

/// Per-sample latencies, medians over repetitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub num_samples: usize,
    pub num_iter: usize,
    pub repetitions: usize,
    pub single_pass_ms_median: f64,
    pub uq_ms_median: f64,
    pub ratio: f64,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn intervals(samples: &PredictionSamples, z: f64) -> Result<Vec<ClassInterval>> {
    if samples.num_iter() >= 2 {
        return interval_per_class(samples, z);
    }
    // single pass: zero-width intervals
    Ok(samples.row(0).iter().map(|&m| ClassInterval::new(m as f64, 0.0, z)).collect())
}

/// Times one dropout-free pass against the full UQ pipeline per sample.
pub fn bench(model: &QuantizedHead, data: &[LabeledSample], cfg: &BenchConfig) -> Result<BenchReport> {
    if data.is_empty() {
        return Err(Error::validation("bench needs at least one sample"));
    }
    if cfg.num_iter == 0 {
        return Err(Error::validation("bench num_iter must be at least 1"));
    }
    if cfg.repetitions < MIN_REPETITIONS {
        return Err(Error::validation(format!(
            "bench needs at least {MIN_REPETITIONS} repetitions"
        )));
    }
    let z = z_value(cfg.conf_factor)?;
    let inputs: Vec<(u64, QuantTensor)> = data
        .iter()
        .map(|s| Ok((s.id, model.quantize_input(&s.features)?)))
        .collect::<Result<_>>()?;
    let per_sample = |elapsed: std::time::Duration| elapsed.as_secs_f64() * 1e3 / inputs.len() as f64;

    let mut single = Vec::with_capacity(cfg.repetitions);
    let mut uq = Vec::with_capacity(cfg.repetitions);
    for _ in 0..cfg.repetitions {
        let t = Instant::now();
        for (_, q) in &inputs {
            black_box(qhead_forward(model, black_box(q), None)?);
        }
        single.push(per_sample(t.elapsed()));

        let t = Instant::now();
        for (id, q) in &inputs {
            let samples = sample_rows(model, black_box(q), cfg.num_iter, sample_seed(cfg.base_seed, *id))?;
            let iv = intervals(&samples, z)?;
            black_box(filter_prediction(&TernaryVerdict::from_intervals(&iv, cfg.threshold)));
        }
        uq.push(per_sample(t.elapsed()));
    }
    let single_pass_ms_median = median(single);
    let uq_ms_median = median(uq);
    Ok(BenchReport {
        num_samples: inputs.len(),
        num_iter: cfg.num_iter,
        repetitions: cfg.repetitions,
        single_pass_ms_median,
        uq_ms_median,
        ratio: uq_ms_median / single_pass_ms_median.max(f64::MIN_POSITIVE),
    })
}
