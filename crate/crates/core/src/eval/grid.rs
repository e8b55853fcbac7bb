use serde::{Deserialize, Serialize};

use super::report::{evaluate_records, sample_records, LabeledSample, SampleRecord};
use crate::error::{Error, Result};
use crate::quant::QuantizedHead;
use crate::uq::{z_value, McConfig, PredictionSamples};

/// F1 and ignored-count matrices indexed `[conf_factor][num_iter]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub conf_factors: Vec<f64>,
    pub num_iters: Vec<usize>,
    pub threshold: f64,
    pub base_seed: u64,
    pub f1: Vec<Vec<Option<f64>>>,
    pub ignored: Vec<Vec<usize>>,
}

impl GridResult {
    pub fn cell(&self, ci: usize, ni: usize) -> (Option<f64>, usize) {
        (self.f1[ci][ni], self.ignored[ci][ni])
    }
}

fn truncate(records: &[SampleRecord], n: usize) -> Result<Vec<SampleRecord>> {
    records
        .iter()
        .map(|r| {
            let rows = r.samples.rows().take(n).map(<[f32]>::to_vec).collect();
            Ok(SampleRecord {
                samples: PredictionSamples::from_rows(rows)?,
                ..r.clone()
            })
        })
        .collect()
}

/// One evaluation per `(conf_factor, num_iter)` pair with a shared seed.
///
/// MC row `k` of a sample depends only on `(base_seed, id, k)`, so every
/// cell reuses prefixes of one draw at the largest `num_iter`; each cell
/// equals a standalone [`super::run_uq_eval`] at the same settings.
pub fn grid_search(
    model: &QuantizedHead,
    data: &[LabeledSample],
    conf_factors: &[f64],
    num_iters: &[usize],
    threshold: f64,
    base_seed: u64,
) -> Result<GridResult> {
    if conf_factors.is_empty() || num_iters.is_empty() {
        return Err(Error::validation("grid axes must be non-empty"));
    }
    if data.is_empty() {
        return Err(Error::validation("evaluation set is empty"));
    }
    for &c in conf_factors {
        for &n in num_iters {
            McConfig {
                num_iter: n,
                conf_factor: c,
                threshold,
                base_seed,
            }
            .validate()?;
        }
    }
    let max_iter = *num_iters.iter().max().expect("non-empty");
    let full = sample_records(model, data, max_iter, base_seed)?;

    let mut f1 = vec![vec![None; num_iters.len()]; conf_factors.len()];
    let mut ignored = vec![vec![0; num_iters.len()]; conf_factors.len()];
    for (ni, &n) in num_iters.iter().enumerate() {
        let records = if n == max_iter { full.clone() } else { truncate(&full, n)? };
        for (ci, &c) in conf_factors.iter().enumerate() {
            let report = evaluate_records(&records, z_value(c)?, threshold)?;
            f1[ci][ni] = report.micro_f1;
            ignored[ci][ni] = report.ignored_count();
        }
    }
    Ok(GridResult {
        conf_factors: conf_factors.to_vec(),
        num_iters: num_iters.to_vec(),
        threshold,
        base_seed,
        f1,
        ignored,
    })
}
