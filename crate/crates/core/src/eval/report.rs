use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{argmax, one_hot, NetCounts};
use crate::decide::{filter_prediction, FilterOutcome, IgnoreReason, TernaryVerdict};
use crate::error::{Error, Result};
use crate::netcore::Tensor;
use crate::quant::{qhead_forward, QuantizedHead};
use crate::rng::mix_seed;
use crate::uq::{interval_per_class, sample_rows, McConfig, PredictionSamples};

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub id: u64,
    pub features: Tensor,
    pub true_class: usize,
    pub corruption_tag: Option<String>,
    pub severity: Option<u32>,
}

/// Everything the decision pipeline needs for one sample once sampling is done.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub id: u64,
    pub true_class: usize,
    pub base_pred: usize,
    pub samples: PredictionSamples,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    Keep,
    Ignore,
}

/// Per-sample audit row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleAudit {
    pub id: u64,
    pub true_class: usize,
    pub base_pred: usize,
    pub verdict: Vec<i8>,
    pub outcome: OutcomeKind,
    pub ignore_reason: Option<IgnoreReason>,
    /// Classes marked present in the kept prediction.
    pub predicted_classes: Vec<usize>,
    pub benefit_of_doubt: bool,
    /// Present and uncertain classes occurred together.
    pub mixed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub num_samples: usize,
    pub z: f64,
    pub threshold: f64,
    pub net_tp: u64,
    pub net_fp: u64,
    pub net_fn: u64,
    /// Over kept samples; `None` when undefined.
    pub micro_f1: Option<f64>,
    /// Argmax accuracy of the dropout-free model over all samples.
    pub base_micro_f1: Option<f64>,
    pub kept_ids: Vec<u64>,
    pub ignored_ids: Vec<u64>,
    pub misclassified_ignored: usize,
    /// `100 * misclassified_ignored / |ignored|`; `None` when nothing is ignored.
    pub misclassified_pct: Option<f64>,
    pub undefined_metrics: Vec<String>,
    pub samples: Vec<SampleAudit>,
}

impl EvalReport {
    pub fn ignored_count(&self) -> usize {
        self.ignored_ids.len()
    }
}

/// Dropout-free argmax class of the quantized model.
pub fn base_predict(model: &QuantizedHead, s: &LabeledSample) -> Result<usize> {
    let q = model.quantize_input(&s.features)?;
    let y = qhead_forward(model, &q, None)?;
    argmax(y.data()).ok_or_else(|| Error::validation("model has no output classes"))
}

/// `100 * mi / i`, undefined for `i == 0`.
pub fn misclassified_pct(misclassified_ignored: usize, ignored: usize) -> Option<f64> {
    (ignored > 0).then(|| 100.0 * misclassified_ignored as f64 / ignored as f64)
}

/// Decision pipeline and metrics over precomputed MC samples.
pub fn evaluate_records(records: &[SampleRecord], z: f64, threshold: f64) -> Result<EvalReport> {
    if records.is_empty() {
        return Err(Error::validation("evaluation set is empty"));
    }
    let mut sorted: Vec<&SampleRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.id);
    if sorted.windows(2).any(|w| w[0].id == w[1].id) {
        return Err(Error::validation("duplicate sample ids"));
    }

    let mut counts = NetCounts::default();
    let mut audits = Vec::with_capacity(sorted.len());
    let (mut kept_ids, mut ignored_ids) = (Vec::new(), Vec::new());
    let mut misclassified_ignored = 0;
    let mut base_correct = 0usize;

    for r in sorted {
        let n = r.samples.num_classes();
        if r.true_class >= n || r.base_pred >= n {
            return Err(Error::validation(format!(
                "sample {} has class index outside [0, {n})",
                r.id
            )));
        }
        let intervals = interval_per_class(&r.samples, z)?;
        let verdict = TernaryVerdict::from_intervals(&intervals, threshold);
        let outcome = filter_prediction(&verdict);
        if r.base_pred == r.true_class {
            base_correct += 1;
        }
        let (kind, reason, predicted, benefit, mixed) = match &outcome {
            FilterOutcome::Keep {
                prediction,
                benefit_of_doubt,
                mixed,
            } => {
                counts.add_sample(prediction, &one_hot(r.true_class, n))?;
                kept_ids.push(r.id);
                let classes = prediction
                    .iter()
                    .enumerate()
                    .filter(|(_, &p)| p == 1)
                    .map(|(c, _)| c)
                    .collect();
                (OutcomeKind::Keep, None, classes, *benefit_of_doubt, *mixed)
            }
            FilterOutcome::Ignore { reason } => {
                ignored_ids.push(r.id);
                if r.base_pred != r.true_class {
                    misclassified_ignored += 1;
                }
                (OutcomeKind::Ignore, Some(*reason), Vec::new(), false, false)
            }
        };
        audits.push(SampleAudit {
            id: r.id,
            true_class: r.true_class,
            base_pred: r.base_pred,
            verdict: verdict.codes(),
            outcome: kind,
            ignore_reason: reason,
            predicted_classes: predicted,
            benefit_of_doubt: benefit,
            mixed,
        });
    }

    let mut undefined = Vec::new();
    let micro_f1 = if kept_ids.is_empty() {
        undefined.push("micro_f1".to_string());
        None
    } else {
        match counts.f1() {
            Ok(v) => Some(v),
            Err(Error::UndefinedMetric(_)) => {
                undefined.push("micro_f1".to_string());
                None
            }
            Err(e) => return Err(e),
        }
    };
    let pct = misclassified_pct(misclassified_ignored, ignored_ids.len());
    if pct.is_none() {
        undefined.push("misclassified_pct".to_string());
    }

    Ok(EvalReport {
        num_samples: audits.len(),
        z,
        threshold,
        net_tp: counts.tp,
        net_fp: counts.fp,
        net_fn: counts.fn_,
        micro_f1,
        base_micro_f1: Some(base_correct as f64 / audits.len() as f64),
        kept_ids,
        ignored_ids,
        misclassified_ignored,
        misclassified_pct: pct,
        undefined_metrics: undefined,
        samples: audits,
    })
}

/// Seed of the MC stream for one sample.
pub fn sample_seed(base_seed: u64, id: u64) -> u64 {
    mix_seed(base_seed, id)
}

pub(crate) fn sample_records(
    model: &QuantizedHead,
    data: &[LabeledSample],
    num_iter: usize,
    base_seed: u64,
) -> Result<Vec<SampleRecord>> {
    data.par_iter()
        .map(|s| {
            if s.true_class >= model.num_classes() {
                return Err(Error::validation(format!(
                    "sample {} class {} outside [0, {})",
                    s.id,
                    s.true_class,
                    model.num_classes()
                )));
            }
            let q = model.quantize_input(&s.features)?;
            let base = qhead_forward(model, &q, None)?;
            let samples = sample_rows(model, &q, num_iter, sample_seed(base_seed, s.id))?;
            Ok(SampleRecord {
                id: s.id,
                true_class: s.true_class,
                base_pred: argmax(base.data()).unwrap_or(0),
                samples,
            })
        })
        .collect()
}

/// MC sampling, intervals, filtering and metrics for a whole dataset.
pub fn run_uq_eval(model: &QuantizedHead, data: &[LabeledSample], cfg: &McConfig) -> Result<EvalReport> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::validation("evaluation set is empty"));
    }
    let records = sample_records(model, data, cfg.num_iter, cfg.base_seed)?;
    evaluate_records(&records, cfg.z()?, cfg.threshold)
}
