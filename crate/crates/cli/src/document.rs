//! JSON documents written by the CLI. Field order is fixed by declaration
//! order, so identical inputs give byte-identical output.

use serde::{Deserialize, Serialize};
use uqf_core::eval::{EvalReport, GridResult};
use uqf_core::harness::{BenchReport, RunConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub id: u64,
    pub true_class: usize,
    pub predicted_class: usize,
    pub score: f32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantizeSummary {
    pub feature_dim: usize,
    pub hidden_dim: usize,
    pub num_classes: usize,
    pub calib_samples: usize,
    pub float_model_bytes: usize,
    pub quant_model_bytes: usize,
    pub size_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Document {
    Quantize(QuantizeSummary),
    Infer {
        num_samples: usize,
        micro_f1: Option<f64>,
        predictions: Vec<Prediction>,
    },
    UqRun {
        config: RunConfig,
        report: EvalReport,
    },
    UqGrid {
        grid: GridResult,
    },
    Bench {
        report: BenchReport,
    },
}

fn fmt_opt(v: Option<f64>, scale: f64) -> String {
    v.map(|x| format!("{:.2}", x * scale)).unwrap_or_else(|| "undefined".into())
}

/// Fixed-width table of the grid: F1 (%) then ignored counts.
pub fn grid_table(g: &GridResult) -> String {
    let mut out = String::new();
    let header: String = g.num_iters.iter().map(|n| format!("{:>14}", format!("num_iter={n}"))).collect();
    out.push_str(&format!("{:<16}{header}\n", "F1 (%)"));
    for (ci, c) in g.conf_factors.iter().enumerate() {
        let cells: String = g.f1[ci].iter().map(|v| format!("{:>14}", fmt_opt(*v, 100.0))).collect();
        out.push_str(&format!("{:<16}{cells}\n", format!("conf={c}")));
    }
    out.push_str(&format!("{:<16}{header}\n", "# ignored"));
    for (ci, c) in g.conf_factors.iter().enumerate() {
        let cells: String = g.ignored[ci].iter().map(|v| format!("{v:>14}")).collect();
        out.push_str(&format!("{:<16}{cells}\n", format!("conf={c}")));
    }
    out
}

/// Human-readable rendering used by `uqf report`.
pub fn render(doc: &Document) -> String {
    match doc {
        Document::Quantize(s) => format!(
            "quantized head {}x{}x{}\n  float model: {} bytes\n  quant model: {} bytes\n  ratio: {:.4}\n",
            s.feature_dim, s.hidden_dim, s.num_classes, s.float_model_bytes, s.quant_model_bytes, s.size_ratio
        ),
        Document::Infer {
            num_samples,
            micro_f1,
            ..
        } => format!(
            "base inference over {num_samples} samples\n  micro-F1 (%): {}\n",
            fmt_opt(*micro_f1, 100.0)
        ),
        Document::UqRun { config, report } => {
            let mut s = format!(
                "UQ run: conf_factor={} num_iter={} threshold={} seed={}\n",
                config.conf_factor, config.num_iter, config.threshold, config.base_seed
            );
            s.push_str(&format!("  samples:            {}\n", report.num_samples));
            s.push_str(&format!("  kept / ignored:     {} / {}\n", report.kept_ids.len(), report.ignored_ids.len()));
            s.push_str(&format!("  net TP/FP/FN:       {} / {} / {}\n", report.net_tp, report.net_fp, report.net_fn));
            s.push_str(&format!("  micro-F1 with UQ:   {}\n", fmt_opt(report.micro_f1, 100.0)));
            s.push_str(&format!("  micro-F1 base:      {}\n", fmt_opt(report.base_micro_f1, 100.0)));
            s.push_str(&format!(
                "  misclassified (%):  {} ({} of {} ignored)\n",
                fmt_opt(report.misclassified_pct, 1.0),
                report.misclassified_ignored,
                report.ignored_ids.len()
            ));
            let bod = report.samples.iter().filter(|a| a.benefit_of_doubt).count();
            let mixed = report.samples.iter().filter(|a| a.mixed).count();
            s.push_str(&format!("  benefit of doubt:   {bod}\n  mixed verdicts:     {mixed}\n"));
            s
        }
        Document::UqGrid { grid } => grid_table(grid),
        Document::Bench { report } => format!(
            "bench over {} samples, num_iter={}, {} repetitions\n  single pass: {:.4} ms\n  full UQ:     {:.4} ms\n  ratio:       {:.2}\n",
            report.num_samples,
            report.num_iter,
            report.repetitions,
            report.single_pass_ms_median,
            report.uq_ms_median,
            report.ratio
        ),
    }
}
