//! Quantized classifier-head inference with Monte-Carlo-dropout uncertainty.
//!
//! The pipeline: a float head ([`netcore::HeadModel`]) is calibrated and
//! quantized to uint8 ([`quant::QuantizedHead`]); each input is run through
//! several dropout-masked integer passes ([`uq::mc_sample`]); per-class
//! intervals `mean ± z·std` are compared against a threshold to produce
//! ternary verdicts ([`decide`]); uncertain predictions are ignored and the
//! rest are scored ([`eval`]).

pub mod decide;
mod error;
pub mod eval;
pub mod harness;
pub mod netcore;
mod normal;
pub mod quant;
pub mod rng;
pub mod uq;

pub use error::{Error, Result};
pub use normal::inverse_normal_cdf;

pub use decide::{filter_prediction, ternary_assign, FilterOutcome, IgnoreReason, TernaryVerdict, Verdict};
pub use eval::{base_predict, grid_search, micro_f1, run_uq_eval, EvalReport, GridResult, LabeledSample};
pub use netcore::{head_forward, HeadModel, Tensor};
pub use quant::{calibrate, model_size_bytes, qhead_forward, quantize_model, QuantParams, QuantizedHead};
pub use uq::{interval_per_class, mc_sample, z_value, ClassInterval, McConfig, PredictionSamples};
