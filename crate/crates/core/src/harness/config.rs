use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::netcore::check_ratio;
use crate::quant::QuantizedHead;
use crate::uq::{McConfig, DEFAULT_CONF_FACTOR, DEFAULT_NUM_ITER, DEFAULT_THRESHOLD};

/// Environment variable consulted when no seed flag is given.
pub const SEED_ENV: &str = "UQF_SEED";

/// User-facing UQ run settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub conf_factor: f64,
    pub num_iter: usize,
    pub threshold: f64,
    pub base_seed: u64,
    pub dropout1_override: Option<f32>,
    pub dropout2_override: Option<f32>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            conf_factor: DEFAULT_CONF_FACTOR,
            num_iter: DEFAULT_NUM_ITER,
            threshold: DEFAULT_THRESHOLD,
            base_seed: 0,
            dropout1_override: None,
            dropout2_override: None,
        }
    }
}

impl RunConfig {
    pub fn mc_config(&self) -> McConfig {
        McConfig {
            num_iter: self.num_iter,
            conf_factor: self.conf_factor,
            threshold: self.threshold,
            base_seed: self.base_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.mc_config().validate()?;
        if let Some(p) = self.dropout1_override {
            check_ratio(p)?;
        }
        if let Some(p) = self.dropout2_override {
            check_ratio(p)?;
        }
        Ok(())
    }

    /// Model with any dropout overrides applied.
    pub fn apply(&self, model: &QuantizedHead) -> QuantizedHead {
        let mut m = model.clone();
        if let Some(p) = self.dropout1_override {
            m.dropout1_p = p;
        }
        if let Some(p) = self.dropout2_override {
            m.dropout2_p = p;
        }
        m
    }
}
