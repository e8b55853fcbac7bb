use serde::{Deserialize, Serialize};

use crate::error::{ensure_dim, Error, Result};
use crate::netcore::{HeadModel, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f32,
    pub max: f32,
}

impl Range {
    fn of(values: &[f32]) -> Option<Self> {
        let mut it = values.iter().copied();
        let first = it.next()?;
        let (min, max) = it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v)));
        Some(Self { min, max })
    }

    fn merge(self, other: Range) -> Range {
        Range {
            min: self.min.min(other.min),
            max: self.max.max(other.max),
        }
    }
}

/// Observed extrema of the tensors that receive activation quant params.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationStats {
    pub input: Range,
    /// dense1 output before ReLU.
    pub hidden_pre: Range,
    /// dense2 output before sigmoid.
    pub output_pre: Range,
}

/// Exact min/max of the tracked tensors over `calib`, dropout disabled.
pub fn calibrate(model: &HeadModel, calib: &[Tensor]) -> Result<CalibrationStats> {
    if calib.is_empty() {
        return Err(Error::validation("calibration set is empty"));
    }
    model.validate()?;
    let mut stats: Option<CalibrationStats> = None;
    for x in calib {
        ensure_dim("calibration features", model.feature_dim(), x.len())?;
        let bn = model.bn.forward(x.data())?;
        let pre1 = model.dense1.linear(&bn)?;
        let h: Vec<f32> = pre1.iter().map(|v| v.max(0.0)).collect();
        let pre2 = model.dense2.linear(&h)?;
        let s = CalibrationStats {
            input: Range::of(x.data()).ok_or_else(|| Error::validation("empty feature vector"))?,
            hidden_pre: Range::of(&pre1).ok_or_else(|| Error::validation("empty hidden layer"))?,
            output_pre: Range::of(&pre2).ok_or_else(|| Error::validation("empty output layer"))?,
        };
        stats = Some(match stats {
            None => s,
            Some(acc) => CalibrationStats {
                input: acc.input.merge(s.input),
                hidden_pre: acc.hidden_pre.merge(s.hidden_pre),
                output_pre: acc.output_pre.merge(s.output_pre),
            },
        });
    }
    Ok(stats.expect("non-empty calibration set"))
}
