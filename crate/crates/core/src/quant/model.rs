use super::{quantize_scaled, CalibrationStats, QuantParams, QuantTensor};
use crate::error::{ensure_dim, Error, Result};
use crate::netcore::{check_ratio, sigmoid, DropoutMask, HeadMasks, HeadModel, Tensor};

/// Output parameters for sigmoid activations: `[0, 1)` in steps of 1/256.
pub const SIGMOID_OUTPUT_QP: QuantParams = QuantParams {
    scale: 1.0 / 256.0,
    zero_point: 0,
};

/// Activation quant params of the integer head, one per tensor boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActivationParams {
    pub input: QuantParams,
    pub hidden_pre: QuantParams,
    pub hidden: QuantParams,
    pub output_pre: QuantParams,
    pub output: QuantParams,
}

/// uint8 weights with int32 bias at `input_scale * weight_scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantDense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<u8>,
    pub weight_qp: QuantParams,
    pub bias: Vec<i32>,
}

impl QuantDense {
    fn quantize(w: &Tensor, b: &Tensor, input_scale: f32) -> Result<Self> {
        let (inputs, outputs) = w.dims2()?;
        let (lo, hi) = w.min_max().unwrap_or((0.0, 0.0));
        let weight_qp = QuantParams::from_range(lo, hi)?;
        let weights = w.data().iter().map(|&v| weight_qp.quantize(v)).collect();
        let bias_scale = input_scale as f64 * weight_qp.scale as f64;
        let bias = b
            .data()
            .iter()
            .map(|&v| (v as f64 / bias_scale).round().clamp(i32::MIN as f64, i32::MAX as f64) as i32)
            .collect();
        Ok(Self {
            inputs,
            outputs,
            weights,
            weight_qp,
            bias,
        })
    }

    pub fn bias_scale(&self, input_scale: f32) -> f64 {
        input_scale as f64 * self.weight_qp.scale as f64
    }

    pub fn dequantized_weight(&self, i: usize, j: usize) -> f32 {
        self.weight_qp.dequantize(self.weights[i * self.outputs + j])
    }

    /// `sum_{i kept} (x_i - zx)(w_ij - zw)` in int32.
    fn accumulate(&self, x: &[u8], x_zero: u8, keep: Option<&[bool]>) -> Vec<i32> {
        let zw = self.weight_qp.zero_point as i32;
        let mut acc = vec![0i32; self.outputs];
        for (i, &xi) in x.iter().enumerate() {
            if keep.is_some_and(|k| !k[i]) {
                continue;
            }
            let xc = xi as i32 - x_zero as i32;
            if xc == 0 {
                continue;
            }
            let row = &self.weights[i * self.outputs..(i + 1) * self.outputs];
            for (a, &w) in acc.iter_mut().zip(row) {
                *a += xc * (w as i32 - zw);
            }
        }
        acc
    }
}

/// Integer-domain classifier head with batch norm folded into the first layer.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedHead {
    pub dropout1_p: f32,
    pub dropout2_p: f32,
    pub act: ActivationParams,
    pub dense1: QuantDense,
    pub dense2: QuantDense,
    /// Indexed by `hidden_pre` code, yields a `hidden` code.
    pub relu_lut: Vec<u8>,
    /// Indexed by `output_pre` code, yields an `output` code.
    pub sigmoid_lut: Vec<u8>,
    /// Batch-norm shift expressed in input units, `shift[i] / scale[i]`.
    ///
    /// A dropped normalized unit removes `W'[i,j] * bn_input_shift[i]` from the
    /// folded bias; this vector restores that under dropout masks.
    pub bn_input_shift: Vec<f32>,
    /// `sum_i deq(W'[i,j]) * bn_input_shift[i]`.
    pub bn_bias_share: Vec<f32>,
}

/// Builds a 256-entry LUT `code -> quantize_out(f(dequantize_in(code)))`.
pub fn build_lut(input: QuantParams, output: QuantParams, f: impl Fn(f32) -> f32) -> Vec<u8> {
    (0..=255u8).map(|c| output.quantize(f(input.dequantize(c)))).collect()
}

pub fn quantize_model(model: &HeadModel, stats: &CalibrationStats) -> Result<QuantizedHead> {
    model.validate()?;
    for r in [stats.input, stats.hidden_pre, stats.output_pre] {
        if r.min > r.max {
            return Err(Error::validation("calibration range with min > max"));
        }
    }
    let (bn_scale, bn_shift) = model.bn.affine()?;
    let folded = model.fold_batchnorm()?;

    let input = QuantParams::from_range(stats.input.min, stats.input.max)?;
    let hidden_pre = QuantParams::from_range(stats.hidden_pre.min, stats.hidden_pre.max)?;
    let hidden = QuantParams::from_range(0.0, stats.hidden_pre.max.max(0.0))?;
    let output_pre = QuantParams::from_range(stats.output_pre.min, stats.output_pre.max)?;
    let act = ActivationParams {
        input,
        hidden_pre,
        hidden,
        output_pre,
        output: SIGMOID_OUTPUT_QP,
    };

    let dense1 = QuantDense::quantize(&folded.dense1.weights, &folded.dense1.bias, input.scale)?;
    let dense2 = QuantDense::quantize(&folded.dense2.weights, &folded.dense2.bias, hidden.scale)?;

    let bn_input_shift: Vec<f32> = bn_scale
        .iter()
        .zip(&bn_shift)
        .map(|(&a, &c)| if a != 0.0 { c / a } else { 0.0 })
        .collect();
    let mut share = vec![0.0f64; dense1.outputs];
    for (i, &d) in bn_input_shift.iter().enumerate() {
        for (j, s) in share.iter_mut().enumerate() {
            *s += dense1.dequantized_weight(i, j) as f64 * d as f64;
        }
    }

    Ok(QuantizedHead {
        dropout1_p: model.dropout1_p,
        dropout2_p: model.dropout2_p,
        relu_lut: build_lut(hidden_pre, hidden, |v| v.max(0.0)),
        sigmoid_lut: build_lut(output_pre, SIGMOID_OUTPUT_QP, sigmoid),
        act,
        dense1,
        dense2,
        bn_input_shift,
        bn_bias_share: share.into_iter().map(|v| v as f32).collect(),
    })
}

fn mask_is_identity(mask: &DropoutMask) -> bool {
    mask.scale() == 1.0 && mask.dropped_count() == 0
}

impl QuantizedHead {
    pub fn feature_dim(&self) -> usize {
        self.dense1.inputs
    }

    pub fn hidden_dim(&self) -> usize {
        self.dense1.outputs
    }

    pub fn num_classes(&self) -> usize {
        self.dense2.outputs
    }

    pub fn parameter_count(&self) -> usize {
        self.dense1.weights.len() + self.dense1.bias.len() + self.dense2.weights.len() + self.dense2.bias.len()
    }

    pub fn validate(&self) -> Result<()> {
        check_ratio(self.dropout1_p)?;
        check_ratio(self.dropout2_p)?;
        let (f, h, c) = (self.feature_dim(), self.hidden_dim(), self.num_classes());
        ensure_dim("dense2 inputs", h, self.dense2.inputs)?;
        ensure_dim("dense1 weights", f * h, self.dense1.weights.len())?;
        ensure_dim("dense1 bias", h, self.dense1.bias.len())?;
        ensure_dim("dense2 weights", h * c, self.dense2.weights.len())?;
        ensure_dim("dense2 bias", c, self.dense2.bias.len())?;
        ensure_dim("relu lut", 256, self.relu_lut.len())?;
        ensure_dim("sigmoid lut", 256, self.sigmoid_lut.len())?;
        ensure_dim("bn input shift", f, self.bn_input_shift.len())?;
        ensure_dim("bn bias share", h, self.bn_bias_share.len())?;
        if self.sigmoid_lut.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::validation("sigmoid lut is not monotone"));
        }
        Ok(())
    }

    pub fn quantize_input(&self, features: &Tensor) -> Result<QuantTensor> {
        ensure_dim("quantized head features", self.feature_dim(), features.len())?;
        Ok(super::quantize_tensor(features, self.act.input))
    }

    pub fn sample_masks<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Result<HeadMasks> {
        HeadMasks::sample(
            self.feature_dim(),
            self.hidden_dim(),
            self.dropout1_p,
            self.dropout2_p,
            rng,
        )
    }

    fn dense1_codes(&self, x: &[u8], mask: Option<&DropoutMask>) -> Vec<u8> {
        let d = &self.dense1;
        let out_qp = self.act.hidden_pre;
        let in_zp = self.act.input.zero_point;
        let bias_scale = d.bias_scale(self.act.input.scale);
        match mask.filter(|m| !mask_is_identity(m)) {
            None => {
                let acc = d.accumulate(x, in_zp, None);
                let mult = bias_scale / out_qp.scale as f64;
                acc.iter()
                    .zip(&d.bias)
                    .map(|(&a, &b)| quantize_scaled((a as i64 + b as i64) as f64 * mult, out_qp.zero_point))
                    .collect()
            }
            Some(m) => {
                let keep = m.keep();
                let s = m.scale() as f64;
                let acc = d.accumulate(x, in_zp, Some(keep));
                // Normalized units that were dropped no longer contribute
                // their batch-norm shift through the folded bias.
                let mut dropped_share = vec![0.0f64; d.outputs];
                for (i, &k) in keep.iter().enumerate() {
                    let shift = self.bn_input_shift[i];
                    if k || shift == 0.0 {
                        continue;
                    }
                    for (j, ds) in dropped_share.iter_mut().enumerate() {
                        *ds += d.dequantized_weight(i, j) as f64 * shift as f64;
                    }
                }
                (0..d.outputs)
                    .map(|j| {
                        let share = self.bn_bias_share[j] as f64;
                        let real = s * acc[j] as f64 * bias_scale + d.bias[j] as f64 * bias_scale - share
                            + s * (share - dropped_share[j]);
                        quantize_scaled(real / out_qp.scale as f64, out_qp.zero_point)
                    })
                    .collect()
            }
        }
    }

    fn dense2_codes(&self, h: &[u8], mask: Option<&DropoutMask>) -> Vec<u8> {
        let d = &self.dense2;
        let out_qp = self.act.output_pre;
        let bias_scale = d.bias_scale(self.act.hidden.scale);
        let (keep, s) = match mask.filter(|m| !mask_is_identity(m)) {
            None => (None, 1.0),
            Some(m) => (Some(m.keep()), m.scale() as f64),
        };
        let acc = d.accumulate(h, self.act.hidden.zero_point, keep);
        acc.iter()
            .zip(&d.bias)
            .map(|(&a, &b)| {
                let real = (s * a as f64 + b as f64) * bias_scale;
                quantize_scaled(real / out_qp.scale as f64, out_qp.zero_point)
            })
            .collect()
    }

    /// Output codes under `act.output`, before dequantization.
    pub fn forward_codes(&self, q_features: &QuantTensor, masks: Option<&HeadMasks>) -> Result<Vec<u8>> {
        if q_features.qp() != self.act.input {
            return Err(Error::validation(
                "feature quant params differ from the model input params",
            ));
        }
        ensure_dim("quantized head features", self.feature_dim(), q_features.len())?;
        if let Some(m) = masks {
            ensure_dim("input dropout mask", self.feature_dim(), m.input.width())?;
            ensure_dim("hidden dropout mask", self.hidden_dim(), m.hidden.width())?;
        }
        let pre1 = self.dense1_codes(q_features.data(), masks.map(|m| &m.input));
        let hidden: Vec<u8> = pre1.iter().map(|&c| self.relu_lut[c as usize]).collect();
        let pre2 = self.dense2_codes(&hidden, masks.map(|m| &m.hidden));
        Ok(pre2.iter().map(|&c| self.sigmoid_lut[c as usize]).collect())
    }
}

/// Integer forward pass returning dequantized sigmoid scores in `[0, 1]`.
pub fn qhead_forward(qm: &QuantizedHead, q_features: &QuantTensor, masks: Option<&HeadMasks>) -> Result<Tensor> {
    let codes = qm.forward_codes(q_features, masks)?;
    let out = codes.iter().map(|&c| qm.act.output.dequantize(c)).collect::<Vec<_>>();
    Ok(Tensor::from_parts_unchecked(vec![out.len()], out))
}
