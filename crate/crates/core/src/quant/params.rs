use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netcore::Tensor;

pub const QMIN: i32 = 0;
pub const QMAX: i32 = 255;

/// Per-tensor affine uint8 mapping `r = scale * (q - zero_point)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantParams {
    pub scale: f32,
    pub zero_point: u8,
}

impl QuantParams {
    pub fn new(scale: f32, zero_point: i32) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::validation(format!("quant scale {scale} must be positive")));
        }
        if !(QMIN..=QMAX).contains(&zero_point) {
            return Err(Error::validation(format!(
                "zero point {zero_point} outside [{QMIN}, {QMAX}]"
            )));
        }
        Ok(Self {
            scale,
            zero_point: zero_point as u8,
        })
    }

    /// Parameters covering `[min, max]` with 0.0 exactly representable.
    ///
    /// A degenerate range is widened by 0.5 on each side before zero is
    /// folded in.
    pub fn from_range(min: f32, max: f32) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) || min > max {
            return Err(Error::validation(format!("invalid range [{min}, {max}]")));
        }
        let (mut lo, mut hi) = (min as f64, max as f64);
        if lo == hi {
            lo -= 0.5;
            hi += 0.5;
        }
        lo = lo.min(0.0);
        hi = hi.max(0.0);
        let scale = ((hi - lo) / (QMAX - QMIN) as f64) as f32;
        let zp = (QMIN as f64 - lo / scale as f64).round() as i32;
        Self::new(scale, zp.clamp(QMIN, QMAX))
    }

    pub fn quantize(&self, x: f32) -> u8 {
        quantize_scaled(x as f64 / self.scale as f64, self.zero_point)
    }

    pub fn dequantize(&self, q: u8) -> f32 {
        (self.scale as f64 * (q as i32 - self.zero_point as i32) as f64) as f32
    }

    /// Smallest and largest representable reals.
    pub fn representable_range(&self) -> (f32, f32) {
        (self.dequantize(0), self.dequantize(255))
    }
}

/// `clamp(round(v) + zp)` with ties rounded away from zero.
#[inline]
pub(crate) fn quantize_scaled(v: f64, zero_point: u8) -> u8 {
    let q = v.round() + zero_point as f64;
    q.clamp(QMIN as f64, QMAX as f64) as u8
}

/// uint8 tensor with its affine parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantTensor {
    shape: Vec<usize>,
    data: Vec<u8>,
    qp: QuantParams,
}

impl QuantTensor {
    pub fn new(shape: Vec<usize>, data: Vec<u8>, qp: QuantParams) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(Error::dim("quant tensor construction", expected, data.len()));
        }
        Ok(Self { shape, data, qp })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn qp(&self) -> QuantParams {
        self.qp
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

pub fn quantize_tensor(x: &Tensor, qp: QuantParams) -> QuantTensor {
    QuantTensor {
        shape: x.shape().to_vec(),
        data: x.data().iter().map(|&v| qp.quantize(v)).collect(),
        qp,
    }
}

pub fn dequantize(q: &QuantTensor) -> Tensor {
    Tensor::from_parts_unchecked(
        q.shape.clone(),
        q.data.iter().map(|&c| q.qp.dequantize(c)).collect(),
    )
}
