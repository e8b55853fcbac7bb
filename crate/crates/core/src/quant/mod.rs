//! Post-training uint8 affine quantization and the integer head.

mod calibrate;
mod model;
mod params;

pub use calibrate::{calibrate, CalibrationStats, Range};
pub use model::{
    build_lut, qhead_forward, quantize_model, ActivationParams, QuantDense, QuantizedHead, SIGMOID_OUTPUT_QP,
};
pub(crate) use params::quantize_scaled;
pub use params::{dequantize, quantize_tensor, QuantParams, QuantTensor};

use crate::harness::format::SerializedSize;

/// Exact size in bytes of `m` in its on-disk model format.
pub fn model_size_bytes<M: SerializedSize + ?Sized>(m: &M) -> usize {
    m.serialized_size()
}
