//! Shared setup for the criterion benches.

use uqf_core::harness::fixtures::{random_calibrated_head, random_features};
use uqf_core::netcore::{HeadModel, Tensor, REFERENCE_CLASSES, REFERENCE_FEATURE_DIM, REFERENCE_HIDDEN};
use uqf_core::quant::{calibrate, quantize_model, QuantTensor, QuantizedHead};
use uqf_core::rng::seeded_rng;

/// Reference-size float head, its quantized form, and one in-range input.
pub struct Setup {
    pub model: HeadModel,
    pub qmodel: QuantizedHead,
    pub features: Tensor,
    pub qfeatures: QuantTensor,
}

pub fn reference_setup(seed: u64) -> Setup {
    let mut rng = seeded_rng(seed);
    let (model, calib) =
        random_calibrated_head(&mut rng, REFERENCE_FEATURE_DIM, REFERENCE_HIDDEN, REFERENCE_CLASSES, 64);
    let qmodel = quantize_model(&model, &calibrate(&model, &calib).unwrap()).unwrap();
    let features = random_features(&mut rng, &calib, 1).remove(0);
    let qfeatures = qmodel.quantize_input(&features).unwrap();
    Setup {
        model,
        qmodel,
        features,
        qfeatures,
    }
}
