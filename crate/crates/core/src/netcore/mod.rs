//! Float tensor math and the classifier-head forward pass.

mod dropout;
mod head;
mod layers;
mod tensor;

pub(crate) use dropout::check_ratio;
pub use dropout::{apply_dropout, DropoutMask};
pub use head::{
    head_forward, HeadMasks, HeadModel, REFERENCE_CLASSES, REFERENCE_DROPOUT1, REFERENCE_DROPOUT2,
    REFERENCE_FEATURE_DIM, REFERENCE_HIDDEN,
};
pub use layers::{batchnorm_fold, dense_forward, sigmoid, Activation, BatchNorm, Dense};
pub use tensor::Tensor;
