use super::{batchnorm_fold, check_ratio, Activation, BatchNorm, Dense, DropoutMask, Tensor};
use crate::error::{ensure_dim, Error, Result};

/// Reference hidden width of the classifier head.
pub const REFERENCE_HIDDEN: usize = 300;
/// Reference pooled feature width.
pub const REFERENCE_FEATURE_DIM: usize = 2048;
/// Reference number of output classes.
pub const REFERENCE_CLASSES: usize = 100;
pub const REFERENCE_DROPOUT1: f32 = 0.2;
pub const REFERENCE_DROPOUT2: f32 = 0.4;

/// BatchNorm → Dropout → Dense/ReLU → Dropout → Dense/sigmoid classifier head.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadModel {
    pub bn: BatchNorm,
    pub dropout1_p: f32,
    pub dense1: Dense,
    pub dropout2_p: f32,
    pub dense2: Dense,
}

/// One dropout mask per dropout layer of the head.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadMasks {
    pub input: DropoutMask,
    pub hidden: DropoutMask,
}

impl HeadMasks {
    pub fn sample<R: rand::Rng + ?Sized>(
        feature_dim: usize,
        hidden: usize,
        p1: f32,
        p2: f32,
        rng: &mut R,
    ) -> Result<Self> {
        Ok(Self {
            input: DropoutMask::sample(feature_dim, p1, rng)?,
            hidden: DropoutMask::sample(hidden, p2, rng)?,
        })
    }

    pub fn keep_all(feature_dim: usize, hidden: usize) -> Self {
        Self {
            input: DropoutMask::keep_all(feature_dim),
            hidden: DropoutMask::keep_all(hidden),
        }
    }
}

impl HeadModel {
    pub fn new(
        bn: BatchNorm,
        dropout1_p: f32,
        dense1: Dense,
        dropout2_p: f32,
        dense2: Dense,
    ) -> Result<Self> {
        let model = Self {
            bn,
            dropout1_p,
            dense1,
            dropout2_p,
            dense2,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        self.bn.validate()?;
        check_ratio(self.dropout1_p)?;
        check_ratio(self.dropout2_p)?;
        ensure_dim("dense1 inputs", self.bn.dim(), self.dense1.inputs())?;
        ensure_dim("dense2 inputs", self.dense1.outputs(), self.dense2.inputs())?;
        if self.dense1.activation != Activation::Relu || self.dense2.activation != Activation::Sigmoid {
            return Err(Error::validation(
                "head expects ReLU hidden layer and sigmoid output layer",
            ));
        }
        Ok(())
    }

    pub fn feature_dim(&self) -> usize {
        self.bn.dim()
    }

    pub fn hidden_dim(&self) -> usize {
        self.dense1.outputs()
    }

    pub fn num_classes(&self) -> usize {
        self.dense2.outputs()
    }

    /// Weight and bias count of both dense layers plus the four BN vectors.
    pub fn parameter_count(&self) -> usize {
        4 * self.feature_dim()
            + self.dense1.weights.len()
            + self.dense1.bias.len()
            + self.dense2.weights.len()
            + self.dense2.bias.len()
    }

    /// Same head with batch norm folded into `dense1` and replaced by identity.
    pub fn fold_batchnorm(&self) -> Result<HeadModel> {
        Ok(HeadModel {
            bn: BatchNorm::identity(self.feature_dim()),
            dropout1_p: self.dropout1_p,
            dense1: batchnorm_fold(&self.bn, &self.dense1)?,
            dropout2_p: self.dropout2_p,
            dense2: self.dense2.clone(),
        })
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
}

/// Full head forward pass. Without masks both dropout layers are identity.
pub fn head_forward(model: &HeadModel, features: &Tensor, masks: Option<&HeadMasks>) -> Result<Tensor> {
    ensure_dim("head features", model.feature_dim(), features.len())?;
    let mut x = model.bn.forward(features.data())?;
    if let Some(m) = masks {
        m.input.apply_in_place(&mut x)?;
    }
    let mut h = model.dense1.forward(&x)?;
    if let Some(m) = masks {
        m.hidden.apply_in_place(&mut h)?;
    }
    let y = model.dense2.forward(&h)?;
    Ok(Tensor::from_parts_unchecked(vec![y.len()], y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;

    fn zero_head(f: usize, h: usize, c: usize) -> HeadModel {
        HeadModel::new(
            BatchNorm::identity(f),
            0.2,
            Dense::new(Tensor::zeros(vec![f, h]), Tensor::zeros(vec![h]), Activation::Relu).unwrap(),
            0.4,
            Dense::new(Tensor::zeros(vec![h, c]), Tensor::zeros(vec![c]), Activation::Sigmoid).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn zero_head_outputs_half() {
        let m = zero_head(8, 4, 3);
        let y = head_forward(&m, &Tensor::vector(vec![1.0; 8]).unwrap(), None).unwrap();
        assert_eq!(y.data(), &[0.5; 3]);
    }

    #[test]
    fn masks_are_pure_and_p0_matches_eval() {
        let mut m = crate::harness::fixtures::random_head(&mut seeded_rng(5), 16, 8, 4);
        let x = Tensor::vector((0..16).map(|i| (i as f32 * 0.37).sin()).collect()).unwrap();
        let masks = m.sample_masks(&mut seeded_rng(9)).unwrap();
        let a = head_forward(&m, &x, Some(&masks)).unwrap();
        let b = head_forward(&m, &x, Some(&masks)).unwrap();
        assert_eq!(a, b);

        m.dropout1_p = 0.0;
        m.dropout2_p = 0.0;
        let p0 = m.sample_masks(&mut seeded_rng(9)).unwrap();
        assert_eq!(
            head_forward(&m, &x, Some(&p0)).unwrap(),
            head_forward(&m, &x, None).unwrap()
        );
    }

    #[test]
    fn wrong_feature_width_is_dimension_error() {
        let m = zero_head(8, 4, 3);
        assert!(matches!(
            head_forward(&m, &Tensor::vector(vec![0.0; 7]).unwrap(), None),
            Err(Error::Dimension { .. })
        ));
        let bad = HeadMasks::keep_all(7, 4);
        assert!(head_forward(&m, &Tensor::vector(vec![0.0; 8]).unwrap(), Some(&bad)).is_err());
    }

    #[test]
    fn inconsistent_shapes_rejected() {
        let r = HeadModel::new(
            BatchNorm::identity(8),
            0.2,
            Dense::new(Tensor::zeros(vec![8, 4]), Tensor::zeros(vec![4]), Activation::Relu).unwrap(),
            0.4,
            Dense::new(Tensor::zeros(vec![5, 3]), Tensor::zeros(vec![3]), Activation::Sigmoid).unwrap(),
        );
        assert!(r.is_err());
    }
}
