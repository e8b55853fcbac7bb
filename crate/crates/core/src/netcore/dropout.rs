use super::Tensor;
use crate::error::{ensure_dim, Error, Result};

pub(crate) fn check_ratio(p: f32) -> Result<()> {
    if (0.0..1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::validation(format!(
            "dropout ratio {p} outside [0, 1)"
        )))
    }
}

/// Unit-level inverted-dropout mask for one activation vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DropoutMask {
    keep: Vec<bool>,
    p: f32,
    scale: f32,
}

impl DropoutMask {
    /// Draws each unit independently: dropped with probability `p`.
    pub fn sample<R: rand::Rng + ?Sized>(width: usize, p: f32, rng: &mut R) -> Result<Self> {
        check_ratio(p)?;
        let keep = if p == 0.0 {
            vec![true; width]
        } else {
            (0..width).map(|_| rng.random::<f32>() >= p).collect()
        };
        Ok(Self {
            keep,
            p,
            scale: 1.0 / (1.0 - p),
        })
    }

    /// Mask that keeps every unit; equivalent to evaluation mode.
    pub fn keep_all(width: usize) -> Self {
        Self {
            keep: vec![true; width],
            p: 0.0,
            scale: 1.0,
        }
    }

    pub fn from_keep(keep: Vec<bool>, p: f32) -> Result<Self> {
        check_ratio(p)?;
        Ok(Self {
            keep,
            p,
            scale: 1.0 / (1.0 - p),
        })
    }

    pub fn keep(&self) -> &[bool] {
        &self.keep
    }

    pub fn p(&self) -> f32 {
        self.p
    }

    pub fn scale(&self) -> f32 {
        self.scale
    }

    pub fn width(&self) -> usize {
        self.keep.len()
    }

    pub fn dropped_count(&self) -> usize {
        self.keep.iter().filter(|k| !**k).count()
    }

    pub fn apply_in_place(&self, x: &mut [f32]) -> Result<()> {
        ensure_dim("dropout mask", self.width(), x.len())?;
        if self.p == 0.0 {
            return Ok(());
        }
        for (v, &k) in x.iter_mut().zip(&self.keep) {
            *v = if k { *v * self.scale } else { 0.0 };
        }
        Ok(())
    }
}

/// Inverted dropout: each element zeroed with probability `p`, survivors
/// scaled by `1/(1-p)`.
pub fn apply_dropout<R: rand::Rng + ?Sized>(x: &Tensor, p: f32, rng: &mut R) -> Result<Tensor> {
    let mask = DropoutMask::sample(x.len(), p, rng)?;
    let mut data = x.data().to_vec();
    mask.apply_in_place(&mut data)?;
    Ok(Tensor::from_parts_unchecked(x.shape().to_vec(), data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;

    #[test]
    fn zero_ratio_is_noop() {
        let x = Tensor::vector(vec![1.5, -2.0, 3.25]).unwrap();
        let y = apply_dropout(&x, 0.0, &mut seeded_rng(3)).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn same_seed_same_mask() {
        let x = Tensor::vector((0..64).map(|v| v as f32).collect()).unwrap();
        let a = apply_dropout(&x, 0.5, &mut seeded_rng(11)).unwrap();
        let b = apply_dropout(&x, 0.5, &mut seeded_rng(11)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_ratios_rejected() {
        let x = Tensor::vector(vec![1.0]).unwrap();
        assert!(apply_dropout(&x, 1.0, &mut seeded_rng(0)).is_err());
        assert!(apply_dropout(&x, -0.1, &mut seeded_rng(0)).is_err());
    }

    #[test]
    fn empirical_drop_rate_and_mean() {
        let n = 100_000;
        let x = Tensor::vector((0..n).map(|i| 1.0 + (i % 7) as f32).collect()).unwrap();
        let y = apply_dropout(&x, 0.4, &mut seeded_rng(2024)).unwrap();
        let dropped = y.data().iter().filter(|v| **v == 0.0).count() as f64 / n as f64;
        assert!((dropped - 0.4).abs() <= 0.01, "drop fraction {dropped}");
        let mean_x: f64 = x.data().iter().map(|&v| v as f64).sum::<f64>() / n as f64;
        let mean_y: f64 = y.data().iter().map(|&v| v as f64).sum::<f64>() / n as f64;
        assert!((mean_y - mean_x).abs() / mean_x <= 0.01, "{mean_y} vs {mean_x}");
    }

    #[test]
    fn per_element_mean_is_unbiased() {
        // 10^4 masks; each element's sample mean within 3 standard errors of x.
        let x = Tensor::vector(vec![0.5, -1.25, 2.0, 3.5]).unwrap();
        let p = 0.3f32;
        let trials = 10_000;
        let mut rng = seeded_rng(99);
        let mut sums = vec![0.0f64; x.len()];
        for _ in 0..trials {
            let y = apply_dropout(&x, p, &mut rng).unwrap();
            for (s, &v) in sums.iter_mut().zip(y.data()) {
                *s += v as f64;
            }
        }
        for (s, &xi) in sums.iter().zip(x.data()) {
            let mean = s / trials as f64;
            // Var of inverted dropout output: x^2 * p / (1 - p)
            let sd = (xi as f64).abs() * ((p / (1.0 - p)) as f64).sqrt();
            let se = sd / (trials as f64).sqrt();
            assert!((mean - xi as f64).abs() <= 3.0 * se, "{mean} vs {xi}");
        }
    }
}
