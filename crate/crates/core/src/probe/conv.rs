use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::dataset::{extract_dataset, FeatureDataset, FeatureExtractor, LabeledImages};
use crate::error::{Error, Result};
use crate::quanv::QuanvConfig;
use crate::tensor::Tensor3;

/// Frozen random convolution used as the classical comparator.
///
/// Same per-channel rule as quanvolution: every input channel is convolved with
/// each of the `F` kernels, giving `C * F` output channels. No bias, activation
/// or pooling.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalConvBaseline {
    pub kernel_size: usize,
    pub stride: usize,
    pub out_channels: usize,
    /// `F x K x K`, row-major per kernel.
    pub weights: Vec<f64>,
}

impl ClassicalConvBaseline {
    pub fn new(
        kernel_size: usize,
        stride: usize,
        out_channels: usize,
        weights: Vec<f64>,
    ) -> Result<Self> {
        if kernel_size == 0 || stride == 0 || out_channels == 0 {
            return Err(Error::InvalidArgument(
                "kernel size, stride and channel count must be positive".into(),
            ));
        }
        if weights.len() != out_channels * kernel_size * kernel_size {
            return Err(Error::ShapeMismatch(format!(
                "{} weights for {out_channels} kernels of size {kernel_size}",
                weights.len()
            )));
        }
        Ok(ClassicalConvBaseline {
            kernel_size,
            stride,
            out_channels,
            weights,
        })
    }

    /// Weights drawn from a unit normal with a ChaCha8 stream seeded by `seed`.
    pub fn seeded(kernel_size: usize, stride: usize, out_channels: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights = (0..out_channels * kernel_size * kernel_size)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        ClassicalConvBaseline {
            kernel_size,
            stride,
            out_channels,
            weights,
        }
    }

    /// Same geometry as a quanvolution layer.
    pub fn matching(config: &QuanvConfig, seed: u64) -> Self {
        Self::seeded(config.kernel_size, config.stride, config.out_channels, seed)
    }

    /// Valid-padding cross-correlation.
    pub fn extract(&self, image: &Tensor3) -> Result<Tensor3> {
        let (k, s, f) = (self.kernel_size, self.stride, self.out_channels);
        let (h, w, c) = (image.height(), image.width(), image.channels());
        if h < k || w < k {
            return Err(Error::ImageSmallerThanKernel {
                height: h,
                width: w,
                kernel: k,
            });
        }
        let (oh, ow) = ((h - k) / s + 1, (w - k) / s + 1);
        let mut out = vec![0.0; oh * ow * c * f];
        let mut patch = vec![0.0; k * k];
        for m in 0..oh {
            for n in 0..ow {
                for ch in 0..c {
                    for i in 0..k {
                        for j in 0..k {
                            patch[i * k + j] = image.get(m * s + i, n * s + j, ch);
                        }
                    }
                    let base = ((m * ow + n) * c + ch) * f;
                    for (o, kernel) in self.weights.chunks_exact(k * k).enumerate() {
                        out[base + o] = kernel.iter().zip(&patch).map(|(a, b)| a * b).sum();
                    }
                }
            }
        }
        Tensor3::new(oh, ow, c * f, out)
    }
}

pub fn classical_conv_extract(
    set: &LabeledImages,
    baseline: &ClassicalConvBaseline,
) -> Result<FeatureDataset> {
    extract_dataset(
        set,
        FeatureExtractor::ClassicalConv(std::slice::from_ref(baseline)),
    )
}
