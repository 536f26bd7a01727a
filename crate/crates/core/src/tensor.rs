//! Height x width x channel tensors stored row-major with channels innermost.

use std::ops::Deref;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 || channels == 0 {
            return Err(Error::ShapeMismatch(format!(
                "tensor dimensions must be positive, got {height}x{width}x{channels}"
            )));
        }
        if data.len() != height * width * channels {
            return Err(Error::ShapeMismatch(format!(
                "{} values for shape {height}x{width}x{channels}",
                data.len()
            )));
        }
        Ok(Tensor3 {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.height, self.width, self.channels]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, channel: usize) -> f64 {
        self.data[(row * self.width + col) * self.channels + channel]
    }

    /// Values of one channel in row-major order.
    pub fn channel(&self, channel: usize) -> Vec<f64> {
        self.data
            .iter()
            .skip(channel)
            .step_by(self.channels)
            .copied()
            .collect()
    }

    fn check_range(&self, lo: f64, hi: f64) -> Result<()> {
        match self
            .data
            .iter()
            .find(|v| !v.is_finite() || **v < lo || **v > hi)
        {
            Some(&value) => Err(Error::ValueOutOfRange { value, lo, hi }),
            None => Ok(()),
        }
    }
}

/// Input image with every value in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageTensor(Tensor3);

impl ImageTensor {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        let t = Tensor3::new(height, width, channels, data)?;
        t.check_range(0.0, 1.0)?;
        Ok(ImageTensor(t))
    }

    /// Min-max rescales arbitrary finite data into `[0, 1]`. A constant image maps to zeros.
    pub fn normalized(
        height: usize,
        width: usize,
        channels: usize,
        mut data: Vec<f64>,
    ) -> Result<Self> {
        if let Some(&bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::ValueOutOfRange {
                value: bad,
                lo: f64::MIN,
                hi: f64::MAX,
            });
        }
        let lo = data.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let span = hi - lo;
        for v in &mut data {
            *v = if span > 0.0 {
                ((*v - lo) / span).clamp(0.0, 1.0)
            } else {
                0.0
            };
        }
        Self::new(height, width, channels, data)
    }

    pub fn tensor(&self) -> &Tensor3 {
        &self.0
    }
}

impl Deref for ImageTensor {
    type Target = Tensor3;

    fn deref(&self) -> &Tensor3 {
        &self.0
    }
}

/// Quanvolution output: Z-expectations in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap(Tensor3);

impl FeatureMap {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        let t = Tensor3::new(height, width, channels, data)?;
        t.check_range(-1.0, 1.0)?;
        Ok(FeatureMap(t))
    }

    pub fn tensor(&self) -> &Tensor3 {
        &self.0
    }

    /// Affine map `v -> (v + 1) / 2` into `[0, 1]`, used between stacked layers.
    pub fn rescaled_to_unit(&self) -> ImageTensor {
        let data = self
            .0
            .data
            .iter()
            .map(|v| ((v + 1.0) / 2.0).clamp(0.0, 1.0))
            .collect();
        ImageTensor(Tensor3 {
            data,
            ..self.0.clone_shape()
        })
    }
}

impl Tensor3 {
    fn clone_shape(&self) -> Tensor3 {
        Tensor3 {
            height: self.height,
            width: self.width,
            channels: self.channels,
            data: Vec::new(),
        }
    }
}

impl Deref for FeatureMap {
    type Target = Tensor3;

    fn deref(&self) -> &Tensor3 {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_is_hwc() {
        let t = Tensor3::new(2, 3, 2, (0..12).map(f64::from).collect()).unwrap();
        assert_eq!(t.get(1, 2, 1), 11.0);
        assert_eq!(t.get(0, 1, 0), 2.0);
        assert_eq!(t.channel(1), vec![1.0, 3.0, 5.0, 7.0, 9.0, 11.0]);
    }

    #[test]
    fn image_range_enforced() {
        assert!(ImageTensor::new(1, 2, 1, vec![0.0, 1.0]).is_ok());
        assert!(matches!(
            ImageTensor::new(1, 2, 1, vec![0.0, 1.2]),
            Err(Error::ValueOutOfRange { .. })
        ));
        assert!(ImageTensor::new(1, 1, 1, vec![f64::NAN]).is_err());
        assert!(ImageTensor::new(0, 1, 1, vec![]).is_err());
    }

    #[test]
    fn normalization() {
        let img = ImageTensor::normalized(1, 3, 1, vec![-2.0, 0.0, 2.0]).unwrap();
        assert_eq!(img.data(), &[0.0, 0.5, 1.0]);
        let flat = ImageTensor::normalized(1, 2, 1, vec![3.0, 3.0]).unwrap();
        assert_eq!(flat.data(), &[0.0, 0.0]);
    }

    #[test]
    fn rescale_between_layers() {
        let fm = FeatureMap::new(1, 3, 1, vec![-1.0, 0.0, 1.0]).unwrap();
        assert_eq!(fm.rescaled_to_unit().data(), &[0.0, 0.5, 1.0]);
    }
}
