use std::path::Path;

use nalgebra::DMatrix;

use super::conv::ClassicalConvBaseline;
use crate::error::{Error, Result};
use crate::quanv::LayerStack;
use crate::tensor::ImageTensor;
use crate::tensor_io::{image_from_array, read_idx_images, read_idx_labels, read_npy, NpyArray};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Quanv,
    ClassicalConv,
    RawPixels,
}

/// Flattened features, one row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureDataset {
    pub features: DMatrix<f64>,
    pub labels: Vec<u32>,
    pub provenance: Provenance,
}

impl FeatureDataset {
    pub fn new(features: DMatrix<f64>, labels: Vec<u32>, provenance: Provenance) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} feature rows but {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::DegenerateData(
                "features contain NaN or infinity".into(),
            ));
        }
        Ok(FeatureDataset {
            features,
            labels,
            provenance,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    /// Sorted distinct labels.
    pub fn classes(&self) -> Vec<u32> {
        let mut c = self.labels.clone();
        c.sort_unstable();
        c.dedup();
        c
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledImages {
    pub images: Vec<ImageTensor>,
    pub labels: Vec<u32>,
}

impl LabeledImages {
    pub fn new(images: Vec<ImageTensor>, labels: Vec<u32>) -> Result<Self> {
        if images.len() != labels.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} images but {} labels",
                images.len(),
                labels.len()
            )));
        }
        if let Some(first) = images.first() {
            if let Some(bad) = images.iter().find(|i| i.shape() != first.shape()) {
                return Err(Error::ShapeMismatch(format!(
                    "image shapes differ: {:?} vs {:?}",
                    first.shape(),
                    bad.shape()
                )));
            }
        }
        Ok(LabeledImages { images, labels })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// First `n` samples.
    pub fn take(&self, n: usize) -> LabeledImages {
        LabeledImages {
            images: self.images[..n.min(self.len())].to_vec(),
            labels: self.labels[..n.min(self.len())].to_vec(),
        }
    }
}

/// How images become feature vectors.
#[derive(Debug, Clone, Copy)]
pub enum FeatureExtractor<'a> {
    RawPixels,
    Quanv {
        stack: &'a LayerStack,
        workers: usize,
    },
    /// Layers applied in sequence, with no rescaling in between.
    ClassicalConv(&'a [ClassicalConvBaseline]),
}

impl FeatureExtractor<'_> {
    pub fn provenance(&self) -> Provenance {
        match self {
            FeatureExtractor::RawPixels => Provenance::RawPixels,
            FeatureExtractor::Quanv { .. } => Provenance::Quanv,
            FeatureExtractor::ClassicalConv(_) => Provenance::ClassicalConv,
        }
    }

    fn features(&self, image: &ImageTensor) -> Result<Vec<f64>> {
        match self {
            FeatureExtractor::RawPixels => Ok(image.data().to_vec()),
            FeatureExtractor::Quanv { stack, workers } => {
                Ok(stack.run(image, *workers)?.tensor().clone().into_data())
            }
            FeatureExtractor::ClassicalConv(layers) => {
                let mut map = image.tensor().clone();
                for layer in *layers {
                    map = layer.extract(&map)?;
                }
                Ok(map.into_data())
            }
        }
    }
}

/// Stacks flattened feature maps (row-major `H' x W' x C'`) into an `N x D` matrix.
pub fn extract_dataset(
    set: &LabeledImages,
    extractor: FeatureExtractor<'_>,
) -> Result<FeatureDataset> {
    let mut rows = Vec::with_capacity(set.len());
    for image in &set.images {
        rows.push(extractor.features(image)?);
    }
    let dim = rows.first().map_or(0, Vec::len);
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    let features = DMatrix::from_row_slice(set.len(), dim, &flat);
    FeatureDataset::new(features, set.labels.clone(), extractor.provenance())
}

fn idx_split(dir: &Path, image_file: &str, label_file: &str) -> Result<LabeledImages> {
    let imgs = read_idx_images(&dir.join(image_file))?;
    let labels = read_idx_labels(&dir.join(label_file))?;
    if labels.len() != imgs.count {
        return Err(Error::corrupt(
            dir.join(label_file),
            "image and label counts differ",
        ));
    }
    let images = (0..imgs.count)
        .map(|i| {
            let data = imgs
                .image(i)
                .iter()
                .map(|&b| f64::from(b) / 255.0)
                .collect();
            ImageTensor::new(imgs.rows, imgs.cols, 1, data)
        })
        .collect::<Result<_>>()?;
    LabeledImages::new(images, labels.into_iter().map(u32::from).collect())
}

fn npy_split(dir: &Path, prefix: &str) -> Result<LabeledImages> {
    let img_path = dir.join(format!("{prefix}_images.npy"));
    let arr = read_npy(&img_path)?;
    let (n, h, w, c) = match arr.shape[..] {
        [n, h, w] => (n, h, w, 1),
        [n, h, w, c] => (n, h, w, c),
        _ => {
            return Err(Error::unsupported(
                &img_path,
                format!("expected (N, H, W[, C]), got {:?}", arr.shape),
            ))
        }
    };
    let per = h * w * c;
    let images = (0..n)
        .map(|i| {
            let part = NpyArray {
                shape: vec![h, w, c],
                data: arr.data[i * per..(i + 1) * per].to_vec(),
                integer_max: arr.integer_max,
            };
            image_from_array(&img_path, part, h, w, c, false)
        })
        .collect::<Result<_>>()?;
    let label_path = dir.join(format!("{prefix}_labels.npy"));
    let labels = read_npy(&label_path)?;
    if labels.data.iter().any(|&v| v < 0.0 || v.fract() != 0.0) {
        return Err(Error::corrupt(
            &label_path,
            "labels must be non-negative integers",
        ));
    }
    LabeledImages::new(images, labels.data.into_iter().map(|v| v as u32).collect())
}

/// Loads `(train, test)` from a directory holding either the four MNIST IDX
/// files (`train-images-idx3-ubyte`, `train-labels-idx1-ubyte`,
/// `t10k-images-idx3-ubyte`, `t10k-labels-idx1-ubyte`) or
/// `{train,test}_{images,labels}.npy`.
pub fn load_dataset_dir(dir: impl AsRef<Path>) -> Result<(LabeledImages, LabeledImages)> {
    let dir = dir.as_ref();
    if !dir.is_dir() {
        return Err(Error::io(
            dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "dataset directory not found"),
        ));
    }
    if dir.join("train-images-idx3-ubyte").exists() {
        Ok((
            idx_split(dir, "train-images-idx3-ubyte", "train-labels-idx1-ubyte")?,
            idx_split(dir, "t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte")?,
        ))
    } else if dir.join("train_images.npy").exists() {
        Ok((npy_split(dir, "train")?, npy_split(dir, "test")?))
    } else {
        Err(Error::unsupported(dir, "no IDX or NPY dataset files found"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quanv::QuanvConfig;
    use crate::synth::uniform_noise;
    use crate::tensor_io::{write_npy_f64, write_npy_i64};

    fn images(n: usize, size: usize) -> LabeledImages {
        LabeledImages::new(
            (0..n)
                .map(|i| uniform_noise(size, size, 1, i as u64))
                .collect(),
            (0..n as u32).map(|i| i % 2).collect(),
        )
        .unwrap()
    }

    #[test]
    fn quanv_shape_arithmetic() {
        let set = images(10, 28);
        let stack =
            LayerStack::new(&[QuanvConfig::new(2).with_stride(2).with_out_channels(4)]).unwrap();
        let ds = extract_dataset(
            &set,
            FeatureExtractor::Quanv {
                stack: &stack,
                workers: 1,
            },
        )
        .unwrap();
        assert_eq!((ds.len(), ds.dim()), (10, 14 * 14 * 4));
        assert_eq!(ds.provenance, Provenance::Quanv);

        let conv = ClassicalConvBaseline::matching(&stack.layers()[0].config().clone(), 3);
        let cds = extract_dataset(
            &set,
            FeatureExtractor::ClassicalConv(std::slice::from_ref(&conv)),
        )
        .unwrap();
        assert_eq!(cds.dim(), ds.dim());

        let raw = extract_dataset(&set, FeatureExtractor::RawPixels).unwrap();
        assert_eq!(raw.dim(), 28 * 28);
        assert_eq!(
            raw.features.row(3).iter().copied().collect::<Vec<_>>(),
            set.images[3].data()
        );
    }

    #[test]
    fn mixed_shapes_rejected() {
        let imgs = vec![uniform_noise(4, 4, 1, 0), uniform_noise(5, 4, 1, 0)];
        assert!(matches!(
            LabeledImages::new(imgs, vec![0, 1]),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn npy_directory_layout() {
        let dir = tempfile::tempdir().unwrap();
        for prefix in ["train", "test"] {
            write_npy_f64(
                &dir.path().join(format!("{prefix}_images.npy")),
                &[2, 2, 2],
                &[0.0, 0.5, 1.0, 0.25, 0.1, 0.2, 0.3, 0.4],
            )
            .unwrap();
            write_npy_i64(
                &dir.path().join(format!("{prefix}_labels.npy")),
                &[2],
                &[3, 7],
            )
            .unwrap();
        }
        let (train, test) = load_dataset_dir(dir.path()).unwrap();
        assert_eq!(train.len(), 2);
        assert_eq!(test.labels, vec![3, 7]);
        assert_eq!(train.images[1].data(), &[0.1, 0.2, 0.3, 0.4]);
        assert!(load_dataset_dir(dir.path().join("missing"))
            .unwrap_err()
            .is_io());
    }
}
