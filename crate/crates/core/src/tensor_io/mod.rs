//! File formats: NPY for lossless interchange, PNG for input images and
//! visual channel grids, CSV for flattened maps, IDX for MNIST-style datasets,
//! and the JSON run configuration.

mod config;
mod csv_out;
mod idx;
mod npy;
mod png_io;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{FeatureMap, ImageTensor};

pub use config::{load_run_config, parse_run_config, RunConfig, CONFIG_SCHEMA};
pub use csv_out::write_feature_map_csv;
pub use idx::{read_idx_images, read_idx_labels, IdxImages};
pub use npy::{read_npy, write_npy_f64, write_npy_i64, NpyArray};
pub use png_io::{grid_layout, read_png, write_png_grid, ChannelScale, CONSTANT_RANGE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    #[default]
    Npy,
    #[serde(alias = "png-grid")]
    Png,
    Csv,
}

impl std::str::FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "npy" => Ok(ExportFormat::Npy),
            "png" | "png-grid" => Ok(ExportFormat::Png),
            "csv" => Ok(ExportFormat::Csv),
            other => Err(Error::InvalidArgument(format!(
                "unknown export format `{other}`"
            ))),
        }
    }
}

/// Loads a PNG or NPY image into `[0, 1]`.
///
/// Integer data is divided by its type maximum. Float NPY data must already lie
/// in `[0, 1]` unless `normalize` is set, in which case it is min-max scaled.
pub fn load_image(path: impl AsRef<Path>, normalize: bool) -> Result<ImageTensor> {
    let path = path.as_ref();
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("png") => read_png(path),
        Some("npy") => {
            let arr = read_npy(path)?;
            let (h, w, c) = match arr.shape[..] {
                [h, w] => (h, w, 1),
                [h, w, c] => (h, w, c),
                _ => {
                    return Err(Error::unsupported(
                        path,
                        format!("expected shape (H, W) or (H, W, C), got {:?}", arr.shape),
                    ))
                }
            };
            image_from_array(path, arr, h, w, c, normalize)
        }
        _ => Err(Error::unsupported(path, "expected a .png or .npy file")),
    }
}

pub(crate) fn image_from_array(
    path: &Path,
    arr: NpyArray,
    h: usize,
    w: usize,
    c: usize,
    normalize: bool,
) -> Result<ImageTensor> {
    if let Some(max) = arr.integer_max {
        let data = arr.data.into_iter().map(|v| v / max).collect();
        return ImageTensor::new(h, w, c, data);
    }
    if arr.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::corrupt(path, "non-finite value in image data"));
    }
    if normalize {
        ImageTensor::normalized(h, w, c, arr.data)
    } else {
        ImageTensor::new(h, w, c, arr.data)
    }
}

/// Writes a feature map. PNG output also writes a `<path>.scale.txt` sidecar.
pub fn save_feature_map(
    map: &FeatureMap,
    path: impl AsRef<Path>,
    format: ExportFormat,
) -> Result<()> {
    let path = path.as_ref();
    match format {
        ExportFormat::Npy => write_npy_f64(path, &map.shape(), map.data()),
        ExportFormat::Png => write_png_grid(map, path).map(|_| ()),
        ExportFormat::Csv => write_feature_map_csv(map, path),
    }
}

/// Reads a float64 NPY of shape `(H', W', C')` as a feature map.
pub fn load_feature_map(path: impl AsRef<Path>) -> Result<FeatureMap> {
    let path = path.as_ref();
    let arr = read_npy(path)?;
    match arr.shape[..] {
        [h, w, c] => {
            FeatureMap::new(h, w, c, arr.data).map_err(|e| Error::corrupt(path, e.to_string()))
        }
        _ => Err(Error::unsupported(
            path,
            format!("expected 3-D array, got {:?}", arr.shape),
        )),
    }
}

/// Writes an image as float64 NPY `(H, W, C)`.
pub fn save_image_npy(image: &ImageTensor, path: impl AsRef<Path>) -> Result<()> {
    write_npy_f64(path.as_ref(), &image.shape(), image.data())
}
