use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::FeatureMap;

/// Writes `H',W',C'` as the header row followed by one value per row in
/// row-major (height, width, channel) order.
pub fn write_feature_map_csv(map: &FeatureMap, path: &Path) -> Result<()> {
    let to_err = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::io(path, std::io::Error::other(format!("{other:?}"))),
    };
    let mut w = csv::WriterBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(to_err)?;
    let [h, wd, c] = map.shape();
    w.write_record([h.to_string(), wd.to_string(), c.to_string()])
        .map_err(to_err)?;
    for v in map.data() {
        w.write_record([format!("{v:?}")]).map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
