use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use png::{BitDepth, ColorType, Transformations};

use crate::error::{Error, Result};
use crate::tensor::{FeatureMap, ImageTensor};

/// Reads an 8- or 16-bit grayscale or RGB PNG, scaling samples into `[0, 1]`.
pub fn read_png(path: &Path) -> Result<ImageTensor> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut decoder = png::Decoder::new(BufReader::new(file));
    decoder.set_transformations(Transformations::IDENTITY);
    let corrupt = |e: png::DecodingError| Error::corrupt(path, e.to_string());
    let mut reader = decoder.read_info().map_err(corrupt)?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::corrupt(path, "image too large"))?;
    let mut buf = vec![0; size];
    let info = reader.next_frame(&mut buf).map_err(corrupt)?;
    let channels = match info.color_type {
        ColorType::Grayscale => 1,
        ColorType::Rgb => 3,
        other => return Err(Error::unsupported(path, format!("color type {other:?}"))),
    };
    let (h, w) = (info.height as usize, info.width as usize);
    let row_samples = w * channels;
    let mut data = Vec::with_capacity(h * row_samples);
    for row in buf.chunks(info.line_size).take(h) {
        match info.bit_depth {
            BitDepth::Eight => {
                data.extend(row[..row_samples].iter().map(|&b| f64::from(b) / 255.0))
            }
            BitDepth::Sixteen => data.extend(
                row[..2 * row_samples]
                    .chunks_exact(2)
                    .map(|b| f64::from(u16::from_be_bytes([b[0], b[1]])) / 65535.0),
            ),
            other => return Err(Error::unsupported(path, format!("bit depth {other:?}"))),
        }
    }
    ImageTensor::new(h, w, channels, data)
}

/// `(rows, cols)` of the tile grid for `channels` tiles: `ceil(sqrt(C))` columns.
pub fn grid_layout(channels: usize) -> (usize, usize) {
    let mut cols = (channels as f64).sqrt().ceil() as usize;
    while cols * cols < channels {
        cols += 1;
    }
    let cols = cols.max(1);
    (channels.div_ceil(cols), cols)
}

/// Channels whose value range is at most this wide are treated as constant;
/// simulator rounding alone leaves ranges around 1e-16.
pub const CONSTANT_RANGE: f64 = 1e-9;

/// Per-channel scaling used in a PNG grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelScale {
    pub channel: usize,
    pub min: f64,
    pub max: f64,
}

impl ChannelScale {
    pub fn is_constant(&self) -> bool {
        self.max - self.min <= CONSTANT_RANGE
    }

    fn to_byte(&self, v: f64) -> u8 {
        if self.is_constant() {
            128
        } else {
            (((v - self.min) / (self.max - self.min)) * 255.0)
                .round()
                .clamp(0.0, 255.0) as u8
        }
    }
}

pub(crate) fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".scale.txt");
    PathBuf::from(s)
}

/// Tiles every channel into one 8-bit grayscale PNG, each min-max scaled on
/// its own. Constant channels are drawn mid-gray. The scales are written to
/// `<path>.scale.txt`, one `channel min max [constant]` line per channel.
pub fn write_png_grid(map: &FeatureMap, path: &Path) -> Result<Vec<ChannelScale>> {
    let [h, w, c] = map.shape();
    let (rows, cols) = grid_layout(c);
    let (gh, gw) = (rows * h, cols * w);
    let mut pixels = vec![0u8; gh * gw];
    let mut scales = Vec::with_capacity(c);
    for ch in 0..c {
        let values = map.channel(ch);
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let scale = ChannelScale {
            channel: ch,
            min,
            max,
        };
        let (tr, tc) = (ch / cols, ch % cols);
        for y in 0..h {
            for x in 0..w {
                pixels[(tr * h + y) * gw + tc * w + x] = scale.to_byte(values[y * w + x]);
            }
        }
        scales.push(scale);
    }

    let io = |e: std::io::Error| Error::io(path, e);
    let enc_err = |e: png::EncodingError| Error::io(path, std::io::Error::other(e.to_string()));
    let file = File::create(path).map_err(io)?;
    let mut encoder = png::Encoder::new(BufWriter::new(file), gw as u32, gh as u32);
    encoder.set_color(ColorType::Grayscale);
    encoder.set_depth(BitDepth::Eight);
    let mut writer = encoder.write_header().map_err(enc_err)?;
    writer.write_image_data(&pixels).map_err(enc_err)?;
    writer.finish().map_err(enc_err)?;

    let side = sidecar_path(path);
    let mut text = format!("# {h}x{w}x{c} feature map, grid {rows}x{cols}\n# channel min max\n");
    for s in &scales {
        text.push_str(&format!("{} {:?} {:?}", s.channel, s.min, s.max));
        if s.is_constant() {
            text.push_str(" constant (zero dynamic range)");
        }
        text.push('\n');
    }
    let mut f = File::create(&side).map_err(|e| Error::io(&side, e))?;
    f.write_all(text.as_bytes())
        .map_err(|e| Error::io(&side, e))?;
    Ok(scales)
}
