use std::path::Path;

use crate::error::{Error, Result};

/// Unsigned-byte images from an IDX3 file.
#[derive(Debug, Clone)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

impl IdxImages {
    pub fn image(&self, i: usize) -> &[u8] {
        let n = self.rows * self.cols;
        &self.pixels[i * n..(i + 1) * n]
    }
}

fn read_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_be_bytes(bytes[at..at + 4].try_into().unwrap())
}

fn read_header(path: &Path, magic: u32, dims: usize) -> Result<(Vec<u8>, Vec<usize>)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let header_len = 4 + 4 * dims;
    if bytes.len() < header_len {
        return Err(Error::corrupt(path, "truncated IDX header"));
    }
    let found = read_u32(&bytes, 0);
    if found != magic {
        return Err(Error::unsupported(
            path,
            format!("IDX magic {found:#010x}, expected {magic:#010x}"),
        ));
    }
    let sizes: Vec<usize> = (0..dims)
        .map(|d| read_u32(&bytes, 4 + 4 * d) as usize)
        .collect();
    let payload = sizes.iter().product::<usize>();
    if bytes.len() != header_len + payload {
        return Err(Error::corrupt(
            path,
            format!(
                "expected {payload} payload bytes, found {}",
                bytes.len() - header_len
            ),
        ));
    }
    Ok((bytes[header_len..].to_vec(), sizes))
}

pub fn read_idx_images(path: &Path) -> Result<IdxImages> {
    let (pixels, sizes) = read_header(path, 0x0000_0803, 3)?;
    Ok(IdxImages {
        count: sizes[0],
        rows: sizes[1],
        cols: sizes[2],
        pixels,
    })
}

pub fn read_idx_labels(path: &Path) -> Result<Vec<u8>> {
    read_header(path, 0x0000_0801, 1).map(|(labels, _)| labels)
}
