use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use npyz::{DType, TypeChar, WriterBuilder};

use crate::error::{Error, Result};

/// A numeric NPY array widened to `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct NpyArray {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
    /// Maximum representable value for unsigned 8/16-bit sources, `None` for floats and signed ints.
    pub integer_max: Option<f64>,
}

/// Reads a C-order NPY file of dtype f8, f4, u1, u2, i4 or i8.
pub fn read_npy(path: &Path) -> Result<NpyArray> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let npy = npyz::NpyFile::new(BufReader::new(file))
        .map_err(|e| Error::corrupt(path, e.to_string()))?;
    if npy.order() != npyz::Order::C {
        return Err(Error::unsupported(
            path,
            "Fortran-order arrays are not supported",
        ));
    }
    let shape = npy.shape().iter().map(|&d| d as usize).collect();
    let ty = match npy.dtype() {
        DType::Plain(ty) => ty,
        other => return Err(Error::unsupported(path, format!("dtype {}", other.descr()))),
    };
    let corrupt = |e: std::io::Error| Error::corrupt(path, e.to_string());
    let (data, integer_max) = match (ty.type_char(), ty.num_bytes()) {
        (TypeChar::Float, Some(8)) => (npy.into_vec::<f64>().map_err(corrupt)?, None),
        (TypeChar::Float, Some(4)) => (widen(npy.into_vec::<f32>().map_err(corrupt)?), None),
        (TypeChar::Uint, Some(1)) => (widen(npy.into_vec::<u8>().map_err(corrupt)?), Some(255.0)),
        (TypeChar::Uint, Some(2)) => (
            widen(npy.into_vec::<u16>().map_err(corrupt)?),
            Some(65535.0),
        ),
        (TypeChar::Int, Some(4)) => (widen(npy.into_vec::<i32>().map_err(corrupt)?), None),
        (TypeChar::Int, Some(8)) => {
            let v = npy.into_vec::<i64>().map_err(corrupt)?;
            (v.into_iter().map(|x| x as f64).collect(), None)
        }
        _ => return Err(Error::unsupported(path, format!("dtype '{ty}'"))),
    };
    Ok(NpyArray {
        shape,
        data,
        integer_max,
    })
}

fn widen<T: Into<f64>>(v: Vec<T>) -> Vec<f64> {
    v.into_iter().map(Into::into).collect()
}

fn write_npy<T: npyz::AutoSerialize + Copy>(
    path: &Path,
    shape: &[usize],
    data: &[T],
) -> Result<()> {
    let expected: usize = shape.iter().product();
    if expected != data.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} values for shape {shape:?}",
            data.len()
        )));
    }
    let io = |e: std::io::Error| Error::io(path, e);
    let file = File::create(path).map_err(io)?;
    let mut out = BufWriter::new(file);
    let shape: Vec<u64> = shape.iter().map(|&d| d as u64).collect();
    let mut writer = npyz::WriteOptions::new()
        .default_dtype()
        .shape(&shape)
        .writer(&mut out)
        .begin_nd()
        .map_err(io)?;
    writer.extend(data.iter().copied()).map_err(io)?;
    writer.finish().map_err(io)?;
    out.flush().map_err(io)
}

/// Writes little-endian float64 NPY v1.0 in C order.
pub fn write_npy_f64(path: &Path, shape: &[usize], data: &[f64]) -> Result<()> {
    write_npy(path, shape, data)
}

pub fn write_npy_i64(path: &Path, shape: &[usize], data: &[i64]) -> Result<()> {
    write_npy(path, shape, data)
}
