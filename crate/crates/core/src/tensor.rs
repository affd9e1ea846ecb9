//! Dense N-dimensional arrays and the raw `KFT1` tensor file format.
//!
//! Tensors are stored column-major: axis 0 varies fastest. This is the `vec`
//! ordering used throughout the crate, so `vec(W)` is simply `W.data()`.
//!
//! The file format is a 32-byte header followed by row-major little-endian
//! `f64` values:
//!
//! | bytes  | content                                   |
//! |--------|-------------------------------------------|
//! | 0..4   | magic `KFT1`                              |
//! | 4..8   | dtype code, `u32` LE (1 = f64)            |
//! | 8..12  | number of axes D, `u32` LE (1..=5)        |
//! | 12..32 | five `u32` LE extents, unused ones zero   |
//!
//! Readers accept trailing `f64` values after the payload and hand them back
//! separately; fitted weight files use this to carry per-channel biases.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DMatrixView, DMatrixViewMut};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"KFT1";
pub const DTYPE_F64: u32 = 1;
pub const HEADER_LEN: usize = 32;
pub const MAX_AXES: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(shape: &[usize]) -> Self {
        let len = shape.iter().product();
        Self {
            shape: shape.to_vec(),
            data: vec![0.0; len],
        }
    }

    /// Wraps column-major data.
    pub fn from_vec(shape: &[usize], data: Vec<f64>) -> Result<Self> {
        let len: usize = shape.iter().product();
        if len != data.len() {
            return Err(Error::ShapeMismatch(format!(
                "shape {shape:?} needs {len} values, got {}",
                data.len()
            )));
        }
        Ok(Self {
            shape: shape.to_vec(),
            data,
        })
    }

    /// Builds a tensor from row-major (last axis fastest) data.
    pub fn from_row_major(shape: &[usize], data: &[f64]) -> Result<Self> {
        let mut t = Self::zeros(shape);
        if data.len() != t.len() {
            return Err(Error::ShapeMismatch(format!(
                "shape {shape:?} needs {} values, got {}",
                t.len(),
                data.len()
            )));
        }
        let rm = row_major_strides(shape);
        for (flat, v) in t.data.iter_mut().enumerate() {
            *v = data[remap(flat, shape, &rm)];
        }
        Ok(t)
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        let rm = row_major_strides(&self.shape);
        let mut out = vec![0.0; self.len()];
        for (flat, v) in self.data.iter().enumerate() {
            out[remap(flat, &self.shape, &rm)] = *v;
        }
        out
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Column-major flat offset of a multi-index.
    pub fn offset(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.shape.len());
        let mut off = 0;
        let mut stride = 1;
        for (i, n) in index.iter().zip(&self.shape) {
            debug_assert!(i < n);
            off += i * stride;
            stride *= n;
        }
        off
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.data[self.offset(index)]
    }

    pub fn set(&mut self, index: &[usize], value: f64) {
        let off = self.offset(index);
        self.data[off] = value;
    }

    /// Mode product `self ×_axis m`: contracts `axis` (extent K) against the
    /// columns of the J×K matrix `m`, giving extent J on that axis.
    pub fn mode_product(&self, axis: usize, m: &DMatrix<f64>) -> Result<Tensor> {
        if axis >= self.ndim() {
            return Err(Error::ShapeMismatch(format!(
                "axis {axis} out of range for a {}-axis tensor",
                self.ndim()
            )));
        }
        let k = self.shape[axis];
        if m.ncols() != k {
            return Err(Error::ShapeMismatch(format!(
                "mode-{axis} product needs a matrix with {k} columns, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let j = m.nrows();
        let pre: usize = self.shape[..axis].iter().product();
        let post: usize = self.shape[axis + 1..].iter().product();
        let mut shape = self.shape.clone();
        shape[axis] = j;
        let mut out = Tensor::zeros(&shape);
        if out.is_empty() || self.is_empty() {
            return Ok(out);
        }

        if pre == 1 {
            // The tensor is a K×post matrix; one product does it.
            let src = DMatrixView::from_slice(&self.data, k, post);
            let mut dst = DMatrixViewMut::from_slice(&mut out.data, j, post);
            dst.gemm(1.0, m, &src, 0.0);
            return Ok(out);
        }

        let mt = m.transpose();
        for p in 0..post {
            let src = DMatrixView::from_slice(&self.data[p * pre * k..(p + 1) * pre * k], pre, k);
            let mut dst = DMatrixViewMut::from_slice(&mut out.data[p * pre * j..(p + 1) * pre * j], pre, j);
            dst.gemm(1.0, &src, &mt, 0.0);
        }
        Ok(out)
    }

    pub fn max_abs_diff(&self, other: &Tensor) -> f64 {
        assert_eq!(self.shape, other.shape);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn row_major_strides(shape: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; shape.len()];
    for a in (0..shape.len().saturating_sub(1)).rev() {
        strides[a] = strides[a + 1] * shape[a + 1];
    }
    strides
}

/// Maps a column-major flat offset to the row-major offset of the same element.
fn remap(mut flat: usize, shape: &[usize], rm_strides: &[usize]) -> usize {
    let mut out = 0;
    for (n, s) in shape.iter().zip(rm_strides) {
        out += (flat % n) * s;
        flat /= n;
    }
    out
}

/// Serializes a tensor (plus optional trailing values) in the `KFT1` format.
pub fn write_tensor<W: Write>(mut w: W, t: &Tensor, trailer: &[f64]) -> Result<()> {
    if t.ndim() == 0 || t.ndim() > MAX_AXES {
        return Err(Error::TensorFormat(format!(
            "tensor files hold 1..={MAX_AXES} axes, got {}",
            t.ndim()
        )));
    }
    let mut header = [0u8; HEADER_LEN];
    header[0..4].copy_from_slice(MAGIC);
    header[4..8].copy_from_slice(&DTYPE_F64.to_le_bytes());
    header[8..12].copy_from_slice(&(t.ndim() as u32).to_le_bytes());
    for (a, &n) in t.shape().iter().enumerate() {
        let n = u32::try_from(n).map_err(|_| Error::TensorFormat(format!("extent {n} does not fit in u32")))?;
        header[12 + 4 * a..16 + 4 * a].copy_from_slice(&n.to_le_bytes());
    }
    w.write_all(&header)?;
    let mut buf = Vec::with_capacity(8 * (t.len() + trailer.len()));
    for v in t.to_row_major().iter().chain(trailer) {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Parses a `KFT1` stream, returning the tensor and any trailing values.
pub fn read_tensor<R: Read>(mut r: R) -> Result<(Tensor, Vec<f64>)> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() < HEADER_LEN {
        return Err(Error::TensorFormat("file shorter than header".into()));
    }
    if &bytes[0..4] != MAGIC {
        return Err(Error::TensorFormat("bad magic".into()));
    }
    let word = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let dtype = word(4);
    if dtype != DTYPE_F64 {
        return Err(Error::TensorFormat(format!("unsupported dtype code {dtype}")));
    }
    let ndim = word(8) as usize;
    if ndim == 0 || ndim > MAX_AXES {
        return Err(Error::TensorFormat(format!("bad axis count {ndim}")));
    }
    let shape: Vec<usize> = (0..ndim).map(|a| word(12 + 4 * a) as usize).collect();
    let payload = &bytes[HEADER_LEN..];
    if payload.len() % 8 != 0 {
        return Err(Error::TensorFormat("payload is not a whole number of f64".into()));
    }
    let values: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let len: usize = shape.iter().product();
    if values.len() < len {
        return Err(Error::TensorFormat(format!(
            "shape {shape:?} needs {len} values, file has {}",
            values.len()
        )));
    }
    let t = Tensor::from_row_major(&shape, &values[..len])?;
    Ok((t, values[len..].to_vec()))
}

pub fn save_tensor(path: impl AsRef<Path>, t: &Tensor, trailer: &[f64]) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_tensor(std::io::BufWriter::new(f), t, trailer)
}

pub fn load_tensor(path: impl AsRef<Path>) -> Result<(Tensor, Vec<f64>)> {
    let f = std::fs::File::open(path)?;
    read_tensor(std::io::BufReader::new(f))
}
